//! Characteristic polynomials of tree matrices and exact real-root counting.
//!
//! This module is deliberately independent of [`crate::diag`]: it reaches
//! eigenvalue counts through `det(xI - M)` and Sturm chains, so agreement
//! between the two is a meaningful check.
//!
//! Polynomials are stored lowest degree first. Heavy lifting happens in
//! [`IntPoly`]; a matrix with rational entries is first scaled by an integer
//! `c` so that `cM` has integer diagonal and integer squared weights, giving
//! `P(y) = det(yI - cM) ∈ Z[y]` and `det(xI - M) = c^{-n} P(cx)`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{Rational, Scalar};
use crate::diag::WeightedTreeMatrix;
use crate::error::PolyError;

/// Dense integer polynomial, lowest degree first, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntPoly(Vec<BigInt>);

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IntPoly(coeffs)
    }

    pub fn zero() -> Self {
        IntPoly(Vec::new())
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::new(vec![c.into()])
    }

    /// `x - r`.
    pub fn linear_root(r: impl Into<BigInt>) -> Self {
        Self::new(vec![-r.into(), BigInt::one()])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.0.last()
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() || other.is_zero() {
            return IntPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }

    pub fn add(&self, other: &IntPoly) -> IntPoly {
        let len = self.0.len().max(other.0.len());
        let out = (0..len)
            .map(|i| {
                let a = self.0.get(i).cloned().unwrap_or_default();
                a + other.0.get(i).cloned().unwrap_or_default()
            })
            .collect();
        IntPoly::new(out)
    }

    pub fn sub(&self, other: &IntPoly) -> IntPoly {
        self.add(&other.scale(&BigInt::from(-1)))
    }

    pub fn scale(&self, k: &BigInt) -> IntPoly {
        IntPoly::new(self.0.iter().map(|c| c * k).collect())
    }

    pub fn derivative(&self) -> IntPoly {
        IntPoly::new(self.0.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect())
    }

    pub fn content(&self) -> BigInt {
        self.0.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Divides out the content, keeping the sign of every coefficient.
    pub fn primitive_part(&self) -> IntPoly {
        let g = self.content();
        if g.is_zero() || g.is_one() {
            return self.clone();
        }
        IntPoly(self.0.iter().map(|c| c / &g).collect())
    }

    /// Primitive part normalised to a positive leading coefficient.
    pub fn normalized(&self) -> IntPoly {
        let p = self.primitive_part();
        match p.leading() {
            Some(l) if l.is_negative() => p.scale(&BigInt::from(-1)),
            _ => p,
        }
    }

    /// A positive multiple of the remainder of `self` modulo `b`.
    pub fn sign_preserving_rem(&self, b: &IntPoly) -> IntPoly {
        assert!(!b.is_zero(), "division by the zero polynomial");
        let lb = b.leading().expect("nonzero").clone();
        let abs_lb = lb.abs();
        let sign_lb = if lb.is_negative() { BigInt::from(-1) } else { BigInt::one() };
        let db = b.degree();
        let mut r = self.clone();
        while !r.is_zero() && r.degree() >= db {
            let shift = r.degree() - db;
            let lr = r.leading().expect("nonzero").clone();
            let mut next: Vec<BigInt> = r.0.iter().map(|c| c * &abs_lb).collect();
            let f = &lr * &sign_lb;
            for (i, c) in b.0.iter().enumerate() {
                next[i + shift] -= &f * c;
            }
            r = IntPoly::new(next).primitive_part();
        }
        r
    }

    /// Greatest common divisor, normalised.
    pub fn gcd(&self, other: &IntPoly) -> IntPoly {
        let (mut a, mut b) = (self.normalized(), other.normalized());
        while !b.is_zero() {
            let r = a.sign_preserving_rem(&b);
            a = b;
            b = r.normalized();
        }
        a
    }

    /// Exact quotient by `b`, or `None` when `b` does not divide `self` in Z[x].
    pub fn exact_div(&self, b: &IntPoly) -> Option<IntPoly> {
        assert!(!b.is_zero(), "division by the zero polynomial");
        if self.is_zero() {
            return Some(IntPoly::zero());
        }
        if self.degree() < b.degree() {
            return None;
        }
        let lb = b.leading().expect("nonzero");
        let db = b.degree();
        let mut r = self.0.clone();
        let mut q = vec![BigInt::zero(); self.degree() - db + 1];
        for shift in (0..q.len()).rev() {
            let lead = &r[shift + db];
            if lead.is_zero() {
                continue;
            }
            let (coef, rem) = lead.div_rem(lb);
            if !rem.is_zero() {
                return None;
            }
            for (i, c) in b.0.iter().enumerate() {
                r[shift + i] -= &coef * c;
            }
            q[shift] = coef;
        }
        if r.iter().all(Zero::is_zero) {
            Some(IntPoly::new(q))
        } else {
            None
        }
    }

    /// Exact quotient by `s x - r`, or `None` when it is not a factor.
    pub fn div_linear(&self, r: &BigInt, s: &BigInt) -> Option<IntPoly> {
        self.exact_div(&IntPoly::new(vec![-r.clone(), s.clone()]))
    }

    /// Sign of the value at `x`.
    pub fn sign_at(&self, x: &Rational) -> Ordering {
        if self.is_zero() {
            return Ordering::Equal;
        }
        // d^deg * p(n/d) by homogeneous Horner; d > 0 keeps the sign.
        let (n, d) = (x.numer(), x.denom());
        let deg = self.degree();
        let mut acc = self.0[deg].clone();
        let mut dpow = BigInt::one();
        for i in (0..deg).rev() {
            dpow *= d;
            acc = acc * n + &self.0[i] * &dpow;
        }
        match acc.sign() {
            Sign::Minus => Ordering::Less,
            Sign::NoSign => Ordering::Equal,
            Sign::Plus => Ordering::Greater,
        }
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.0.iter().rev() {
            acc = &acc * x + Rational::from_int(c.clone());
        }
        acc
    }

    /// `(root multiplicity, quotient)` for the integer root `r`.
    pub fn deflate_integer_root(&self, r: &BigInt) -> (usize, IntPoly) {
        let one = BigInt::one();
        let mut p = self.clone();
        let mut m = 0;
        if p.is_zero() {
            return (0, p);
        }
        while let Some(q) = p.div_linear(r, &one) {
            p = q;
            m += 1;
        }
        (m, p)
    }

    /// Square-free decomposition: `self = c · Π_i f_i^i` with the returned
    /// `(i, f_i)` of positive degree, each `f_i` square-free and pairwise coprime.
    pub fn square_free_decomposition(&self) -> Vec<(usize, IntPoly)> {
        let f = self.normalized();
        if f.degree() == 0 {
            return Vec::new();
        }
        let df = f.derivative();
        let b = f.gcd(&df);
        let mut c = f.exact_div(&b).expect("gcd divides");
        let mut d = df.exact_div(&b).expect("gcd divides").sub(&c.derivative());
        let mut out = Vec::new();
        let mut i = 1;
        while c.degree() > 0 {
            let a = c.gcd(&d);
            if a.degree() > 0 {
                out.push((i, a.clone()));
            }
            c = c.exact_div(&a).expect("gcd divides");
            d = d.exact_div(&a).expect("gcd divides").sub(&c.derivative());
            i += 1;
        }
        out
    }
}

/// Dense rational polynomial, lowest degree first, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RationalPoly {
    coeffs: Vec<Rational>,
}

impl RationalPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Rational::is_zero) {
            coeffs.pop();
        }
        RationalPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(|c| *c == Rational::one())
    }

    /// `Π (x - r)` over the given roots.
    pub fn from_roots(roots: &[Rational]) -> Self {
        let mut p = RationalPoly::new(vec![Rational::one()]);
        for r in roots {
            p = p.mul(&RationalPoly::new(vec![-r, Rational::one()]));
        }
        p
    }

    pub fn mul(&self, other: &RationalPoly) -> RationalPoly {
        if self.is_zero() || other.is_zero() {
            return RationalPoly::new(Vec::new());
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += &(a * b);
            }
        }
        RationalPoly::new(out)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = &acc * x + c;
        }
        acc
    }

    /// A positive integer multiple with coprime integer coefficients.
    pub fn to_int_primitive(&self) -> IntPoly {
        let l = self.coeffs.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let ints = self.coeffs.iter().map(|c| c.numer() * (&l / c.denom())).collect();
        IntPoly::new(ints).primitive_part()
    }

    pub fn from_int(p: &IntPoly) -> Self {
        RationalPoly::new(p.0.iter().cloned().map(Rational::from_int).collect())
    }
}

impl fmt::Display for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.signum() == Ordering::Less;
            let mag = c.abs();
            match (first, neg) {
                (true, true) => write!(f, "-")?,
                (true, false) => {}
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
            }
            first = false;
            let unit = mag == Rational::one();
            match i {
                0 => write!(f, "{mag}")?,
                1 if unit => write!(f, "x")?,
                1 => write!(f, "{mag}*x")?,
                _ if unit => write!(f, "x^{i}")?,
                _ => write!(f, "{mag}*x^{i}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RationalPoly({self})")
    }
}

/// `det(yI - cM)` together with the scale `c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaledCharpoly {
    pub poly: IntPoly,
    pub scale: BigInt,
}

impl ScaledCharpoly {
    /// Undoes the scaling: `c^{-n} P(cx)`.
    pub fn unscaled(&self) -> RationalPoly {
        let n = self.poly.degree();
        let c = Rational::from_int(self.scale.clone());
        let cn = c.pow(n as u32);
        let mut ci = Rational::one();
        let mut out = Vec::with_capacity(n + 1);
        for a in self.poly.coeffs() {
            out.push(&(&Rational::from_int(a.clone()) * &ci) / &cn);
            ci = &ci * &c;
        }
        RationalPoly::new(out)
    }
}

/// Smallest `c > 0` making `cM` integral on the diagonal and on squared weights.
pub fn integer_scale(m: &WeightedTreeMatrix<Rational>) -> BigInt {
    let mut c = BigInt::one();
    for v in 0..m.n() {
        c = c.lcm(m.diag(v).denom());
        if let Some(w) = m.sq_weight(v) {
            c = c.lcm(&smallest_square_multiple_root(w.denom()));
        }
    }
    c
}

/// Smallest `s` with `b | s²`, found by trial division; falls back to `b`
/// itself (which always works) for denominators with large prime factors.
fn smallest_square_multiple_root(b: &BigInt) -> BigInt {
    let mut rest = b.clone();
    let mut s = BigInt::one();
    let mut p = BigInt::from(2);
    let limit = BigInt::from(1u32 << 16);
    while &p * &p <= rest && p < limit {
        let mut e = 0u32;
        while rest.is_multiple_of(&p) {
            rest /= &p;
            e += 1;
        }
        for _ in 0..e.div_ceil(2) {
            s *= &p;
        }
        p += 1;
    }
    s * rest
}

pub fn scaled_charpoly(m: &WeightedTreeMatrix<Rational>) -> ScaledCharpoly {
    let c = integer_scale(m);
    let cr = Rational::from_int(c.clone());
    let c2 = &cr * &cr;
    let f = m.forest();
    let n = m.n();
    // a[v] = det(yI - cM) on the subtree at v, prod[v] = Π over children of a[c]
    let mut a: Vec<IntPoly> = Vec::with_capacity(n);
    let mut prod: Vec<IntPoly> = Vec::with_capacity(n);
    for v in 0..n {
        let kids = f.children(v);
        let scaled = &cr * m.diag(v);
        debug_assert!(scaled.is_integer());
        let mv = scaled.numer().clone();
        let lin = IntPoly::new(vec![-mv, BigInt::one()]);
        let k = kids.len();
        let mut prefix = Vec::with_capacity(k + 1);
        prefix.push(IntPoly::constant(1));
        for &c in kids {
            let next = prefix.last().expect("nonempty").mul(&a[c]);
            prefix.push(next);
        }
        let mut suffix = IntPoly::constant(1);
        let mut correction = IntPoly::zero();
        for (idx, &c) in kids.iter().enumerate().rev() {
            let w = (&c2 * m.sq_weight(c).expect("child edge")).numer().clone();
            let others = prefix[idx].mul(&suffix);
            correction = correction.add(&prod[c].mul(&others).scale(&w));
            suffix = suffix.mul(&a[c]);
        }
        let all = prefix.pop().expect("nonempty");
        a.push(lin.mul(&all).sub(&correction));
        prod.push(all);
    }
    let poly = f.roots().into_iter().fold(IntPoly::constant(1), |acc, r| acc.mul(&a[r]));
    ScaledCharpoly { poly, scale: c }
}

/// `det(xI - M)`, monic of degree `n`.
pub fn charpoly(m: &WeightedTreeMatrix<Rational>) -> RationalPoly {
    scaled_charpoly(m).unscaled()
}

/// Sturm chain of a square-free integer polynomial.
#[derive(Clone, Debug)]
pub struct SturmChain {
    chain: Vec<IntPoly>,
}

impl SturmChain {
    /// Chain of the square-free part of `p`.
    pub fn new(p: &IntPoly) -> Result<Self, PolyError> {
        if p.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let p = p.normalized();
        let g = p.gcd(&p.derivative());
        let sf = p.exact_div(&g).expect("gcd divides").normalized();
        Ok(Self::of_square_free(sf))
    }

    fn of_square_free(p: IntPoly) -> Self {
        let mut chain = vec![p.clone()];
        if p.degree() == 0 {
            return SturmChain { chain };
        }
        let mut prev = p.clone();
        let mut cur = p.derivative().primitive_part();
        while !cur.is_zero() {
            chain.push(cur.clone());
            let r = prev.sign_preserving_rem(&cur);
            prev = cur;
            cur = r.scale(&BigInt::from(-1));
        }
        SturmChain { chain }
    }

    fn count_changes(signs: impl Iterator<Item = Ordering>) -> usize {
        let mut last = Ordering::Equal;
        let mut changes = 0;
        for s in signs.filter(|s| *s != Ordering::Equal) {
            if last != Ordering::Equal && s != last {
                changes += 1;
            }
            last = s;
        }
        changes
    }

    pub fn variations_at(&self, x: &Rational) -> usize {
        Self::count_changes(self.chain.iter().map(|p| p.sign_at(x)))
    }

    pub fn variations_at_pos_inf(&self) -> usize {
        Self::count_changes(self.chain.iter().map(|p| p.leading().expect("nonzero").sign().into_ordering()))
    }

    pub fn variations_at_neg_inf(&self) -> usize {
        Self::count_changes(self.chain.iter().map(|p| {
            let s = p.leading().expect("nonzero").sign().into_ordering();
            if p.degree() % 2 == 1 {
                s.reverse()
            } else {
                s
            }
        }))
    }

    /// Distinct roots in `(a, b]`.
    pub fn count(&self, a: &Rational, b: &Rational) -> usize {
        self.variations_at(a) - self.variations_at(b)
    }

    pub fn is_root(&self, x: &Rational) -> bool {
        self.chain[0].sign_at(x) == Ordering::Equal
    }

    /// Distinct roots strictly below `x`.
    pub fn count_below(&self, x: &Rational) -> usize {
        self.variations_at_neg_inf() - self.variations_at(x) - usize::from(self.is_root(x))
    }

    /// Distinct roots strictly above `x`.
    pub fn count_above(&self, x: &Rational) -> usize {
        self.variations_at(x) - self.variations_at_pos_inf()
    }

    pub fn count_all(&self) -> usize {
        self.variations_at_neg_inf() - self.variations_at_pos_inf()
    }
}

trait SignOrdering {
    fn into_ordering(self) -> Ordering;
}

impl SignOrdering for Sign {
    fn into_ordering(self) -> Ordering {
        match self {
            Sign::Minus => Ordering::Less,
            Sign::NoSign => Ordering::Equal,
            Sign::Plus => Ordering::Greater,
        }
    }
}

/// Root counts with multiplicity, via one Sturm chain per square-free factor.
#[derive(Clone, Debug)]
pub struct RootCounter {
    factors: Vec<(usize, SturmChain)>,
    primitive: IntPoly,
}

impl RootCounter {
    pub fn new(p: &IntPoly) -> Result<Self, PolyError> {
        if p.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let factors = p
            .square_free_decomposition()
            .into_iter()
            .map(|(i, f)| (i, SturmChain::of_square_free(f)))
            .collect();
        Ok(RootCounter { factors, primitive: p.normalized() })
    }

    pub fn of_rational(p: &RationalPoly) -> Result<Self, PolyError> {
        Self::new(&p.to_int_primitive())
    }

    fn total(&self, f: impl Fn(&SturmChain) -> usize) -> usize {
        self.factors.iter().map(|(i, c)| i * f(c)).sum()
    }

    /// Roots in `(a, b]`, with multiplicity.
    pub fn count(&self, a: &Rational, b: &Rational) -> Result<usize, PolyError> {
        if a >= b {
            return Err(PolyError::EmptyInterval);
        }
        Ok(self.total(|c| c.count(a, b)))
    }

    pub fn below(&self, x: &Rational) -> usize {
        self.total(|c| c.count_below(x))
    }

    pub fn above(&self, x: &Rational) -> usize {
        self.total(|c| c.count_above(x))
    }

    pub fn multiplicity(&self, x: &Rational) -> usize {
        multiplicity_int(&self.primitive, x)
    }
}

/// Distinct real roots in `(a, b]`.
pub fn sturm_count(p: &RationalPoly, a: &Rational, b: &Rational) -> Result<usize, PolyError> {
    if a >= b {
        return Err(PolyError::EmptyInterval);
    }
    Ok(SturmChain::new(&p.to_int_primitive())?.count(a, b))
}

/// Real roots in `(a, b]`, counted with multiplicity.
pub fn count_roots_with_multiplicity(p: &RationalPoly, a: &Rational, b: &Rational) -> Result<usize, PolyError> {
    RootCounter::of_rational(p)?.count(a, b)
}

/// Number of distinct real roots.
pub fn distinct_real_roots(p: &RationalPoly) -> Result<usize, PolyError> {
    Ok(SturmChain::new(&p.to_int_primitive())?.count_all())
}

fn multiplicity_int(p: &IntPoly, x: &Rational) -> usize {
    if p.is_zero() {
        return 0;
    }
    let (r, s) = (x.numer(), x.denom());
    let mut cur = p.clone();
    let mut m = 0;
    while let Some(q) = cur.div_linear(r, s) {
        cur = q;
        m += 1;
    }
    m
}

/// Largest `m` with `(x - λ)^m | p`; 0 for the zero polynomial.
pub fn multiplicity_exact(p: &RationalPoly, lambda: &Rational) -> usize {
    multiplicity_int(&p.to_int_primitive(), lambda)
}

/// An integer bound on the spectral radius: the largest over vertices of
/// `ceil|m_vv| + Σ ceil(√w)` over incident squared weights `w`.
pub fn gershgorin_bound(m: &WeightedTreeMatrix<Rational>) -> BigInt {
    let n = m.n();
    let mut rows: Vec<BigInt> = (0..n).map(|v| m.diag(v).abs().ceil()).collect();
    for (c, p, w) in m.edges() {
        let s = w.ceil_sqrt();
        rows[c] += &s;
        rows[p] += &s;
    }
    rows.into_iter().max().unwrap_or_default()
}

fn gershgorin_f64(m: &WeightedTreeMatrix<f64>) -> f64 {
    let mut rows: Vec<f64> = m.diagonal().iter().map(|d| d.abs()).collect();
    for (c, p, w) in m.edges() {
        let s = w.sqrt();
        rows[c] += s;
        rows[p] += s;
    }
    rows.into_iter().fold(0.0, f64::max)
}

/// Number of eigenvalues strictly below `x`, from the signs of the pivots of
/// `M - xI` eliminated leaves-first.
pub fn count_below_f64(m: &WeightedTreeMatrix<f64>, x: f64) -> usize {
    let pivmin = f64::MIN_POSITIVE * m.edges().map(|(_, _, w)| *w).fold(1.0, f64::max);
    let f = m.forest();
    let mut d = vec![0.0f64; m.n()];
    let mut negatives = 0;
    for v in 0..m.n() {
        let mut acc = m.diag(v) - x;
        for &c in f.children(v) {
            acc -= m.sq_weight(c).expect("child edge") / d[c];
        }
        if acc.abs() < pivmin {
            acc = -pivmin;
        }
        if acc < 0.0 {
            negatives += 1;
        }
        d[v] = acc;
    }
    negatives
}

/// Eigenvalues in increasing order.
///
/// Bisection first isolates groups of eigenvalues to width `1e-11 (1 + B)`,
/// with `B` the Gershgorin radius, then refines one value per group close to
/// machine precision. Every eigenvalue of a group is reported as the same
/// float, so repeated eigenvalues come out bitwise equal.
pub fn float_spectrum<S: Scalar>(m: &WeightedTreeMatrix<S>) -> Vec<f64> {
    let m = m.to_f64();
    let b = gershgorin_f64(&m) + 1.0;
    let eps = 1e-11 * (1.0 + b);
    let mut out = Vec::with_capacity(m.n());
    let mut stack = vec![(-b, b, 0usize, m.n())];
    while let Some((lo, hi, clo, chi)) = stack.pop() {
        if chi == clo {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        if hi - lo < eps || mid <= lo || mid >= hi {
            let value = refine_group(&m, lo, hi, clo + (chi - clo).div_ceil(2), f64::EPSILON * b);
            out.extend(std::iter::repeat(value).take(chi - clo));
            continue;
        }
        let cm = count_below_f64(&m, mid).clamp(clo, chi);
        // Upper half first so that the lower half is popped first.
        stack.push((mid, hi, cm, chi));
        stack.push((lo, mid, clo, cm));
    }
    out
}

/// Bisects towards the point where the count below crosses `target`, down
/// to width `floor`, and reports the shortest float in the final enclosure.
fn refine_group(m: &WeightedTreeMatrix<f64>, mut lo: f64, mut hi: f64, target: usize, floor: f64) -> f64 {
    loop {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= floor || mid <= lo || mid >= hi {
            return shortest_in(lo, hi, mid);
        }
        if count_below_f64(m, mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

/// The float in `[lo, hi]` with the fewest significand bits, found by
/// rounding `mid`; zero if the interval contains it.
fn shortest_in(lo: f64, hi: f64, mid: f64) -> f64 {
    if lo <= 0.0 && hi >= 0.0 {
        return 0.0;
    }
    let bits = mid.to_bits();
    for drop in (1..=52u32).rev() {
        let r = f64::from_bits(((bits + (1u64 << (drop - 1))) >> drop) << drop);
        if lo <= r && r <= hi {
            return r;
        }
    }
    mid
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational_of_string;
    use crate::tree::RootedForest;

    fn q(s: &str) -> Rational {
        rational_of_string(s).unwrap()
    }

    fn rp(c: &[&str]) -> RationalPoly {
        RationalPoly::new(c.iter().map(|s| q(s)).collect())
    }

    fn ip(c: &[i64]) -> IntPoly {
        IntPoly::new(c.iter().map(|&v| BigInt::from(v)).collect())
    }

    #[test]
    fn shortest_float_in_interval() {
        assert_eq!(shortest_in(1.9999999999999, 2.0000000000001, 1.99999999999999), 2.0);
        assert_eq!(shortest_in(-0.75000001, -0.74999999, -0.7500000001), -0.75);
        assert_eq!(shortest_in(-1e-20, 1e-20, 1e-21), 0.0);
        let third = 1.0 / 3.0;
        let r = shortest_in(third - 1e-15, third + 1e-15, third);
        assert!((r - third).abs() <= 1e-15);
    }

    fn path2() -> WeightedTreeMatrix {
        WeightedTreeMatrix::from_edges(vec![q("0"), q("0")], &[(0, 1, q("1"))], Some(0)).unwrap().0
    }

    #[test]
    fn small_charpolys() {
        let one = WeightedTreeMatrix::new(RootedForest::single_vertex(), vec![q("7/3")], vec![None]).unwrap();
        assert_eq!(charpoly(&one), rp(&["-7/3", "1"]));
        assert_eq!(charpoly(&path2()), rp(&["-1", "0", "1"]));
        let diag = WeightedTreeMatrix::new(
            RootedForest::from_parents(&[None, None]).unwrap().0,
            vec![q("1"), q("2")],
            vec![None, None],
        )
        .unwrap();
        assert_eq!(charpoly(&diag), rp(&["2", "-3", "1"]));
    }

    #[test]
    fn scaled_charpoly_is_integral_and_monic() {
        let m = WeightedTreeMatrix::from_edges(
            vec![q("1/2"), q("-1/3"), q("0")],
            &[(0, 1, q("1/8")), (0, 2, q("5/4"))],
            Some(0),
        )
        .unwrap()
        .0;
        let s = scaled_charpoly(&m);
        assert_eq!(s.poly.leading(), Some(&BigInt::one()));
        assert_eq!(s.scale, BigInt::from(12));
        assert!(charpoly(&m).is_monic());
    }

    #[test]
    fn sturm_examples() {
        let p = rp(&["-1", "0", "1"]);
        assert_eq!(sturm_count(&p, &q("0"), &q("2")).unwrap(), 1);
        assert_eq!(sturm_count(&p, &q("-2"), &q("2")).unwrap(), 2);
        assert_eq!(sturm_count(&p, &q("-1"), &q("1")).unwrap(), 1);
        assert_eq!(sturm_count(&p, &q("1"), &q("0")), Err(PolyError::EmptyInterval));
        assert_eq!(sturm_count(&RationalPoly::new(vec![]), &q("0"), &q("1")), Err(PolyError::ZeroPolynomial));
        assert_eq!(distinct_real_roots(&rp(&["1", "0", "1"])).unwrap(), 0);
    }

    #[test]
    fn multiplicities() {
        let cube = RationalPoly::from_roots(&[q("1"), q("1"), q("1")]);
        assert_eq!(multiplicity_exact(&cube, &q("1")), 3);
        assert_eq!(multiplicity_exact(&cube, &q("2")), 0);
        let p = RationalPoly::from_roots(&[q("1/3"), q("1/3"), q("-2")]);
        assert_eq!(multiplicity_exact(&p, &q("1/3")), 2);
        assert_eq!(count_roots_with_multiplicity(&p, &q("0"), &q("1")).unwrap(), 2);
        assert_eq!(sturm_count(&p, &q("0"), &q("1")).unwrap(), 1);
    }

    #[test]
    fn square_free_decomposition_reassembles() {
        // (x-1)^3 (x+2)^2 (x-5)
        let f = ip(&[-1, 1]).mul(&ip(&[-1, 1])).mul(&ip(&[-1, 1])).mul(&ip(&[2, 1])).mul(&ip(&[2, 1])).mul(&ip(&[-5, 1]));
        let parts = f.square_free_decomposition();
        assert_eq!(parts, vec![(1, ip(&[-5, 1])), (2, ip(&[2, 1])), (3, ip(&[-1, 1]))]);
        let c = RootCounter::new(&f).unwrap();
        assert_eq!(c.below(&q("1")), 2);
        assert_eq!(c.above(&q("1")), 1);
        assert_eq!(c.multiplicity(&q("1")), 3);
        assert_eq!(c.below(&q("-100")) + c.above(&q("-100")), 6);
    }

    #[test]
    fn gershgorin_examples() {
        assert_eq!(gershgorin_bound(&path2()), BigInt::one());
        let m = WeightedTreeMatrix::from_edges(vec![q("-5/2"), q("0")], &[(0, 1, q("2"))], None).unwrap().0;
        assert_eq!(gershgorin_bound(&m), BigInt::from(5));
    }

    #[test]
    fn float_spectrum_examples() {
        let d = WeightedTreeMatrix::new(
            RootedForest::from_parents(&[None, None]).unwrap().0,
            vec![q("1"), q("2")],
            vec![None, None],
        )
        .unwrap();
        let s = float_spectrum(&d);
        assert!((s[0] - 1.0).abs() < 1e-9 && (s[1] - 2.0).abs() < 1e-9);
        let s = float_spectrum(&path2());
        assert!((s[0] + 1.0).abs() < 1e-9 && (s[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn repeated_eigenvalues_are_identical() {
        let star = RootedForest::star(4);
        let n = star.n();
        let sq = (0..n).map(|v| star.parent(v).map(|_| q("1"))).collect();
        let m = WeightedTreeMatrix::new(star, vec![q("0"); n], sq).unwrap();
        let s = float_spectrum(&m);
        assert_eq!(s.len(), 5);
        assert_eq!(s[1], s[2]);
        assert_eq!(s[2], s[3]);
        assert!(s[2].abs() < 1e-9);
        assert!((s[4] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(rp(&["-1", "0", "1"]).to_string(), "x^2 - 1");
        assert_eq!(rp(&["1/2", "-3"]).to_string(), "-3*x + 1/2");
        assert_eq!(RationalPoly::new(vec![]).to_string(), "0");
    }

    #[test]
    fn json_is_fraction_strings() {
        let p = rp(&["-10/3", "0", "1"]);
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(text, r#"["-10/3","0","1"]"#);
        let back: RationalPoly = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
    }
}
