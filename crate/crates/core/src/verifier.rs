//! Executable checks: trace-identity algebra, level-zero sweeps, multiplicity
//! ledgers of the weighted families, and randomized distinct-eigenvalue probes.
//!
//! Probe results are statistical evidence. A probe never proves a lower
//! bound on the number of distinct eigenvalues, and every report says so.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{Rational, ScalarBackend};
use crate::charpoly::{charpoly, distinct_real_roots, float_spectrum};
use crate::diag::{
    count_n, count_top_level_zeros, diagonalize, level_zero_table, locate, root_zero_distance, WeightedTreeMatrix,
};
use crate::error::VerifyError;
use crate::realization::{assemble, build_t0_matrix, build_t1_matrix, build_t2_matrix};
use crate::tree::{
    build_counterexample, counterexample_spec, forest_of_layout, Part, RootedForest, SeedId, SeedPart, ShapeVertex,
    StarShape,
};

/// Default relative gap for single-linkage clustering of float eigenvalues.
pub const DEFAULT_CLUSTER_GAP: f64 = 1e-6;

/// Relative gap used to merge oracle eigenvalues into a candidate set.
pub const CANDIDATE_GAP: f64 = 1e-9;

fn check_sorted5(l: &[Rational]) -> Result<(), VerifyError> {
    if l.len() != 5 {
        return Err(VerifyError::WrongLength { expected: 5, got: l.len() });
    }
    if l.windows(2).any(|w| w[0] >= w[1]) {
        return Err(VerifyError::Unsorted);
    }
    Ok(())
}

/// `λ2 + λ4 = λ1 + λ5` for five strictly increasing values.
pub fn check_trace_identity_t1(l: &[Rational]) -> Result<bool, VerifyError> {
    check_sorted5(l)?;
    Ok(&l[1] + &l[3] == &l[0] + &l[4])
}

/// Linear form `Σ c_i x_i` over the indeterminates `λ1..λ5, λ*`.
type LinearForm = [Rational; 6];

fn basis(i: usize) -> LinearForm {
    let mut f: LinearForm = Default::default();
    f[i] = Rational::one();
    f
}

fn combine(terms: &[(i64, usize)]) -> LinearForm {
    let mut f: LinearForm = Default::default();
    for &(c, i) in terms {
        f[i] += &Rational::from_int(c);
    }
    f
}

/// Substitutes `x_var := value` into `form`.
fn substitute(form: &LinearForm, var: usize, value: &LinearForm) -> LinearForm {
    let coef = form[var].clone();
    let mut out = form.clone();
    out[var] = Rational::zero();
    for i in 0..6 {
        out[i] += &(&coef * &value[i]);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusivityReport {
    /// Solving the second branch identity for `λ*` and substituting the
    /// first-tree identity must leave exactly `λ4`, respectively `λ2`.
    pub forced_case_a: String,
    pub forced_case_b: String,
    pub symbolic_ok: bool,
    pub samples: usize,
    pub samples_satisfying_t1: usize,
    pub excluded_case_a: usize,
    pub excluded_case_b: usize,
    pub consistent_when_violating: usize,
    pub passed: bool,
}

fn form_name(f: &LinearForm) -> String {
    const NAMES: [&str; 6] = ["l1", "l2", "l3", "l4", "l5", "l*"];
    let mut parts = Vec::new();
    for (c, name) in f.iter().zip(NAMES) {
        if !c.is_zero() {
            parts.push(if *c == Rational::one() { name.to_string() } else { format!("{c}*{name}") });
        }
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

/// Shows that `λ2 + λ4 = λ1 + λ5` rules out both `λ* + λ2 = λ1 + λ5` with
/// `λ* ≠ λ4` and `λ* + λ4 = λ1 + λ5` with `λ* ≠ λ2`: symbolically, and on
/// `samples` random sorted tuples (half of them built to satisfy the first
/// identity).
pub fn check_exclusivity(samples: usize, rng_seed: u64) -> ExclusivityReport {
    // λ5 in terms of the others, from the first identity
    let l5 = combine(&[(1, 1), (1, 3), (-1, 0)]);
    let star_a = combine(&[(1, 0), (1, 4), (-1, 1)]);
    let star_b = combine(&[(1, 0), (1, 4), (-1, 3)]);
    let forced_a = substitute(&star_a, 4, &l5);
    let forced_b = substitute(&star_b, 4, &l5);
    let symbolic_ok = forced_a == basis(3) && forced_b == basis(1);

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut satisfying = 0;
    let (mut excl_a, mut excl_b, mut consistent) = (0, 0, 0);
    for i in 0..samples {
        let mut l: Vec<Rational> = (0..5).map(|_| Rational::frac(rng.gen_range(-40..=40), rng.gen_range(1..=6))).collect();
        l.sort();
        l.dedup();
        while l.len() < 5 {
            let top = l.last().cloned().unwrap_or_else(Rational::zero);
            l.push(top + Rational::frac(rng.gen_range(1..=9), 4));
        }
        if i % 2 == 0 {
            l[4] = &(&l[1] + &l[3]) - &l[0];
        }
        let t1 = check_trace_identity_t1(&l).expect("sorted by construction");
        let a = &(&l[0] + &l[4]) - &l[1];
        let b = &(&l[0] + &l[4]) - &l[3];
        if t1 {
            satisfying += 1;
            excl_a += usize::from(a == l[3]);
            excl_b += usize::from(b == l[1]);
        } else {
            consistent += usize::from(a != l[3] && b != l[1]);
        }
    }
    let passed = symbolic_ok && excl_a == satisfying && excl_b == satisfying && consistent == samples - satisfying;
    ExclusivityReport {
        forced_case_a: form_name(&forced_a),
        forced_case_b: form_name(&forced_b),
        symbolic_ok,
        samples,
        samples_satisfying_t1: satisfying,
        excluded_case_a: excl_a,
        excluded_case_b: excl_b,
        consistent_when_violating: consistent,
        passed,
    }
}

/// Named entry distribution for random matrices: diagonals `k/8` with
/// `k ∈ [-16, 16]`, squared weights `k/8` with `k ∈ [1, 16]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EntryDistribution {
    #[serde(rename = "eighths")]
    Eighths,
}

impl EntryDistribution {
    pub fn id(&self) -> &'static str {
        "eighths"
    }

    pub fn sample(&self, forest: &RootedForest, rng: &mut impl Rng) -> WeightedTreeMatrix {
        let n = forest.n();
        let diag = (0..n).map(|_| Rational::frac(rng.gen_range(-16..=16), 8)).collect();
        let sq = (0..n).map(|v| forest.parent(v).map(|_| Rational::frac(rng.gen_range(1..=16), 8))).collect();
        WeightedTreeMatrix::new(forest.clone(), diag, sq).expect("positive weights")
    }
}

/// A random tree on at most `max_n` vertices of depth at most `max_depth`.
pub fn random_rooted_tree(rng: &mut impl Rng, max_n: usize, max_depth: usize) -> RootedForest {
    let n = rng.gen_range(1..=max_n);
    let mut parents = vec![None];
    let mut dist = vec![0usize];
    for _ in 1..n {
        let open: Vec<usize> = (0..parents.len()).filter(|&v| dist[v] < max_depth).collect();
        let p = open[rng.gen_range(0..open.len())];
        parents.push(Some(p));
        dist.push(dist[p] + 1);
    }
    RootedForest::from_parents(&parents).expect("tree").0
}

/// Reproducible corpus of random tree matrices.
pub fn random_corpus(count: usize, max_n: usize, max_depth: usize, rng_seed: u64) -> Vec<WeightedTreeMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    (0..count)
        .map(|_| {
            let t = random_rooted_tree(&mut rng, max_n, max_depth);
            EntryDistribution::Eighths.sample(&t, &mut rng)
        })
        .collect()
}

/// Representatives of single-linkage clusters of `values` with absolute gap `gap`.
pub fn cluster(values: &[f64], gap: f64) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for x in v {
        if out.is_empty() || x - last > gap {
            out.push(x);
        }
        last = x;
    }
    out
}

/// Distinct count of a spectrum under relative gap `rel_gap · (1 + ρ)`.
pub fn distinct_count(spectrum: &[f64], rel_gap: f64) -> usize {
    let rho = spectrum.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    cluster(spectrum, rel_gap * (1.0 + rho)).len()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepFailure {
    pub instance: usize,
    pub depth: usize,
    pub detail: String,
    pub matrix: crate::diag::MatrixJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub lemma: String,
    pub instances: usize,
    pub zero_tolerance: f64,
    /// Counts are over float eigenvalues of the matrix and of its top-level
    /// truncation, so they are exact only when those candidates are complete.
    pub conditional_on_candidates: bool,
    /// Instances where the zero test disagrees with the oracle multiplicities
    /// at some candidate. They are excluded from the lemma check.
    pub unresolved: Vec<usize>,
    pub failures: Vec<SweepFailure>,
    pub passed: bool,
}

/// Distinct float eigenvalues of `m`, merged under `CANDIDATE_GAP`.
pub fn float_candidates(m: &WeightedTreeMatrix<f64>) -> Vec<f64> {
    let spec = float_spectrum(m);
    let rho = spec.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    cluster(&spec, CANDIDATE_GAP * (1.0 + rho))
}

/// `(m_kk, N)` on the float backend. Root zeros are sought among the
/// eigenvalues of the matrix, top-level zeros of `T_{k-1}` among the
/// eigenvalues of the truncation.
pub fn top_level_counts_f64(m: &WeightedTreeMatrix, backend: &ScalarBackend) -> (usize, usize) {
    let f = m.to_f64();
    let k = f.forest().depth();
    let mkk = count_top_level_zeros(&f, &float_candidates(&f), backend);
    let n = if k > 0 { count_n(&f, &float_candidates(&f.restrict_to_levels(k - 1).expect("level in range")), backend) } else { 0 };
    (mkk, n)
}

/// At the extreme eigenvalues the only zero is at the root.
pub fn extremes_zero_only_at_root(m: &WeightedTreeMatrix, backend: &ScalarBackend) -> bool {
    let f = m.to_f64();
    let spec = float_spectrum(&f);
    let root = match f.forest().root() {
        Ok(r) => r,
        Err(_) => return false,
    };
    [spec[0], spec[spec.len() - 1]].iter().all(|&lam| {
        let out = diagonalize(&f, &-lam, backend);
        let zeros: Vec<usize> = (0..f.n()).filter(|&v| out.d[v].abs() <= zero_tol(backend)).collect();
        zeros == vec![root]
    })
}

fn zero_tol(backend: &ScalarBackend) -> f64 {
    match backend {
        ScalarBackend::Exact => 0.0,
        ScalarBackend::Float { zero_tolerance } => *zero_tolerance,
    }
}

/// Whether the zero test at `backend`'s tolerance reproduces, at every
/// candidate, the multiplicities of the oracle spectra of the matrix and of
/// its top-level truncation.
pub fn resolved_at_tolerance(m: &WeightedTreeMatrix, backend: &ScalarBackend) -> bool {
    let f = m.to_f64();
    let k = f.forest().depth();
    let mut mats = vec![f.clone()];
    if k > 0 {
        mats.push(f.restrict_to_levels(k - 1).expect("level in range"));
    }
    let spectra: Vec<Vec<f64>> = mats.iter().map(float_spectrum).collect();
    let rho = spectra.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
    let gap = CANDIDATE_GAP * (1.0 + rho);
    let tol = zero_tol(backend);
    let lambdas: Vec<f64> = spectra.iter().flat_map(|s| cluster(s, gap)).collect();
    mats.iter().zip(&spectra).all(|(x, spec)| {
        lambdas.iter().all(|&lam| {
            let out = diagonalize(x, &-lam, backend);
            let zeros = out.d.iter().filter(|d| d.abs() <= tol).count();
            zeros == spec.iter().filter(|e| (*e - lam).abs() <= gap).count()
        })
    })
}

fn sweep(
    lemma: &str,
    corpus: &[WeightedTreeMatrix],
    backend: &ScalarBackend,
    check: impl Fn(&WeightedTreeMatrix) -> Option<String> + Sync,
) -> SweepReport {
    let outcomes: Vec<Result<Option<SweepFailure>, usize>> = corpus
        .par_iter()
        .enumerate()
        .map(|(i, m)| {
            if !resolved_at_tolerance(m, backend) {
                return Err(i);
            }
            Ok(check(m).map(|detail| SweepFailure { instance: i, depth: m.forest().depth(), detail, matrix: m.to_json() }))
        })
        .collect();
    let mut unresolved = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Err(i) => unresolved.push(i),
            Ok(Some(f)) => failures.push(f),
            Ok(None) => {}
        }
    }
    SweepReport {
        lemma: lemma.into(),
        instances: corpus.len(),
        zero_tolerance: zero_tol(backend),
        conditional_on_candidates: true,
        unresolved,
        passed: failures.is_empty(),
        failures,
    }
}

/// `m_kk = N + 1` on every instance.
pub fn lemma31_sweep(corpus: &[WeightedTreeMatrix], backend: &ScalarBackend) -> SweepReport {
    sweep("lemma31", corpus, backend, |m| {
        let (mkk, n) = top_level_counts_f64(m, backend);
        (mkk != n + 1).then(|| format!("m_kk = {mkk}, N = {n}"))
    })
}

/// `m_kk ≥ k + 1` on every instance, and the extreme eigenvalues vanish only at the root.
pub fn lemma32_sweep(corpus: &[WeightedTreeMatrix], backend: &ScalarBackend) -> SweepReport {
    sweep("lemma32", corpus, backend, |m| {
        let k = m.forest().depth();
        let f = m.to_f64();
        let mkk = count_top_level_zeros(&f, &float_candidates(&f), backend);
        if mkk < k + 1 {
            Some(format!("m_kk = {mkk} < k + 1 = {}", k + 1))
        } else if !extremes_zero_only_at_root(m, backend) {
            Some("an extreme eigenvalue produces a zero away from the root".into())
        } else {
            None
        }
    })
}

/// Outcome of a ledger suite: a list of named checks and the ones that failed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: usize,
    pub failures: Vec<String>,
    pub passed: bool,
}

#[derive(Default)]
struct Ledger {
    checks: usize,
    failures: Vec<String>,
}

impl Ledger {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn eq<T: PartialEq + std::fmt::Debug>(&mut self, got: T, want: T, what: impl FnOnce() -> String) {
        let ok = got == want;
        self.check(ok, || format!("{}: got {got:?}, expected {want:?}", what()));
    }

    fn finish(self, suite: &str) -> SuiteReport {
        SuiteReport { suite: suite.into(), checks: self.checks, passed: self.failures.is_empty(), failures: self.failures }
    }
}

fn q(v: i64) -> Rational {
    Rational::from_int(v)
}

fn mult(m: &WeightedTreeMatrix, lam: i64) -> usize {
    locate(m, &q(lam), &ScalarBackend::Exact).mult
}

/// Root value after diagonalizing at `x = -λ`.
pub fn root_value(m: &WeightedTreeMatrix, lambda: &Rational) -> Rational {
    let out = diagonalize(m, &-lambda.clone(), &ScalarBackend::Exact);
    out.d[m.forest().root().expect("tree")].clone()
}

fn mult_without_root(m: &WeightedTreeMatrix, lam: i64) -> usize {
    let r = m.forest().root().expect("tree");
    let (sub, _) = m.delete_vertex(r).expect("n > 1");
    mult(&sub, lam)
}

fn spectrum_within(l: &mut Ledger, m: &WeightedTreeMatrix, allowed: &[i64], what: &str) {
    let total: usize = allowed.iter().map(|&a| mult(m, a)).sum();
    l.eq(total, m.n(), || format!("{what}: multiplicities on {allowed:?} sum to n"));
}

fn root_zero_at(l: &mut Ledger, m: &WeightedTreeMatrix, lams: &[i64], what: &str) {
    for &lam in lams {
        let d = root_zero_distance(m, &q(lam), &ScalarBackend::Exact);
        l.eq(d, Some(0), || format!("{what}: L(M, {lam})"));
    }
}

fn deletion_raises(l: &mut Ledger, m: &WeightedTreeMatrix, lams: &[i64], what: &str) {
    for &lam in lams {
        l.eq(mult_without_root(m, lam), mult(m, lam) + 1, || format!("{what}: multiplicity of {lam} without the root"));
    }
}

fn random_groups(rng: &mut impl Rng, max_p: usize, max_t: u32) -> Vec<u32> {
    let p = rng.gen_range(1..=max_p);
    (0..p).map(|_| rng.gen_range(1..=max_t)).collect()
}

/// Ledger of the first-type branch family on `count` random parameter vectors.
pub fn lemma41_suite(count: usize, rng_seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut l = Ledger::default();
    for _ in 0..count {
        let t = random_groups(&mut rng, 5, 5);
        let m = build_t1_matrix(&t).expect("valid");
        let (n, p) = (m.n(), t.len());
        let w = || format!("T1{t:?}");
        l.eq(root_value(&m, &q(2)), Rational::frac(10, 3), || format!("{}: d_root(2)", w()));
        l.eq(mult(&m, 0), n - 2 * p, || format!("{}: m(0)", w()));
        l.eq(mult(&m, -1), p - 1, || format!("{}: m(-1)", w()));
        l.eq(mult(&m, 1), p - 1, || format!("{}: m(1)", w()));
        l.eq(mult(&m, -3), 1, || format!("{}: m(-3)", w()));
        l.eq(mult(&m, 3), 1, || format!("{}: m(3)", w()));
        spectrum_within(&mut l, &m, &[-3, -1, 0, 1, 3], &w());
        root_zero_at(&mut l, &m, &[-3, 0, 3], &w());
        deletion_raises(&mut l, &m, &[-1, 1], &w());
    }
    l.finish("lemma41")
}

/// Ledger of the second-type branch family.
pub fn lemma42_suite(count: usize, rng_seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut l = Ledger::default();
    for _ in 0..count {
        let t0 = rng.gen_range(1..=5);
        let t = random_groups(&mut rng, 5, 5);
        let m = build_t2_matrix(t0, &t).expect("valid");
        let p = t.len();
        let sum_t: usize = t.iter().map(|&x| x as usize).sum();
        let w = || format!("T2({t0};{t:?})");
        l.eq(root_value(&m, &q(1)), q(-4), || format!("{}: d_root(1)", w()));
        l.eq(mult(&m, -1), p - 1 + t0 as usize, || format!("{}: m(-1)", w()));
        l.eq(mult(&m, 2), p - 1, || format!("{}: m(2)", w()));
        l.eq(mult(&m, 0), 1 + sum_t - p, || format!("{}: m(0)", w()));
        l.eq(mult(&m, -3), 1, || format!("{}: m(-3)", w()));
        l.eq(mult(&m, 3), 1, || format!("{}: m(3)", w()));
        spectrum_within(&mut l, &m, &[-3, -1, 0, 2, 3], &w());
        root_zero_at(&mut l, &m, &[-3, 0, 3], &w());
        deletion_raises(&mut l, &m, &[-1, 2], &w());
    }
    l.finish("lemma42")
}

/// Ledgers of the three center panels.
pub fn lemma43_suite(count: usize, rng_seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut l = Ledger::default();
    for _ in 0..count {
        let s0 = rng.gen_range(1..=5);
        let part = SeedPart::P2 { s0 };
        let m = build_t0_matrix(&part).expect("valid");
        let w = || format!("{part:?}");
        l.eq(root_value(&m, &q(-3)), q(4), || format!("{}: d_root(-3)", w()));
        l.eq(root_value(&m, &q(1)), q(4), || format!("{}: d_root(1)", w()));
        l.eq(root_value(&m, &q(2)), Rational::frac(3, 2), || format!("{}: d_root(2)", w()));
        spectrum_within(&mut l, &m, &[-1, 0, 3], &w());
        root_zero_at(&mut l, &m, &[-1, 3], &w());
        deletion_raises(&mut l, &m, &[0], &w());

        let part = SeedPart::P3 { s: random_groups(&mut rng, 5, 5) };
        let m = build_t0_matrix(&part).expect("valid");
        let w = || format!("{part:?}");
        l.eq(root_value(&m, &q(1)), q(7), || format!("{}: d_root(1)", w()));
        l.eq(root_value(&m, &q(2)), Rational::frac(12, 5), || format!("{}: d_root(2)", w()));
        spectrum_within(&mut l, &m, &[-6, -3, -1, 0, 3], &w());
        root_zero_at(&mut l, &m, &[-6, -1, 3], &w());
        deletion_raises(&mut l, &m, &[-3, 0], &w());

        let part = SeedPart::P4 { s0: rng.gen_range(1..=5), s: random_groups(&mut rng, 5, 5) };
        let m = build_t0_matrix(&part).expect("valid");
        let w = || format!("{part:?}");
        l.eq(root_value(&m, &q(1)), Rational::frac(7, 2), || format!("{}: d_root(1)", w()));
        l.eq(root_value(&m, &q(2)), Rational::frac(3, 5), || format!("{}: d_root(2)", w()));
        deletion_raises(&mut l, &m, &[-3, 0], &w());
    }
    l.finish("lemma43")
}

/// Exact top-level counts on the first- and second-type families, where the
/// candidate sets are known to be complete.
pub fn rational_family_levels(count: usize, rng_seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut l = Ledger::default();
    let exact = ScalarBackend::Exact;
    for _ in 0..count {
        let t = random_groups(&mut rng, 4, 4);
        let m = build_t1_matrix(&t).expect("valid");
        let cands: Vec<Rational> = [-3, -1, 0, 1, 3].map(q).to_vec();
        let mkk = count_top_level_zeros(&m, &cands, &exact);
        let n = count_n(&m, &cands, &exact);
        l.eq((mkk, n), (3, 2), || format!("T1{t:?}: (m_kk, N)"));

        let t0 = rng.gen_range(1..=4);
        let t = random_groups(&mut rng, 4, 4);
        let m = build_t2_matrix(t0, &t).expect("valid");
        let cands: Vec<Rational> = [-3, -1, 0, 2, 3].map(q).to_vec();
        let mkk = count_top_level_zeros(&m, &cands, &exact);
        let n = count_n(&m, &cands, &exact);
        l.eq((mkk, n), (3, 2), || format!("T2({t0};{t:?}): (m_kk, N)"));
        let k = m.forest().depth();
        let top: Vec<i64> = [-3, 0, 3]
            .iter()
            .filter(|&&lam| level_zero_table(&m, k, &q(lam), &exact).expect("in range")[k] > 0)
            .copied()
            .collect();
        l.eq(top.len(), k + 1, || format!("T2({t0};{t:?}): root zeros at {{-3, 0, 3}}"));
    }
    l.finish("rational-family-levels")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignedSample {
    pub label: String,
    pub distinct: usize,
    pub distinct_at_zero_gap: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub tree_id: String,
    pub n: usize,
    pub samples: usize,
    pub rng_seed: u64,
    pub distribution: String,
    /// `None` when no sample was drawn.
    pub min_distinct_found: Option<usize>,
    pub clustering_tolerance: f64,
    pub histogram: BTreeMap<usize, usize>,
    pub expected_floor: usize,
    pub floor_respected: bool,
    pub designed_sample: Option<DesignedSample>,
    pub evidence_only: bool,
}

/// Trees the probe knows by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProbeTarget {
    Counterexample(SeedId),
    ForestT1T3,
}

impl ProbeTarget {
    pub fn parse(text: &str) -> Option<ProbeTarget> {
        if text.eq_ignore_ascii_case("forest-T1T3") {
            return Some(ProbeTarget::ForestT1T3);
        }
        SeedId::parse(text).map(ProbeTarget::Counterexample)
    }

    pub fn id(&self) -> String {
        match self {
            ProbeTarget::Counterexample(s) => s.name().replace('_', "-"),
            ProbeTarget::ForestT1T3 => "forest-T1T3".into(),
        }
    }

    pub fn forest(&self) -> RootedForest {
        match self {
            ProbeTarget::Counterexample(s) => build_counterexample(*s),
            ProbeTarget::ForestT1T3 => forest_t1_t3().0,
        }
    }

    pub fn expected_floor(&self) -> usize {
        match self {
            ProbeTarget::Counterexample(_) => 8,
            ProbeTarget::ForestT1T3 => 6,
        }
    }

    /// A known matrix on the same forest that attains the floor.
    pub fn designed_matrix(&self) -> WeightedTreeMatrix {
        match self {
            ProbeTarget::Counterexample(s) => assemble(&counterexample_spec(*s), None).expect("valid spec"),
            ProbeTarget::ForestT1T3 => forest_t1_t3().1,
        }
    }
}

fn t1_shape() -> StarShape {
    StarShape::new(0, vec![2, 2])
}

fn t3_shape() -> StarShape {
    StarShape::new(1, vec![2, 2])
}

/// The two-component forest `T1(2,2) ∪ T2(1;2,2)` with the weighted-family
/// matrix on each component.
pub fn forest_t1_t3() -> (RootedForest, WeightedTreeMatrix) {
    let a = build_t1_matrix(&t1_shape().groups).expect("valid");
    let b = build_t2_matrix(t3_shape().pendants, &t3_shape().groups).expect("valid");
    let mut layout: Vec<ShapeVertex> = Vec::new();
    t1_shape().emit(None, Part::Branch1(0), &mut layout);
    t3_shape().emit(None, Part::Branch2(0), &mut layout);
    let (forest, perm) = forest_of_layout(&layout);
    let sa = t1_shape().layout();
    let (fa, pa) = forest_of_layout(&sa);
    let sb = t3_shape().layout();
    let (fb, pb) = forest_of_layout(&sb);
    debug_assert!(fa == *a.forest() && fb == *b.forest());
    let n = layout.len();
    let mut diag = vec![Rational::zero(); n];
    let mut sq = vec![None; n];
    for i in 0..sa.len() {
        diag[perm[i]] = a.diag(pa[i]).clone();
        sq[perm[i]] = a.sq_weight(pa[i]).cloned();
    }
    for i in 0..sb.len() {
        let j = sa.len() + i;
        diag[perm[j]] = b.diag(pb[i]).clone();
        sq[perm[j]] = b.sq_weight(pb[i]).cloned();
    }
    let m = WeightedTreeMatrix::new(forest.clone(), diag, sq).expect("positive weights");
    (forest, m)
}

fn sample_rng(rng_seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    rng.set_stream(index as u64);
    rng
}

/// Draws `samples` matrices on `target`'s forest and records how many
/// distinct eigenvalues each has.
pub fn defectiveness_probe(
    target: ProbeTarget,
    samples: usize,
    rng_seed: u64,
    distribution: EntryDistribution,
    clustering_tolerance: f64,
) -> ProbeReport {
    let forest = target.forest();
    let counts: Vec<usize> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let m = distribution.sample(&forest, &mut sample_rng(rng_seed, i));
            distinct_count(&float_spectrum(&m), clustering_tolerance)
        })
        .collect();
    let mut histogram = BTreeMap::new();
    for c in counts {
        *histogram.entry(c).or_insert(0) += 1;
    }
    let min = histogram.keys().next().copied();
    let designed = target.designed_matrix();
    let spectrum = float_spectrum(&designed);
    let floor = target.expected_floor();
    ProbeReport {
        tree_id: target.id(),
        n: forest.n(),
        samples,
        rng_seed,
        distribution: distribution.id().into(),
        min_distinct_found: min,
        clustering_tolerance,
        histogram,
        expected_floor: floor,
        floor_respected: min.is_none_or(|m| m >= floor),
        designed_sample: Some(DesignedSample {
            label: "weighted-family construction".into(),
            distinct: distinct_count(&spectrum, clustering_tolerance),
            distinct_at_zero_gap: distinct_count(&spectrum, 0.0),
        }),
        evidence_only: true,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyCReport {
    pub probe: ProbeReport,
    /// Exact distinct eigenvalue counts of the designed matrix on each component.
    pub component_witness_distinct: Vec<usize>,
    /// Exact distinct eigenvalue count of the designed matrix on the forest.
    pub union_witness_distinct: usize,
    pub exclusivity: ExclusivityReport,
    pub passed: bool,
    pub evidence_only: bool,
}

/// Evidence that `T1(2,2) ∪ T2(1;2,2)` needs six distinct eigenvalues while
/// each component alone gets by with five.
pub fn property_c_counterexample(samples: usize, rng_seed: u64) -> PropertyCReport {
    let probe =
        defectiveness_probe(ProbeTarget::ForestT1T3, samples, rng_seed, EntryDistribution::Eighths, DEFAULT_CLUSTER_GAP);
    let a = build_t1_matrix(&t1_shape().groups).expect("valid");
    let b = build_t2_matrix(t3_shape().pendants, &t3_shape().groups).expect("valid");
    let exact_distinct = |m: &WeightedTreeMatrix| distinct_real_roots(&charpoly(m)).expect("nonzero");
    let witnesses = vec![exact_distinct(&a), exact_distinct(&b)];
    let union = exact_distinct(&forest_t1_t3().1);
    let exclusivity = check_exclusivity(samples.max(1), rng_seed);
    let passed = probe.floor_respected && witnesses == vec![5, 5] && union == 6 && exclusivity.passed;
    PropertyCReport {
        probe,
        component_witness_distinct: witnesses,
        union_witness_distinct: union,
        exclusivity,
        passed,
        evidence_only: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| Rational::from_int(x)).collect()
    }

    #[test]
    fn trace_identity_examples() {
        assert!(check_trace_identity_t1(&r(&[-2, -1, 0, 1, 2])).unwrap());
        assert!(check_trace_identity_t1(&r(&[-3, -1, 0, 1, 3])).unwrap());
        assert!(!check_trace_identity_t1(&r(&[0, 1, 2, 3, 5])).unwrap());
        assert_eq!(check_trace_identity_t1(&r(&[0, 2, 1, 3, 4])), Err(VerifyError::Unsorted));
        assert_eq!(check_trace_identity_t1(&r(&[0, 1])), Err(VerifyError::WrongLength { expected: 5, got: 2 }));
    }

    #[test]
    fn exclusivity_small() {
        let rep = check_exclusivity(200, 1);
        assert!(rep.passed, "{rep:?}");
        assert_eq!(rep.forced_case_a, "l4");
        assert_eq!(rep.forced_case_b, "l2");
        assert!(rep.samples_satisfying_t1 >= 100);
    }

    #[test]
    fn clustering() {
        assert_eq!(cluster(&[1.0, 1.0 + 1e-9, 2.0, 3.0], 1e-6).len(), 3);
        assert_eq!(distinct_count(&[0.0, 0.0, 1.0], 0.0), 2);
        assert_eq!(distinct_count(&[], 1e-6), 0);
    }

    #[test]
    fn random_trees_respect_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let t = random_rooted_tree(&mut rng, 14, 4);
            assert!(t.n() <= 14 && t.depth() <= 4 && t.is_tree());
        }
    }

    #[test]
    fn corpus_is_reproducible() {
        assert_eq!(random_corpus(5, 10, 3, 9), random_corpus(5, 10, 3, 9));
    }

    #[test]
    fn ledgers_small() {
        for rep in [lemma41_suite(5, 1), lemma42_suite(5, 2), lemma43_suite(5, 3), rational_family_levels(5, 4)] {
            assert!(rep.passed, "{rep:?}");
        }
    }

    #[test]
    fn empty_probe() {
        let rep = defectiveness_probe(
            ProbeTarget::Counterexample(SeedId::S7_8),
            0,
            1,
            EntryDistribution::Eighths,
            DEFAULT_CLUSTER_GAP,
        );
        assert!(rep.histogram.is_empty());
        assert_eq!(rep.min_distinct_found, None);
        assert!(rep.floor_respected);
    }

    #[test]
    fn forest_t1_t3_shape() {
        let (f, m) = forest_t1_t3();
        assert_eq!(f.n(), 15);
        assert_eq!(f.roots().len(), 2);
        assert_eq!(m.n(), 15);
    }

    #[test]
    fn probe_targets_parse() {
        assert_eq!(ProbeTarget::parse("S7-8"), Some(ProbeTarget::Counterexample(SeedId::S7_8)));
        assert_eq!(ProbeTarget::parse("forest-T1T3"), Some(ProbeTarget::ForestT1T3));
        assert_eq!(ProbeTarget::parse("S7-1"), None);
    }
}
