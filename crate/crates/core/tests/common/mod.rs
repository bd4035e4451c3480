#![allow(dead_code)]

use rand::Rng;
use treespectra::tree::RootedForest;
use treespectra::{Rational, WeightedTreeMatrix};

pub fn q(n: i64, d: i64) -> Rational {
    Rational::frac(n, d)
}

pub fn small_rational(rng: &mut impl Rng, bound: i64) -> Rational {
    q(rng.gen_range(-bound..=bound), rng.gen_range(1..=bound))
}

pub fn random_tree(rng: &mut impl Rng, n: usize) -> RootedForest {
    let parents: Vec<Option<usize>> = (0..n).map(|v| if v == 0 { None } else { Some(rng.gen_range(0..v)) }).collect();
    RootedForest::from_parents(&parents).unwrap().0
}

/// Random tree matrix with numerators and denominators bounded by `bound`.
pub fn random_matrix(rng: &mut impl Rng, max_n: usize, bound: i64) -> WeightedTreeMatrix {
    let n = rng.gen_range(1..=max_n);
    let t = random_tree(rng, n);
    let diag = (0..n).map(|_| small_rational(rng, bound)).collect();
    let sq = (0..n).map(|v| t.parent(v).map(|_| q(rng.gen_range(1..=bound), rng.gen_range(1..=bound)))).collect();
    WeightedTreeMatrix::new(t, diag, sq).unwrap()
}

/// Like [`random_matrix`] but every squared weight is the square of a rational.
pub fn random_square_weight_matrix(rng: &mut impl Rng, max_n: usize, bound: i64) -> (WeightedTreeMatrix, Vec<Option<Rational>>) {
    let n = rng.gen_range(1..=max_n);
    let t = random_tree(rng, n);
    let diag = (0..n).map(|_| small_rational(rng, bound)).collect();
    let roots: Vec<Option<Rational>> =
        (0..n).map(|v| t.parent(v).map(|_| q(rng.gen_range(1..=bound), rng.gen_range(1..=bound)))).collect();
    let sq = roots.iter().map(|r| r.as_ref().map(|r| r * r)).collect();
    (WeightedTreeMatrix::new(t, diag, sq).unwrap(), roots)
}

/// Dense `x I - M` evaluated at a rational `x`, with the off-diagonal entries
/// `sign * entry` on every edge.
pub fn dense_shifted(m: &WeightedTreeMatrix, entries: &[Option<Rational>], signs: &[bool], x: &Rational) -> Vec<Vec<Rational>> {
    let n = m.n();
    let mut a = vec![vec![Rational::zero(); n]; n];
    for v in 0..n {
        a[v][v] = x - m.diag(v);
        if let Some(p) = m.forest().parent(v) {
            let e = entries[v].clone().unwrap();
            let e = if signs[v] { -e } else { e };
            a[v][p] = -e.clone();
            a[p][v] = -e;
        }
    }
    a
}

/// Determinant by fraction Gaussian elimination with row swaps.
pub fn det_gauss(mut a: Vec<Vec<Rational>>) -> Rational {
    let n = a.len();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rational::zero();
        };
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det = &det * &p;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &p;
            for c in col..n {
                let delta = &f * &a[col][c];
                a[r][c] -= &delta;
            }
        }
    }
    det
}

/// Determinant by the Leibniz permutation expansion.
pub fn det_leibniz(a: &[Vec<Rational>]) -> Rational {
    fn rec(a: &[Vec<Rational>], row: usize, used: &mut [bool], odd: bool) -> Rational {
        let n = a.len();
        if row == n {
            return if odd { -Rational::one() } else { Rational::one() };
        }
        let mut total = Rational::zero();
        for c in 0..n {
            if used[c] || a[row][c].is_zero() {
                continue;
            }
            // free columns left of c are taken by later rows: one inversion each
            let inversions = (0..c).filter(|&k| !used[k]).count();
            used[c] = true;
            let sub = rec(a, row + 1, used, odd ^ (inversions % 2 == 1));
            used[c] = false;
            total += &(&a[row][c] * &sub);
        }
        total
    }
    rec(a, 0, &mut vec![false; a.len()], false)
}
