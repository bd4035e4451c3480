//! Bottom-up congruence diagonalization of `M + xI` for tree-patterned `M`.
//!
//! A matrix is stored structurally: one diagonal value per vertex and, for
//! every non-root vertex, the *square* of the entry linking it to its parent.
//! The algorithm never needs more, so entries like `2√2/√p` stay rational.
//!
//! By Sylvester's law of inertia, the signs of the diagonal returned by
//! [`diagonalize`]`(M, -λ)` count the eigenvalues of `M` above, at and below `λ`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::arith::{Rational, Scalar, ScalarBackend};
use crate::error::{DiagError, TreeError};
use crate::tree::RootedForest;

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedTreeMatrix<S = Rational> {
    forest: RootedForest,
    diag: Vec<S>,
    sq: Vec<Option<S>>,
}

impl<S: Scalar> WeightedTreeMatrix<S> {
    /// `sq[v]` is the squared weight of the edge from `v` to its parent and
    /// must be present exactly for non-root vertices.
    pub fn new(forest: RootedForest, diag: Vec<S>, sq: Vec<Option<S>>) -> Result<Self, DiagError> {
        let n = forest.n();
        if diag.len() != n || sq.len() != n {
            return Err(DiagError::InvalidMatrix(format!(
                "{n} vertices but {} diagonal and {} edge entries",
                diag.len(),
                sq.len()
            )));
        }
        for v in 0..n {
            match (forest.parent(v), &sq[v]) {
                (Some(_), Some(w)) if *w > S::zero() => {}
                (Some(p), Some(_)) => {
                    return Err(DiagError::InvalidMatrix(format!("edge {v}-{p} needs a positive squared weight")))
                }
                (Some(p), None) => return Err(DiagError::InvalidMatrix(format!("edge {v}-{p} has no weight"))),
                (None, Some(_)) => return Err(DiagError::InvalidMatrix(format!("root {v} carries an edge weight"))),
                (None, None) => {}
            }
        }
        Ok(WeightedTreeMatrix { forest, diag, sq })
    }

    /// Builds from an undirected edge list, orienting every component away
    /// from `root` (or from its smallest vertex). Returns the matrix and the
    /// map from input ids to canonical ids.
    pub fn from_edges(
        diag: Vec<S>,
        edges: &[(usize, usize, S)],
        root: Option<usize>,
    ) -> Result<(Self, Vec<usize>), DiagError> {
        let n = diag.len();
        if n == 0 {
            return Err(TreeError::Empty.into());
        }
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (i, (u, v, _)) in edges.iter().enumerate() {
            for &x in [u, v] {
                if x >= n {
                    return Err(TreeError::InvalidVertex(x).into());
                }
            }
            if u == v {
                return Err(DiagError::InvalidMatrix(format!("self-loop at {u}")));
            }
            adj[*u].push((*v, i));
            adj[*v].push((*u, i));
        }
        if let Some(r) = root {
            if r >= n {
                return Err(TreeError::InvalidVertex(r).into());
            }
        }
        let mut parent = vec![None; n];
        let mut up_edge = vec![None; n];
        let mut seen = vec![false; n];
        let starts = root.into_iter().chain(0..n);
        for s in starts {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &(w, e) in &adj[u] {
                    if up_edge[u] == Some(e) {
                        continue;
                    }
                    if seen[w] {
                        return Err(DiagError::InvalidMatrix("edges contain a cycle or a repeated edge".into()));
                    }
                    seen[w] = true;
                    parent[w] = Some(u);
                    up_edge[w] = Some(e);
                    stack.push(w);
                }
            }
        }
        let (forest, perm) = RootedForest::from_parents(&parent)?;
        let mut d = vec![S::zero(); n];
        let mut sq = vec![None; n];
        for old in 0..n {
            d[perm[old]] = diag[old].clone();
            sq[perm[old]] = up_edge[old].map(|e| edges[e].2.clone());
        }
        Ok((Self::new(forest, d, sq)?, perm))
    }

    pub fn forest(&self) -> &RootedForest {
        &self.forest
    }

    pub fn n(&self) -> usize {
        self.forest.n()
    }

    pub fn diag(&self, v: usize) -> &S {
        &self.diag[v]
    }

    pub fn diagonal(&self) -> &[S] {
        &self.diag
    }

    /// Squared weight of the edge from `v` to its parent.
    pub fn sq_weight(&self, v: usize) -> Option<&S> {
        self.sq[v].as_ref()
    }

    /// `(child, parent, squared weight)` for every edge.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, &S)> + '_ {
        (0..self.n()).filter_map(|v| Some((v, self.forest.parent(v)?, self.sq[v].as_ref()?)))
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> WeightedTreeMatrix<T> {
        WeightedTreeMatrix {
            forest: self.forest.clone(),
            diag: self.diag.iter().map(&f).collect(),
            sq: self.sq.iter().map(|w| w.as_ref().map(&f)).collect(),
        }
    }

    pub fn to_f64(&self) -> WeightedTreeMatrix<f64> {
        self.map(|v| v.to_f64())
    }

    /// New matrix with the same pattern and weights but another diagonal.
    pub fn with_diagonal(&self, diag: Vec<S>) -> Result<Self, DiagError> {
        Self::new(self.forest.clone(), diag, self.sq.clone())
    }

    /// Principal submatrix on levels `0..=j` (the forest `T_j`). Ids are kept.
    pub fn restrict_to_levels(&self, j: usize) -> Result<Self, DiagError> {
        if j > self.forest.depth() {
            return Err(DiagError::LevelOutOfRange { j, depth: self.forest.depth() });
        }
        let forest = self.forest.restrict_to_levels(j)?;
        let m = forest.n();
        let sq = (0..m).map(|v| forest.parent(v).and(self.sq[v].clone())).collect();
        Self::new(forest, self.diag[..m].to_vec(), sq)
    }

    /// Principal submatrix on the vertices with `keep[v]`; returns the id map.
    pub fn induced(&self, keep: &[bool]) -> Result<(Self, Vec<Option<usize>>), DiagError> {
        let (forest, map) = self.forest.induced(keep)?;
        let m = forest.n();
        let mut diag = vec![S::zero(); m];
        let mut sq = vec![None; m];
        for (old, new) in map.iter().enumerate() {
            if let Some(new) = *new {
                diag[new] = self.diag[old].clone();
                if forest.parent(new).is_some() {
                    sq[new] = self.sq[old].clone();
                }
            }
        }
        Ok((Self::new(forest, diag, sq)?, map))
    }

    /// Principal submatrix with vertex `v` deleted.
    pub fn delete_vertex(&self, v: usize) -> Result<(Self, Vec<Option<usize>>), DiagError> {
        self.forest.check_vertex(v)?;
        if self.n() == 1 {
            return Err(TreeError::Empty.into());
        }
        let keep: Vec<bool> = (0..self.n()).map(|u| u != v).collect();
        self.induced(&keep)
    }
}

/// Counts of positive, negative and zero diagonal entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagOutcome<S = Rational> {
    pub d: Vec<S>,
    pub inertia: Inertia,
    /// Zero count on every level `0..=depth`.
    pub zeros_by_level: BTreeMap<usize, usize>,
    /// `(child, parent)` edges cut when a zero child was absorbed.
    pub deleted_edges: Vec<(usize, usize)>,
    pub root_values: BTreeMap<usize, S>,
}

/// Runs the diagonalization with the smallest-id rule for choosing among
/// several zero children.
pub fn diagonalize<S: Scalar>(m: &WeightedTreeMatrix<S>, x: &S, backend: &ScalarBackend) -> DiagOutcome<S> {
    diagonalize_with(m, x, backend, |zeros| zeros[0])
}

/// Like [`diagonalize`] but `pick` chooses which zero child to absorb. It
/// receives the zero children in increasing id order and must return one of them.
pub fn diagonalize_with<S: Scalar>(
    m: &WeightedTreeMatrix<S>,
    x: &S,
    backend: &ScalarBackend,
    mut pick: impl FnMut(&[usize]) -> usize,
) -> DiagOutcome<S> {
    let f = &m.forest;
    let n = f.n();
    let mut d: Vec<S> = m.diag.iter().map(|a| a.clone() + x.clone()).collect();
    let mut attached = vec![true; n];
    let mut deleted_edges = Vec::new();
    let mut zeros = Vec::new();
    let two = S::from_i64(2);

    for k in 0..n {
        let live: Vec<usize> = f.children(k).iter().copied().filter(|&c| attached[c]).collect();
        if live.is_empty() {
            continue;
        }
        zeros.clear();
        zeros.extend(live.iter().copied().filter(|&c| d[c].is_zero_under(backend)));
        if zeros.is_empty() {
            let mut acc = d[k].clone();
            for &c in &live {
                let w = m.sq[c].clone().expect("child edge weight");
                acc = acc - w / d[c].clone();
            }
            d[k] = acc;
        } else {
            let j = pick(&zeros);
            assert!(zeros.contains(&j), "tie-break must return a zero child");
            let w = m.sq[j].clone().expect("child edge weight");
            d[k] = -(w / two.clone());
            d[j] = two.clone();
            if let Some(p) = f.parent(k) {
                attached[k] = false;
                deleted_edges.push((k, p));
            }
        }
    }

    let mut inertia = Inertia { positive: 0, negative: 0, zero: 0 };
    let mut zeros_by_level: BTreeMap<usize, usize> = (0..=f.depth()).map(|l| (l, 0)).collect();
    for (v, value) in d.iter().enumerate() {
        match value.sign_under(backend) {
            std::cmp::Ordering::Greater => inertia.positive += 1,
            std::cmp::Ordering::Less => inertia.negative += 1,
            std::cmp::Ordering::Equal => {
                inertia.zero += 1;
                *zeros_by_level.get_mut(&f.level(v)).expect("level present") += 1;
            }
        }
    }
    let root_values = f.roots().into_iter().map(|r| (r, d[r].clone())).collect();
    DiagOutcome { d, inertia, zeros_by_level, deleted_edges, root_values }
}

/// Eigenvalue counts of `M` relative to `λ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Location {
    pub below: usize,
    pub mult: usize,
    pub above: usize,
}

pub fn locate<S: Scalar>(m: &WeightedTreeMatrix<S>, lambda: &S, backend: &ScalarBackend) -> Location {
    let out = diagonalize(m, &-lambda.clone(), backend);
    Location { below: out.inertia.negative, mult: out.inertia.zero, above: out.inertia.positive }
}

/// `table[ℓ]` is the number of zeros on level `ℓ` when diagonalizing the
/// restriction `M[T_j]` at `-λ`, for `ℓ = 0..=j`.
pub fn level_zero_table<S: Scalar>(
    m: &WeightedTreeMatrix<S>,
    j: usize,
    lambda: &S,
    backend: &ScalarBackend,
) -> Result<Vec<usize>, DiagError> {
    let sub = m.restrict_to_levels(j)?;
    let out = diagonalize(&sub, &-lambda.clone(), backend);
    Ok((0..=j).map(|l| out.zeros_by_level.get(&l).copied().unwrap_or(0)).collect())
}

/// Smallest level distance from a root to a vertex that ends with value zero,
/// or `None` when `λ` is not an eigenvalue.
pub fn root_zero_distance<S: Scalar>(m: &WeightedTreeMatrix<S>, lambda: &S, backend: &ScalarBackend) -> Option<usize> {
    let out = diagonalize(m, &-lambda.clone(), backend);
    (0..m.n())
        .filter(|&v| out.d[v].is_zero_under(backend))
        .map(|v| m.forest.dist_to_root(v))
        .min()
}

/// Number of candidates with a zero on the top level of `T_{k-1}`.
///
/// The answer equals `N(M)` only when `candidates` lists, without
/// repetition, every `λ` that can produce such a zero.
pub fn count_n<S: Scalar>(m: &WeightedTreeMatrix<S>, candidates: &[S], backend: &ScalarBackend) -> usize {
    let k = m.forest.depth();
    if k == 0 {
        return 0;
    }
    candidates
        .iter()
        .filter(|lambda| level_zero_table(m, k - 1, lambda, backend).expect("level in range")[k - 1] > 0)
        .count()
}

/// Number of candidates giving a zero on the top level of the whole forest.
pub fn count_top_level_zeros<S: Scalar>(m: &WeightedTreeMatrix<S>, candidates: &[S], backend: &ScalarBackend) -> usize {
    let k = m.forest.depth();
    candidates
        .iter()
        .filter(|lambda| {
            let out = diagonalize(m, &-(*lambda).clone(), backend);
            out.zeros_by_level[&k] > 0
        })
        .count()
}

/// One edge of the matrix JSON form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub u: usize,
    pub v: usize,
    pub w2: Rational,
}

/// Matrix JSON `{diag: [...], edges: [{u, v, w2}], root}` with fraction strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub diag: Vec<Rational>,
    pub edges: Vec<EdgeJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<usize>,
}

impl WeightedTreeMatrix<Rational> {
    pub fn to_json(&self) -> MatrixJson {
        MatrixJson {
            diag: self.diag.clone(),
            edges: self.edges().map(|(c, p, w)| EdgeJson { u: p, v: c, w2: w.clone() }).collect(),
            root: self.forest.root().ok(),
        }
    }

    pub fn from_json(json: &MatrixJson) -> Result<(Self, Vec<usize>), DiagError> {
        let edges: Vec<(usize, usize, Rational)> = json.edges.iter().map(|e| (e.u, e.v, e.w2.clone())).collect();
        Self::from_edges(json.diag.clone(), &edges, json.root)
    }
}
