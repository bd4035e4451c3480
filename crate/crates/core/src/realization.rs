//! Weighted matrices on the unfolding families and their eigenvalue certificate.
//!
//! Each family lives on a [`StarShape`]: a root, optional pendant leaves, and
//! middle vertices each carrying a group of leaves. A family fixes the diagonal
//! value of each slot and the *total* squared weight of each slot class, which
//! is split evenly across the class (so the `p` middle edges of a shape with
//! total 8 each get `8/p`).

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::arith::{Rational, ScalarBackend};
use crate::charpoly::{gershgorin_bound, scaled_charpoly, RootCounter};
use crate::diag::{locate, WeightedTreeMatrix};
use crate::error::RealizationError;
use crate::tree::{
    forest_of_layout, realize_unfolding, Part, SeedId, SeedPart, ShapeVertex, Slot, StarShape, UnfoldingSpec,
};

/// The rational eigenvalues shared by every assembled matrix.
pub const LAMBDA: [i64; 6] = [-3, -1, 0, 1, 2, 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    T1,
    T2,
    P2,
    P3,
    P4,
}

/// `(diagonal, total squared weight)` per slot class.
struct FamilyWeights {
    root: i64,
    pendant: (i64, i64),
    middle: (i64, i64),
    leaf: (i64, i64),
}

impl Family {
    fn weights(self) -> FamilyWeights {
        match self {
            Family::T1 => FamilyWeights { root: 0, pendant: (0, 0), middle: (0, 8), leaf: (0, 1) },
            Family::T2 => FamilyWeights { root: -1, pendant: (-1, 1), middle: (1, 5), leaf: (0, 2) },
            Family::P2 => FamilyWeights { root: 2, pendant: (0, 3), middle: (0, 0), leaf: (0, 0) },
            Family::P3 => FamilyWeights { root: -1, pendant: (0, 0), middle: (-2, 18), leaf: (-1, 2) },
            Family::P4 => FamilyWeights { root: 0, pendant: (0, 1), middle: (-2, 7), leaf: (-1, 2) },
        }
    }

    pub fn of_seed_part(part: &SeedPart) -> Family {
        match part {
            SeedPart::P2 { .. } => Family::P2,
            SeedPart::P3 { .. } => Family::P3,
            SeedPart::P4 { .. } => Family::P4,
        }
    }

    fn allows(self, shape: &StarShape) -> bool {
        let w = self.weights();
        (shape.pendants == 0 || w.pendant.1 > 0) && (shape.groups.is_empty() || w.middle.1 > 0)
    }
}

/// Total squared weight on the edges from the central vertex to the roots
/// of the first-type branches; each of the `q1` edges gets `total / q1`.
pub fn branch1_coupling_total(seed: SeedId) -> i64 {
    match seed {
        SeedId::S7_8 => 5,
        SeedId::S7_9 => 8,
        SeedId::S7_7 => 2,
    }
}

fn slot_weight(family: Family, shape: &StarShape, slot: Slot) -> (Rational, Option<Rational>) {
    let w = family.weights();
    let split = |total: i64, count: usize| Rational::frac(total, count as i64);
    match slot {
        Slot::Root => (Rational::from_int(w.root), None),
        Slot::Pendant => (Rational::from_int(w.pendant.0), Some(split(w.pendant.1, shape.pendants as usize))),
        Slot::Middle { .. } => (Rational::from_int(w.middle.0), Some(split(w.middle.1, shape.groups.len()))),
        Slot::Leaf { group } => (Rational::from_int(w.leaf.0), Some(split(w.leaf.1, shape.groups[group] as usize))),
    }
}

fn matrix_of_layout(
    layout: &[ShapeVertex],
    mut weight: impl FnMut(&ShapeVertex) -> (Rational, Option<Rational>),
) -> WeightedTreeMatrix {
    let (forest, perm) = forest_of_layout(layout);
    let n = layout.len();
    let mut diag = vec![Rational::zero(); n];
    let mut sq = vec![None; n];
    for (i, v) in layout.iter().enumerate() {
        let (d, w) = weight(v);
        diag[perm[i]] = d;
        sq[perm[i]] = w;
    }
    WeightedTreeMatrix::new(forest, diag, sq).expect("family weights are positive")
}

/// The family's matrix on a single shape, rooted at the shape's root.
pub fn build_family_matrix(family: Family, shape: &StarShape) -> Result<WeightedTreeMatrix, RealizationError> {
    if shape.groups.contains(&0) {
        return Err(RealizationError::InvalidParams("group sizes must be at least 1".into()));
    }
    if !family.allows(shape) {
        return Err(RealizationError::InvalidParams(format!("{family:?} does not take shape {shape:?}")));
    }
    Ok(matrix_of_layout(&shape.layout(), |v| slot_weight(family, shape, v.slot)))
}

pub fn build_t1_matrix(t: &[u32]) -> Result<WeightedTreeMatrix, RealizationError> {
    if t.is_empty() {
        return Err(RealizationError::InvalidParams("t must be nonempty".into()));
    }
    build_family_matrix(Family::T1, &StarShape::new(0, t.to_vec()))
}

pub fn build_t2_matrix(t0: u32, t: &[u32]) -> Result<WeightedTreeMatrix, RealizationError> {
    if t0 == 0 || t.is_empty() {
        return Err(RealizationError::InvalidParams("t0 must be at least 1 and t nonempty".into()));
    }
    build_family_matrix(Family::T2, &StarShape::new(t0, t.to_vec()))
}

pub fn build_t0_matrix(part: &SeedPart) -> Result<WeightedTreeMatrix, RealizationError> {
    let shape = part.shape();
    if shape.pendants == 0 && matches!(part, SeedPart::P2 { .. } | SeedPart::P4 { .. }) {
        return Err(RealizationError::InvalidParams("s0 must be at least 1".into()));
    }
    if shape.groups.is_empty() && matches!(part, SeedPart::P3 { .. } | SeedPart::P4 { .. }) {
        return Err(RealizationError::InvalidParams("s must be nonempty".into()));
    }
    build_family_matrix(Family::of_seed_part(part), &shape)
}

/// The full matrix on the unfolding `spec`. `coupling2` is the (signed)
/// entry joining the central vertex to each second-type branch root; it
/// defaults to 1 and only its square is stored.
pub fn assemble(spec: &UnfoldingSpec, coupling2: Option<&Rational>) -> Result<WeightedTreeMatrix, RealizationError> {
    spec.validate()?;
    let c2 = match coupling2 {
        Some(c) if c.is_zero() => return Err(RealizationError::ZeroCoupling),
        Some(c) => c * c,
        None => Rational::one(),
    };
    let c1 = Rational::frac(branch1_coupling_total(spec.seed), spec.q1 as i64);
    let center = Family::of_seed_part(&spec.s0_params);
    Ok(matrix_of_layout(&spec.layout(), |v| {
        let shape = spec.shape_of(v.part);
        let family = match v.part {
            Part::Center => center,
            Part::Branch1(_) => Family::T1,
            Part::Branch2(_) => Family::T2,
        };
        let (d, w) = slot_weight(family, &shape, v.slot);
        let w = match (v.part, v.slot) {
            (Part::Branch1(_), Slot::Root) => Some(c1.clone()),
            (Part::Branch2(_), Slot::Root) => Some(c2.clone()),
            _ => w,
        };
        (d, w)
    }))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizationCertificate {
    pub spec: UnfoldingSpec,
    pub n: usize,
    pub rational_multiplicities: BTreeMap<Rational, usize>,
    pub count_above_3: usize,
    pub count_below_neg3: usize,
    pub distinct_count_bound: usize,
    /// Integer `B` with every eigenvalue in `[-B, B]`.
    pub gershgorin_bound: String,
}

/// Re-derives the eigenvalue picture of `m` and checks that it has at most
/// eight distinct eigenvalues: the six values of [`LAMBDA`] plus one simple
/// eigenvalue on each side of `[-3, 3]`.
///
/// Multiplicities at [`LAMBDA`] come from inertia and are cross-checked by
/// deflating the characteristic polynomial; the counts outside `[-3, 3]` come
/// from Sturm chains of the deflated polynomial and are cross-checked against
/// inertia at `±3`.
pub fn certify(m: &WeightedTreeMatrix, spec: &UnfoldingSpec) -> Result<RealizationCertificate, RealizationError> {
    let fail = |msg: String| Err(RealizationError::Certificate(msg));
    let tree = realize_unfolding(spec)?;
    if tree.canonical_string() != m.forest().canonical_string() {
        return fail("matrix pattern is not the tree of the spec".into());
    }
    let n = m.n();
    let exact = ScalarBackend::Exact;

    let scaled = scaled_charpoly(m);
    let c = &scaled.scale;
    let mut residual = scaled.poly.clone();
    let mut mults = BTreeMap::new();
    for &lam in &LAMBDA {
        let lam_q = Rational::from_int(lam);
        let mult = locate(m, &lam_q, &exact).mult;
        let (deflated, rest) = residual.deflate_integer_root(&(c * BigInt::from(lam)));
        if deflated != mult {
            return fail(format!("multiplicity of {lam}: inertia gives {mult}, characteristic polynomial gives {deflated}"));
        }
        residual = rest;
        mults.insert(lam_q, mult);
    }

    let b = gershgorin_bound(m);
    let bc = Rational::from_int(&b * c);
    let three_c = Rational::from_int(c * BigInt::from(3));
    let (above, below, inner) = if residual.degree() == 0 {
        (0, 0, 0)
    } else {
        let counter = RootCounter::new(&residual)?;
        let above = counter.count(&three_c, &bc)?;
        let below = counter.count(&(-&bc - Rational::one()), &-&three_c)?;
        let inner = counter.count(&-&three_c, &three_c)?;
        (above, below, inner)
    };

    let dual_above = locate(m, &Rational::from_int(3), &exact).above;
    let dual_below = locate(m, &Rational::from_int(-3), &exact).below;
    if dual_above != above || dual_below != below {
        return fail(format!(
            "outer counts disagree: Sturm gives ({above} above 3, {below} below -3), inertia gives ({dual_above}, {dual_below})"
        ));
    }
    let total: usize = mults.values().sum();
    if total + above + below != n {
        return fail(format!(
            "{total} eigenvalues at the rational points, {above} above 3, {below} below -3 and {inner} elsewhere in (-3, 3); n = {n}"
        ));
    }
    let bound = mults.values().filter(|&&k| k > 0).count() + above + below;
    if bound > 8 {
        return fail(format!("{bound} distinct eigenvalues possible"));
    }
    Ok(RealizationCertificate {
        spec: spec.clone(),
        n,
        rational_multiplicities: mults,
        count_above_3: above,
        count_below_neg3: below,
        distinct_count_bound: bound,
        gershgorin_bound: b.to_string(),
    })
}
