mod common;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treespectra::charpoly::charpoly;
use treespectra::diag::{diagonalize, diagonalize_with, level_zero_table, locate};
use treespectra::tree::{random_spec, realize_unfolding, RootedForest, SeedId};
use treespectra::verifier::check_trace_identity_t1;
use treespectra::{Rational, ScalarBackend, TreeError, WeightedTreeMatrix};

fn matrix_from_seed(seed: u64, max_n: usize) -> WeightedTreeMatrix {
    random_matrix(&mut ChaCha8Rng::seed_from_u64(seed), max_n, 4)
}

/// Matrix with many repeated entries, so zero children are common.
fn degenerate_matrix(seed: u64) -> WeightedTreeMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=12);
    let t = random_tree(&mut rng, n);
    let diag = (0..n).map(|_| Rational::from_int(rng.gen_range(-1..=1))).collect();
    let sq = (0..n).map(|v| t.parent(v).map(|_| Rational::from_int(rng.gen_range(1..=2)))).collect();
    WeightedTreeMatrix::new(t, diag, sq).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn inertia_accounts_for_every_vertex(seed in any::<u64>(), lam in -3i64..=3) {
        let m = degenerate_matrix(seed);
        let out = diagonalize(&m, &Rational::from_int(-lam), &ScalarBackend::Exact);
        let i = out.inertia;
        prop_assert_eq!(i.positive + i.negative + i.zero, m.n());
        prop_assert_eq!(out.zeros_by_level.values().sum::<usize>(), i.zero);
        prop_assert_eq!(out.zeros_by_level.len(), m.forest().depth() + 1);
    }

    #[test]
    fn tie_break_does_not_matter(seed in any::<u64>(), pick_seed in any::<u64>(), lam in -3i64..=3) {
        let m = degenerate_matrix(seed);
        let x = Rational::from_int(-lam);
        let base = diagonalize(&m, &x, &ScalarBackend::Exact);
        let mut rng = ChaCha8Rng::seed_from_u64(pick_seed);
        let other = diagonalize_with(&m, &x, &ScalarBackend::Exact, |z| z[rng.gen_range(0..z.len())]);
        prop_assert_eq!(base.inertia, other.inertia);
        prop_assert_eq!(base.zeros_by_level, other.zeros_by_level);
    }

    #[test]
    fn level_tables_sum_to_multiplicity(seed in any::<u64>(), lam in -3i64..=3) {
        let m = degenerate_matrix(seed);
        let lam = Rational::from_int(lam);
        for j in 0..=m.forest().depth() {
            let table = level_zero_table(&m, j, &lam, &ScalarBackend::Exact).unwrap();
            let sub = m.restrict_to_levels(j).unwrap();
            prop_assert_eq!(table.iter().sum::<usize>(), locate(&sub, &lam, &ScalarBackend::Exact).mult);
        }
        prop_assert!(level_zero_table(&m, m.forest().depth() + 1, &lam, &ScalarBackend::Exact).is_err());
    }

    #[test]
    fn counts_below_are_monotone(seed in any::<u64>(), a in -20i64..20, b in -20i64..20) {
        let m = matrix_from_seed(seed, 10);
        let (lo, hi) = (a.min(b), a.max(b));
        let l = locate(&m, &Rational::frac(lo, 4), &ScalarBackend::Exact);
        let h = locate(&m, &Rational::frac(hi, 4), &ScalarBackend::Exact);
        prop_assert!(l.below <= h.below);
        prop_assert!(l.above >= h.above);
        prop_assert_eq!(l.below + l.mult + l.above, m.n());
    }

    #[test]
    fn forest_charpoly_is_product(s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = matrix_from_seed(s1, 6);
        let b = matrix_from_seed(s2, 6);
        let na = a.n();
        let mut parents: Vec<Option<usize>> = a.forest().parents().to_vec();
        parents.extend(b.forest().parents().iter().map(|p| p.map(|p| p + na)));
        let (f, perm) = RootedForest::from_parents(&parents).unwrap();
        let mut diag = vec![Rational::zero(); f.n()];
        let mut sq = vec![None; f.n()];
        for v in 0..na {
            diag[perm[v]] = a.diag(v).clone();
            sq[perm[v]] = a.sq_weight(v).cloned();
        }
        for v in 0..b.n() {
            diag[perm[v + na]] = b.diag(v).clone();
            sq[perm[v + na]] = b.sq_weight(v).cloned();
        }
        let u = WeightedTreeMatrix::new(f, diag, sq).unwrap();
        prop_assert_eq!(charpoly(&u), charpoly(&a).mul(&charpoly(&b)));
    }

    #[test]
    fn matrix_json_round_trip(seed in any::<u64>()) {
        let m = matrix_from_seed(seed, 12);
        let text = serde_json::to_string(&m.to_json()).unwrap();
        let (back, _) = WeightedTreeMatrix::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        prop_assert_eq!(charpoly(&back), charpoly(&m));
        prop_assert_eq!(back.to_json(), m.to_json());
    }

    #[test]
    fn tree_dsl_round_trip(seed in any::<u64>()) {
        let t = random_tree(&mut ChaCha8Rng::seed_from_u64(seed), 1 + (seed % 20) as usize);
        let text = t.to_dsl();
        prop_assert_eq!(text.matches('(').count(), t.n());
        let back = RootedForest::from_dsl(&text).unwrap();
        prop_assert_eq!(back.canonical_string(), t.canonical_string());
        prop_assert_eq!(back.n(), t.n());
    }

    #[test]
    fn trace_identity_is_shift_invariant(mut v in proptest::collection::btree_set(-50i64..50, 5), c in -20i64..20, d in 1i64..6) {
        let vals: Vec<Rational> = std::mem::take(&mut v).into_iter().map(|x| Rational::frac(x, d)).collect();
        let shifted: Vec<Rational> = vals.iter().map(|x| x + Rational::frac(c, 3)).collect();
        prop_assert_eq!(check_trace_identity_t1(&vals).unwrap(), check_trace_identity_t1(&shifted).unwrap());
    }

    #[test]
    fn unfoldings_have_diameter_seven(seed in any::<u64>(), which in 0usize..3) {
        let seed_id = SeedId::ALL[which];
        let spec = random_spec(seed_id, &mut ChaCha8Rng::seed_from_u64(seed), 4);
        let t = realize_unfolding(&spec).unwrap();
        prop_assert_eq!(t.diameter().unwrap(), 7);
        let branch1: usize = spec.branch1_params.iter().map(|t| 1 + t.len() + t.iter().sum::<u32>() as usize).sum();
        let branch2: usize = spec
            .branch2_params
            .iter()
            .map(|b| 1 + b.t0 as usize + b.t.len() + b.t.iter().sum::<u32>() as usize)
            .sum();
        let center = spec.center_shape().vertex_count();
        prop_assert_eq!(t.n(), center + branch1 + branch2);
        prop_assert_eq!(t.root().unwrap(), t.n() - 1);
    }

    #[test]
    fn accepted_cbds_preserve_diameter(seed in any::<u64>(), s in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..12);
        let t = random_tree(&mut rng, n);
        let v = rng.gen_range(0..t.n());
        let branches = t.branches_at(v).unwrap();
        let i = rng.gen_range(0..branches.len());
        let before = t.diameter().unwrap();
        match t.cbd(v, i, s) {
            Ok(u) => {
                prop_assert_eq!(u.n(), t.n() + s * branches[i].tree.n());
                prop_assert_eq!(u.diameter().unwrap(), before);
            }
            Err(TreeError::DiameterChanged { before: b, after }) => {
                prop_assert_eq!(b, before);
                prop_assert!(after > before);
            }
            Err(e) => prop_assert!(false, "unexpected error {e:?}"),
        }
    }
}
