//! Invariants over randomly generated canonical tables and schedules.

mod common;

use proptest::prelude::*;

use connsum::assembly::{assemble, discrete_growth, discrete_growth_table, level_growth, Mode};
use connsum::catalog::Catalog;
use connsum::growth::{check_bgd, default_lambda, same_growth_type, CanonicalGrowthFunction, GrowthFunction};
use connsum::pieces::{make_block, CatalogBounds, ProfileShape, Topology};
use connsum::simulate::{ball_volume_table, to_metric_graph};
use connsum::tree::{build_tree, tree_growth, LevelSet, TreeError};

/// Increments start at 2 and move by at most 3 per step, never below 2 nor
/// above twice the previous one.
fn canonical_table(max_horizon: usize) -> impl Strategy<Value = CanonicalGrowthFunction> {
    prop::collection::vec(-3i64..=3, 4..max_horizon).prop_map(|steps| {
        let mut incs = vec![2u64];
        for s in steps {
            let prev = *incs.last().unwrap() as i64;
            incs.push((prev + s).clamp(2, 2 * prev) as u64);
        }
        let v = GrowthFunction::from_increments(1, &incs);
        CanonicalGrowthFunction::new(v.values().to_vec(), default_lambda()).unwrap()
    })
}

fn schedule(horizon: usize) -> impl Strategy<Value = LevelSet> {
    prop::collection::vec((1usize..4, 1usize..3), 0..4).prop_map(move |gaps| {
        let mut intervals = Vec::new();
        let mut n = 1;
        for (gap, t) in gaps {
            n += gap;
            if n + t > horizon {
                break;
            }
            intervals.push((n, t));
            n += t;
        }
        LevelSet::new(intervals).unwrap()
    })
}

/// Interval lengths follow the shipped catalog's block heights.
fn catalog_schedule(horizon: usize) -> impl Strategy<Value = LevelSet> {
    let heights = Catalog::default_catalog().block_heights();
    prop::collection::vec(1usize..5, 0..heights.len()).prop_map(move |gaps| {
        let mut intervals = Vec::new();
        let mut n = 1;
        for (gap, &t) in gaps.iter().zip(&heights) {
            let t = t as usize;
            n += gap;
            if n + t > horizon {
                break;
            }
            intervals.push((n, t));
            n += t;
        }
        LevelSet::new(intervals).unwrap()
    })
}

fn table_and_schedule() -> impl Strategy<Value = (CanonicalGrowthFunction, LevelSet)> {
    canonical_table(30).prop_flat_map(|v| {
        let h = v.horizon();
        (Just(v), schedule(h))
    })
}

fn table_and_catalog_schedule() -> impl Strategy<Value = (CanonicalGrowthFunction, LevelSet)> {
    canonical_table(30).prop_flat_map(|v| {
        let h = v.horizon();
        (Just(v), catalog_schedule(h))
    })
}

fn model(v: &CanonicalGrowthFunction, s: &LevelSet) -> Option<connsum::assembly::ManifoldModel> {
    let tree = build_tree(v, s).ok()?;
    let cat = Catalog::default_catalog();
    Some(assemble(v.table(), s, &tree, &cat, Mode::ConnectedSum).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bgd_constant_never_grows_on_a_prefix(v in canonical_table(40), cut in 3usize..40) {
        let full = check_bgd(v.table()).unwrap();
        let prefix = check_bgd(&v.table().truncated(cut.min(v.horizon()))).unwrap();
        prop_assert!(prefix <= full);
    }

    #[test]
    fn growth_type_is_reflexive(v in canonical_table(40)) {
        let w = same_growth_type(v.table(), v.table(), 64).unwrap().unwrap();
        prop_assert_eq!(w.a, 1);
    }

    #[test]
    fn growth_type_is_symmetric(f in canonical_table(30), h in canonical_table(30)) {
        let ab = same_growth_type(f.table(), h.table(), 64).unwrap().map(|w| w.a);
        let ba = same_growth_type(h.table(), f.table(), 64).unwrap().map(|w| w.a);
        prop_assert_eq!(ab, ba);
    }

    #[test]
    fn growth_type_composes(f in canonical_table(30), g in canonical_table(30), h in canonical_table(30)) {
        let a = same_growth_type(f.table(), g.table(), 8).unwrap();
        let b = same_growth_type(g.table(), h.table(), 8).unwrap();
        if let (Some(a), Some(b)) = (a, b) {
            // f(n) ≤ A·g(An+A)+A ≤ A·(B·h(B(An+A)+B)+B)+A, so 2AB + 2A + 2B suffices
            let bound = 2 * a.a * b.a + 2 * a.a + 2 * b.a;
            prop_assert!(same_growth_type(f.table(), h.table(), bound).unwrap().is_some());
        }
    }

    #[test]
    fn tree_growth_is_exact((v, s) in table_and_schedule()) {
        match build_tree(&v, &s) {
            Ok(t) => {
                for n in 0..=v.horizon() {
                    prop_assert_eq!(tree_growth(&t, n), v.values()[n]);
                }
                prop_assert_eq!(build_tree(&v, &s).unwrap(), t);
            }
            Err(TreeError::InfeasibleLevel(_)) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn empty_schedule_is_always_feasible(v in canonical_table(40)) {
        prop_assert!(build_tree(&v, &LevelSet::empty()).is_ok());
    }

    #[test]
    fn block_profiles_add_over_components(counts in prop::collection::vec(0usize..3, 1..4), t in 1u64..4) {
        prop_assume!(counts.iter().sum::<usize>() > 0);
        let b = CatalogBounds::new(6, 1, 5, 2).unwrap();
        let q = make_block(0, t, &counts, &ProfileShape::Ramp, Topology::Sphere, &b).unwrap();
        for k in 0..=q.shells() + 1 {
            let sum: u64 = q.components.iter().map(|c| c.volume_within(k)).sum();
            prop_assert_eq!(q.volume_within(k), sum);
        }
    }

    #[test]
    fn graph_conserves_volume((v, s) in table_and_catalog_schedule(), res in 1u64..3) {
        let m = model(&v, &s);
        prop_assume!(m.is_some());
        let m = m.unwrap();
        let g = to_metric_graph(&m, res);
        prop_assert_eq!(g.total_volume(), num_rational::Ratio::from_integer(m.total_volume()));
    }

    #[test]
    fn balls_grow_and_exhaust((v, s) in table_and_catalog_schedule()) {
        let m = model(&v, &s);
        prop_assume!(m.is_some());
        let m = m.unwrap();
        let g = to_metric_graph(&m, 1);
        let w = ball_volume_table(&g, m.length_horizon() as usize + 1);
        for a in 1..=w.horizon() {
            prop_assert!(w.at(a - 1) <= w.at(a));
        }
        prop_assert_eq!(w.at(w.horizon()), g.total_volume());
    }

    #[test]
    fn z_is_monotone_and_complete((v, s) in table_and_catalog_schedule()) {
        let m = model(&v, &s);
        prop_assume!(m.is_some());
        let m = m.unwrap();
        let z = discrete_growth_table(&m);
        prop_assert_eq!(z.at(-1), 0);
        prop_assert!(z.values.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(z.at(z.horizon() as i64), m.total_volume());
        for n in [0, 3, 7, z.horizon() as i64 / 2] {
            prop_assert_eq!(discrete_growth(&m, n), z.at(n));
        }
    }

    #[test]
    fn length_bridge_costs_at_most_l((v, s) in table_and_catalog_schedule()) {
        let m = model(&v, &s);
        prop_assume!(m.is_some());
        let m = m.unwrap();
        let z = discrete_growth_table(&m).as_growth_function();
        let w = same_growth_type(&level_growth(&m), &z, 64).unwrap().unwrap();
        prop_assert!(w.a <= m.l());
    }
}
