mod common;

use common::{fleet, simplex_weights};
use flexhull_core::{
    aggregate, aggregate_with, battery_polytope, convex_independent, decompose_into_devices,
    enumerate_vertices, exact_optimum, is_vertex_of_hull, min_cost_over_hull, min_peak_over_hull,
    minkowski_vertex_candidates, no_flex_value, sample_sign_vectors, AggregateOptions,
    ObjectiveSpec, StorageSpec, VertexSet,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn exact_candidates(specs: &[StorageSpec]) -> VertexSet {
    let sets: Vec<VertexSet> = specs
        .iter()
        .map(|s| enumerate_vertices(&battery_polytope(s).unwrap()).unwrap())
        .collect();
    minkowski_vertex_candidates(&sets).unwrap()
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn columns_are_minkowski_vertices(seed in any::<u64>(), d in 2usize..=3, n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let specs = fleet(&mut rng, n, d, false);
        let vm = aggregate(&specs, 1 << d, 0).unwrap();
        prop_assert_eq!(vm.sign_vectors().len(), 1 << d);
        let oracle = exact_candidates(&specs);
        for c in 0..vm.sign_vectors().len() {
            prop_assert!(is_vertex_of_hull(vm.column(c), &oracle).unwrap(), "column {:?}", vm.column(c));
        }
        let cols = VertexSet::new(d, (0..vm.sign_vectors().len()).map(|c| vm.column(c).to_vec()).collect()).unwrap();
        prop_assert_eq!(cols.len(), vm.sign_vectors().len());
        prop_assert!(convex_independent(&cols).unwrap());
    }

    #[test]
    fn corrected_device_actions_are_device_vertices(seed in any::<u64>(), d in 2usize..=3, n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let specs = fleet(&mut rng, n, d, true);
        let vm = aggregate(&specs, 1 << d, 0).unwrap();
        let per_device = vm.per_device().unwrap();
        for (i, spec) in specs.iter().enumerate() {
            let verts = enumerate_vertices(&battery_polytope(spec).unwrap()).unwrap();
            for c in 0..vm.sign_vectors().len() {
                prop_assert!(is_vertex_of_hull(per_device.profile(i, c), &verts).unwrap());
            }
        }
    }

    #[test]
    fn sign_pattern_and_distinctness(seed in any::<u64>(), d in 2usize..=6, n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let specs = fleet(&mut rng, n, d, false);
        let vm = aggregate(&specs, 1 << d, 0).unwrap();
        for (c, j) in vm.sign_vectors().iter().enumerate() {
            let v = vm.column(c);
            for (t, &vt) in v.iter().enumerate() {
                if j.charges(t) {
                    prop_assert!(vt >= -1e-9);
                } else {
                    prop_assert!(vt <= 1e-9);
                }
            }
            for k in 0..c {
                prop_assert!(linf(v, vm.column(k)) > 1e-9);
            }
        }
    }

    #[test]
    fn hull_points_decompose_into_devices(seed in any::<u64>(), d in 1usize..=6, n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let specs = fleet(&mut rng, n, d, true);
        let vm = aggregate(&specs, 16, rng.random()).unwrap();
        for _ in 0..5 {
            let w = simplex_weights(&mut rng, vm.num_columns());
            let x = vm.combine(&w).unwrap();
            let parts = decompose_into_devices(&specs, &x).unwrap();
            prop_assert!(parts.is_some(), "{:?} not decomposable", x);
        }
    }

    #[test]
    fn more_sign_vectors_never_hurt(seed in any::<u64>(), d in 2usize..=10, n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let specs = fleet(&mut rng, n, d, true);
        let all = sample_sign_vectors(d, 1 << d.min(6), rng.random());
        let cut = rng.random_range(1..=all.len());
        let small = aggregate_with(&specs, all[..cut].to_vec(), AggregateOptions::default()).unwrap();
        let big = aggregate_with(&specs, all, AggregateOptions::default()).unwrap();
        for c in 0..cut {
            prop_assert_eq!(small.column(c), big.column(c));
        }
        let demand: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..3.0)).collect();
        let prices: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let cost = ObjectiveSpec::cost(prices, demand.clone(), specs[0].dt).unwrap();
        let peak = ObjectiveSpec::peak(demand, specs[0].dt).unwrap();
        let cs = min_cost_over_hull(&small, &cost).unwrap().value;
        let cb = min_cost_over_hull(&big, &cost).unwrap().value;
        prop_assert!(cb <= cs + 1e-9);
        let ps = min_peak_over_hull(&small, &peak).unwrap().value;
        let pb = min_peak_over_hull(&big, &peak).unwrap().value;
        prop_assert!(pb <= ps + 1e-7);
    }

    #[test]
    fn approximation_lies_between_exact_and_no_flex(seed in any::<u64>(), d in 1usize..=6, n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let specs = fleet(&mut rng, n, d, true);
        let vm = aggregate(&specs, d * d, rng.random()).unwrap();
        let demand: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..3.0)).collect();
        let prices: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..0.5)).collect();
        for obj in [
            ObjectiveSpec::cost(prices, demand.clone(), specs[0].dt).unwrap(),
            ObjectiveSpec::peak(demand, specs[0].dt).unwrap(),
        ] {
            let approx = if obj.kind == flexhull_core::ObjectiveKind::Cost {
                min_cost_over_hull(&vm, &obj).unwrap().value
            } else {
                min_peak_over_hull(&vm, &obj).unwrap().value
            };
            let exact = exact_optimum(&specs, &obj).unwrap();
            prop_assert!(approx >= exact - 1e-7, "{} < {}", approx, exact);
            if vm.has_zero_column() {
                prop_assert!(approx <= no_flex_value(&obj) + 1e-7);
            }
        }
    }
}

#[test]
fn full_enumeration_cost_matches_oracle_vertices() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let d = rng.random_range(1..=3);
        let n = rng.random_range(1..=3);
        let specs = fleet(&mut rng, n, d, false);
        let vm = aggregate(&specs, 1 << d, 0).unwrap();
        let prices: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let obj = ObjectiveSpec::cost(prices.clone(), vec![0.0; d], specs[0].dt).unwrap();
        let approx = min_cost_over_hull(&vm, &obj).unwrap().value;
        // Minimum over the captured oracle vertices.
        let oracle = exact_candidates(&specs);
        let captured = oracle
            .points()
            .iter()
            .filter(|p| (0..vm.num_columns()).any(|c| linf(p, vm.column(c)) <= 1e-7))
            .map(|p| obj.evaluate(p))
            .fold(f64::INFINITY, f64::min);
        assert!((approx - captured).abs() <= 1e-9);
        let (best, best_value) = oracle.points().iter().map(|p| (p, obj.evaluate(p))).fold(
            (None, f64::INFINITY),
            |acc, (p, v)| if v < acc.1 { (Some(p), v) } else { acc },
        );
        let exact = exact_optimum(&specs, &obj).unwrap();
        assert!((exact - best_value).abs() <= 1e-7);
        if (0..vm.num_columns()).any(|c| linf(best.unwrap(), vm.column(c)) <= 1e-7) {
            assert!((approx - exact).abs() <= 1e-7);
        }
    }
}
