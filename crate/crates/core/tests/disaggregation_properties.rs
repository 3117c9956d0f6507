mod common;

use common::{fleet, simplex_weights};
use flexhull_core::{
    aggregate, aggregate_identical, disaggregate, weights_for_point, AggregateOptions, HullWeights,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn schedules_are_feasible_and_add_up(seed in any::<u64>(), d in 1usize..=12, n in 1usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let specs = fleet(&mut rng, n, d, true);
        let vm = aggregate(&specs, d * d, rng.random()).unwrap();
        let w = simplex_weights(&mut rng, vm.num_columns());
        let weights = HullWeights::from_columns(&vm, &w).unwrap();
        let target = vm.combine(&w).unwrap();
        let r = disaggregate(&weights, &vm).unwrap();
        prop_assert!(r.feasible_for(&specs, 1e-7).unwrap());
        prop_assert!(linf(&r.aggregate, &target) <= 1e-6);

        let back = weights_for_point(&target, &vm).unwrap();
        let again = disaggregate(&back, &vm).unwrap();
        prop_assert!(linf(&again.aggregate, &target) <= 1e-6);
        prop_assert!(again.feasible_for(&specs, 1e-7).unwrap());
    }

    #[test]
    fn identical_fleets_replicate(seed in any::<u64>(), d in 1usize..=8, n in 1usize..=20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = fleet(&mut rng, 1, d, true)[0];
        let vm = aggregate_identical(&spec, n, 16, 1, AggregateOptions::default()).unwrap();
        let w = simplex_weights(&mut rng, vm.num_columns());
        let r = disaggregate(&HullWeights::from_columns(&vm, &w).unwrap(), &vm).unwrap();
        prop_assert_eq!(r.schedules.len(), n);
        prop_assert!(r.feasible_for(&vec![spec; n], 1e-7).unwrap());
        prop_assert!(linf(&r.aggregate, &vm.combine(&w).unwrap()) <= 1e-6);
    }
}
