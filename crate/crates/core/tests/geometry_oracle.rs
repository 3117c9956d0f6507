mod common;

use common::{fleet, random_dt, target_spec};
use flexhull_core::{
    battery_polytope, contains, convex_combination, enumerate_vertices, is_vertex_of_hull,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn enumerated_vertices_are_hull_vertices(seed in any::<u64>(), d in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = fleet(&mut rng, 1, d, true)[0];
        let verts = enumerate_vertices(&battery_polytope(&spec).unwrap()).unwrap();
        prop_assert!(!verts.is_empty());
        for v in verts.points() {
            prop_assert!(is_vertex_of_hull(v, &verts).unwrap());
        }
    }
}

#[test]
fn hull_membership_agrees_with_h_representation() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..4 {
        let d = rng.random_range(2..=3);
        let dt = random_dt(&mut rng);
        let spec = target_spec(&mut rng, d, dt);
        let p = battery_polytope(&spec).unwrap();
        let verts = enumerate_vertices(&p).unwrap();
        let points: Vec<&[f64]> = verts.points().iter().map(Vec::as_slice).collect();
        let bounds = p.coordinate_bounds().unwrap();
        let mut agreed = 0;
        for _ in 0..10_000 {
            let x: Vec<f64> = bounds
                .iter()
                .map(|&(lo, hi)| {
                    let pad = 0.1 * (hi - lo);
                    rng.random_range(lo - pad..=hi + pad)
                })
                .collect();
            let in_h = contains(&p, &x, 1e-9).unwrap();
            let in_v = convex_combination(&points, &x).unwrap().is_some();
            assert_eq!(in_h, in_v, "{x:?} for {spec:?}");
            agreed += 1;
        }
        assert_eq!(agreed, 10_000);
    }
}
