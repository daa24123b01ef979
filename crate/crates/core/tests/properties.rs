use proptest::prelude::*;

use opschur::io::{measure_from_json, measure_to_json, opmatrix_from_json, opmatrix_to_json};
use opschur::linalg::jacobi_singular_values;
use opschur::rng::{random_opmatrix, random_operator, stream_rng};
use opschur::{Atom, Measure};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn opmatrix_json_round_trips_exactly(seed in any::<u64>(), rows in 1usize..4, cols in 1usize..4, d in 1usize..4) {
        let a = random_opmatrix(&mut stream_rng(seed, 0), rows, cols, d);
        let back = opmatrix_from_json(&opmatrix_to_json(&a)).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn discrete_measure_json_round_trips(seed in any::<u64>(), ts in prop::collection::btree_set(0u32..1000, 1..5)) {
        let mut rng = stream_rng(seed, 1);
        let atoms = ts.iter().map(|&k| Atom { t: k as f64 * 6e-3, weight: random_operator(&mut rng, 2) }).collect();
        let mu = Measure::discrete(2, atoms).unwrap();
        let back = measure_from_json(&measure_to_json(&mu)).unwrap();
        prop_assert_eq!(back, mu);
    }

    #[test]
    fn schur_product_is_submultiplicative(seed in any::<u64>(), n in 1usize..5, d in 1usize..4) {
        let mut rng = stream_rng(seed, 2);
        let a = random_opmatrix(&mut rng, n, n, d);
        let b = random_opmatrix(&mut rng, n, n, d);
        let lhs = a.schur_product(&b).unwrap().opnorm();
        prop_assert!(lhs <= a.opnorm() * b.opnorm() + 1e-8);
    }

    #[test]
    fn opnorm_matches_jacobi(seed in any::<u64>(), rows in 1usize..5, cols in 1usize..5, d in 1usize..4) {
        let a = random_opmatrix(&mut stream_rng(seed, 3), rows, cols, d);
        let jac = jacobi_singular_values(&a.flatten())[0];
        prop_assert!((a.opnorm() - jac).abs() <= 1e-9 * jac);
    }
}
