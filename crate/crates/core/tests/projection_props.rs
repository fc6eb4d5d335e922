//! Property tests for integer projection and fixed-point encoding: the
//! structural guarantees that make the projected descent step well defined.

use dionet_core::constraints::{
    diophantine_loss, project_integers, round_to_int, DiophantinePolynomial, EncodingMap,
    ParamSelector,
};
use proptest::prelude::*;

proptest! {
    #[test]
    fn projection_is_idempotent(xs in prop::collection::vec(-1e6f64..1e6, 0..40)) {
        let once = project_integers(&xs);
        let twice = project_integers(&once);
        prop_assert_eq!(twice, once);
    }

    #[test]
    fn integer_points_are_fixed(ns in prop::collection::vec(-1_000_000i64..1_000_000, 0..40)) {
        let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
        prop_assert_eq!(project_integers(&xs), xs);
    }

    #[test]
    fn projection_moves_each_coordinate_at_most_half(xs in prop::collection::vec(-1e6f64..1e6, 1..40)) {
        for (&x, &p) in xs.iter().zip(&project_integers(&xs)) {
            prop_assert!((x - p).abs() <= 0.5, "{x} projected to {p}");
            prop_assert_eq!(p, p.trunc());
        }
    }

    #[test]
    fn half_integer_ties_round_toward_zero(n in -100_000i64..100_000) {
        // n + 0.5 is exactly representable here, so the tie rule is exact.
        let x = n as f64 + 0.5;
        let expected = if x >= 0.0 { n as f64 } else { (n + 1) as f64 };
        prop_assert_eq!(round_to_int(x), expected);
    }

    #[test]
    fn encode_decode_roundtrip_is_within_half_a_cell(
        scale_pow in 0u32..10,
        xs in prop::collection::vec(-1e4f64..1e4, 1..30),
    ) {
        let s = f64::from(2u32.pow(scale_pow));
        let map = EncodingMap::new(s).unwrap();
        let decoded = map.decode(&map.encode(&xs));
        for (&x, &d) in xs.iter().zip(&decoded) {
            prop_assert!((x - d).abs() <= 0.5 / s + 1e-12, "{x} roundtripped to {d} at scale {s}");
        }
    }

    #[test]
    fn encoding_is_deterministic(
        xs in prop::collection::vec(-1e6f64..1e6, 0..30),
    ) {
        let map = EncodingMap::new(4.0).unwrap();
        prop_assert_eq!(map.encode(&xs), map.encode(&xs));
        let a = project_integers(&xs);
        let b = project_integers(&xs);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn smooth_constraint_loss_is_nonnegative(
        x in -100.0f64..100.0,
        y in -100.0f64..100.0,
        z in -100.0f64..100.0,
    ) {
        let poly = DiophantinePolynomial::parse("x1^2 + x2^2 - x3^2").unwrap();
        let map = EncodingMap::identity();
        let loss = diophantine_loss(&poly, &[x, y, z], &map, &ParamSelector::All).unwrap();
        prop_assert!(loss >= 0.0);
    }

    #[test]
    fn smooth_constraint_loss_vanishes_on_the_solution_variety(t in -1000i64..1000) {
        // Scaled Pythagorean triples keep 9t² + 16t² − 25t² exactly zero in
        // double precision at this magnitude.
        let poly = DiophantinePolynomial::parse("x1^2 + x2^2 - x3^2").unwrap();
        let map = EncodingMap::identity();
        let theta = [3.0 * t as f64, 4.0 * t as f64, 5.0 * t as f64];
        let loss = diophantine_loss(&poly, &theta, &map, &ParamSelector::All).unwrap();
        prop_assert_eq!(loss, 0.0);
    }
}
