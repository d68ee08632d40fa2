use std::f64::consts::PI;

use hillspec_core::hill::{discriminant, monodromy, HillProblem, DEFAULT_HILL_TOL};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn monodromy_is_unimodular(
        a in -3.0f64..3.0,
        b in -2.0f64..2.0,
        period in 0.5f64..4.0,
        lambda in -5.0f64..30.0,
        m in 1u32..4,
    ) {
        let w = 2.0 * PI / period;
        let problem = HillProblem::from_fn(move |t| a * (w * t).cos() + b * (2.0 * w * t).sin(), period, m).unwrap();
        let mono = monodromy(&problem, lambda, DEFAULT_HILL_TOL).unwrap();
        // scale by the entry size: for strongly hyperbolic lambda the entries grow exponentially
        let size = mono.a11.abs().max(mono.a12.abs()).max(mono.a21.abs()).max(mono.a22.abs()).max(1.0);
        prop_assert!((mono.det() - 1.0).abs() < 1e-9 * size * size, "det = {}", mono.det());
    }

    #[test]
    fn constant_potential_discriminant_is_trigonometric(
        q0 in -4.0f64..4.0,
        period in 0.2f64..3.0,
        lambda in -4.0f64..40.0,
        m in 1u32..5,
    ) {
        let problem = HillProblem::constant(q0, period, m).unwrap();
        let span = period * m as f64;
        let s = lambda + q0;
        let expected = if s >= 0.0 { 2.0 * (span * s.sqrt()).cos() } else { 2.0 * (span * (-s).sqrt()).cosh() };
        let got = discriminant(&problem, lambda).unwrap();
        prop_assert!((got - expected).abs() < 1e-8 * expected.abs().max(1.0), "{got} vs {expected}");
    }
}
