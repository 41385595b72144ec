//! Property-based invariants over randomized inputs.

use proptest::prelude::*;
use std::f64::consts::PI;

use beamstab::density::{Density, TwoStepCenter, MASS_TOL};
use beamstab::stability;

fn bounds() -> impl Strategy<Value = (f64, f64)> {
    (0.05f64..0.95, 1.05f64..4.0)
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 128,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn two_step_constructors_satisfy_mass_and_bounds(
        (alpha, beta) in bounds(),
        heavy in any::<bool>(),
    ) {
        let center = if heavy { TwoStepCenter::Heavy } else { TwoStepCenter::Light };
        let d = Density::two_step(alpha, beta, center).unwrap();
        prop_assert!((d.mass() - 2.0 * PI).abs() <= MASS_TOL);
        d.validate().unwrap();
        prop_assert!(d.is_bang_bang());
        // Evenness and the left-value convention at the jump.
        let b = d.breakpoints()[0];
        for &x in &[0.1, 0.9 * b, b, 0.5 * (b + PI), 3.1] {
            prop_assert_eq!(d.eval(x), d.eval(-x));
        }
    }

    #[test]
    fn indicator_of_two_step_round_trips(
        (alpha, beta) in bounds(),
        heavy in any::<bool>(),
    ) {
        let center = if heavy { TwoStepCenter::Heavy } else { TwoStepCenter::Light };
        let d = Density::two_step(alpha, beta, center).unwrap();
        let heavy_set: Vec<(f64, f64)> = d
            .pieces()
            .filter(|&(_, _, v)| v == beta)
            .map(|(l, r, _)| (l, r))
            .collect();
        let back = Density::from_indicator(alpha, beta, &heavy_set).unwrap();
        prop_assert_eq!(d.breakpoints(), back.breakpoints());
        prop_assert_eq!(d.values(), back.values());
    }

    #[test]
    fn density_record_round_trips(
        (alpha, beta) in bounds(),
        cuts in proptest::collection::vec(0.05f64..0.95, 0..4),
    ) {
        let mut cuts: Vec<f64> = cuts.iter().map(|c| c * PI).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
        let values: Vec<f64> = (0..=cuts.len())
            .map(|i| if i % 2 == 0 { beta } else { alpha })
            .collect();
        let d = Density::raw(alpha, beta, cuts, values).unwrap();
        let back = Density::parse_record(&d.to_record()).unwrap();
        prop_assert_eq!(d, back);
    }

    #[test]
    fn critical_energy_closed_forms_agree(
        lambda in 0.5f64..500.0,
        gap_rel in 1e-3f64..20.0,
    ) {
        // E = lambda D^2/2 + D^4/4 must equal (nu/lambda - 1) lambda nu;
        // the helper asserts their agreement internally.
        let nu = lambda * (1.0 + gap_rel);
        let e = stability::critical_energy(lambda, nu).unwrap();
        prop_assert!((e - (nu - lambda) * nu).abs() <= 1e-9 * e.max(1.0));
        let d = stability::critical_amplitude(lambda, nu).unwrap();
        prop_assert!(d > 0.0);
        // Boundary inclusivity of the analytic rule.
        prop_assert_eq!(
            stability::classify_analytic(lambda, nu, d).unwrap(),
            stability::HillClass::Stable
        );
        prop_assert_eq!(
            stability::classify_analytic(lambda, nu, d * (1.0 + 1e-9)).unwrap(),
            stability::HillClass::Unstable
        );
    }

    #[test]
    fn duffing_period_monotone_and_positive(
        lambda in 0.2f64..100.0,
        zeta in 0.0f64..5.0,
    ) {
        let t = stability::duffing_period(lambda, zeta).unwrap();
        prop_assert!(t.is_finite() && t > 0.0);
        // The nonlinearity stiffens the oscillator: T decreases in zeta.
        let t2 = stability::duffing_period(lambda, zeta + 0.5).unwrap();
        prop_assert!(t2 < t);
        // And in lambda.
        let t3 = stability::duffing_period(lambda * 1.5, zeta).unwrap();
        prop_assert!(t3 < t);
        // Linear limit from above.
        prop_assert!(t <= 2.0 * PI / lambda.sqrt() + 1e-12);
    }
}
