//! Cross-solver consistency and stability of the spectral machinery.

use beamstab::closed_form::{self, TwoStepParams};
use beamstab::density::{Density, PierLayout, TwoStepCenter};
use beamstab::galerkin;
use beamstab::waveform::Parity;

/// The printed reduced determinants and the equilibrated boundary system
/// must agree on root locations wherever the former are numerically sound.
#[test]
fn reduced_determinants_share_roots_with_boundary_system() {
    let density = Density::two_step(0.5, 2.0, TwoStepCenter::Heavy).unwrap();
    for &a in &[0.3, 0.55] {
        let layout = PierLayout::new(a).unwrap();
        let params = TwoStepParams::new(&density, &layout).unwrap();
        let roots = closed_form::find_eigenvalues(&density, &layout, 8).unwrap();
        for root in &roots {
            let f = |mu: f64| match root.parity {
                Parity::Even => closed_form::det_even(mu, &params),
                Parity::Odd => closed_form::det_odd(mu, &params),
            };
            // The reduced determinant changes sign across the located root.
            let eps = 1e-6;
            let (lo, hi) = (f(root.mu - eps), f(root.mu + eps));
            assert!(
                lo * hi < 0.0,
                "no sign change of the reduced determinant at mu={} (a={a}, {:?})",
                root.mu,
                root.parity
            );
        }
    }
}

#[test]
fn truncation_stability_from_14_to_18() {
    // Representative densities from the table runs.
    let cases = [
        (Density::two_step(0.5, 2.0, TwoStepCenter::Heavy).unwrap(), 0.5),
        (Density::two_step(1.0 / 3.0, 3.0, TwoStepCenter::Light).unwrap(), 0.45),
        (
            Density::from_indicator(
                0.5,
                1.5,
                &[(1.2, 1.2 + 0.25 * std::f64::consts::PI), (2.2, 2.2 + 0.25 * std::f64::consts::PI)],
            )
            .unwrap(),
            0.5,
        ),
    ];
    for (density, a) in &cases {
        let layout = PierLayout::new(*a).unwrap();
        let coarse = galerkin::solve_weighted_spectrum(density, &layout, 14).unwrap();
        let fine = galerkin::solve_weighted_spectrum(density, &layout, 18).unwrap();
        for (k, (c, f)) in coarse.pairs.iter().zip(&fine.pairs).enumerate() {
            let rel = (c.lambda - f.lambda).abs() / f.lambda;
            // The last kept mode per parity converges slowest; measured
            // sensitivity at the strongest material contrast is ~2e-3 there.
            let tol = if k < 10 { 1e-3 } else { 3e-3 };
            assert!(rel < tol, "mode {k} at lambda={} moved by {rel:.2e}", f.lambda);
        }
    }
}

#[test]
fn eigenvalues_continuous_in_the_density() {
    // Moving one breakpoint by 1e-4 (with the mass restored through a
    // second interval) shifts each eigenvalue only at the same order.
    let alpha = 0.5;
    let beta = 2.0;
    let layout = PierLayout::new(0.5).unwrap();
    let m_half = std::f64::consts::PI * (1.0 - alpha) / (beta - alpha);
    let heavy = |eps: f64| {
        [
            (0.3, 0.3 + 0.5 * m_half + eps),
            (2.2, 2.2 + 0.5 * m_half - eps),
        ]
    };
    let base = Density::from_indicator(alpha, beta, &heavy(0.0)).unwrap();
    let shifted = Density::from_indicator(alpha, beta, &heavy(1e-4)).unwrap();
    assert!((base.breakpoints()[1] - shifted.breakpoints()[1]).abs() >= 0.9e-4);
    let s0 = galerkin::solve_weighted_spectrum(&base, &layout, 14).unwrap();
    let s1 = galerkin::solve_weighted_spectrum(&shifted, &layout, 14).unwrap();
    for (p0, p1) in s0.pairs.iter().zip(&s1.pairs) {
        let rel = (p0.lambda - p1.lambda).abs() / p0.lambda;
        assert!(rel < 1e-2, "eigenvalue jumped by {rel:.2e}");
    }
}

#[test]
fn interlacing_of_parities_for_two_step_grids() {
    // Even and odd roots alternate along the merged spectrum for the
    // configurations behind the summary tables.
    for &(alpha, beta) in &[(0.5, 2.0), (1.0 / 3.0, 1.5)] {
        for center in [TwoStepCenter::Heavy, TwoStepCenter::Light] {
            let density = Density::two_step(alpha, beta, center).unwrap();
            for &a in &[0.3, 0.5, 0.7] {
                let layout = PierLayout::new(a).unwrap();
                let roots = closed_form::find_eigenvalues(&density, &layout, 12).unwrap();
                for w in roots.windows(2) {
                    assert_ne!(
                        w[0].parity, w[1].parity,
                        "parity repetition at a={a}, alpha={alpha}, beta={beta}"
                    );
                }
            }
        }
    }
}
