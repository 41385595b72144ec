//! Time-domain integration of the modal system.
//!
//! Projecting the nonlinear beam equation on the first `n` weighted
//! eigenmodes gives `c_j'' + lambda_j c_j + (sum_k c_k^2) c_j = 0`, a
//! Hamiltonian system conserving
//! `E = 1/2 sum c_j'^2 + 1/2 sum lambda_j c_j^2 + 1/4 (sum c_j^2)^2`.
//! Integration uses a fourth-order symmetric composition of velocity-Verlet
//! steps, so long runs stay drift-free and exactly time-reversible up to
//! rounding.

use crate::error::{Error, Result};
use crate::galerkin::WeightedSpectrum;
use crate::quadrature::adaptive_simpson_split;
use crate::stability;

/// Modal coefficients and velocities at one instant.
#[derive(Debug, Clone)]
pub struct ModalState {
    pub t: f64,
    pub c: Vec<f64>,
    pub cdot: Vec<f64>,
}

impl ModalState {
    pub fn new(c: Vec<f64>, cdot: Vec<f64>) -> Result<Self> {
        if c.len() != cdot.len() || c.is_empty() {
            return Err(Error::invalid("state dimensions mismatch".to_string()));
        }
        if c.iter().chain(cdot.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("state has non-finite entries".to_string()));
        }
        Ok(ModalState { t: 0.0, c, cdot })
    }
}

/// Initial profile: either explicit mode weights or a function of `x` to be
/// projected in the p-weighted scalar product.
pub enum InitialData<'a> {
    ModeWeights(Vec<f64>),
    Profile(&'a dyn Fn(f64) -> f64),
}

/// Project initial displacement and velocity onto the first `n` modes.
pub fn project_initial(
    g: InitialData<'_>,
    h: InitialData<'_>,
    spectrum: &WeightedSpectrum,
    n: usize,
) -> Result<ModalState> {
    if n == 0 || n > spectrum.pairs.len() {
        return Err(Error::invalid(format!(
            "mode count must be in 1..={}, got {n}",
            spectrum.pairs.len()
        )));
    }
    let project = |data: InitialData<'_>| -> Vec<f64> {
        match data {
            InitialData::ModeWeights(mut w) => {
                w.resize(n, 0.0);
                w
            }
            InitialData::Profile(f) => {
                let mut splits = vec![-spectrum.layout.pier(), spectrum.layout.pier()];
                for &b in spectrum.density.breakpoints() {
                    splits.push(b);
                    splits.push(-b);
                }
                (1..=n)
                    .map(|j| {
                        adaptive_simpson_split(
                            |x| {
                                spectrum.density.eval(x)
                                    * f(x)
                                    * spectrum.eigenfunction_eval(j, x)
                            },
                            -std::f64::consts::PI,
                            std::f64::consts::PI,
                            &splits,
                            1e-10,
                        )
                    })
                    .collect()
            }
        }
    };
    ModalState::new(project(g), project(h))
}

/// Right-hand side of the second-order system: `c_j'' = -(lambda_j +
/// sum_k c_k^2) c_j`.
pub fn step_rhs(lambdas: &[f64], c: &[f64]) -> Vec<f64> {
    let total: f64 = c.iter().map(|v| v * v).sum();
    lambdas
        .iter()
        .zip(c)
        .map(|(l, cj)| -(l + total) * cj)
        .collect()
}

/// Total conserved energy of the truncated system.
pub fn total_energy(lambdas: &[f64], state: &ModalState) -> f64 {
    let kinetic: f64 = state.cdot.iter().map(|v| 0.5 * v * v).sum();
    let bending: f64 = lambdas
        .iter()
        .zip(&state.c)
        .map(|(l, c)| 0.5 * l * c * c)
        .sum();
    let q: f64 = state.c.iter().map(|v| v * v).sum();
    kinetic + bending + 0.25 * q * q
}

/// Linear energy carried by mode `j` (0-based).
pub fn mode_energy(lambdas: &[f64], state: &ModalState, j: usize) -> f64 {
    0.5 * state.cdot[j] * state.cdot[j] + 0.5 * lambdas[j] * state.c[j] * state.c[j]
}

fn verlet(lambdas: &[f64], c: &mut [f64], cdot: &mut [f64], dt: f64) {
    let acc = step_rhs(lambdas, c);
    for (v, a) in cdot.iter_mut().zip(&acc) {
        *v += 0.5 * dt * a;
    }
    for (x, v) in c.iter_mut().zip(cdot.iter()) {
        *x += dt * v;
    }
    let acc = step_rhs(lambdas, c);
    for (v, a) in cdot.iter_mut().zip(&acc) {
        *v += 0.5 * dt * a;
    }
}

/// One fourth-order step: symmetric Yoshida composition of three
/// velocity-Verlet substeps with weights `(w1, w0, w1)`.
pub fn yoshida4_step(lambdas: &[f64], state: &mut ModalState, dt: f64) {
    const CBRT2: f64 = 1.259_921_049_894_873_2;
    let w1 = 1.0 / (2.0 - CBRT2);
    let w0 = 1.0 - 2.0 * w1;
    for w in [w1, w0, w1] {
        verlet(lambdas, &mut state.c, &mut state.cdot, w * dt);
    }
    state.t += dt;
}

/// Recorded trajectory with per-sample energies.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ModalState>,
    pub total: Vec<f64>,
    pub modal: Vec<Vec<f64>>,
    pub energy_drift: f64,
}

/// Integrate for `t_end` with step `dt`, sampling every `sample_every`
/// steps. Fails if the total energy drifts by more than 1e-6 relative.
pub fn simulate(
    state0: &ModalState,
    lambdas: &[f64],
    t_end: f64,
    dt: f64,
    sample_every: usize,
) -> Result<Trajectory> {
    if dt <= 0.0 || t_end <= 0.0 {
        return Err(Error::invalid("dt and t_end must be positive".to_string()));
    }
    if lambdas.len() != state0.c.len() {
        return Err(Error::invalid("lambda/state dimension mismatch".to_string()));
    }
    let stride = sample_every.max(1);
    let steps = (t_end / dt).ceil() as usize;
    let e0 = total_energy(lambdas, state0);
    let scale = e0.abs().max(1e-30);

    let mut state = state0.clone();
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        total: Vec::new(),
        modal: Vec::new(),
        energy_drift: 0.0,
    };
    let record = |s: &ModalState, traj: &mut Trajectory| {
        traj.times.push(s.t);
        traj.total.push(total_energy(lambdas, s));
        traj.modal
            .push((0..s.c.len()).map(|j| mode_energy(lambdas, s, j)).collect());
        traj.states.push(s.clone());
    };
    record(&state, &mut traj);
    for k in 1..=steps {
        yoshida4_step(lambdas, &mut state, dt);
        let e = total_energy(lambdas, &state);
        traj.energy_drift = traj.energy_drift.max((e - e0).abs() / scale);
        if k % stride == 0 || k == steps {
            record(&state, &mut traj);
        }
    }
    let tol = 1e-6;
    if traj.energy_drift > tol {
        return Err(Error::DriftExceeded {
            drift: traj.energy_drift,
            tol,
        });
    }
    Ok(traj)
}

/// Outcome of a two-mode energy-transfer experiment.
#[derive(Debug, Clone)]
pub struct BimodalOutcome {
    /// Peak fraction of the total energy held by the residual mode.
    pub transfer_metric: f64,
    /// Peak fraction divided by its initial value (1 when `z0 = 0`).
    pub growth_factor: f64,
    /// Prevailing-mode periods actually simulated.
    pub periods: f64,
    pub trajectory: Trajectory,
}

/// Integrate the two-mode truncation from `w(0) = zeta`, `z(0) = z0` (both
/// at rest) and measure how much energy migrates to the residual mode.
pub fn bimodal_experiment(
    lambda: f64,
    nu: f64,
    zeta: f64,
    z0: f64,
    periods: f64,
) -> Result<BimodalOutcome> {
    if z0.abs() > 1e-3 * zeta {
        return Err(Error::invalid(format!(
            "residual seed must satisfy |z0| <= 1e-3 zeta, got z0={z0}, zeta={zeta}"
        )));
    }
    let lambdas = [lambda, nu];
    let period = stability::duffing_period(lambda, zeta)?;
    let t_lin = 2.0 * std::f64::consts::PI / lambda.max(nu).sqrt();
    let dt = t_lin / 512.0;
    let state0 = ModalState::new(vec![zeta, z0], vec![0.0, 0.0])?;
    let traj = simulate(&state0, &lambdas, periods * period, dt, 8)?;
    let frac = |k: usize| -> f64 {
        let ez = traj.modal[k][1];
        let tot = traj.modal[k][0] + traj.modal[k][1];
        if tot > 0.0 {
            ez / tot
        } else {
            0.0
        }
    };
    let initial = frac(0);
    let transfer_metric = (0..traj.times.len()).map(frac).fold(0.0_f64, f64::max);
    let growth_factor = if initial > 0.0 {
        transfer_metric / initial
    } else {
        1.0
    };
    Ok(BimodalOutcome {
        transfer_metric,
        growth_factor,
        periods,
        trajectory: traj,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stability::{critical_amplitude, duffing_period};

    #[test]
    fn rhs_special_cases() {
        assert_eq!(step_rhs(&[2.0, 3.0], &[0.0, 0.0]), vec![0.0, 0.0]);
        // Single active mode is the Duffing equation.
        let r = step_rhs(&[2.0], &[0.7]);
        assert!((r[0] - (-(2.0 * 0.7) - 0.7f64.powi(3))).abs() < 1e-15);
        // Two active modes carry the full cross coupling.
        let (w, z) = (0.5, 0.3);
        let r = step_rhs(&[2.0, 5.0], &[w, z]);
        let s = w * w + z * z;
        assert!((r[0] + (2.0 + s) * w).abs() < 1e-15);
        assert!((r[1] + (5.0 + s) * z).abs() < 1e-15);
    }

    #[test]
    fn energy_conserved_and_reversible() {
        let lambdas = [2.0, 7.3];
        let state0 = ModalState::new(vec![1.1, 0.4], vec![0.0, 0.2]).unwrap();
        let t = duffing_period(lambdas[0], 1.1).unwrap();
        let dt = 2.0 * std::f64::consts::PI / lambdas[1].sqrt() / 512.0;
        let traj = simulate(&state0, &lambdas, 100.0 * t, dt, 64).unwrap();
        assert!(traj.energy_drift < 1e-6, "drift {}", traj.energy_drift);

        // Forward then backward returns the initial state.
        let mut state = state0.clone();
        for _ in 0..2000 {
            yoshida4_step(&lambdas, &mut state, dt);
        }
        for _ in 0..2000 {
            yoshida4_step(&lambdas, &mut state, -dt);
        }
        for (a, b) in state.c.iter().zip(&state0.c) {
            assert!((a - b).abs() < 1e-8);
        }
        for (a, b) in state.cdot.iter().zip(&state0.cdot) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn single_mode_period_matches_duffing() {
        let lambda = 3.1;
        let zeta = 1.4;
        let t = duffing_period(lambda, zeta).unwrap();
        let dt = t / 4096.0;
        let state0 = ModalState::new(vec![zeta], vec![0.0]).unwrap();
        let traj = simulate(&state0, &[lambda], 1.02 * t, dt, 1).unwrap();
        // Second zero of the velocity marks the full period.
        let mut zeros = Vec::new();
        for k in 1..traj.times.len() {
            let (a, b) = (traj.states[k - 1].cdot[0], traj.states[k].cdot[0]);
            if a * b < 0.0 {
                let f = a / (a - b);
                zeros.push(traj.times[k - 1] + f * (traj.times[k] - traj.times[k - 1]));
            }
        }
        assert!(zeros.len() >= 2);
        assert!((zeros[1] - t).abs() / t < 1e-5, "{} vs {t}", zeros[1]);
    }

    #[test]
    fn zero_residual_seed_stays_zero() {
        let out = bimodal_experiment(2.0, 6.0, 1.5, 0.0, 20.0).unwrap();
        assert_eq!(out.transfer_metric, 0.0);
        for s in &out.trajectory.states {
            assert_eq!(s.c[1], 0.0);
            assert_eq!(s.cdot[1], 0.0);
        }
    }

    #[test]
    fn transfer_grows_only_past_critical_amplitude() {
        let lambda = 2.0;
        let nu = 6.5;
        let d = critical_amplitude(lambda, nu).unwrap();
        let stable = bimodal_experiment(lambda, nu, 0.8 * d, 1e-4 * 0.8 * d, 50.0).unwrap();
        let seed = (1e-4f64).powi(2);
        assert!(
            stable.transfer_metric < 50.0 * seed,
            "stable case leaked energy: {}",
            stable.transfer_metric
        );
        let unstable = bimodal_experiment(lambda, nu, 1.2 * d, 1e-4 * 1.2 * d, 60.0).unwrap();
        assert!(
            unstable.growth_factor >= 10.0,
            "expected growth, got {}",
            unstable.growth_factor
        );
    }

    #[test]
    fn truncation_consistency_for_concentrated_data() {
        let lambdas4: [f64; 4] = [2.0, 6.5, 13.0, 21.0];
        let state2 = ModalState::new(vec![1.0, 0.01], vec![0.0, 0.0]).unwrap();
        let state4 = ModalState::new(vec![1.0, 0.01, 0.0, 0.0], vec![0.0; 4]).unwrap();
        let t = duffing_period(2.0, 1.0).unwrap();
        let dt = 2.0 * std::f64::consts::PI / lambdas4[3].sqrt() / 512.0;
        let t2 = simulate(&state2, &lambdas4[..2], 10.0 * t, dt, 32).unwrap();
        let t4 = simulate(&state4, &lambdas4, 10.0 * t, dt, 32).unwrap();
        for (s2, s4) in t2.states.iter().zip(&t4.states) {
            assert!((s2.c[0] - s4.c[0]).abs() < 1e-4);
            assert!((s2.c[1] - s4.c[1]).abs() < 1e-4);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let s = ModalState::new(vec![1.0], vec![0.0]).unwrap();
        assert!(simulate(&s, &[2.0], 1.0, 0.0, 1).is_err());
        assert!(bimodal_experiment(2.0, 6.0, 1.0, 0.5, 10.0).is_err());
    }
}
