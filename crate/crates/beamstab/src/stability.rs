//! Linear stability of bi-modal oscillations.
//!
//! A one-mode solution `W(t) e_lambda(x)` of the nonlinear beam equation has
//! `W` solving the Duffing equation `W'' + lambda W + W^3 = 0`. Perturbing
//! with a second mode `e_nu` linearizes to the Hill equation
//! `xi'' + (nu + W^2) xi = 0`; instability sets in at the critical amplitude
//! `D = sqrt(2(nu - lambda))`, giving the critical energy
//! `E = lambda D^2/2 + D^4/4 = (nu/lambda - 1) lambda nu`. The threshold of a
//! spectrum is the minimum of `E` over consecutive pairs of the first twelve
//! eigenvalues. A monodromy-matrix integrator provides an independent check
//! of the analytic stability rule.

use crate::error::{Error, Result};
use crate::waveform::Parity;

/// One consecutive eigenvalue pair.
#[derive(Debug, Clone, Copy)]
pub struct ModePair {
    /// 1-based index of the lower mode; the pair is `(j, j+1)`.
    pub j: usize,
    pub lambda: f64,
    pub nu: f64,
    pub parities: (Parity, Parity),
    pub d_critical: f64,
    pub e_critical: f64,
    pub ratio: f64,
}

/// Instability thresholds of a twelve-mode spectrum.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub pairs: Vec<ModePair>,
    /// `min_j E(lambda_j, lambda_{j+1})`.
    pub threshold: f64,
    /// Index into `pairs` achieving the minimum (ties: smallest `j`).
    pub argmin: usize,
}

impl StabilityReport {
    pub fn min_pair(&self) -> &ModePair {
        &self.pairs[self.argmin]
    }

    /// Label of the minimizing ratio, e.g. `"2/1"` for `lambda_2/lambda_1`.
    pub fn ratio_label(&self) -> String {
        let j = self.min_pair().j;
        format!("{}/{}", j + 1, j)
    }
}

/// Critical amplitude `D = sqrt(2(nu - lambda))`.
pub fn critical_amplitude(lambda: f64, nu: f64) -> Result<f64> {
    if !(nu > lambda && lambda > 0.0) {
        return Err(Error::invalid(format!(
            "critical amplitude needs nu > lambda > 0, got lambda={lambda}, nu={nu}"
        )));
    }
    Ok((2.0 * (nu - lambda)).sqrt())
}

/// Critical energy of instability. Both closed forms are evaluated and must
/// agree to 1e-12 relative; the Duffing-energy form is returned.
pub fn critical_energy(lambda: f64, nu: f64) -> Result<f64> {
    let d = critical_amplitude(lambda, nu)?;
    let energy = lambda * d * d / 2.0 + d.powi(4) / 4.0;
    let ratio_form = (nu / lambda - 1.0) * lambda * nu;
    let tol = 1e-12 * energy.abs().max(ratio_form.abs());
    assert!(
        (energy - ratio_form).abs() <= tol,
        "closed forms disagree: {energy} vs {ratio_form}"
    );
    Ok(energy)
}

/// Threshold over consecutive pairs of the first twelve eigenvalues.
pub fn threshold(spectrum: &[(f64, Parity)]) -> Result<StabilityReport> {
    if spectrum.len() < 12 {
        return Err(Error::invalid(format!(
            "threshold needs 12 eigenvalues, got {}",
            spectrum.len()
        )));
    }
    let s = &spectrum[..12];
    if s.windows(2).any(|w| w[1].0 <= w[0].0) || s[0].0 <= 0.0 {
        return Err(Error::invalid(
            "spectrum must be positive and strictly increasing".to_string(),
        ));
    }
    let mut pairs = Vec::with_capacity(11);
    for j in 1..=11 {
        let (lambda, pl) = s[j - 1];
        let (nu, pn) = s[j];
        pairs.push(ModePair {
            j,
            lambda,
            nu,
            parities: (pl, pn),
            d_critical: critical_amplitude(lambda, nu)?,
            e_critical: critical_energy(lambda, nu)?,
            ratio: nu / lambda,
        });
    }
    let argmin = pairs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.e_critical.total_cmp(&b.1.e_critical))
        .map(|(i, _)| i)
        .unwrap();
    let threshold = pairs[argmin].e_critical;
    Ok(StabilityReport {
        pairs,
        threshold,
        argmin,
    })
}

/// Complete elliptic integral of the first kind, modulus convention:
/// `K(k) = int_0^{pi/2} dphi / sqrt(1 - k^2 sin^2 phi)`, by AGM.
fn elliptic_k(k: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&k));
    let mut a = 1.0_f64;
    let mut b = (1.0 - k * k).sqrt();
    for _ in 0..40 {
        if (a - b).abs() < 1e-17 * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    std::f64::consts::PI / (2.0 * a)
}

/// Period of the Duffing orbit with amplitude `zeta`:
/// `T = (4/b) K(zeta / (b sqrt(2)))` with `b = sqrt(lambda + zeta^2)`.
pub fn duffing_period(lambda: f64, zeta: f64) -> Result<f64> {
    if lambda <= 0.0 || zeta < 0.0 {
        return Err(Error::invalid(format!(
            "duffing period needs lambda > 0, zeta >= 0, got {lambda}, {zeta}"
        )));
    }
    let b = (lambda + zeta * zeta).sqrt();
    let k = zeta / (b * std::f64::consts::SQRT_2);
    Ok(4.0 / b * elliptic_k(k))
}

/// Sampled Duffing orbit with the conserved energy tracked along the way.
#[derive(Debug, Clone)]
pub struct DuffingOrbit {
    pub times: Vec<f64>,
    pub w: Vec<f64>,
    pub wdot: Vec<f64>,
    pub period: f64,
    /// Largest relative deviation of the first integral along the run.
    pub energy_drift: f64,
}

fn duffing_energy(lambda: f64, w: f64, wd: f64) -> f64 {
    0.5 * wd * wd + 0.5 * lambda * w * w + 0.25 * w.powi(4)
}

fn rk4_step<const N: usize>(f: &impl Fn(&[f64; N]) -> [f64; N], y: &mut [f64; N], h: f64) {
    let k1 = f(y);
    let mut y2 = *y;
    for i in 0..N {
        y2[i] = y[i] + 0.5 * h * k1[i];
    }
    let k2 = f(&y2);
    for i in 0..N {
        y2[i] = y[i] + 0.5 * h * k2[i];
    }
    let k3 = f(&y2);
    for i in 0..N {
        y2[i] = y[i] + h * k3[i];
    }
    let k4 = f(&y2);
    for i in 0..N {
        y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

/// Integrate the Duffing equation from `W(0) = zeta`, `W'(0) = 0` and sample
/// at the requested times. Fails if the first integral drifts by more than
/// 1e-10 relative.
pub fn duffing_orbit(lambda: f64, zeta: f64, t_grid: &[f64]) -> Result<DuffingOrbit> {
    if lambda <= 0.0 || zeta < 0.0 {
        return Err(Error::invalid("duffing orbit needs lambda > 0, zeta >= 0".to_string()));
    }
    let period = duffing_period(lambda, zeta)?;
    let rhs = move |y: &[f64; 2]| [y[1], -lambda * y[0] - y[0].powi(3)];
    let h0 = period / 4096.0;
    let e0 = duffing_energy(lambda, zeta, 0.0);
    let mut y = [zeta, 0.0];
    let mut t = 0.0;
    let mut drift = 0.0_f64;
    let mut times = Vec::with_capacity(t_grid.len());
    let mut w = Vec::with_capacity(t_grid.len());
    let mut wdot = Vec::with_capacity(t_grid.len());
    for &target in t_grid {
        if target < t {
            return Err(Error::invalid("t_grid must be nondecreasing".to_string()));
        }
        while t < target {
            let h = h0.min(target - t);
            rk4_step(&rhs, &mut y, h);
            t += h;
        }
        if e0 > 0.0 {
            drift = drift.max((duffing_energy(lambda, y[0], y[1]) - e0).abs() / e0);
        }
        times.push(t);
        w.push(y[0]);
        wdot.push(y[1]);
    }
    let tol = 1e-10;
    if drift > tol {
        return Err(Error::DriftExceeded { drift, tol });
    }
    Ok(DuffingOrbit {
        times,
        w,
        wdot,
        period,
        energy_drift: drift,
    })
}

/// Verdict of the monodromy computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HillClass {
    Stable,
    Unstable,
    /// `||trace| - 2|` within the marginal band; boundary cannot be resolved.
    Marginal,
}

/// Half-width of the marginal band on `|trace| - 2`.
pub const MARGINAL_BAND: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
pub struct HillMonodromy {
    pub trace: f64,
    pub class: HillClass,
    pub period: f64,
    /// Steps per period at which the trace stabilized.
    pub steps: usize,
}

/// Monodromy matrix of `xi'' + (nu + W(t)^2) xi = 0` over one Duffing
/// period. The Duffing orbit is integrated alongside the two canonical
/// solutions with a fixed-step scheme; the step is halved until the trace
/// moves by less than 1e-8.
pub fn hill_monodromy(lambda: f64, nu: f64, zeta: f64) -> Result<HillMonodromy> {
    if lambda <= 0.0 || nu <= 0.0 || zeta <= 0.0 {
        return Err(Error::invalid(
            "hill monodromy needs lambda, nu, zeta > 0".to_string(),
        ));
    }
    let period = duffing_period(lambda, zeta)?;
    // State: (W, W', xi1, xi1', xi2, xi2').
    let rhs = move |y: &[f64; 6]| {
        let q = nu + y[0] * y[0];
        [
            y[1],
            -lambda * y[0] - y[0].powi(3),
            y[3],
            -q * y[2],
            y[5],
            -q * y[4],
        ]
    };
    let trace_for = |steps: usize| -> f64 {
        let h = period / steps as f64;
        let mut y = [zeta, 0.0, 1.0, 0.0, 0.0, 1.0];
        for _ in 0..steps {
            rk4_step(&rhs, &mut y, h);
        }
        y[2] + y[5]
    };
    let mut steps = 4096usize;
    let mut trace = trace_for(steps);
    loop {
        let finer = trace_for(steps * 2);
        if (finer - trace).abs() < 1e-8 {
            trace = finer;
            steps *= 2;
            break;
        }
        steps *= 2;
        trace = finer;
        if steps > (1 << 22) {
            return Err(Error::Integration(format!(
                "monodromy trace did not settle (last {trace})"
            )));
        }
    }
    let class = if (trace.abs() - 2.0).abs() <= MARGINAL_BAND {
        HillClass::Marginal
    } else if trace.abs() < 2.0 {
        HillClass::Stable
    } else {
        HillClass::Unstable
    };
    Ok(HillMonodromy {
        trace,
        class,
        period,
        steps,
    })
}

/// Analytic stability rule: the `lambda`-mode of amplitude `zeta` is stable
/// against the `nu`-mode iff `lambda > nu`, or `lambda < nu` and
/// `zeta <= sqrt(2(nu - lambda))`.
pub fn classify_analytic(lambda: f64, nu: f64, zeta: f64) -> Result<HillClass> {
    if lambda == nu {
        return Err(Error::invalid("analytic rule needs lambda != nu".to_string()));
    }
    if zeta <= 0.0 {
        return Err(Error::invalid("analytic rule needs zeta > 0".to_string()));
    }
    Ok(if lambda > nu || zeta <= (2.0 * (nu - lambda)).sqrt() {
        HillClass::Stable
    } else {
        HillClass::Unstable
    })
}
