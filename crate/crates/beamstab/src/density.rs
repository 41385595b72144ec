//! Admissible symmetric piecewise-constant beam densities.
//!
//! A density is an even function on `(-pi, pi)` with prescribed total mass
//! `2*pi` and values between the material bounds `alpha <= 1 <= beta`. Only
//! the right half of the beam is stored; evenness is structural and never
//! validated at runtime.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on the mass constraint for constructed densities.
pub const MASS_TOL: f64 = 1e-12;

/// Tolerance on the heavy-set length handed to [`Density::from_indicator`].
pub const INDICATOR_TOL: f64 = 1e-9;

/// Which material sits at the center of a two-step density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TwoStepCenter {
    /// `p(0) = beta`, jump parameter `rho = (1 - alpha) / (beta - alpha)`.
    Heavy,
    /// `p(0) = alpha`, jump parameter `rho = (beta - 1) / (beta - alpha)`.
    Light,
}

/// Piecewise-constant symmetric density on the half-beam `[0, pi]`.
///
/// `values[i]` holds on `[breakpoints[i-1], breakpoints[i])` with the
/// convention `breakpoints[-1] = 0`, `breakpoints[len] = pi`. Intervals are
/// right-open; evaluation exactly at a breakpoint returns the left value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Density {
    alpha: f64,
    beta: f64,
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

/// Pier placement: internal hinges at `x = +/- a*pi` with `0 < a < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PierLayout {
    a: f64,
}

impl PierLayout {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) || !a.is_finite() {
            return Err(Error::invalid(format!(
                "pier parameter a must satisfy 0 < a < 1, got {a}"
            )));
        }
        Ok(PierLayout { a })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Abscissa of the right pier.
    pub fn pier(&self) -> f64 {
        self.a * PI
    }
}

fn check_bounds(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0 && beta > 1.0) || !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::invalid(format!(
            "material bounds must satisfy 0 < alpha < 1 < beta, got alpha={alpha}, beta={beta}"
        )));
    }
    Ok(())
}

impl Density {
    /// The homogeneous beam `p == 1`, admitted as the degenerate baseline
    /// `alpha = beta = 1`.
    pub fn homogeneous() -> Self {
        Density {
            alpha: 1.0,
            beta: 1.0,
            breakpoints: Vec::new(),
            values: vec![1.0],
        }
    }

    /// Two-step density with a single symmetric jump at `rho * pi`.
    ///
    /// The jump position is forced by the mass constraint: with the heavy
    /// material at the center, `rho = (1 - alpha) / (beta - alpha)`; with the
    /// light material there, `rho = (beta - 1) / (beta - alpha)`.
    pub fn two_step(alpha: f64, beta: f64, center: TwoStepCenter) -> Result<Self> {
        check_bounds(alpha, beta)?;
        let rho = Self::two_step_rho(alpha, beta, center);
        let (inner, outer) = match center {
            TwoStepCenter::Heavy => (beta, alpha),
            TwoStepCenter::Light => (alpha, beta),
        };
        Ok(Density {
            alpha,
            beta,
            breakpoints: vec![rho * PI],
            values: vec![inner, outer],
        })
    }

    /// Jump parameter of the two-step family.
    pub fn two_step_rho(alpha: f64, beta: f64, center: TwoStepCenter) -> f64 {
        match center {
            TwoStepCenter::Heavy => (1.0 - alpha) / (beta - alpha),
            TwoStepCenter::Light => (beta - 1.0) / (beta - alpha),
        }
    }

    /// Bang-bang density taking the value `beta` on `heavy_set` (a union of
    /// disjoint intervals in `(0, pi)`, doubled by symmetry) and `alpha`
    /// elsewhere.
    ///
    /// The total heavy length must match `pi * (1 - alpha) / (beta - alpha)`
    /// within [`INDICATOR_TOL`]; the last interval is then nudged so the mass
    /// is `2*pi` to machine precision.
    pub fn from_indicator(alpha: f64, beta: f64, heavy_set: &[(f64, f64)]) -> Result<Self> {
        check_bounds(alpha, beta)?;
        let target = PI * (1.0 - alpha) / (beta - alpha);

        let mut ivs: Vec<(f64, f64)> = heavy_set
            .iter()
            .copied()
            .filter(|(l, r)| r > l)
            .collect();
        ivs.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in ivs.windows(2) {
            if w[0].1 > w[1].0 {
                return Err(Error::invalid("heavy set intervals overlap".to_string()));
            }
        }
        if let Some(&(l, _)) = ivs.first() {
            if l < 0.0 {
                return Err(Error::invalid("heavy set extends below 0".to_string()));
            }
        }
        if let Some(&(_, r)) = ivs.last() {
            if r > PI + INDICATOR_TOL {
                return Err(Error::invalid("heavy set extends beyond pi".to_string()));
            }
        }

        let length: f64 = ivs.iter().map(|(l, r)| r - l).sum();
        if (length - target).abs() > INDICATOR_TOL {
            return Err(Error::MassViolation {
                expected: 2.0 * PI,
                actual: 2.0 * (beta * length + alpha * (PI - length)),
            });
        }

        // Absorb the residual into one interval so the mass is exact. The
        // widest interval is adjusted on whichever side has room. Residuals
        // at rounding level are left alone so that exact inputs reproduce
        // their breakpoints bit for bit.
        let residual = target - length;
        if residual.abs() > 4.0 * f64::EPSILON * PI && !ivs.is_empty() {
            let k = ivs
                .iter()
                .enumerate()
                .max_by(|a, b| (a.1 .1 - a.1 .0).total_cmp(&(b.1 .1 - b.1 .0)))
                .map(|(i, _)| i)
                .unwrap();
            let room_right = if k + 1 < ivs.len() {
                ivs[k + 1].0 - ivs[k].1
            } else {
                PI - ivs[k].1
            };
            if residual <= room_right {
                ivs[k].1 += residual;
            } else {
                ivs[k].0 -= residual;
            }
        }

        // Assemble breakpoints/values, merging touching intervals.
        let mut breakpoints = Vec::new();
        let mut values = Vec::new();
        let mut cursor = 0.0_f64;
        for &(l, r) in &ivs {
            if l > cursor {
                values.push(alpha);
                breakpoints.push(l);
            }
            values.push(beta);
            if r < PI {
                breakpoints.push(r);
            }
            cursor = r;
        }
        if cursor < PI {
            values.push(alpha);
        }
        if values.is_empty() {
            values.push(alpha);
        }

        let mut d = Density {
            alpha,
            beta,
            breakpoints,
            values,
        };
        d.merge_spurious();
        debug_assert!((d.mass() - 2.0 * PI).abs() <= MASS_TOL);
        Ok(d)
    }

    /// Arbitrary-valued density for validation scenarios in tests. Values
    /// must lie in `[alpha, beta]`; the mass constraint is *not* enforced so
    /// that deliberately invalid densities can be built and flagged.
    pub fn raw(alpha: f64, beta: f64, breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::invalid(
                "values must have one more entry than breakpoints".to_string(),
            ));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1])
            || breakpoints.iter().any(|&b| b <= 0.0 || b >= PI)
        {
            return Err(Error::invalid(
                "breakpoints must be strictly increasing inside (0, pi)".to_string(),
            ));
        }
        if values.iter().any(|&v| v < alpha - 1e-15 || v > beta + 1e-15) {
            return Err(Error::invalid(format!(
                "density values must lie in [{alpha}, {beta}]"
            )));
        }
        let mut d = Density {
            alpha,
            beta,
            breakpoints,
            values,
        };
        d.merge_spurious();
        Ok(d)
    }

    fn merge_spurious(&mut self) {
        let mut i = 0;
        while i + 1 < self.values.len() {
            if self.values[i] == self.values[i + 1] {
                self.values.remove(i + 1);
                self.breakpoints.remove(i);
            } else {
                i += 1;
            }
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of jumps on the open half-beam `(0, pi)`.
    pub fn jump_count(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.values.len() == 1 && self.values[0] == 1.0
    }

    /// True when every piece takes one of the extreme values.
    pub fn is_bang_bang(&self) -> bool {
        self.values
            .iter()
            .all(|&v| v == self.alpha || v == self.beta)
    }

    /// Point evaluation using `|x|`; the left-piece value wins at jumps.
    pub fn eval(&self, x: f64) -> f64 {
        let y = x.abs();
        let idx = self.breakpoints.partition_point(|&b| b < y);
        self.values[idx]
    }

    /// Exact total mass `int_{-pi}^{pi} p dx` as a piecewise sum.
    pub fn mass(&self) -> f64 {
        2.0 * self
            .pieces()
            .map(|(l, r, v)| v * (r - l))
            .sum::<f64>()
    }

    /// Validate the standing invariants: mass, bounds, breakpoint order.
    pub fn validate(&self) -> Result<()> {
        let m = self.mass();
        if (m - 2.0 * PI).abs() > MASS_TOL {
            return Err(Error::MassViolation {
                expected: 2.0 * PI,
                actual: m,
            });
        }
        if self
            .values
            .iter()
            .any(|&v| v < self.alpha - 1e-15 || v > self.beta + 1e-15)
        {
            return Err(Error::invalid("density value out of bounds".to_string()));
        }
        if self.breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("breakpoints out of order".to_string()));
        }
        Ok(())
    }

    /// Iterator over `(left, right, value)` pieces covering `[0, pi]`.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let n = self.values.len();
        (0..n).map(move |i| {
            let l = if i == 0 { 0.0 } else { self.breakpoints[i - 1] };
            let r = if i == n - 1 { PI } else { self.breakpoints[i] };
            (l, r, self.values[i])
        })
    }

    /// Compact single-line record, the inverse of [`Density::parse_record`].
    pub fn to_record(&self) -> String {
        let bp = self
            .breakpoints
            .iter()
            .map(|b| format!("{b:.17e}"))
            .collect::<Vec<_>>()
            .join("|");
        let vals = self
            .values
            .iter()
            .map(|v| format!("{v:.17e}"))
            .collect::<Vec<_>>()
            .join("|");
        format!("alpha={:.17e};beta={:.17e};breakpoints={bp};values={vals}", self.alpha, self.beta)
    }

    pub fn parse_record(s: &str) -> Result<Self> {
        let mut alpha = None;
        let mut beta = None;
        let mut breakpoints = Vec::new();
        let mut values = Vec::new();
        for field in s.trim().split(';') {
            let (key, val) = field
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("bad density field {field:?}")))?;
            let parse_list = |v: &str| -> Result<Vec<f64>> {
                if v.is_empty() {
                    return Ok(Vec::new());
                }
                v.split('|')
                    .map(|t| {
                        t.parse::<f64>()
                            .map_err(|e| Error::invalid(format!("bad number {t:?}: {e}")))
                    })
                    .collect()
            };
            match key.trim() {
                "alpha" => alpha = Some(val.parse::<f64>().map_err(|e| Error::invalid(e.to_string()))?),
                "beta" => beta = Some(val.parse::<f64>().map_err(|e| Error::invalid(e.to_string()))?),
                "breakpoints" => breakpoints = parse_list(val)?,
                "values" => values = parse_list(val)?,
                other => return Err(Error::invalid(format!("unknown density field {other:?}"))),
            }
        }
        let (alpha, beta) = (
            alpha.ok_or_else(|| Error::invalid("missing alpha"))?,
            beta.ok_or_else(|| Error::invalid("missing beta"))?,
        );
        if alpha == 1.0 && beta == 1.0 && breakpoints.is_empty() {
            return Ok(Density::homogeneous());
        }
        check_bounds(alpha, beta)?;
        Density::raw(alpha, beta, breakpoints, values)
    }

    /// Breakpoint-pattern equality within `tol`, used for the fixed-point
    /// exit of the optimization loop.
    pub fn same_layout(&self, other: &Density, tol: f64) -> bool {
        self.values.len() == other.values.len()
            && self
                .breakpoints
                .iter()
                .zip(&other.breakpoints)
                .all(|(a, b)| (a - b).abs() <= tol)
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a == b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_step_rho_matches_closed_formula() {
        // Jump positions for the tabulated material pairs.
        let d = Density::two_step(0.5, 1.5, TwoStepCenter::Heavy).unwrap();
        assert!((d.breakpoints()[0] / PI - 0.5).abs() < 1e-15);
        let d = Density::two_step(1.0 / 3.0, 3.0, TwoStepCenter::Heavy).unwrap();
        assert!((d.breakpoints()[0] / PI - 0.25).abs() < 1e-15);
        let d = Density::two_step(1.0 / 3.0, 2.0, TwoStepCenter::Light).unwrap();
        assert!((d.breakpoints()[0] / PI - 0.6).abs() < 1e-15);
    }

    #[test]
    fn constructor_mass_is_exact() {
        for &(a, b) in &[(0.5, 1.5), (1.0 / 3.0, 3.0), (5.0 / 6.0, 2.5), (2.0 / 3.0, 2.0)] {
            for center in [TwoStepCenter::Heavy, TwoStepCenter::Light] {
                let d = Density::two_step(a, b, center).unwrap();
                assert!((d.mass() - 2.0 * PI).abs() < MASS_TOL);
                d.validate().unwrap();
            }
        }
        assert!((Density::homogeneous().mass() - 2.0 * PI).abs() < MASS_TOL);
    }

    #[test]
    fn eval_uses_left_value_at_jumps_and_is_even() {
        let d = Density::two_step(0.5, 1.5, TwoStepCenter::Heavy).unwrap();
        assert_eq!(d.eval(0.0), 1.5);
        assert_eq!(d.eval(PI), 0.5);
        let b = d.breakpoints()[0];
        assert_eq!(d.eval(b), 1.5, "left piece value at the jump");
        assert_eq!(d.eval(b + 1e-12), 0.5);
        for &x in &[0.3, 1.1, 2.9, b] {
            assert_eq!(d.eval(x), d.eval(-x));
        }
    }

    #[test]
    fn from_indicator_rejects_wrong_mass() {
        // Empty heavy set cannot satisfy the mass constraint when alpha < 1.
        let err = Density::from_indicator(0.5, 1.5, &[]).unwrap_err();
        assert!(matches!(err, Error::MassViolation { .. }));
    }

    #[test]
    fn from_indicator_reproduces_two_step() {
        let alpha = 0.5;
        let beta = 1.5;
        let rho = Density::two_step_rho(alpha, beta, TwoStepCenter::Heavy);
        let d = Density::from_indicator(alpha, beta, &[(0.0, rho * PI)]).unwrap();
        let t = Density::two_step(alpha, beta, TwoStepCenter::Heavy).unwrap();
        assert_eq!(d.breakpoints(), t.breakpoints(), "bit-for-bit breakpoints");
        assert_eq!(d.values(), t.values());
    }

    #[test]
    fn invalid_hand_built_density_is_flagged() {
        let d = Density::raw(0.5, 1.5, vec![], vec![1.5]).unwrap();
        assert!((d.mass() - 2.0 * PI * 1.5).abs() < 1e-12);
        assert!(d.validate().is_err());
    }

    #[test]
    fn record_round_trip() {
        let d = Density::two_step(1.0 / 3.0, 2.5, TwoStepCenter::Light).unwrap();
        let r = d.to_record();
        let back = Density::parse_record(&r).unwrap();
        assert_eq!(d, back);
        let h = Density::homogeneous();
        assert_eq!(Density::parse_record(&h.to_record()).unwrap(), h);
    }

    #[test]
    fn parameter_bounds_are_enforced() {
        assert!(Density::two_step(1.2, 2.0, TwoStepCenter::Heavy).is_err());
        assert!(Density::two_step(0.5, 0.9, TwoStepCenter::Heavy).is_err());
        assert!(PierLayout::new(0.0).is_err());
        assert!(PierLayout::new(1.2).is_err());
    }
}
