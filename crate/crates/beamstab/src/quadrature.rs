//! Adaptive Simpson quadrature.
//!
//! Used to project arbitrary initial profiles onto the eigenbasis, and by the
//! test suites as an integration oracle independent of the exact
//! antiderivatives in [`crate::waveform`].

/// Integrate `f` over `[a, b]` to the requested absolute tolerance.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(&f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Integrate over `[a, b]` splitting first at the given interior points, so
/// kinks of piecewise-smooth integrands do not defeat the error estimate.
pub fn adaptive_simpson_split(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    splits: &[f64],
    tol: f64,
) -> f64 {
    let mut pts: Vec<f64> = splits
        .iter()
        .copied()
        .filter(|&x| x > a && x < b)
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut total = 0.0;
    let mut lo = a;
    for &x in pts.iter().chain([b].iter()) {
        total += adaptive_simpson(&f, lo, x, tol / (pts.len() + 1) as f64);
        lo = x;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn integrates_smooth_functions() {
        let v = adaptive_simpson(|x| x.sin(), 0.0, PI, 1e-12);
        assert!((v - 2.0).abs() < 1e-11);
        let v = adaptive_simpson(|x| (3.0 * x).cos() * x.exp(), 0.0, 1.0, 1e-12);
        let exact = ((1.0f64).exp() * ((3.0f64).cos() + 3.0 * (3.0f64).sin()) - 1.0) / 10.0;
        assert!((v - exact).abs() < 1e-11);
    }

    #[test]
    fn split_handles_kinks() {
        let f = |x: f64| if x < 1.0 { x } else { 2.0 - x };
        let v = adaptive_simpson_split(f, 0.0, 2.0, &[1.0], 1e-12);
        assert!((v - 1.0).abs() < 1e-11);
    }
}
