//! Closed-form spectra for two-step densities.
//!
//! On each subinterval of constant density `c` the eigenfunction solves
//! `e'''' = lambda c e`, so it is a combination of `cos`, `sin`, `cosh`,
//! `sinh` with wavenumber `mu c^(1/4)` where `lambda = mu^4`. Imposing the
//! hinged/pier conditions and the gluing regularity reduces the eigenvalue
//! condition to the vanishing of a scalar residual (jump at the pier) or of a
//! 4x4 determinant (jump elsewhere). Roots are located by scanning and
//! bisection; eigenfunctions are recovered from the null space of the full
//! boundary system.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::density::{Density, PierLayout};
use crate::error::{Error, Result};
use crate::waveform::{ln_two_cosh, LinForm, Parity, PiecewiseFn, Segment, Term};

/// Scan step in `mu` for locating sign changes.
pub const SCAN_STEP: f64 = 0.01;
/// Hard ceiling on the scan; the first twelve modes lie far below.
pub const SCAN_CEILING: f64 = 50.0;
/// Bisection is run until the bracket is this narrow.
pub const ROOT_TOL: f64 = 1e-12;
/// Two roots closer than this in `mu` are treated as a simplicity failure.
pub const SIMPLICITY_GAP: f64 = 1e-8;
/// `|rho - a|` below which the degenerate single-interface relations apply.
const CASE_EPS: f64 = 1e-9;

/// Which side of the pier the density jump falls on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpCase {
    /// Jump exactly at the pier; scalar transcendental relations.
    RhoEqA,
    /// Jump beyond the pier (`rho > a`).
    RhoGtA,
    /// Jump before the pier (`rho < a`).
    RhoLtA,
}

/// Parameters of the two-step eigenvalue systems.
///
/// `tau` is the fourth root of the inner density (the material on
/// `[0, rho*pi)`), `sigma` the fourth root of the outer one, and
/// `delta = tau / sigma`.
#[derive(Debug, Clone, Copy)]
pub struct TwoStepParams {
    pub sigma: f64,
    pub tau: f64,
    pub delta: f64,
    pub rho: f64,
    pub a: f64,
    pub case: JumpCase,
    inner_density: f64,
    outer_density: f64,
}

impl TwoStepParams {
    /// Homogeneous beam: both materials equal to 1, fictitious jump at the
    /// pier so the degenerate relations apply.
    pub fn homogeneous(layout: &PierLayout) -> Self {
        TwoStepParams {
            sigma: 1.0,
            tau: 1.0,
            delta: 1.0,
            rho: layout.a(),
            a: layout.a(),
            case: JumpCase::RhoEqA,
            inner_density: 1.0,
            outer_density: 1.0,
        }
    }

    /// Build from a density with at most one jump on the half-beam.
    pub fn new(density: &Density, layout: &PierLayout) -> Result<Self> {
        if density.is_homogeneous() {
            return Ok(Self::homogeneous(layout));
        }
        if density.jump_count() != 1 || !density.is_bang_bang() {
            return Err(Error::invalid(
                "closed-form solver requires a homogeneous or two-step density".to_string(),
            ));
        }
        let rho = density.breakpoints()[0] / PI;
        let inner = density.values()[0];
        let outer = density.values()[1];
        let (sigma, tau) = (outer.powf(0.25), inner.powf(0.25));
        let a = layout.a();
        let case = if (rho - a).abs() < CASE_EPS {
            JumpCase::RhoEqA
        } else if rho > a {
            JumpCase::RhoGtA
        } else {
            JumpCase::RhoLtA
        };
        Ok(TwoStepParams {
            sigma,
            tau,
            delta: tau / sigma,
            rho,
            a,
            case,
            inner_density: inner,
            outer_density: outer,
        })
    }

    fn density_at(&self, x: f64) -> f64 {
        if x <= self.rho * PI {
            self.inner_density
        } else {
            self.outer_density
        }
    }
}

/// One located eigenvalue `lambda = mu^4` with its parity class.
#[derive(Debug, Clone, Copy)]
pub struct EigenRoot {
    pub mu: f64,
    pub lambda: f64,
    pub parity: Parity,
    pub case: JumpCase,
}

fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        1.0 - z * z / 6.0
    } else {
        z.sin() / z
    }
}

fn sinhc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        1.0 + z * z / 6.0
    } else {
        z.sinh() / z
    }
}

/// Determinant of a 4x4 matrix by partially pivoted elimination with rows
/// pre-scaled to unit max-norm. The scaling keeps the huge hyperbolic entries
/// of the high modes in range; it multiplies the determinant by a positive
/// continuous factor, so sign changes (and hence roots) are preserved.
fn det4_scaled(mut m: [[f64; 4]; 4]) -> f64 {
    for row in m.iter_mut() {
        let mx = row.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        if mx > 0.0 {
            for v in row.iter_mut() {
                *v /= mx;
            }
        }
    }
    let mut det = 1.0;
    for k in 0..4 {
        let piv = (k..4).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs())).unwrap();
        if m[piv][k] == 0.0 {
            return 0.0;
        }
        if piv != k {
            m.swap(piv, k);
            det = -det;
        }
        det *= m[k][k];
        for i in k + 1..4 {
            let f = m[i][k] / m[k][k];
            for j in k..4 {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    det
}

/// Residual whose zeros are the even eigenvalue parameters `mu`.
pub fn det_even(mu: f64, p: &TwoStepParams) -> f64 {
    match p.case {
        JumpCase::RhoEqA => {
            // Jump at the pier: eliminating the outer coefficients against
            // the hinged end and the inner ones against the parity
            // conditions leaves one relation between the two sides. Written
            // in multiplied-through form it is pole-free.
            let s = mu * PI * p.sigma * (1.0 - p.rho);
            let t = mu * PI * p.tau * p.rho;
            let d = p.delta;
            d * t.cos() * (s.cos() * s.sinh() - s.sin() * s.cosh())
                - s.sin() * s.sinh() * (t.sin() + t.cos() * t.tanh())
        }
        JumpCase::RhoGtA => det4_scaled(matrix_plus(mu, p, Parity::Even)),
        JumpCase::RhoLtA => det4_scaled(matrix_minus(mu, p, Parity::Even)),
    }
}

/// Residual whose zeros are the odd eigenvalue parameters `mu`.
pub fn det_odd(mu: f64, p: &TwoStepParams) -> f64 {
    match p.case {
        JumpCase::RhoEqA => {
            // Odd counterpart of the pier-jump relation; sin(t)*cotanh(t)
            // is evaluated in the pole-free form sinc/sinhc * cosh.
            let s = mu * PI * p.sigma * (1.0 - p.rho);
            let t = mu * PI * p.tau * p.rho;
            let d = p.delta;
            let sin_coth = sinc(t) / sinhc(t) * t.cosh();
            d * t.sin() * (s.cos() * s.sinh() - s.sin() * s.cosh())
                + s.sin() * s.sinh() * (t.cos() - sin_coth)
        }
        JumpCase::RhoGtA => det4_scaled(matrix_plus(mu, p, Parity::Odd)),
        JumpCase::RhoLtA => det4_scaled(matrix_minus(mu, p, Parity::Odd)),
    }
}

/// 4x4 system for the case `rho > a` (pier inside the inner material).
fn matrix_plus(mu: f64, p: &TwoStepParams, parity: Parity) -> [[f64; 4]; 4] {
    let c = mu * p.tau * p.a * PI;
    let aa = mu * p.tau * p.rho * PI;
    let bb = mu * p.sigma * (p.rho - 1.0) * PI;
    let d = p.delta;
    let dm = 1.0 - d * d;
    let dp = 1.0 + d * d;

    let row1 = match parity {
        Parity::Even => [
            c.cos() * c.cos() * c.sinh(),
            c.cosh() + c.sin() * c.cos() * c.sinh(),
            c.cos() * c.sinh() * c.cosh(),
            c.cos() * c.cosh() * c.cosh(),
        ],
        Parity::Odd => [
            c.sinh() - c.sin() * c.cos() * c.cosh(),
            -c.sin() * c.sin() * c.cosh(),
            -c.sin() * c.sinh() * c.sinh(),
            -c.sin() * c.sinh() * c.cosh(),
        ],
    };
    [
        row1,
        [c.cos(), c.sin(), c.cosh(), c.sinh()],
        [
            dm * (aa.cos() * bb.cosh() + d * aa.sin() * bb.sinh()),
            dm * (aa.sin() * bb.cosh() - d * aa.cos() * bb.sinh()),
            dp * (aa.cosh() * bb.cosh() - d * aa.sinh() * bb.sinh()),
            dp * (aa.sinh() * bb.cosh() - d * aa.cosh() * bb.sinh()),
        ],
        [
            dp * (aa.cos() * bb.cos() + d * aa.sin() * bb.sin()),
            dp * (aa.sin() * bb.cos() - d * aa.cos() * bb.sin()),
            dm * (aa.cosh() * bb.cos() - d * aa.sinh() * bb.sin()),
            dm * (aa.sinh() * bb.cos() - d * aa.cosh() * bb.sin()),
        ],
    ]
}

/// 4x4 system for the case `rho < a` (pier inside the outer material).
fn matrix_minus(mu: f64, p: &TwoStepParams, parity: Parity) -> [[f64; 4]; 4] {
    let dd = mu * p.sigma * p.a * PI;
    let e = mu * p.sigma * (p.a - 1.0) * PI;
    let g = mu * p.sigma * p.rho * PI;
    let h = mu * p.tau * p.rho * PI;
    let d = p.delta;
    let dm = 1.0 - d * d;
    let dp = 1.0 + d * d;

    let row2 = [
        dd.cos() * e.cos() * e.sinh() - dd.cos() * e.cosh() * e.sin() + dd.sin() * e.sin() * e.sinh(),
        dd.sin() * e.cos() * e.sinh() - dd.sin() * e.cosh() * e.sin() - dd.cos() * e.sin() * e.sinh(),
        -dd.sinh() * e.sin() * e.sinh(),
        -dd.cosh() * e.sin() * e.sinh(),
    ];
    let (row3, row4) = match parity {
        Parity::Even => (
            [
                dm * (g.sin() * h.cosh() + d * g.cos() * h.sinh()),
                -dm * (g.cos() * h.cosh() - d * g.sin() * h.sinh()),
                dp * (g.sinh() * h.cosh() - d * g.cosh() * h.sinh()),
                dp * (g.cosh() * h.cosh() - d * g.sinh() * h.sinh()),
            ],
            [
                dp * (g.sin() * h.cos() - d * g.cos() * h.sin()),
                -dp * (g.cos() * h.cos() + d * g.sin() * h.sin()),
                dm * (g.sinh() * h.cos() + d * g.cosh() * h.sin()),
                dm * (g.cosh() * h.cos() + d * g.sinh() * h.sin()),
            ],
        ),
        Parity::Odd => (
            [
                dm * (g.sin() * h.sinh() + d * g.cos() * h.cosh()),
                -dm * (g.cos() * h.sinh() - d * g.sin() * h.cosh()),
                dp * (g.sinh() * h.sinh() - d * g.cosh() * h.cosh()),
                dp * (g.cosh() * h.sinh() - d * g.sinh() * h.cosh()),
            ],
            [
                dp * (-g.sin() * h.sin() - d * g.cos() * h.cos()),
                dp * (g.cos() * h.sin() - d * g.sin() * h.cos()),
                dm * (-g.sinh() * h.sin() + d * g.cosh() * h.cos()),
                dm * (-g.cosh() * h.sin() + d * g.sinh() * h.cos()),
            ],
        ),
    };
    [[dd.cos(), dd.sin(), dd.cosh(), dd.sinh()], row2, row3, row4]
}

/// Locate the first `count` roots of `f` above zero by scanning with
/// [`SCAN_STEP`] up to `ceiling` and refining each bracket by bisection.
fn scan_roots(f: &impl Fn(f64) -> f64, count: usize, ceiling: f64) -> Vec<f64> {
    let mut roots = Vec::new();
    let mut mu = SCAN_STEP;
    let mut prev = f(mu);
    while mu < ceiling && roots.len() < count {
        let next_mu = mu + SCAN_STEP;
        let next = f(next_mu);
        if prev == 0.0 {
            roots.push(mu);
        } else if prev * next < 0.0 {
            roots.push(bisect(f, mu, next_mu, prev));
        }
        mu = next_mu;
        prev = next;
    }
    roots
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, flo: f64) -> f64 {
    let sign_lo = flo.signum();
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= ROOT_TOL {
            return mid;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Roots of one parity class only.
///
/// Bracketing runs on [`boundary_det`], which shares its zero set with
/// [`det_even`]/[`det_odd`] but stays well scaled where the raw determinant
/// entries drown the crossings in rounding noise (large `mu` with a pier far
/// from the middle).
pub fn parity_roots(params: &TwoStepParams, parity: Parity, count: usize) -> Result<Vec<f64>> {
    let f = |mu: f64| boundary_det(mu, params, parity);
    let roots = scan_roots(&f, count, SCAN_CEILING);
    if roots.len() < count {
        return Err(Error::NotEnoughRoots {
            found: roots.len(),
            requested: count,
            ceiling: SCAN_CEILING,
        });
    }
    Ok(roots)
}

/// First `count` eigenvalues of the two-step problem, both parities merged
/// and sorted by `lambda`. Fails if a pair of roots sits closer than
/// [`SIMPLICITY_GAP`], which would contradict the simplicity of the spectrum.
pub fn find_eigenvalues(
    density: &Density,
    layout: &PierLayout,
    count: usize,
) -> Result<Vec<EigenRoot>> {
    let params = TwoStepParams::new(density, layout)?;
    find_eigenvalues_params(&params, count)
}

pub fn find_eigenvalues_params(params: &TwoStepParams, count: usize) -> Result<Vec<EigenRoot>> {
    // Scanning `count` per parity guarantees the merged first `count`.
    let even = parity_roots(params, Parity::Even, count)?;
    let odd = parity_roots(params, Parity::Odd, count)?;
    let mut all: Vec<EigenRoot> = even
        .into_iter()
        .map(|mu| (mu, Parity::Even))
        .chain(odd.into_iter().map(|mu| (mu, Parity::Odd)))
        .map(|(mu, parity)| EigenRoot {
            mu,
            lambda: mu.powi(4),
            parity,
            case: params.case,
        })
        .collect();
    all.sort_by(|a, b| a.mu.total_cmp(&b.mu));
    for w in all.windows(2) {
        let gap = w[1].mu - w[0].mu;
        if gap < SIMPLICITY_GAP {
            return Err(Error::RootsTooClose { mu: w[0].mu, gap });
        }
    }
    all.truncate(count);
    Ok(all)
}

// ---------------------------------------------------------------------------
// Eigenfunction reconstruction
// ---------------------------------------------------------------------------

/// Basis of the general solution on `[lo, hi]` with wavenumber `m`:
/// `cos`, `sin`, and the two end-anchored decaying exponentials.
fn full_basis(m: f64, lo: f64, hi: f64) -> Vec<LinForm> {
    vec![
        LinForm(vec![(1.0, Term::Cos { om: m, ph: 0.0 })]),
        LinForm(vec![(1.0, Term::Sin { om: m, ph: 0.0 })]),
        LinForm(vec![(1.0, Term::Exp { r: m, s: -m * hi })]),
        LinForm(vec![(1.0, Term::Exp { r: -m, s: m * lo })]),
    ]
}

/// Parity-reduced basis on `[0, hi]`: even solutions have vanishing odd
/// derivatives at 0, odd ones vanish there with their second derivative.
/// The hyperbolic part is normalized by `cosh(m*hi)` to stay bounded.
fn parity_basis(m: f64, hi: f64, parity: Parity) -> Vec<LinForm> {
    let l = ln_two_cosh(m * hi);
    match parity {
        Parity::Even => vec![
            LinForm(vec![(1.0, Term::Cos { om: m, ph: 0.0 })]),
            LinForm(vec![(1.0, Term::Exp { r: m, s: -l }), (1.0, Term::Exp { r: -m, s: -l })]),
        ],
        Parity::Odd => vec![
            LinForm(vec![(1.0, Term::Sin { om: m, ph: 0.0 })]),
            LinForm(vec![(1.0, Term::Exp { r: m, s: -l }), (-1.0, Term::Exp { r: -m, s: -l })]),
        ],
    }
}

struct IntervalBasis {
    lo: f64,
    hi: f64,
    /// Per basis function: value, first, second and third derivative forms.
    derivs: Vec<[LinForm; 4]>,
}

impl IntervalBasis {
    fn new(lo: f64, hi: f64, basis: Vec<LinForm>) -> Self {
        let derivs = basis
            .into_iter()
            .map(|f| {
                let d1 = f.derivative();
                let d2 = d1.derivative();
                let d3 = d2.derivative();
                [f, d1, d2, d3]
            })
            .collect();
        IntervalBasis { lo, hi, derivs }
    }

    fn len(&self) -> usize {
        self.derivs.len()
    }
}

/// Row constraints for the homogeneous boundary system.
enum Joint {
    /// `C^3` gluing of adjacent intervals at a density jump.
    Glue(f64),
    /// Pier: both sides vanish, first and second derivatives match.
    Pier(f64),
}

struct BoundarySystem {
    intervals: Vec<IntervalBasis>,
    offsets: Vec<usize>,
    /// Condition rows, equilibrated to unit max-norm.
    matrix: DMatrix<f64>,
}

/// Assemble the full gluing/pier/end condition system over the
/// decay-scaled interval bases. Nontrivial null vectors exist exactly at
/// the eigenvalue parameters `mu`.
fn boundary_system(mu: f64, params: &TwoStepParams, parity: Parity) -> BoundarySystem {
    let a_pi = params.a * PI;
    let rho_pi = params.rho * PI;
    let m_in = mu * params.tau;
    let m_out = mu * params.sigma;

    let (intervals, joints): (Vec<IntervalBasis>, Vec<Joint>) = match params.case {
        JumpCase::RhoEqA => (
            vec![
                IntervalBasis::new(0.0, a_pi, parity_basis(m_in, a_pi, parity)),
                IntervalBasis::new(a_pi, PI, full_basis(m_out, a_pi, PI)),
            ],
            vec![Joint::Pier(a_pi)],
        ),
        JumpCase::RhoGtA => (
            vec![
                IntervalBasis::new(0.0, a_pi, parity_basis(m_in, a_pi, parity)),
                IntervalBasis::new(a_pi, rho_pi, full_basis(m_in, a_pi, rho_pi)),
                IntervalBasis::new(rho_pi, PI, full_basis(m_out, rho_pi, PI)),
            ],
            vec![Joint::Pier(a_pi), Joint::Glue(rho_pi)],
        ),
        JumpCase::RhoLtA => (
            vec![
                IntervalBasis::new(0.0, rho_pi, parity_basis(m_in, rho_pi, parity)),
                IntervalBasis::new(rho_pi, a_pi, full_basis(m_out, rho_pi, a_pi)),
                IntervalBasis::new(a_pi, PI, full_basis(m_out, a_pi, PI)),
            ],
            vec![Joint::Glue(rho_pi), Joint::Pier(a_pi)],
        ),
    };

    let n: usize = intervals.iter().map(|iv| iv.len()).sum();
    let offsets: Vec<usize> = intervals
        .iter()
        .scan(0usize, |acc, iv| {
            let o = *acc;
            *acc += iv.len();
            Some(o)
        })
        .collect();

    let mut mat = DMatrix::<f64>::zeros(n, n);
    let mut row = 0;
    let put = |mat: &mut DMatrix<f64>, row: usize, iv: usize, order: usize, x: f64, sign: f64| {
        for (k, d) in intervals[iv].derivs.iter().enumerate() {
            mat[(row, offsets[iv] + k)] += sign * d[order].eval(x);
        }
    };

    for (j, joint) in joints.iter().enumerate() {
        match *joint {
            Joint::Glue(x) => {
                for order in 0..4 {
                    put(&mut mat, row, j, order, x, 1.0);
                    put(&mut mat, row, j + 1, order, x, -1.0);
                    row += 1;
                }
            }
            Joint::Pier(x) => {
                put(&mut mat, row, j, 0, x, 1.0);
                row += 1;
                put(&mut mat, row, j + 1, 0, x, 1.0);
                row += 1;
                for order in 1..3 {
                    put(&mut mat, row, j, order, x, 1.0);
                    put(&mut mat, row, j + 1, order, x, -1.0);
                    row += 1;
                }
            }
        }
    }
    let last = intervals.len() - 1;
    put(&mut mat, row, last, 0, PI, 1.0);
    row += 1;
    put(&mut mat, row, last, 2, PI, 1.0);
    row += 1;
    debug_assert_eq!(row, n);

    // Equilibrate rows; the derivative rows carry factors mu^2, mu^3.
    for i in 0..n {
        let mx = (0..n).map(|j| mat[(i, j)].abs()).fold(0.0_f64, f64::max);
        if mx > 0.0 {
            for j in 0..n {
                mat[(i, j)] /= mx;
            }
        }
    }
    BoundarySystem {
        intervals,
        offsets,
        matrix: mat,
    }
}

fn lu_det(mut m: DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut det = 1.0;
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| m[(i, k)].abs().total_cmp(&m[(j, k)].abs()))
            .unwrap();
        if m[(piv, k)] == 0.0 {
            return 0.0;
        }
        if piv != k {
            m.swap_rows(piv, k);
            det = -det;
        }
        det *= m[(k, k)];
        for i in k + 1..n {
            let f = m[(i, k)] / m[(k, k)];
            for j in k..n {
                m[(i, j)] -= f * m[(k, j)];
            }
        }
    }
    det
}

/// Determinant of the equilibrated boundary system. Shares its zeros with
/// the reduced determinants of [`det_even`]/[`det_odd`] (the bases differ by
/// a nowhere-vanishing rescaling), but its entries stay `O(1)` at any `mu`,
/// so sign changes remain meaningful where the reduced forms underflow.
pub fn boundary_det(mu: f64, params: &TwoStepParams, parity: Parity) -> f64 {
    lu_det(boundary_system(mu, params, parity).matrix)
}

/// Recover the eigenfunction for a located root as the null vector of the
/// boundary system, normalized in the density-weighted norm with a positive
/// value (even) or slope (odd) at the origin.
pub fn eigenfunction_closed_form(root: &EigenRoot, params: &TwoStepParams) -> Result<PiecewiseFn> {
    let BoundarySystem {
        intervals,
        offsets,
        matrix: mat,
    } = boundary_system(root.mu, params, root.parity);
    let n = mat.nrows();

    let svd = mat.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("svd requested v_t");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let (smallest, second) = (order[0], order[1]);
    let sigma_max = svd.singular_values[order[n - 1]];
    if svd.singular_values[second] < 1e-6 * sigma_max {
        return Err(Error::DegenerateNullSpace(
            svd.singular_values[second] / sigma_max,
        ));
    }
    let null = v_t.row(smallest);

    let segments: Vec<Segment> = intervals
        .iter()
        .enumerate()
        .map(|(i, iv)| {
            let mut form = LinForm::default();
            for (k, d) in iv.derivs.iter().enumerate() {
                let c = null[offsets[i] + k];
                form.0.extend(d[0].0.iter().map(|(w, t)| (c * w, *t)));
            }
            Segment {
                lo: iv.lo,
                hi: iv.hi,
                form,
            }
        })
        .collect();
    let fun = PiecewiseFn::new(root.parity, segments);

    // Weighted normalization: each segment sits inside one density piece.
    let norm_sq: f64 = 2.0
        * fun
            .segments
            .iter()
            .map(|s| {
                let w = params.density_at(0.5 * (s.lo + s.hi));
                w * s.form.mul(&s.form).integral(s.lo, s.hi)
            })
            .sum::<f64>();
    if !(norm_sq > 0.0) {
        return Err(Error::EigenSolver("eigenfunction has zero norm".to_string()));
    }
    let mut fun = fun.scaled(1.0 / norm_sq.sqrt());

    let anchor = match root.parity {
        Parity::Even => fun.eval_half(0.0),
        Parity::Odd => fun.derivative().eval_half(0.0),
    };
    if anchor < 0.0 {
        fun = fun.scaled(-1.0);
    }
    Ok(fun)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::TwoStepCenter;

    fn homogeneous_params(a: f64) -> TwoStepParams {
        TwoStepParams::homogeneous(&PierLayout::new(a).unwrap())
    }

    #[test]
    fn homogeneous_half_pier_has_exact_sine_modes() {
        // For a = 1/2 the functions sin(2kx) satisfy every condition, so
        // mu = 2 and mu = 4 must appear among the odd roots.
        let roots = find_eigenvalues(&Density::homogeneous(), &PierLayout::new(0.5).unwrap(), 12)
            .unwrap();
        let odd: Vec<f64> = roots
            .iter()
            .filter(|r| r.parity == Parity::Odd)
            .map(|r| r.mu)
            .collect();
        assert!(odd.iter().any(|&m| (m - 2.0).abs() < 1e-9), "odd roots {odd:?}");
        assert!(odd.iter().any(|&m| (m - 4.0).abs() < 1e-9));
    }

    #[test]
    fn determinants_are_finite_near_zero() {
        let p = TwoStepParams::new(
            &Density::two_step(0.5, 2.0, TwoStepCenter::Heavy).unwrap(),
            &PierLayout::new(0.5).unwrap(),
        )
        .unwrap();
        for &mu in &[1e-8, 1e-4, 1e-2] {
            assert!(det_even(mu, &p).is_finite());
            assert!(det_odd(mu, &p).is_finite());
        }
    }

    #[test]
    fn delta_one_four_by_four_matches_degenerate_relation() {
        // A fictitious jump in a homogeneous beam must not move the roots.
        let a = 0.37;
        let scalar = homogeneous_params(a);
        let mut fake = scalar;
        fake.rho = 0.61;
        fake.case = JumpCase::RhoGtA;
        let r1 = parity_roots(&scalar, Parity::Even, 6).unwrap();
        let r2 = parity_roots(&fake, Parity::Even, 6).unwrap();
        for (a, b) in r1.iter().zip(&r2) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        let r1 = parity_roots(&scalar, Parity::Odd, 6).unwrap();
        let r2 = parity_roots(&fake, Parity::Odd, 6).unwrap();
        for (a, b) in r1.iter().zip(&r2) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn case_branches_agree_near_the_switch() {
        // Eigenvalue curves must be continuous across rho = a.
        let alpha = 1.0 / 3.0;
        let beta = 3.0;
        let d = Density::two_step(alpha, beta, TwoStepCenter::Heavy).unwrap();
        let rho = d.breakpoints()[0] / PI;
        let eps = 1e-6;
        let lo = find_eigenvalues(&d, &PierLayout::new(rho - eps).unwrap(), 12).unwrap();
        let hi = find_eigenvalues(&d, &PierLayout::new(rho + eps).unwrap(), 12).unwrap();
        let eq = find_eigenvalues(&d, &PierLayout::new(rho).unwrap(), 12).unwrap();
        assert_eq!(eq[0].case, JumpCase::RhoEqA);
        for j in 0..12 {
            let rel = (lo[j].lambda - hi[j].lambda).abs() / eq[j].lambda;
            assert!(rel < 1e-4, "mode {j}: {} vs {}", lo[j].lambda, hi[j].lambda);
            let rel_eq = (eq[j].lambda - 0.5 * (lo[j].lambda + hi[j].lambda)).abs() / eq[j].lambda;
            assert!(rel_eq < 1e-4, "mode {j} at the switch");
        }
    }

    #[test]
    fn sign_change_brackets_single_root() {
        // A fine rescan inside each coarse bracket must find exactly one
        // crossing.
        let p = TwoStepParams::new(
            &Density::two_step(0.5, 2.0, TwoStepCenter::Heavy).unwrap(),
            &PierLayout::new(0.3).unwrap(),
        )
        .unwrap();
        let f = |mu: f64| det_even(mu, &p);
        let mut mu = SCAN_STEP;
        let mut prev = f(mu);
        let mut brackets = 0;
        while mu < 6.0 {
            let next = f(mu + SCAN_STEP);
            if prev * next < 0.0 {
                brackets += 1;
                let mut crossings = 0;
                let fine = 1e-4;
                let mut x = mu;
                let mut fp = prev;
                while x < mu + SCAN_STEP - 0.5 * fine {
                    let fx = f(x + fine);
                    if fp * fx < 0.0 {
                        crossings += 1;
                    }
                    fp = fx;
                    x += fine;
                }
                assert_eq!(crossings, 1, "bracket at mu={mu}");
            }
            prev = next;
            mu += SCAN_STEP;
        }
        assert!(brackets >= 4);
    }

    #[test]
    fn eigenfunction_satisfies_constraints() {
        let layout = PierLayout::new(0.45).unwrap();
        let d = Density::two_step(0.5, 2.0, TwoStepCenter::Heavy).unwrap();
        let params = TwoStepParams::new(&d, &layout).unwrap();
        let roots = find_eigenvalues(&d, &layout, 6).unwrap();
        for root in &roots {
            let e = eigenfunction_closed_form(root, &params).unwrap();
            assert!(e.eval_half(PI).abs() < 1e-8, "hinged end");
            assert!(e.eval_half(layout.pier()).abs() < 1e-8, "pier");
            let d2 = e.derivative().derivative();
            assert!(d2.eval_half(PI).abs() / root.mu.powi(2) < 1e-8, "moment-free end");
            // Rayleigh identity against the located eigenvalue.
            let bending = 2.0 * d2.product(&d2).integral_half();
            assert!(
                (bending - root.lambda).abs() / root.lambda < 1e-6,
                "mode at mu={}: bending {} vs lambda {}",
                root.mu,
                bending,
                root.lambda
            );
        }
    }

    #[test]
    fn eigenfunctions_are_weighted_orthonormal() {
        let layout = PierLayout::new(0.6).unwrap();
        let d = Density::two_step(1.0 / 3.0, 2.0, TwoStepCenter::Light).unwrap();
        let params = TwoStepParams::new(&d, &layout).unwrap();
        let roots = find_eigenvalues(&d, &layout, 8).unwrap();
        let funs: Vec<PiecewiseFn> = roots
            .iter()
            .map(|r| eigenfunction_closed_form(r, &params).unwrap())
            .collect();
        for i in 0..funs.len() {
            for j in i..funs.len() {
                let prod = funs[i].product(&funs[j]);
                let val = if funs[i].parity == funs[j].parity {
                    2.0 * prod.weighted_integral_half(&d)
                } else {
                    0.0 // opposite parities integrate to zero over (-pi, pi)
                };
                let want = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (val - want).abs() < 1e-6,
                    "({i},{j}): got {val}, want {want}"
                );
            }
        }
    }
}
