//! Exact algebra for piecewise trig/hyperbolic closed forms.
//!
//! Eigenfunctions of the beam problem are, on each interval, linear
//! combinations of `cos(m x)`, `sin(m x)` and scaled exponentials. This
//! module represents such functions symbolically so that products,
//! derivatives and definite integrals are evaluated in closed form: the
//! weighted Gram entries and all normalizations are exact to rounding, with
//! no quadrature involved.
//!
//! Hyperbolic parts are stored as `exp(r x + s)` with the shift `s` chosen so
//! the term stays `O(1)` on its segment; raw `cosh`/`sinh` coefficients would
//! lose most of the mantissa for the higher modes.

use std::f64::consts::PI;

/// One elementary term. Products of any two terms expand into at most two
/// terms of the same family, so the representation is closed under
/// multiplication and differentiation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Term {
    /// `cos(om * x + ph)`
    Cos { om: f64, ph: f64 },
    /// `sin(om * x + ph)`
    Sin { om: f64, ph: f64 },
    /// `exp(r * x + s)`
    Exp { r: f64, s: f64 },
    /// `cos(om * x + ph) * exp(r * x + s)`
    CosExp { om: f64, ph: f64, r: f64, s: f64 },
    /// `sin(om * x + ph) * exp(r * x + s)`
    SinExp { om: f64, ph: f64, r: f64, s: f64 },
}

/// `sin(z)/z`, stable near zero.
fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        let z2 = z * z;
        1.0 - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

/// `sinh(z)/z`, stable near zero.
fn sinhc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        let z2 = z * z;
        1.0 + z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sinh() / z
    }
}

/// `ln(2 cosh(u))` without overflow.
pub fn ln_two_cosh(u: f64) -> f64 {
    let a = u.abs();
    a + (-2.0 * a).exp().ln_1p()
}

impl Term {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Term::Cos { om, ph } => (om * x + ph).cos(),
            Term::Sin { om, ph } => (om * x + ph).sin(),
            Term::Exp { r, s } => (r * x + s).exp(),
            Term::CosExp { om, ph, r, s } => (om * x + ph).cos() * (r * x + s).exp(),
            Term::SinExp { om, ph, r, s } => (om * x + ph).sin() * (r * x + s).exp(),
        }
    }

    /// Exact derivative as a sum of weighted terms.
    pub fn derivative(&self) -> Vec<(f64, Term)> {
        match *self {
            Term::Cos { om, ph } => vec![(-om, Term::Sin { om, ph })],
            Term::Sin { om, ph } => vec![(om, Term::Cos { om, ph })],
            Term::Exp { r, s } => vec![(r, Term::Exp { r, s })],
            Term::CosExp { om, ph, r, s } => vec![
                (r, Term::CosExp { om, ph, r, s }),
                (-om, Term::SinExp { om, ph, r, s }),
            ],
            Term::SinExp { om, ph, r, s } => vec![
                (r, Term::SinExp { om, ph, r, s }),
                (om, Term::CosExp { om, ph, r, s }),
            ],
        }
    }

    /// Product expansion; at most two weighted terms.
    pub fn mul(&self, other: &Term) -> Vec<(f64, Term)> {
        // Split each factor into (optional trig, optional exp).
        let (t1, e1) = self.split();
        let (t2, e2) = other.split();
        let exp = match (e1, e2) {
            (None, None) => None,
            (Some(a), None) | (None, Some(a)) => Some(a),
            (Some((r1, s1)), Some((r2, s2))) => Some((r1 + r2, s1 + s2)),
        };
        let trig: Vec<(f64, Option<(bool, f64, f64)>)> = match (t1, t2) {
            (None, None) => vec![(1.0, None)],
            (Some(t), None) | (None, Some(t)) => vec![(1.0, Some(t))],
            (Some((c1, o1, p1)), Some((c2, o2, p2))) => {
                let sum = (o1 + o2, p1 + p2);
                let diff = (o1 - o2, p1 - p2);
                match (c1, c2) {
                    // cos*cos = (cos(d) + cos(s))/2
                    (true, true) => vec![
                        (0.5, Some((true, diff.0, diff.1))),
                        (0.5, Some((true, sum.0, sum.1))),
                    ],
                    // sin*sin = (cos(d) - cos(s))/2
                    (false, false) => vec![
                        (0.5, Some((true, diff.0, diff.1))),
                        (-0.5, Some((true, sum.0, sum.1))),
                    ],
                    // cos*sin = (sin(s) - sin(d))/2
                    (true, false) => vec![
                        (0.5, Some((false, sum.0, sum.1))),
                        (-0.5, Some((false, diff.0, diff.1))),
                    ],
                    // sin*cos = (sin(s) + sin(d))/2
                    (false, true) => vec![
                        (0.5, Some((false, sum.0, sum.1))),
                        (0.5, Some((false, diff.0, diff.1))),
                    ],
                }
            }
        };
        trig.into_iter()
            .map(|(w, t)| (w, Term::assemble(t, exp)))
            .collect()
    }

    /// Decompose into trig `(is_cos, om, ph)` and exp `(r, s)` factors.
    fn split(&self) -> (Option<(bool, f64, f64)>, Option<(f64, f64)>) {
        match *self {
            Term::Cos { om, ph } => (Some((true, om, ph)), None),
            Term::Sin { om, ph } => (Some((false, om, ph)), None),
            Term::Exp { r, s } => (None, Some((r, s))),
            Term::CosExp { om, ph, r, s } => (Some((true, om, ph)), Some((r, s))),
            Term::SinExp { om, ph, r, s } => (Some((false, om, ph)), Some((r, s))),
        }
    }

    fn assemble(trig: Option<(bool, f64, f64)>, exp: Option<(f64, f64)>) -> Term {
        match (trig, exp) {
            (None, None) => Term::Cos { om: 0.0, ph: 0.0 },
            (Some((true, om, ph)), None) => Term::Cos { om, ph },
            (Some((false, om, ph)), None) => Term::Sin { om, ph },
            (None, Some((r, s))) => Term::Exp { r, s },
            (Some((true, om, ph)), Some((r, s))) => Term::CosExp { om, ph, r, s },
            (Some((false, om, ph)), Some((r, s))) => Term::SinExp { om, ph, r, s },
        }
    }

    /// Definite integral over `[a, b]`, stable for small frequencies/rates.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let h = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        match *self {
            Term::Cos { om, ph } => (b - a) * sinc(om * h) * (om * mid + ph).cos(),
            Term::Sin { om, ph } => (b - a) * sinc(om * h) * (om * mid + ph).sin(),
            Term::Exp { r, s } => (b - a) * sinhc(r * h) * (r * mid + s).exp(),
            Term::CosExp { om, ph, r, s } => {
                if r == 0.0 {
                    return s.exp() * Term::Cos { om, ph }.integral(a, b);
                }
                if om == 0.0 {
                    return ph.cos() * Term::Exp { r, s }.integral(a, b);
                }
                let den = r * r + om * om;
                let f = |x: f64| {
                    (r * x + s).exp() * (r * (om * x + ph).cos() + om * (om * x + ph).sin()) / den
                };
                f(b) - f(a)
            }
            Term::SinExp { om, ph, r, s } => {
                if r == 0.0 {
                    return s.exp() * Term::Sin { om, ph }.integral(a, b);
                }
                if om == 0.0 {
                    return ph.sin() * Term::Exp { r, s }.integral(a, b);
                }
                let den = r * r + om * om;
                let f = |x: f64| {
                    (r * x + s).exp() * (r * (om * x + ph).sin() - om * (om * x + ph).cos()) / den
                };
                f(b) - f(a)
            }
        }
    }
}

/// Weighted sum of terms, the closed form of a function on one interval.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinForm(pub Vec<(f64, Term)>);

impl LinForm {
    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().map(|(c, t)| c * t.eval(x)).sum()
    }

    pub fn derivative(&self) -> LinForm {
        let mut out = Vec::with_capacity(self.0.len() * 2);
        for (c, t) in &self.0 {
            for (w, d) in t.derivative() {
                out.push((c * w, d));
            }
        }
        LinForm(out)
    }

    pub fn mul(&self, other: &LinForm) -> LinForm {
        let mut out = Vec::with_capacity(self.0.len() * other.0.len() * 2);
        for (c1, t1) in &self.0 {
            for (c2, t2) in &other.0 {
                for (w, t) in t1.mul(t2) {
                    out.push((c1 * c2 * w, t));
                }
            }
        }
        LinForm(out)
    }

    pub fn scaled(&self, k: f64) -> LinForm {
        LinForm(self.0.iter().map(|(c, t)| (c * k, *t)).collect())
    }

    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.0.iter().map(|(c, t)| c * t.integral(a, b)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

/// Closed-form piece on `[lo, hi]`.
#[derive(Debug, Clone)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub form: LinForm,
}

/// Function on the half-beam `[0, pi]`, extended to `[-pi, pi]` by parity.
#[derive(Debug, Clone)]
pub struct PiecewiseFn {
    pub parity: Parity,
    pub segments: Vec<Segment>,
}

impl PiecewiseFn {
    pub fn new(parity: Parity, segments: Vec<Segment>) -> Self {
        debug_assert!(segments.windows(2).all(|w| w[0].hi <= w[1].lo + 1e-12));
        PiecewiseFn { parity, segments }
    }

    fn segment_for(&self, x: f64) -> &Segment {
        let idx = self
            .segments
            .partition_point(|s| s.hi < x)
            .min(self.segments.len() - 1);
        &self.segments[idx]
    }

    /// Evaluate on the half-beam; `x` must lie in `[0, pi]`.
    pub fn eval_half(&self, x: f64) -> f64 {
        self.segment_for(x).form.eval(x)
    }

    /// Evaluate anywhere in `[-pi, pi]` using the parity extension.
    pub fn eval(&self, x: f64) -> f64 {
        let v = self.eval_half(x.abs());
        if x < 0.0 && self.parity == Parity::Odd {
            -v
        } else {
            v
        }
    }

    pub fn derivative(&self) -> PiecewiseFn {
        PiecewiseFn {
            parity: self.parity.flip(),
            segments: self
                .segments
                .iter()
                .map(|s| Segment {
                    lo: s.lo,
                    hi: s.hi,
                    form: s.form.derivative(),
                })
                .collect(),
        }
    }

    pub fn scaled(&self, k: f64) -> PiecewiseFn {
        PiecewiseFn {
            parity: self.parity,
            segments: self
                .segments
                .iter()
                .map(|s| Segment {
                    lo: s.lo,
                    hi: s.hi,
                    form: s.form.scaled(k),
                })
                .collect(),
        }
    }

    /// Pointwise product; segment boundaries are merged.
    pub fn product(&self, other: &PiecewiseFn) -> PiecewiseFn {
        let cuts = merge_cuts(
            self.segments.iter().map(|s| s.lo).chain([PI]),
            other.segments.iter().map(|s| s.lo).chain([PI]),
        );
        let parity = if self.parity == other.parity {
            Parity::Even
        } else {
            Parity::Odd
        };
        let segments = cuts
            .windows(2)
            .filter(|w| w[1] - w[0] > 1e-13)
            .map(|w| {
                let xm = 0.5 * (w[0] + w[1]);
                Segment {
                    lo: w[0],
                    hi: w[1],
                    form: self.segment_for(xm).form.mul(&other.segment_for(xm).form),
                }
            })
            .collect();
        PiecewiseFn { parity, segments }
    }

    /// `int_0^pi f dx`, exact.
    pub fn integral_half(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| s.form.integral(s.lo, s.hi))
            .sum()
    }

    /// `int_0^pi p(x) f dx`, exact; segments are refined at density jumps.
    pub fn weighted_integral_half(&self, density: &crate::density::Density) -> f64 {
        let mut total = 0.0;
        for (pl, pr, v) in density.pieces() {
            for s in &self.segments {
                let lo = s.lo.max(pl);
                let hi = s.hi.min(pr);
                if hi > lo {
                    total += v * s.form.integral(lo, hi);
                }
            }
        }
        total
    }

    /// `int_{-pi}^{pi} f dx` using the parity extension.
    pub fn integral_full(&self) -> f64 {
        match self.parity {
            Parity::Even => 2.0 * self.integral_half(),
            Parity::Odd => 0.0,
        }
    }
}

fn merge_cuts(a: impl Iterator<Item = f64>, b: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut cuts: Vec<f64> = a.chain(b).chain([0.0]).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-13);
    cuts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{Density, TwoStepCenter};
    use crate::quadrature::adaptive_simpson;

    fn cos_m(m: f64) -> LinForm {
        LinForm(vec![(1.0, Term::Cos { om: m, ph: 0.0 })])
    }

    #[test]
    fn trig_product_integral_matches_quadrature() {
        for &(m1, m2) in &[(1.3, 2.7), (2.0, 2.0), (0.4, 5.5)] {
            let f = cos_m(m1).mul(&cos_m(m2));
            let exact = f.integral(0.2, 2.9);
            let quad = adaptive_simpson(|x| (m1 * x).cos() * (m2 * x).cos(), 0.2, 2.9, 1e-12);
            assert!((exact - quad).abs() < 1e-10, "m1={m1} m2={m2}");
        }
    }

    #[test]
    fn trig_exp_product_integral_matches_quadrature() {
        let m = 3.2;
        let r = 2.1;
        let f = LinForm(vec![(1.0, Term::Sin { om: m, ph: 0.4 })])
            .mul(&LinForm(vec![(1.0, Term::Exp { r, s: -r * 2.0 })]));
        let exact = f.integral(0.0, 2.0);
        let quad = adaptive_simpson(|x| (m * x + 0.4).sin() * (r * (x - 2.0)).exp(), 0.0, 2.0, 1e-12);
        assert!((exact - quad).abs() < 1e-10);
    }

    #[test]
    fn derivative_is_exact() {
        let f = LinForm(vec![
            (0.7, Term::Cos { om: 2.4, ph: 0.1 }),
            (-0.3, Term::Exp { r: 1.1, s: -2.0 }),
            (1.2, Term::SinExp { om: 0.9, ph: 0.0, r: -0.5, s: 0.2 }),
        ]);
        let df = f.derivative();
        let x = 1.234;
        let h = 1e-6;
        let fd = (f.eval(x + h) - f.eval(x - h)) / (2.0 * h);
        assert!((df.eval(x) - fd).abs() < 1e-8);
    }

    #[test]
    fn scaled_hyperbolics_stay_bounded() {
        // cosh(m x)/cosh(m c) for a large m keeps O(1) values at both ends.
        let m = 40.0;
        let c = 2.0;
        let l = ln_two_cosh(m * c);
        let f = LinForm(vec![
            (1.0, Term::Exp { r: m, s: -l }),
            (1.0, Term::Exp { r: -m, s: -l }),
        ]);
        assert!((f.eval(c) - 1.0).abs() < 1e-14);
        assert!(f.eval(0.0) > 0.0 && f.eval(0.0) < 1e-10);
    }

    #[test]
    fn weighted_integral_splits_at_density_jumps() {
        let d = Density::two_step(0.5, 1.5, TwoStepCenter::Heavy).unwrap();
        let f = PiecewiseFn::new(
            Parity::Even,
            vec![Segment {
                lo: 0.0,
                hi: PI,
                form: cos_m(1.7),
            }],
        );
        let got = f.weighted_integral_half(&d);
        let want = adaptive_simpson(|x| d.eval(x) * (1.7 * x).cos(), 0.0, PI, 1e-12);
        assert!((got - want).abs() < 1e-10);
    }

    #[test]
    fn parity_extension_and_full_integral() {
        let f = PiecewiseFn::new(
            Parity::Odd,
            vec![Segment {
                lo: 0.0,
                hi: PI,
                form: LinForm(vec![(1.0, Term::Sin { om: 2.0, ph: 0.0 })]),
            }],
        );
        assert_eq!(f.eval(-1.0), -f.eval(1.0));
        assert_eq!(f.integral_full(), 0.0);
        let g = f.product(&f);
        assert_eq!(g.parity, Parity::Even);
        assert!((g.integral_full() - PI).abs() < 1e-12);
    }
}
