//! Spectral solve for arbitrary bang-bang densities.
//!
//! Eigenfunctions are expanded in the eigenbasis of the homogeneous beam
//! (`p == 1`, same pier layout), separately per parity class. Testing the
//! weak form against the basis turns the weighted problem into
//! `diag(Lambda) c = lambda M c` with `M_ij = int p eta_i eta_j dx`, which is
//! solved as a symmetric-definite eigenproblem. Gram entries are exact:
//! products of basis closed forms are integrated piecewise against the
//! density, with no quadrature error.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::closed_form::{self, TwoStepParams};
use crate::density::{Density, PierLayout};
use crate::error::{Error, Result};
use crate::waveform::{Parity, PiecewiseFn};

/// Expansion order per parity class.
pub const DEFAULT_BASIS_ORDER: usize = 14;

/// Sample cells on the half-beam for profile work (grid has `+1` points).
pub const PROFILE_CELLS: usize = 4096;

/// One homogeneous eigenpair with cached closed forms and grid samples.
pub struct BasisFun {
    pub lambda: f64,
    pub mu: f64,
    pub fun: PiecewiseFn,
    pub d2: PiecewiseFn,
    /// Value at 0 (even) or slope at 0 (odd); fixes sign conventions.
    pub anchor: f64,
    /// Values on the uniform half-beam grid.
    pub grid_vals: Vec<f64>,
}

/// Homogeneous eigenbasis for a pier layout, `n` modes per parity,
/// normalized in unweighted `L^2(-pi, pi)`.
pub struct HomogeneousBasis {
    pub a: f64,
    pub n: usize,
    pub even: Vec<BasisFun>,
    pub odd: Vec<BasisFun>,
    /// Exact bending Grams `int eta_i'' eta_j'' dx` per parity; equal to
    /// `diag(Lambda)` up to reconstruction error.
    pub even_bending: DMatrix<f64>,
    pub odd_bending: DMatrix<f64>,
}

impl HomogeneousBasis {
    pub fn parity(&self, parity: Parity) -> &[BasisFun] {
        match parity {
            Parity::Even => &self.even,
            Parity::Odd => &self.odd,
        }
    }

    pub fn bending(&self, parity: Parity) -> &DMatrix<f64> {
        match parity {
            Parity::Even => &self.even_bending,
            Parity::Odd => &self.odd_bending,
        }
    }

    /// Homogeneous eigenvalues, both parities merged and sorted.
    pub fn merged_eigenvalues(&self) -> Vec<(f64, Parity)> {
        let mut v: Vec<(f64, Parity)> = self
            .even
            .iter()
            .map(|b| (b.lambda, Parity::Even))
            .chain(self.odd.iter().map(|b| (b.lambda, Parity::Odd)))
            .collect();
        v.sort_by(|x, y| x.0.total_cmp(&y.0));
        v
    }
}

/// Uniform grid on `[0, pi]` shared by all profile computations.
pub fn half_grid() -> Vec<f64> {
    (0..=PROFILE_CELLS)
        .map(|i| i as f64 * std::f64::consts::PI / PROFILE_CELLS as f64)
        .collect()
}

fn build_parity(
    params: &TwoStepParams,
    parity: Parity,
    n: usize,
    grid: &[f64],
) -> Result<Vec<BasisFun>> {
    let mus = closed_form::parity_roots(params, parity, n)?;
    mus.into_iter()
        .map(|mu| {
            let root = closed_form::EigenRoot {
                mu,
                lambda: mu.powi(4),
                parity,
                case: params.case,
            };
            // The closed-form routine normalizes in the p-weighted norm,
            // which for p == 1 is exactly the unweighted normalization.
            let fun = closed_form::eigenfunction_closed_form(&root, params)?;
            let d1 = fun.derivative();
            let d2 = d1.derivative();
            let anchor = match parity {
                Parity::Even => fun.eval_half(0.0),
                Parity::Odd => d1.eval_half(0.0),
            };
            let grid_vals = grid.iter().map(|&x| fun.eval_half(x)).collect();
            Ok(BasisFun {
                lambda: root.lambda,
                mu,
                fun,
                d2,
                anchor,
                grid_vals,
            })
        })
        .collect()
}

/// Build (or fetch from the process-wide cache) the homogeneous basis for a
/// layout. Solves on a built basis are pure and freely concurrent.
pub fn build_homogeneous_basis(layout: &PierLayout, n: usize) -> Result<Arc<HomogeneousBasis>> {
    if n < 12 {
        return Err(Error::invalid(format!(
            "basis order must be at least 12, got {n}"
        )));
    }
    static CACHE: OnceLock<Mutex<HashMap<(u64, usize), Arc<HomogeneousBasis>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (layout.a().to_bits(), n);
    if let Some(b) = cache.lock().unwrap().get(&key) {
        return Ok(b.clone());
    }
    let params = TwoStepParams::homogeneous(layout);
    let grid = half_grid();
    let even = build_parity(&params, Parity::Even, n, &grid)?;
    let odd = build_parity(&params, Parity::Odd, n, &grid)?;
    let bending = |funs: &[BasisFun]| {
        let mut k = DMatrix::zeros(funs.len(), funs.len());
        for i in 0..funs.len() {
            for j in i..funs.len() {
                let v = 2.0 * funs[i].d2.product(&funs[j].d2).integral_half();
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        k
    };
    let basis = Arc::new(HomogeneousBasis {
        a: layout.a(),
        n,
        even_bending: bending(&even),
        odd_bending: bending(&odd),
        even,
        odd,
    });
    cache.lock().unwrap().insert(key, basis.clone());
    Ok(basis)
}

/// Weighted Gram matrix `M_ij = int_I p eta_i eta_j dx` for one parity
/// class, assembled from exact piecewise antiderivatives.
pub fn weighted_gram(p: &Density, basis: &HomogeneousBasis, parity: Parity) -> DMatrix<f64> {
    let funs = basis.parity(parity);
    let n = funs.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = 2.0 * funs[i]
                .fun
                .product(&funs[j].fun)
                .weighted_integral_half(p);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// One eigenpair of the weighted problem in basis coordinates.
#[derive(Debug, Clone)]
pub struct WeightedPair {
    pub lambda: f64,
    pub parity: Parity,
    /// Expansion coefficients over the parity's basis, normalized so that
    /// the eigenfunction has unit p-weighted norm.
    pub coeffs: Vec<f64>,
}

/// Spectrum of the weighted problem for one density and layout.
pub struct WeightedSpectrum {
    pub pairs: Vec<WeightedPair>,
    pub density: Density,
    pub layout: PierLayout,
    pub basis: Arc<HomogeneousBasis>,
    pub even_gram: DMatrix<f64>,
    pub odd_gram: DMatrix<f64>,
}

impl WeightedSpectrum {
    pub fn gram(&self, parity: Parity) -> &DMatrix<f64> {
        match parity {
            Parity::Even => &self.even_gram,
            Parity::Odd => &self.odd_gram,
        }
    }
}

/// Eigenpairs kept per parity class (six and six merge into twelve modes).
pub const KEPT_PER_PARITY: usize = 6;

fn solve_parity(
    basis: &HomogeneousBasis,
    parity: Parity,
    m: &DMatrix<f64>,
    keep: usize,
) -> Result<Vec<WeightedPair>> {
    let funs = basis.parity(parity);
    let n = funs.len();

    // Congruence by diag(Lambda)^(-1/2) turns diag(Lambda) c = lambda M c
    // into the standard symmetric problem Mt y = (1/lambda) y.
    let sqrt_l: Vec<f64> = funs.iter().map(|b| b.lambda.sqrt()).collect();
    let mut mt = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            mt[(i, j)] = m[(i, j)] / (sqrt_l[i] * sqrt_l[j]);
        }
    }
    let eig = SymmetricEigen::new(mt);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let theta_min = eig.eigenvalues[order[n - 1]];
    if theta_min <= 0.0 {
        return Err(Error::GramNotPositiveDefinite(theta_min));
    }

    let mut out = Vec::with_capacity(keep);
    for &k in order.iter().take(keep) {
        let lambda = 1.0 / eig.eigenvalues[k];
        let y = eig.eigenvectors.column(k);
        let mut c: Vec<f64> = (0..n).map(|i| y[i] / sqrt_l[i]).collect();
        // Renormalize in the p-weighted norm: c^T M c = 1.
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad += c[i] * m[(i, j)] * c[j];
            }
        }
        let scale = 1.0 / quad.sqrt();
        let anchor: f64 = c.iter().zip(funs).map(|(ci, b)| ci * b.anchor).sum();
        let sign = if anchor < 0.0 { -1.0 } else { 1.0 };
        for ci in c.iter_mut() {
            *ci *= scale * sign;
        }
        out.push(WeightedPair {
            lambda,
            parity,
            coeffs: c,
        });
    }
    Ok(out)
}

/// First twelve eigenpairs of the weighted problem (six per parity, merged).
pub fn solve_weighted_spectrum(
    p: &Density,
    layout: &PierLayout,
    n: usize,
) -> Result<WeightedSpectrum> {
    p.validate()?;
    let basis = build_homogeneous_basis(layout, n)?;
    let even_gram = weighted_gram(p, &basis, Parity::Even);
    let odd_gram = weighted_gram(p, &basis, Parity::Odd);
    let mut pairs = solve_parity(&basis, Parity::Even, &even_gram, KEPT_PER_PARITY)?;
    pairs.extend(solve_parity(&basis, Parity::Odd, &odd_gram, KEPT_PER_PARITY)?);
    pairs.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    for w in pairs.windows(2) {
        if w[1].lambda <= w[0].lambda {
            return Err(Error::EigenSolver(format!(
                "merged spectrum not strictly increasing near lambda = {}",
                w[0].lambda
            )));
        }
    }
    Ok(WeightedSpectrum {
        pairs,
        density: p.clone(),
        layout: *layout,
        basis,
        even_gram,
        odd_gram,
    })
}

impl WeightedSpectrum {
    /// Eigenvalues in increasing order with parity labels.
    pub fn eigenvalues(&self) -> Vec<(f64, Parity)> {
        self.pairs.iter().map(|p| (p.lambda, p.parity)).collect()
    }

    /// Evaluate the `j`-th eigenfunction (1-based, spectral order) at `x`.
    pub fn eigenfunction_eval(&self, j: usize, x: f64) -> f64 {
        let pair = &self.pairs[j - 1];
        let funs = self.basis.parity(pair.parity);
        let v: f64 = pair
            .coeffs
            .iter()
            .zip(funs)
            .map(|(c, b)| c * b.fun.eval_half(x.abs()))
            .sum();
        if x < 0.0 && pair.parity == Parity::Odd {
            -v
        } else {
            v
        }
    }

    /// Values of the `j`-th eigenfunction on the shared half-beam grid.
    pub fn eigenfunction_grid(&self, j: usize) -> Vec<f64> {
        let pair = &self.pairs[j - 1];
        let funs = self.basis.parity(pair.parity);
        let npts = funs[0].grid_vals.len();
        let mut out = vec![0.0; npts];
        for (c, b) in pair.coeffs.iter().zip(funs) {
            for (o, v) in out.iter_mut().zip(&b.grid_vals) {
                *o += c * v;
            }
        }
        out
    }

    /// Exact `int_I p e_i e_j dx` for two modes (1-based), via the stored
    /// weighted Gram.
    pub fn weighted_product_integral(&self, i: usize, j: usize) -> f64 {
        let (pi_, pj) = (&self.pairs[i - 1], &self.pairs[j - 1]);
        if pi_.parity != pj.parity {
            return 0.0; // odd integrand over a symmetric interval
        }
        let m = self.gram(pi_.parity);
        let mut acc = 0.0;
        for (i1, c1) in pi_.coeffs.iter().enumerate() {
            for (j1, c2) in pj.coeffs.iter().enumerate() {
                acc += c1 * c2 * m[(i1, j1)];
            }
        }
        acc
    }

    /// Exact bending energy `int_I (e_j'')^2 dx` via the closed-form basis
    /// second derivatives.
    pub fn bending_energy(&self, j: usize) -> f64 {
        let pair = &self.pairs[j - 1];
        let k = self.basis.bending(pair.parity);
        let n = pair.coeffs.len();
        let mut acc = 0.0;
        for i1 in 0..n {
            for j1 in 0..n {
                acc += pair.coeffs[i1] * pair.coeffs[j1] * k[(i1, j1)];
            }
        }
        acc
    }
}
