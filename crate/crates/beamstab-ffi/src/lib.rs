//! C ABI for the beamstab toolkit.
//!
//! Objects cross the boundary as opaque handles created and released by this
//! library; every fallible call returns a [`BsStatus`] and writes results
//! through out-pointers. The most recent error message is kept per thread
//! and can be fetched with [`bs_last_error_message`].
//!
//! The matching header lives in `include/beamstab.h`; rebuild it with
//! `cargo build -p beamstab-ffi --features ffi-headers`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use beamstab::closed_form;
use beamstab::density::{Density, PierLayout, TwoStepCenter};
use beamstab::error::Error;
use beamstab::galerkin;
use beamstab::optimizer;
use beamstab::stability;
use beamstab::waveform::Parity;

/// Status of a C-ABI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BsStatus {
    /// Success.
    Ok = 0,
    /// A solver failed numerically.
    NumericalError = 1,
    /// An argument violated its documented constraint.
    InvalidArgument = 2,
    /// A required pointer was null.
    NullPointer = 3,
    /// Internal panic; state may be inconsistent.
    Panic = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let owned = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = owned);
}

fn status_of(e: &Error) -> BsStatus {
    match e {
        Error::InvalidParameter(_) => BsStatus::InvalidArgument,
        _ => BsStatus::NumericalError,
    }
}

fn guard(f: impl FnOnce() -> BsStatus + std::panic::UnwindSafe) -> BsStatus {
    match catch_unwind(f) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            BsStatus::Panic
        }
    }
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn bs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Opaque symmetric piecewise-constant density.
pub struct BsDensity(Density);

/// Opaque spectrum: eigenvalues with parity labels, sorted increasingly.
pub struct BsSpectrum {
    eigenvalues: Vec<(f64, Parity)>,
}

/// The homogeneous unit density.
#[no_mangle]
pub extern "C" fn bs_density_homogeneous(out: *mut *mut BsDensity) -> BsStatus {
    if out.is_null() {
        set_error("out pointer is null");
        return BsStatus::NullPointer;
    }
    let d = Box::new(BsDensity(Density::homogeneous()));
    unsafe { *out = Box::into_raw(d) };
    BsStatus::Ok
}

/// Two-step density with the heavy (`heavy_center != 0`) or light material
/// at the center of the beam.
#[no_mangle]
pub extern "C" fn bs_density_two_step(
    alpha: f64,
    beta: f64,
    heavy_center: i32,
    out: *mut *mut BsDensity,
) -> BsStatus {
    if out.is_null() {
        set_error("out pointer is null");
        return BsStatus::NullPointer;
    }
    let center = if heavy_center != 0 {
        TwoStepCenter::Heavy
    } else {
        TwoStepCenter::Light
    };
    match Density::two_step(alpha, beta, center) {
        Ok(d) => {
            unsafe { *out = Box::into_raw(Box::new(BsDensity(d))) };
            BsStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

/// Bang-bang density from `n_breakpoints` jump abscissae in `(0, pi)` and
/// `n_breakpoints + 1` piece values (each `alpha` or `beta`).
///
/// # Safety
/// `breakpoints` must point to `n_breakpoints` readable doubles and
/// `values` to `n_breakpoints + 1` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn bs_density_from_parts(
    alpha: f64,
    beta: f64,
    breakpoints: *const f64,
    n_breakpoints: usize,
    values: *const f64,
    out: *mut *mut BsDensity,
) -> BsStatus {
    if out.is_null() || (n_breakpoints > 0 && breakpoints.is_null()) || values.is_null() {
        set_error("pointer argument is null");
        return BsStatus::NullPointer;
    }
    let bp = unsafe { std::slice::from_raw_parts(breakpoints, n_breakpoints) }.to_vec();
    let vals = unsafe { std::slice::from_raw_parts(values, n_breakpoints + 1) }.to_vec();
    match Density::raw(alpha, beta, bp, vals).and_then(|d| d.validate().map(|_| d)) {
        Ok(d) => {
            unsafe { *out = Box::into_raw(Box::new(BsDensity(d))) };
            BsStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

/// Total mass of the density over the full beam.
///
/// # Safety
/// `density` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn bs_density_mass(density: *const BsDensity, out: *mut f64) -> BsStatus {
    if density.is_null() || out.is_null() {
        set_error("pointer argument is null");
        return BsStatus::NullPointer;
    }
    unsafe { *out = (*density).0.mass() };
    BsStatus::Ok
}

/// Point evaluation of the density at `x` in `[-pi, pi]`.
///
/// # Safety
/// `density` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn bs_density_eval(
    density: *const BsDensity,
    x: f64,
    out: *mut f64,
) -> BsStatus {
    if density.is_null() || out.is_null() {
        set_error("pointer argument is null");
        return BsStatus::NullPointer;
    }
    unsafe { *out = (*density).0.eval(x) };
    BsStatus::Ok
}

/// Number of density jumps on the half-beam.
///
/// # Safety
/// `density` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn bs_density_jump_count(
    density: *const BsDensity,
    out: *mut usize,
) -> BsStatus {
    if density.is_null() || out.is_null() {
        set_error("pointer argument is null");
        return BsStatus::NullPointer;
    }
    unsafe { *out = (*density).0.jump_count() };
    BsStatus::Ok
}

/// Release a density handle. Null is ignored.
///
/// # Safety
/// `density` must be a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bs_density_free(density: *mut BsDensity) {
    if !density.is_null() {
        drop(unsafe { Box::from_raw(density) });
    }
}

/// Compute the first `count` eigenvalues for a density and pier position.
///
/// Densities with at most one jump use the closed-form solver; general
/// bang-bang densities the eigenbasis expansion of order `n_basis`
/// (`count <= 12` in that case).
///
/// # Safety
/// `density` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn bs_spectrum_compute(
    density: *const BsDensity,
    a: f64,
    count: usize,
    n_basis: usize,
    out: *mut *mut BsSpectrum,
) -> BsStatus {
    if density.is_null() || out.is_null() {
        set_error("pointer argument is null");
        return BsStatus::NullPointer;
    }
    let d = unsafe { &(*density).0 };
    guard(AssertUnwindSafe(|| {
        let run = || -> beamstab::Result<Vec<(f64, Parity)>> {
            let layout = PierLayout::new(a)?;
            if count == 0 {
                return Err(Error::invalid("count must be at least 1"));
            }
            if d.jump_count() <= 1 {
                let roots = closed_form::find_eigenvalues(d, &layout, count)?;
                Ok(roots.iter().map(|r| (r.lambda, r.parity)).collect())
            } else {
                if count > 12 {
                    return Err(Error::invalid(
                        "the expansion solver reports at most 12 eigenvalues",
                    ));
                }
                let spec = galerkin::solve_weighted_spectrum(d, &layout, n_basis)?;
                Ok(spec.eigenvalues().into_iter().take(count).collect())
            }
        };
        match run() {
            Ok(eigenvalues) => {
                unsafe { *out = Box::into_raw(Box::new(BsSpectrum { eigenvalues })) };
                BsStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    }))
}

/// Number of eigenvalues held by a spectrum handle.
///
/// # Safety
/// `spectrum` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn bs_spectrum_len(spectrum: *const BsSpectrum, out: *mut usize) -> BsStatus {
    if spectrum.is_null() || out.is_null() {
        set_error("pointer argument is null");
        return BsStatus::NullPointer;
    }
    unsafe { *out = (*spectrum).eigenvalues.len() };
    BsStatus::Ok
}

/// Copy eigenvalues into `buffer` (capacity `len`); writes the copied count.
/// Parities go to `parities` (0 even, 1 odd) when it is non-null.
///
/// # Safety
/// `spectrum` must be a live handle; `buffer` (and `parities` if non-null)
/// must have room for `len` entries.
#[no_mangle]
pub unsafe extern "C" fn bs_spectrum_eigenvalues(
    spectrum: *const BsSpectrum,
    buffer: *mut f64,
    parities: *mut i32,
    len: usize,
    written: *mut usize,
) -> BsStatus {
    if spectrum.is_null() || buffer.is_null() || written.is_null() {
        set_error("pointer argument is null");
        return BsStatus::NullPointer;
    }
    let eigs = unsafe { &(*spectrum).eigenvalues };
    let n = eigs.len().min(len);
    for (i, (lambda, parity)) in eigs.iter().take(n).enumerate() {
        unsafe {
            *buffer.add(i) = *lambda;
            if !parities.is_null() {
                *parities.add(i) = matches!(parity, Parity::Odd) as i32;
            }
        }
    }
    unsafe { *written = n };
    BsStatus::Ok
}

/// Release a spectrum handle. Null is ignored.
///
/// # Safety
/// `spectrum` must be a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bs_spectrum_free(spectrum: *mut BsSpectrum) {
    if !spectrum.is_null() {
        drop(unsafe { Box::from_raw(spectrum) });
    }
}

/// Instability threshold of a twelve-mode spectrum: the minimum critical
/// energy over consecutive pairs and the 1-based index of its lower mode.
///
/// # Safety
/// `spectrum` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn bs_threshold(
    spectrum: *const BsSpectrum,
    out_threshold: *mut f64,
    out_pair_index: *mut usize,
) -> BsStatus {
    if spectrum.is_null() || out_threshold.is_null() || out_pair_index.is_null() {
        set_error("pointer argument is null");
        return BsStatus::NullPointer;
    }
    let eigs = unsafe { &(*spectrum).eigenvalues };
    match stability::threshold(eigs) {
        Ok(report) => {
            unsafe {
                *out_threshold = report.threshold;
                *out_pair_index = report.min_pair().j;
            }
            BsStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

/// Critical amplitude `sqrt(2(nu - lambda))` of the pair.
#[no_mangle]
pub extern "C" fn bs_critical_amplitude(lambda: f64, nu: f64, out: *mut f64) -> BsStatus {
    if out.is_null() {
        set_error("out pointer is null");
        return BsStatus::NullPointer;
    }
    match stability::critical_amplitude(lambda, nu) {
        Ok(v) => {
            unsafe { *out = v };
            BsStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

/// Critical energy of instability of the pair.
#[no_mangle]
pub extern "C" fn bs_critical_energy(lambda: f64, nu: f64, out: *mut f64) -> BsStatus {
    if out.is_null() {
        set_error("out pointer is null");
        return BsStatus::NullPointer;
    }
    match stability::critical_energy(lambda, nu) {
        Ok(v) => {
            unsafe { *out = v };
            BsStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

/// Period of the one-mode nonlinear oscillation of amplitude `zeta`.
#[no_mangle]
pub extern "C" fn bs_duffing_period(lambda: f64, zeta: f64, out: *mut f64) -> BsStatus {
    if out.is_null() {
        set_error("out pointer is null");
        return BsStatus::NullPointer;
    }
    match stability::duffing_period(lambda, zeta) {
        Ok(v) => {
            unsafe { *out = v };
            BsStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

/// Run the density-improvement loop at a fixed pier position and material
/// bounds. On success writes the best density handle, its threshold and the
/// jump count of the optimum.
#[no_mangle]
pub extern "C" fn bs_optimize_density(
    alpha: f64,
    beta: f64,
    a: f64,
    n_basis: usize,
    out_density: *mut *mut BsDensity,
    out_threshold: *mut f64,
    out_n_jumps: *mut usize,
) -> BsStatus {
    if out_density.is_null() || out_threshold.is_null() || out_n_jumps.is_null() {
        set_error("out pointer is null");
        return BsStatus::NullPointer;
    }
    guard(AssertUnwindSafe(|| {
        let run = || -> beamstab::Result<optimizer::OptimizationResult> {
            let layout = PierLayout::new(a)?;
            optimizer::optimize_density(&layout, alpha, beta, n_basis)
        };
        match run() {
            Ok(res) => {
                unsafe {
                    *out_threshold = res.best.threshold;
                    *out_n_jumps = res.n_jumps();
                    *out_density = Box::into_raw(Box::new(BsDensity(res.best.density)));
                }
                BsStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    }))
}
