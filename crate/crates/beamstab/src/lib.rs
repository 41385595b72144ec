//! Spectra, linear-instability thresholds and density optimization for a
//! multiply hinged non-homogeneous beam.
//!
//! The beam occupies `(-pi, pi)`, is hinged at the endpoints and at two
//! symmetric piers `+/- a*pi`, and carries a symmetric piecewise-constant
//! density `p` with unit average. The crate computes:
//!
//! * the weighted eigenvalue problem `e'''' = lambda p e` — in closed form
//!   for two-step densities ([`closed_form`]) and by expansion in the
//!   homogeneous eigenbasis for general bang-bang densities ([`galerkin`]);
//! * critical amplitudes and energies of linear instability for bi-modal
//!   nonlinear oscillations, with a Floquet/monodromy cross-check
//!   ([`stability`]);
//! * time-domain integration of the modal system with energy conservation
//!   ([`evolution`]);
//! * bang-bang density improvement driven by the level sets of the
//!   eigenfunction-difference profile, plus pier-position and material
//!   sweeps ([`optimizer`]).

pub mod closed_form;
pub mod density;
pub mod error;
pub mod evolution;
pub mod galerkin;
pub mod optimizer;
pub mod quadrature;
pub mod stability;
pub mod tables;
pub mod waveform;

pub use density::{Density, PierLayout, TwoStepCenter};
pub use error::{Error, Result};
pub use waveform::Parity;
