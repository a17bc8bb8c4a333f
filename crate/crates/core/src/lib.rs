//! Frequency-domain solver for an anti-plane (mode III) strip crack in a
//! Kelvin–Voigt viscoelastic half-space under harmonic shear load.
//!
//! The crack-opening density is expanded in weighted Chebyshev polynomials
//! of the first kind, the singular integral equation is projected onto
//! second-kind polynomials, and the resulting infinite system
//! `a_n + Σ R_nm a_m = f_n` is solved by truncation. Post-processing gives
//! the complex stress intensity factor, the opening profile and the
//! displacement field; [`diagnostics`] turns the regularity and convergence
//! properties of the system into executable checks.
//!
//! The crack occupies `[-1, 1]` after even extension; all physical inputs
//! stay in SI units.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod diagnostics;
mod error;
pub mod kernel;
pub mod linsolve;
pub mod material;
pub mod postprocess;
pub mod quadrature;
pub mod specfun;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use assembly::{assemble, assemble_with, GalerkinSystem, QuadOrders};
pub use kernel::{KernelCache, KernelEval, QuadratureSpec};
pub use linsolve::{reduction_solve, ComplexMatrix, SpectralSolution};
pub use material::{ComplexWaveParams, MaterialParams, Regime};
pub use postprocess::{sif, SifResult};
