//! Truncated Galerkin system `(I + R) a = f`.
//!
//! Rows are second-kind test functions `√(1−y²) U_{n−1}(y)`, columns are
//! weighted first-kind trial functions `T_m(η)/√(1−η²)`, both indexed
//! from one. The regular kernel `sgn(y−η) ρ0(|y−η|)` is not smooth on the
//! diagonal: it jumps by `2ρ0(0)` and carries a `(k0²/2)(y−η)ln|y−η|`
//! kink. Both pieces have exact moments, so only the smooth remainder
//!
//! ```text
//! K(y, η) − ρ0(0) sgn(y−η) − (k0²/2)(y−η) ln|y−η|
//! ```
//!
//! goes through the tensor Gauss–Chebyshev rule.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::kernel::{KernelCache, QuadratureSpec};
use crate::linsolve::ComplexMatrix;
use crate::material::{ComplexWaveParams, MaterialParams};
use crate::specfun::{cheb_rule, cheb_t_all, cheb_u_all, log_kernel_inner, sign_kernel_moment, ChebKind};
use crate::{Error, Result};

/// Node counts of the `η` (first-kind) and `y` (second-kind) rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadOrders {
    pub n_eta: usize,
    pub n_y: usize,
}

impl QuadOrders {
    /// Default margin over the truncation size.
    pub const MARGIN: usize = 32;
    /// Smallest accepted margin.
    pub const FLOOR: usize = 16;

    pub fn for_size(n: usize) -> Self {
        Self { n_eta: n + Self::MARGIN, n_y: n + Self::MARGIN }
    }

    pub fn doubled(self) -> Self {
        Self { n_eta: 2 * self.n_eta, n_y: 2 * self.n_y }
    }

    fn check(&self, n: usize) -> Result<()> {
        let floor = n + Self::FLOOR;
        let got = self.n_eta.min(self.n_y);
        if got < floor {
            return Err(Error::QuadratureOrder { got, floor });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GalerkinSystem {
    pub n: usize,
    /// `matrix_r[(n−1, m−1)] = R_nm`.
    pub matrix_r: ComplexMatrix,
    /// `rhs[n−1] = f_n`.
    pub rhs: Vec<Complex64>,
    pub quad_orders: QuadOrders,
    pub wave: ComplexWaveParams,
}

/// `f = (2τ0/G̃, 0, …, 0)`.
pub fn rhs_vector(n: usize, tau0: f64, g_tilde: Complex64) -> Vec<Complex64> {
    let mut f = vec![Complex64::new(0.0, 0.0); n];
    if let Some(first) = f.first_mut() {
        *first = 2.0 * tau0 / g_tilde;
    }
    f
}

/// `R_nm` for `n, m = 1..=size`.
pub fn galerkin_matrix(size: usize, kernel: &KernelCache, orders: QuadOrders) -> Result<ComplexMatrix> {
    orders.check(size)?;
    let wp = kernel.wave();
    if wp.is_static() {
        return Ok(ComplexMatrix::zeros(size, size));
    }
    let y_rule = cheb_rule(ChebKind::Second, orders.n_y)?;
    let eta_rule = cheb_rule(ChebKind::First, orders.n_eta)?;
    let jump = kernel.rho0(0.0)?.value;
    let kink = 0.5 * wp.k0_sq;

    // smooth remainder on the tensor grid, one row per y node
    let remainder: Vec<Vec<Complex64>> = y_rule
        .nodes
        .par_iter()
        .map(|&y| {
            eta_rule
                .nodes
                .iter()
                .map(|&eta| {
                    let u = y - eta;
                    if u == 0.0 {
                        return Ok(Complex64::new(0.0, 0.0));
                    }
                    let k = kernel.regular(y, eta)?;
                    Ok(k - jump * u.signum() - kink * (u * u.abs().ln()))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    // weighted basis values: wu[i][n-1] = w_i U_{n-1}(y_i), wt[j][m-1] = w_j T_m(η_j)
    let wu: Vec<Vec<f64>> = y_rule
        .nodes
        .iter()
        .zip(&y_rule.weights)
        .map(|(&y, &w)| cheb_u_all(size, y).into_iter().map(|u| w * u).collect())
        .collect();
    let wt: Vec<Vec<f64>> = eta_rule
        .nodes
        .iter()
        .zip(&eta_rule.weights)
        .map(|(&eta, &w)| cheb_t_all(size + 1, eta)[1..].iter().map(|t| w * t).collect())
        .collect();

    // inner sums over η: inner[i][m-1] = Σ_j remainder[i][j] w_j T_m(η_j)
    let inner: Vec<Vec<Complex64>> = remainder
        .par_iter()
        .map(|row| {
            let mut acc = vec![Complex64::new(0.0, 0.0); size];
            for (r, t) in row.iter().zip(&wt) {
                for (a, &tm) in acc.iter_mut().zip(t) {
                    *a += r * tm;
                }
            }
            acc
        })
        .collect();
    // exact inner integrals of the kink: log_inner[i][m-1]
    let log_inner: Vec<Vec<f64>> =
        y_rule.nodes.iter().map(|&y| (1..=size).map(|m| log_kernel_inner(m, y)).collect()).collect();

    let scale = 4.0 / PI;
    let mut r = ComplexMatrix::zeros(size, size);
    for n in 0..size {
        for m in 0..size {
            let mut smooth = Complex64::new(0.0, 0.0);
            let mut log_part = 0.0;
            for i in 0..y_rule.n {
                smooth += inner[i][m] * wu[i][n];
                log_part += log_inner[i][m] * wu[i][n];
            }
            r[(n, m)] = jump * sign_kernel_moment(n + 1, m + 1) + kink * (scale * log_part) + smooth * scale;
        }
    }
    Ok(r)
}

/// Assembles with an existing kernel cache and explicit quadrature orders.
pub fn assemble_with(
    size: usize,
    mp: &MaterialParams,
    kernel: &KernelCache,
    orders: QuadOrders,
) -> Result<GalerkinSystem> {
    if size == 0 {
        return Err(Error::Domain("truncation size must be at least 1".into()));
    }
    let wave = *kernel.wave();
    let matrix_r = galerkin_matrix(size, kernel, orders)?;
    Ok(GalerkinSystem { n: size, matrix_r, rhs: rhs_vector(size, mp.tau0, wave.g_tilde), quad_orders: orders, wave })
}

/// Assembles the size-`n` truncation with default quadrature orders.
pub fn assemble(size: usize, mp: &MaterialParams, q: &QuadratureSpec) -> Result<GalerkinSystem> {
    let cache = KernelCache::new(mp.wave_params()?, *q)?;
    assemble_with(size, mp, &cache, QuadOrders::for_size(size))
}
