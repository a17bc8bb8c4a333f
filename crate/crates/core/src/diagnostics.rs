//! Executable checks on the Galerkin system: decay of the matrix entries,
//! convergence of the truncations, and an independent collocation solver
//! for cross-validation.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::assembly::{assemble_with, GalerkinSystem, QuadOrders};
use crate::kernel::{KernelCache, QuadratureSpec};
use crate::linsolve::{residual_norm, solve_dense, solve_system, ComplexMatrix, SpectralSolution};
use crate::material::MaterialParams;
use crate::postprocess::sif;
use crate::{Error, Result};

/// Threshold on the entry-decay slopes.
pub const ENTRY_SLOPE_MAX: f64 = -1.5;

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    /// `S_n = Σ_m |R_nm|`.
    pub row_sums: Vec<f64>,
    /// Log-log slope of `max_m |R_nm|` against `n`.
    pub slope_n: f64,
    /// Log-log slope of `max_n |R_nm|` against `m`.
    pub slope_m: f64,
    /// Log-log slope of `S_n` against `n`.
    pub slope_rowsum: f64,
    /// `Σ_{n,m} |R_nm|²`.
    pub frobenius_sq: f64,
    pub rowsum_pass: bool,
    pub entries_pass: bool,
}

impl DecayReport {
    pub fn passed(&self) -> bool {
        self.rowsum_pass && self.entries_pass
    }
}

/// Least-squares slope of `ys` against `xs`; `None` with fewer than two
/// points or no spread in `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs[..n].iter().zip(&ys[..n]) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Log-log slope over the last third of `1..=len(values)`. Zeros are
/// skipped; an all-zero tail counts as infinitely fast decay.
fn tail_slope(values: &[f64]) -> f64 {
    let start = values.len() - values.len() / 3;
    let (xs, ys): (Vec<f64>, Vec<f64>) = values[start..]
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(i, v)| (((start + i + 1) as f64).ln(), v.ln()))
        .unzip();
    if xs.is_empty() {
        return f64::NEG_INFINITY;
    }
    least_squares_slope(&xs, &ys).unwrap_or(f64::NAN)
}

pub fn regularity_report(sys: &GalerkinSystem) -> DecayReport {
    let r = &sys.matrix_r;
    let n = sys.n;
    let row_sums: Vec<f64> = (0..n).map(|i| r.row(i).iter().map(|z| z.norm()).sum()).collect();
    let row_max: Vec<f64> = (0..n).map(|i| r.row(i).iter().map(|z| z.norm()).fold(0.0, f64::max)).collect();
    let col_max: Vec<f64> = (0..n).map(|j| (0..n).map(|i| r[(i, j)].norm()).fold(0.0, f64::max)).collect();
    let frobenius_sq = (0..n).flat_map(|i| r.row(i).iter().map(|z| z.norm_sqr())).sum();
    let slope_n = tail_slope(&row_max);
    let slope_m = tail_slope(&col_max);
    let slope_rowsum = tail_slope(&row_sums);
    DecayReport {
        row_sums,
        slope_n,
        slope_m,
        slope_rowsum,
        frobenius_sq,
        rowsum_pass: slope_rowsum < 0.0,
        entries_pass: slope_n <= ENTRY_SLOPE_MAX && slope_m <= ENTRY_SLOPE_MAX,
    }
}

/// Gauss–Chebyshev collocation with `N + 1` first-kind nodes.
///
/// The unknowns are `g(η_j) = √(1−η_j²) φ0'(η_j)` at the zeros of
/// `T_{N+1}`; the equation
///
/// ```text
/// (1/π) PV∫ g(η)/((η−y)√(1−η²)) dη + 2 ∫ K(y,η) g(η)/√(1−η²) dη = 2τ0/G̃
/// ```
///
/// is enforced at the `N` zeros of `U_N`, where the node sum
/// `(1/(N+1)) Σ_j g_j/(η_j − y_i)` is exact for the Cauchy part, and
/// `Σ_j g_j = 0` closes the system. The coefficients come from the discrete
/// Chebyshev transform of the nodal values.
pub fn collocation_oracle(mp: &MaterialParams, q: &QuadratureSpec, n: usize) -> Result<SpectralSolution> {
    if n < 4 {
        return Err(Error::Domain(format!("collocation needs N >= 4, got {n}")));
    }
    let wp = mp.wave_params()?;
    let cache = KernelCache::new(wp, *q)?;
    let p = n + 1;
    let pf = p as f64;
    let eta: Vec<f64> = (1..=p).map(|j| ((2 * j - 1) as f64 * PI / (2.0 * pf)).cos()).collect();
    let ys: Vec<f64> = (1..=n).map(|i| (i as f64 * PI / pf).cos()).collect();

    let rows: Vec<Vec<Complex64>> = ys
        .par_iter()
        .map(|&y| {
            eta.iter()
                .map(|&e| Ok(Complex64::new(1.0 / (pf * (e - y)), 0.0) + cache.regular(y, e)? * (2.0 * PI / pf)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut a = ComplexMatrix::zeros(p, p);
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            a[(i, j)] = *v;
        }
    }
    for j in 0..p {
        a[(n, j)] = Complex64::new(1.0, 0.0);
    }
    let mut b = vec![2.0 * mp.tau0 / wp.g_tilde; p];
    b[n] = Complex64::new(0.0, 0.0);
    let g = solve_dense(&a, &b)?;
    let residual = residual_norm(&a, &g, &b);

    let coeffs: Vec<Complex64> = (1..=n)
        .map(|m| {
            let s: Complex64 =
                g.iter().enumerate().map(|(j, gj)| gj * ((m * (2 * j + 1)) as f64 * PI / (2.0 * pf)).cos()).sum();
            s * (2.0 / pf)
        })
        .collect();
    let sum = coeffs.iter().sum();
    Ok(SpectralSolution { coeffs, n, residual, history: vec![(n, sum)] })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub n: usize,
    pub coeff_sum: Complex64,
    pub k_abs: f64,
    /// `|Σa^{(N)} − Σa^{(N_prev)}| / |Σa^{(N)}|`; `None` on the first row.
    pub increment: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub rows: Vec<StudyRow>,
    /// Least-squares slope of `ln(increment)` against `ln N` over the
    /// non-zero increments.
    pub fitted_order: Option<f64>,
}

impl ConvergenceStudy {
    pub fn increments(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.increment).collect()
    }

    pub fn increments_decreasing(&self) -> bool {
        self.increments().windows(2).all(|w| w[1] < w[0] || (w[0] == 0.0 && w[1] == 0.0))
    }
}

/// Solves every truncation in `n_list` (strictly ascending) on a shared
/// kernel grid sized for the largest one.
pub fn convergence_study(mp: &MaterialParams, q: &QuadratureSpec, n_list: &[usize]) -> Result<ConvergenceStudy> {
    if n_list.is_empty() {
        return Err(Error::Domain("the truncation list is empty".into()));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) || n_list[0] == 0 {
        return Err(Error::Domain(format!("truncation list {n_list:?} must be positive and strictly ascending")));
    }
    let cache = KernelCache::new(mp.wave_params()?, *q)?;
    let orders = QuadOrders::for_size(*n_list.last().unwrap());
    let sums: Vec<Complex64> = n_list
        .par_iter()
        .map(|&n| Ok(solve_system(&assemble_with(n, mp, &cache, orders)?)?.coeff_sum()))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(n_list.len());
    for (i, (&n, &sum)) in n_list.iter().zip(&sums).enumerate() {
        let increment = (i > 0).then(|| {
            let d = (sum - sums[i - 1]).norm();
            if d == 0.0 {
                0.0
            } else {
                d / sum.norm()
            }
        });
        let sol = SpectralSolution { coeffs: vec![sum], n, residual: 0.0, history: Vec::new() };
        rows.push(StudyRow { n, coeff_sum: sum, k_abs: sif(&sol, mp, 0.0).magnitude, increment });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        rows.iter().filter_map(|r| r.increment.filter(|d| *d > 0.0).map(|d| ((r.n as f64).ln(), d.ln()))).unzip();
    Ok(ConvergenceStudy { rows, fitted_order: least_squares_slope(&xs, &ys) })
}
