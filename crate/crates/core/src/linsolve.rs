//! Dense complex solves and the truncation (reduction) ladder.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::assembly::{assemble_with, QuadOrders};
use crate::kernel::{KernelCache, QuadratureSpec};
use crate::material::MaterialParams;
use crate::{Error, Result};

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Complex64>(rows: usize, cols: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols, "dimension mismatch");
        (0..self.rows).map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn leading_block(&self, n: usize) -> Self {
        assert!(n <= self.rows && n <= self.cols);
        Self::from_fn(n, n, |i, j| self[(i, j)])
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| *z == Complex64::new(0.0, 0.0))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖Ax − b‖₂`.
pub fn residual_norm(a: &ComplexMatrix, x: &[Complex64], b: &[Complex64]) -> f64 {
    let ax = a.mul_vec(x);
    ax.iter().zip(b).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt()
}

/// LU factorization with partial (row) pivoting, then forward/back
/// substitution.
pub fn solve_dense(a: &ComplexMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::Domain(format!("matrix must be square, got {}x{}", n, a.cols())));
    }
    if b.len() != n {
        return Err(Error::Domain(format!("right-hand side has length {}, expected {n}", b.len())));
    }
    let mut lu = a.clone();
    let mut x = b.to_vec();
    for k in 0..n {
        let (p, pivot) =
            (k..n).map(|i| (i, lu[(i, k)].norm())).max_by(|u, v| u.1.total_cmp(&v.1)).expect("non-empty pivot column");
        if !(pivot > f64::MIN_POSITIVE) {
            return Err(Error::SingularMatrix { column: k, pivot });
        }
        if p != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = tmp;
            }
            x.swap(k, p);
        }
        let d = lu[(k, k)];
        for i in k + 1..n {
            let l = lu[(i, k)] / d;
            if l == Complex64::new(0.0, 0.0) {
                continue;
            }
            lu[(i, k)] = l;
            for j in k + 1..n {
                let u = lu[(k, j)];
                lu[(i, j)] -= l * u;
            }
            let xk = x[k];
            x[i] -= l * xk;
        }
    }
    for i in (0..n).rev() {
        let mut acc = x[i];
        for j in i + 1..n {
            acc -= lu[(i, j)] * x[j];
        }
        x[i] = acc / lu[(i, i)];
    }
    Ok(x)
}

/// Chebyshev coefficients `a_1 … a_N` of the opening density.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSolution {
    /// `coeffs[m - 1] = a_m`.
    pub coeffs: Vec<Complex64>,
    pub n: usize,
    /// `‖(I + R)a − f‖₂`.
    pub residual: f64,
    /// `(N, Σ a_n)` for every truncation visited, ascending in `N`.
    pub history: Vec<(usize, Complex64)>,
}

impl SpectralSolution {
    pub fn coeff_sum(&self) -> Complex64 {
        self.coeffs.iter().sum()
    }
}

/// Solves `(I + R) a = f` for an assembled system.
pub fn solve_system(sys: &crate::assembly::GalerkinSystem) -> Result<SpectralSolution> {
    let n = sys.n;
    let mut a = sys.matrix_r.clone();
    for i in 0..n {
        a[(i, i)] += 1.0;
    }
    let coeffs = solve_dense(&a, &sys.rhs)?;
    let residual = residual_norm(&a, &coeffs, &sys.rhs);
    let sum = coeffs.iter().sum();
    Ok(SpectralSolution { coeffs, n, residual, history: vec![(n, sum)] })
}

/// Step between consecutive truncation sizes.
pub const LADDER_STEP: usize = 5;

/// Solves growing truncations `N0, N0 + 5, …` until the coefficient sum
/// settles to `sif_tol` (relative) or `n_max` is reached.
///
/// Every rung uses the quadrature orders of the largest rung, so the kernel
/// grid is evaluated once and each smaller matrix is exactly the leading
/// block of the larger one.
pub fn reduction_solve(
    mp: &MaterialParams,
    q: &QuadratureSpec,
    n0: usize,
    n_max: usize,
    sif_tol: f64,
) -> Result<SpectralSolution> {
    if n0 < 4 {
        return Err(Error::Domain(format!("N0 must be at least 4, got {n0}")));
    }
    if n_max < n0 {
        return Err(Error::Domain(format!("N_max = {n_max} is below N0 = {n0}")));
    }
    if !(sif_tol > 0.0) {
        return Err(Error::Domain(format!("sif_tol must be positive, got {sif_tol}")));
    }
    let wp = mp.wave_params()?;
    let cache = KernelCache::new(wp, *q)?;
    let orders = QuadOrders::for_size(n_max);
    let mut history = Vec::new();
    let mut n = n0;
    loop {
        let sys = assemble_with(n, mp, &cache, orders)?;
        let mut sol = solve_system(&sys)?;
        let sum = sol.coeff_sum();
        // with R = 0 every truncation is exact
        let settled = sys.matrix_r.is_zero()
            || history
                .last()
                .is_some_and(|&(_, prev): &(usize, Complex64)| (sum - prev).norm() <= sif_tol * sum.norm());
        history.push((n, sum));
        sol.history = history.clone();
        if settled {
            return Ok(sol);
        }
        if n >= n_max {
            return Err(Error::NoConvergence { solution: Box::new(sol) });
        }
        n = (n + LADDER_STEP).min(n_max);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_returns_rhs() {
        let b = vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.0, -1.0)];
        assert_eq!(solve_dense(&ComplexMatrix::identity(3), &b).unwrap(), b);
    }

    #[test]
    fn two_by_two_against_closed_form_inverse() {
        let (p, q, r, s) = (c(2.0, 1.0), c(0.5, -1.0), c(-1.0, 0.25), c(3.0, 2.0));
        let a = ComplexMatrix::from_fn(2, 2, |i, j| [[p, q], [r, s]][i][j]);
        let b = [c(1.0, -1.0), c(0.0, 2.0)];
        let det = p * s - q * r;
        let expect = [(s * b[0] - q * b[1]) / det, (-r * b[0] + p * b[1]) / det];
        let x = solve_dense(&a, &b).unwrap();
        for k in 0..2 {
            assert!((x[k] - expect[k]).norm() < 1e-15);
        }
    }

    #[test]
    fn needs_pivoting() {
        let a = ComplexMatrix::from_fn(2, 2, |i, j| [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]][i][j]);
        let x = solve_dense(&a, &[c(2.0, 0.0), c(3.0, 0.0)]).unwrap();
        assert_eq!(x, vec![c(3.0, 0.0), c(2.0, 0.0)]);
    }

    #[test]
    fn singular_and_malformed_inputs() {
        let a = ComplexMatrix::from_fn(2, 2, |_, j| c(1.0 + j as f64, 0.0));
        assert!(matches!(solve_dense(&a, &[c(1.0, 0.0); 2]), Err(Error::SingularMatrix { column: 1, .. })));
        assert!(solve_dense(&ComplexMatrix::zeros(2, 3), &[c(0.0, 0.0); 2]).is_err());
        assert!(solve_dense(&ComplexMatrix::identity(2), &[c(0.0, 0.0); 3]).is_err());
    }

    #[test]
    fn random_well_conditioned_residual() {
        use proptest::test_runner::{Config, TestRunner};
        let mut runner = TestRunner::new(Config { cases: 16, ..Config::default() });
        runner
            .run(&proptest::collection::vec(-1.0f64..1.0, 2 * 20 * 20 + 40), |v| {
                let n = 20;
                let a = ComplexMatrix::from_fn(n, n, |i, j| {
                    let z = c(v[2 * (i * n + j)], v[2 * (i * n + j) + 1]);
                    if i == j {
                        z + 8.0
                    } else {
                        z
                    }
                });
                let b: Vec<Complex64> = (0..n).map(|i| c(v[800 + 2 * i], v[801 + 2 * i])).collect();
                let x = solve_dense(&a, &b).unwrap();
                prop_assert!(residual_norm(&a, &x, &b) <= 1e-12 * norm2(&b).max(1e-300));
                Ok(())
            })
            .unwrap();
    }

    proptest! {
        #[test]
        fn solve_is_linear_in_rhs(scale in 0.1f64..10.0, seed in 0u64..1000) {
            let n = 6;
            let a = ComplexMatrix::from_fn(n, n, |i, j| {
                let t = ((seed as usize + 7 * i + 13 * j) % 17) as f64 / 17.0;
                if i == j { c(3.0 + t, t) } else { c(t - 0.5, 0.2 * t) }
            });
            let b: Vec<Complex64> = (0..n).map(|i| c(i as f64, 1.0)).collect();
            let b2: Vec<Complex64> = b.iter().map(|z| z * scale).collect();
            let x = solve_dense(&a, &b).unwrap();
            let x2 = solve_dense(&a, &b2).unwrap();
            for k in 0..n {
                prop_assert!((x2[k] - x[k] * scale).norm() <= 1e-13 * scale * (1.0 + x[k].norm()));
            }
        }
    }

    #[test]
    fn ladder_argument_checks() {
        let mp = MaterialParams::new(8e10, 6.5e10, 2700.0, 0.0, 1.0);
        let q = QuadratureSpec::default();
        assert!(reduction_solve(&mp, &q, 3, 10, 1e-9).is_err());
        assert!(reduction_solve(&mp, &q, 10, 8, 1e-9).is_err());
        assert!(reduction_solve(&mp, &q, 10, 20, 0.0).is_err());
    }

    #[test]
    fn static_ladder_converges_at_first_rung_with_closed_form() {
        let mp = MaterialParams::new(8e10, 6.5e10, 2700.0, 0.0, 2.5);
        let sol = reduction_solve(&mp, &QuadratureSpec::default(), 10, 60, 1e-9).unwrap();
        let a1 = 2.0 * 2.5 / 8e10;
        assert!((sol.coeffs[0] - a1).norm() <= 1e-15 * a1);
        assert!(sol.coeffs[1..].iter().all(|z| z.norm() == 0.0));
        assert_eq!(sol.history.iter().map(|h| h.0).collect::<Vec<_>>(), vec![10]);
        assert_eq!(sol.residual, 0.0);
    }
}
