//! Stress intensity factor, crack opening, displacement field and the
//! a priori truncation bound.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::kernel::{field_kernel, QuadratureSpec};
use crate::linsolve::SpectralSolution;
use crate::material::{ComplexWaveParams, MaterialParams};
use crate::quadrature::adaptive_gauss;
use crate::specfun::{cheb_t_all, cheb_u_all};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SifResult {
    /// `K_I + i K_II`.
    pub k_complex: Complex64,
    pub magnitude: f64,
    pub t: f64,
}

/// `K = (e^{−ikt}/√2) G̃ Σ a_n`.
pub fn sif(sol: &SpectralSolution, mp: &MaterialParams, t: f64) -> SifResult {
    let g_tilde = Complex64::new(mp.g, -mp.k * mp.g0);
    let phase = Complex64::from_polar(1.0, -mp.k * t);
    let k_complex = phase / SQRT_2 * g_tilde * sol.coeff_sum();
    SifResult { k_complex, magnitude: k_complex.norm(), t }
}

fn check_closed(y: f64) -> Result<()> {
    if y.is_finite() && y.abs() <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("y = {y} is outside [-1, 1]")))
    }
}

/// Crack opening `φ0(y) = √(1−y²) Σ a_m U_{m−1}(y)/m`.
pub fn cod_profile(sol: &SpectralSolution, y: f64) -> Result<Complex64> {
    check_closed(y)?;
    let root = (1.0 - y * y).max(0.0).sqrt();
    let u = cheb_u_all(sol.coeffs.len(), y);
    let sum: Complex64 = sol.coeffs.iter().zip(&u).enumerate().map(|(i, (a, um))| a * (um / (i + 1) as f64)).sum();
    Ok(sum * root)
}

/// Density `Σ a_m T_m(y)/√(1−y²)`, for `|y| < 1`. Since
/// `∫ T_m/√(1−η²) dη = −√(1−η²) U_{m−1}/m`, this is `−dφ0/dy`.
pub fn cod_density(sol: &SpectralSolution, y: f64) -> Result<Complex64> {
    if !(y.abs() < 1.0) {
        return Err(Error::Domain(format!("y = {y} must lie strictly inside (-1, 1)")));
    }
    Ok(density_numerator(&sol.coeffs, y) / (1.0 - y * y).sqrt())
}

/// `Σ a_m T_m(η)`.
fn density_numerator(coeffs: &[Complex64], eta: f64) -> Complex64 {
    let t = cheb_t_all(coeffs.len() + 1, eta);
    coeffs.iter().zip(&t[1..]).map(|(a, tm)| a * tm).sum()
}

/// Displacement `ω0(x, y)` outside the crack line.
///
/// ```text
/// ω0 = −(1/2π) ∫ R(x, y−η) ρ(η) dη − (1/2π) ∫ θ(x, y−η) ρ(η) dη
/// ```
///
/// with the density `ρ = Σ a_m T_m/√(1−η²)` and `θ(x, v) = atan2(x, v)`.
/// `θ` agrees with `arctan(x/v)` up to `±π` on `v < 0`, a constant that
/// `∫ρ = 0` removes, but stays continuous in `η` for `x ≠ 0`. The field
/// is odd in `x` and `ω0(0−, y) − ω0(0+, y) = φ0(y)` on the crack.
///
/// Both integrals are taken in the angle variable `η = cos ϑ`, which
/// absorbs the endpoint weight, split at `η = y` where the integrands
/// are sharpest.
pub fn displacement_field(
    sol: &SpectralSolution,
    x: f64,
    y: f64,
    wp: &ComplexWaveParams,
    q: &QuadratureSpec,
) -> Result<Complex64> {
    if !x.is_finite() || !y.is_finite() {
        return Err(Error::Domain(format!("field point ({x}, {y}) must be finite")));
    }
    if x == 0.0 {
        if y.abs() < 1.0 {
            return Err(Error::OnCrackFace { x, y });
        }
        return Ok(Complex64::new(0.0, 0.0));
    }
    q.validate()?;
    let coeffs = &sol.coeffs;
    let scale: f64 = coeffs.iter().map(|a| a.norm()).sum::<f64>() * PI;
    if scale == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let tol = q.rel_tol * scale;

    let mut splits = vec![0.0];
    if y.abs() < 1.0 {
        splits.push(y.acos());
    }
    splits.push(PI);

    let angle = |th: f64| {
        let eta = th.cos();
        density_numerator(coeffs, eta) * x.atan2(y - eta)
    };
    let mut total = Complex64::new(0.0, 0.0);
    for w in splits.windows(2) {
        let (v, _) = adaptive_gauss(&angle, w[0], w[1], tol, q.panel_order, q.max_panels);
        total += v;
    }

    if !wp.is_static() {
        // kernel failures are carried out of the quadrature closure
        let failure = std::cell::RefCell::new(None);
        let regular = |th: f64| {
            let eta = th.cos();
            match field_kernel(x, y - eta, wp, q) {
                Ok(ev) => ev.value * density_numerator(coeffs, eta),
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    Complex64::new(0.0, 0.0)
                }
            }
        };
        for w in splits.windows(2) {
            let (v, _) = adaptive_gauss(&regular, w[0], w[1], tol, q.panel_order, q.max_panels);
            total += v;
        }
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
    }
    Ok(-total / (2.0 * PI))
}

/// Hurwitz zeta `ζ(4, N) = Σ_{n≥1} (n + N)^{−4}`.
///
/// The first hundred terms are summed directly (smallest first) and the
/// rest by Euler–Maclaurin, whose remainder is below `X^{−11}` for
/// `X ≥ 101`.
pub fn hurwitz_zeta4(n: usize) -> f64 {
    const DIRECT: usize = 100;
    let x = (n + DIRECT + 1) as f64;
    let tail = x.powi(-3) / 3.0 + x.powi(-4) / 2.0 + x.powi(-5) / 3.0 - x.powi(-7) / 6.0 + 2.0 * x.powi(-9) / 9.0;
    (1..=DIRECT).rev().fold(tail, |acc, k| acc + ((k + n) as f64).powi(-4))
}

/// `c · ζ(4, N)^{1/2}`, which scales like `N^{−3/2}`.
pub fn error_bound(n: usize, c: f64) -> f64 {
    c * hurwitz_zeta4(n).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::benchmark_materials;

    fn solution(coeffs: Vec<Complex64>) -> SpectralSolution {
        let n = coeffs.len();
        let sum = coeffs.iter().sum();
        SpectralSolution { coeffs, n, residual: 0.0, history: vec![(n, sum)] }
    }

    fn static_solution(mp: &MaterialParams, n: usize) -> SpectralSolution {
        let mut c = vec![Complex64::new(0.0, 0.0); n];
        c[0] = Complex64::new(2.0 * mp.tau0 / mp.g, 0.0);
        solution(c)
    }

    #[test]
    fn static_sif_is_root_two_tau() {
        let mp = MaterialParams::new(8e10, 6.5e10, 2700.0, 0.0, 1.7);
        let k = sif(&static_solution(&mp, 5), &mp, 0.3);
        assert!((k.k_complex - Complex64::new(SQRT_2 * 1.7, 0.0)).norm() <= 1e-15 * k.magnitude);
        assert_eq!(k.t, 0.3);
    }

    #[test]
    fn sif_magnitude_is_time_invariant() {
        let mp = benchmark_materials()[0];
        let sol = solution(vec![Complex64::new(1e-11, -2e-11), Complex64::new(3e-13, 1e-13)]);
        let base = sif(&sol, &mp, 0.0);
        assert_eq!(base.magnitude, base.k_complex.norm());
        for i in 1..=10 {
            let k = sif(&sol, &mp, 0.37 * i as f64);
            assert!((k.magnitude - base.magnitude).abs() <= 1e-14 * base.magnitude);
        }
    }

    #[test]
    fn cod_vanishes_at_tips_and_matches_static_shape() {
        let mp = MaterialParams::new(6.5e10, 5e10, 2700.0, 0.0, 1.0);
        let sol = static_solution(&mp, 4);
        assert_eq!(cod_profile(&sol, 1.0).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(cod_profile(&sol, -1.0).unwrap(), Complex64::new(0.0, 0.0));
        for y in [-0.9, -0.2, 0.0, 0.5, 0.99] {
            let v = cod_profile(&sol, y).unwrap();
            let expect = 2.0 / mp.g * (1.0 - y * y).sqrt();
            assert!((v.re - expect).abs() <= 1e-15 * expect.max(1e-300) && v.im == 0.0);
            assert!(v.re >= 0.0);
        }
        assert!(cod_profile(&sol, 1.01).is_err());
    }

    #[test]
    fn cod_is_antiderivative_of_density() {
        let sol = solution(vec![
            Complex64::new(1.0, 0.2),
            Complex64::new(-0.3, 0.1),
            Complex64::new(0.05, -0.4),
            Complex64::new(0.02, 0.0),
        ]);
        let y = 0.3;
        let h = 1e-4;
        let fd = (cod_profile(&sol, y + h).unwrap() - cod_profile(&sol, y - h).unwrap()) / (2.0 * h);
        assert!((fd + cod_density(&sol, y).unwrap()).norm() < 1e-7);
        // φ0(y) = ∫_y^1 ρ, in the angle variable
        let (integral, _) =
            adaptive_gauss(&|th: f64| density_numerator(&sol.coeffs, th.cos()), 0.0, y.acos(), 1e-14, 10, 100);
        assert!((cod_profile(&sol, y).unwrap() - integral).norm() < 1e-13);
    }

    #[test]
    fn static_field_is_odd_jumps_by_opening_and_decays() {
        let mp = MaterialParams::new(8e10, 6.5e10, 2700.0, 0.0, 1.0);
        let wp = mp.wave_params().unwrap();
        let q = QuadratureSpec::default();
        let sol = static_solution(&mp, 3);
        let w = displacement_field(&sol, 0.3, 0.4, &wp, &q).unwrap();
        let w_neg = displacement_field(&sol, -0.3, 0.4, &wp, &q).unwrap();
        assert!((w + w_neg).norm() <= 1e-15 * w.norm());
        let eps = 1e-6;
        let jump = displacement_field(&sol, -eps, 0.4, &wp, &q).unwrap()
            - displacement_field(&sol, eps, 0.4, &wp, &q).unwrap();
        let cod = cod_profile(&sol, 0.4).unwrap();
        assert!((jump - cod).norm() <= 1e-5 * cod.norm(), "{jump} vs {cod}");
        let far: Vec<f64> =
            [5.0, 10.0, 20.0].iter().map(|&x| displacement_field(&sol, x, 0.0, &wp, &q).unwrap().norm()).collect();
        assert!(far[0] > far[1] && far[1] > far[2]);
        assert!(far[2] < 0.06 * cod_profile(&sol, 0.0).unwrap().norm());
        assert!(matches!(displacement_field(&sol, 0.0, 0.2, &wp, &q), Err(Error::OnCrackFace { .. })));
        assert_eq!(displacement_field(&sol, 0.0, 1.5, &wp, &q).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn zeta_values() {
        assert!((hurwitz_zeta4(0) - PI.powi(4) / 90.0).abs() <= 1e-15);
        // ζ(4, 1) = ζ(4) − 1
        assert!((hurwitz_zeta4(1) - (PI.powi(4) / 90.0 - 1.0)).abs() <= 1e-15);
        for n in [50usize, 80, 200, 1000] {
            let nf = n as f64;
            let scaled = (hurwitz_zeta4(n) - nf.powi(-3) / 3.0) * nf.powi(4);
            assert!((scaled + 0.5).abs() < 2.0 / nf, "n={n}: {scaled}");
        }
    }

    #[test]
    fn error_bound_scales_like_n_to_minus_three_halves() {
        let ratio = error_bound(20, 1.0) / error_bound(40, 1.0);
        assert!((ratio / 2f64.powf(1.5) - 1.0).abs() < 0.05);
        assert_eq!(error_bound(7, 3.0), 3.0 * hurwitz_zeta4(7).sqrt());
    }
}
