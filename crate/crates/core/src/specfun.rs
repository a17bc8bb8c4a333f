//! Chebyshev polynomials, Gauss–Chebyshev rules and the closed-form
//! spectral identities used by the Galerkin projection.

use std::f64::consts::PI;

use crate::{Error, Result};

fn check_unit(x: f64) -> Result<()> {
    if x.is_finite() && x.abs() <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("x = {x} is outside [-1, 1]")))
    }
}

/// `T_m(x)` by the three-term recurrence.
pub fn cheb_t(m: usize, x: f64) -> Result<f64> {
    check_unit(x)?;
    Ok(cheb_t_unchecked(m, x))
}

/// `U_m(x)` by the three-term recurrence.
pub fn cheb_u(m: usize, x: f64) -> Result<f64> {
    check_unit(x)?;
    Ok(cheb_u_unchecked(m, x))
}

pub(crate) fn cheb_t_unchecked(m: usize, x: f64) -> f64 {
    match m {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut t0, mut t1) = (1.0, x);
            for _ in 1..m {
                let t2 = 2.0 * x * t1 - t0;
                t0 = t1;
                t1 = t2;
            }
            t1
        }
    }
}

pub(crate) fn cheb_u_unchecked(m: usize, x: f64) -> f64 {
    match m {
        0 => 1.0,
        1 => 2.0 * x,
        _ => {
            let (mut u0, mut u1) = (1.0, 2.0 * x);
            for _ in 1..m {
                let u2 = 2.0 * x * u1 - u0;
                u0 = u1;
                u1 = u2;
            }
            u1
        }
    }
}

/// `[T_0(x), ..., T_{n-1}(x)]`.
pub(crate) fn cheb_t_all(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let (mut t0, mut t1) = (1.0, x);
    for i in 0..n {
        match i {
            0 => out.push(1.0),
            1 => out.push(x),
            _ => {
                let t2 = 2.0 * x * t1 - t0;
                t0 = t1;
                t1 = t2;
                out.push(t2);
            }
        }
    }
    out
}

/// `[U_0(x), ..., U_{n-1}(x)]`.
pub(crate) fn cheb_u_all(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let (mut u0, mut u1) = (1.0, 2.0 * x);
    for i in 0..n {
        match i {
            0 => out.push(1.0),
            1 => out.push(2.0 * x),
            _ => {
                let u2 = 2.0 * x * u1 - u0;
                u0 = u1;
                u1 = u2;
                out.push(u2);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChebKind {
    /// Weight `1/√(1−x²)`.
    First,
    /// Weight `√(1−x²)`.
    Second,
}

/// Gauss–Chebyshev rule; exact for polynomials of degree `≤ 2n − 1`
/// against its weight.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebRule {
    pub kind: ChebKind,
    pub n: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ChebRule {
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

pub fn cheb_rule(kind: ChebKind, n: usize) -> Result<ChebRule> {
    if n == 0 {
        return Err(Error::Domain("Gauss-Chebyshev rule needs at least one node".into()));
    }
    let nf = n as f64;
    let (nodes, weights) = match kind {
        ChebKind::First => (1..=n).map(|j| (((2 * j - 1) as f64 * PI / (2.0 * nf)).cos(), PI / nf)).unzip(),
        ChebKind::Second => (1..=n)
            .map(|j| {
                let th = j as f64 * PI / (nf + 1.0);
                (th.cos(), PI / (nf + 1.0) * th.sin().powi(2))
            })
            .unzip(),
    };
    Ok(ChebRule { kind, n, nodes, weights })
}

/// Cauchy transform of the weighted first-kind polynomial:
/// `(1/π) PV∫ T_m(η) / ((η − y)√(1−η²)) dη = U_{m−1}(y)`.
pub fn cauchy_transform_t(m: usize, y: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("the Cauchy transform identity needs m >= 1".into()));
    }
    if !(y.abs() < 1.0) {
        return Err(Error::Domain(format!("y = {y} must lie strictly inside (-1, 1)")));
    }
    Ok(cheb_u_unchecked(m - 1, y))
}

/// `(4/π) ∫∫ √(1−y²) U_{n−1}(y) sgn(y−η) T_m(η)/√(1−η²) dη dy`, `n, m ≥ 1`.
///
/// The inner integral is `−2 sin(mθ)/m` with `y = cos θ`; the outer one
/// reduces to `∫ sin nθ sin mθ sin θ dθ`, which vanishes unless `n + m` is
/// even.
pub fn sign_kernel_moment(n: usize, m: usize) -> f64 {
    debug_assert!(n >= 1 && m >= 1);
    // ∫_0^π cos(kθ) sin θ dθ
    let c = |k: i64| -> f64 {
        if k % 2 != 0 {
            0.0
        } else {
            2.0 / (1.0 - (k * k) as f64)
        }
    };
    let (n, m) = (n as i64, m as i64);
    let p = 0.5 * (c(n - m) - c(n + m));
    -8.0 / (PI * m as f64) * p
}

/// `∫ ln|y−η| T_j(η)/√(1−η²) dη` for `|y| < 1`.
fn log_moment(j: usize, y: f64) -> f64 {
    if j == 0 {
        -PI * std::f64::consts::LN_2
    } else {
        -PI / j as f64 * cheb_t_unchecked(j, y)
    }
}

/// `∫ (y−η) ln|y−η| T_m(η)/√(1−η²) dη`, a polynomial of degree `m + 1`
/// in `y` (from the Chebyshev expansion of `ln|y−η|`).
pub fn log_kernel_inner(m: usize, y: f64) -> f64 {
    debug_assert!(m >= 1);
    y * log_moment(m, y) - 0.5 * (log_moment(m + 1, y) + log_moment(m - 1, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::adaptive_gauss;
    use proptest::prelude::*;

    #[test]
    fn low_order_values() {
        for x in [-1.0, -0.3, 0.0, 0.8, 1.0] {
            assert_eq!(cheb_t(0, x).unwrap(), 1.0);
            assert_eq!(cheb_u(0, x).unwrap(), 1.0);
        }
        assert_eq!(cheb_t(3, 0.5).unwrap(), -1.0);
        assert_eq!(cheb_u(2, 0.5).unwrap(), 0.0);
        assert_eq!(cheb_u(7, 1.0).unwrap(), 8.0);
    }

    #[test]
    fn trigonometric_oracles() {
        let t7 = (7.0 * 0.3f64.acos()).cos();
        assert!((cheb_t(7, 0.3).unwrap() - t7).abs() < 1e-14);
        let th = (-0.2f64).acos();
        let u5 = (6.0 * th).sin() / th.sin();
        assert!((cheb_u(5, -0.2).unwrap() - u5).abs() < 1e-14);
    }

    #[test]
    fn rejects_outside_interval() {
        assert!(cheb_t(2, 1.0 + 1e-12).is_err());
        assert!(cheb_u(2, -1.5).is_err());
        assert!(cheb_rule(ChebKind::First, 0).is_err());
        assert!(cauchy_transform_t(2, 1.0).is_err());
        assert!(cauchy_transform_t(0, 0.2).is_err());
    }

    #[test]
    fn recurrence_matches_trig_form_up_to_degree_200() {
        for i in 0..=40 {
            let x = -0.999 + 1.998 * i as f64 / 40.0;
            let th = x.acos();
            let ts = cheb_t_all(201, x);
            let us = cheb_u_all(201, x);
            for m in 0..=200 {
                let t = (m as f64 * th).cos();
                assert!((ts[m] - t).abs() < 1e-12, "T_{m}({x})");
                assert!((cheb_t(m, x).unwrap() - t).abs() < 1e-12);
                // U_m grows like m near the ends; compare relative to m + 1
                let u = ((m + 1) as f64 * th).sin() / th.sin();
                assert!((us[m] - u).abs() < 1e-12 * (m + 1) as f64, "U_{m}({x})");
            }
        }
    }

    #[test]
    fn rule_basics() {
        let r = cheb_rule(ChebKind::First, 1).unwrap();
        assert!(r.nodes[0].abs() < 1e-16);
        assert!((r.weights[0] - PI).abs() < 1e-15);
        for n in [1, 5, 16, 64] {
            let s1: f64 = cheb_rule(ChebKind::First, n).unwrap().weights.iter().sum();
            let s2: f64 = cheb_rule(ChebKind::Second, n).unwrap().weights.iter().sum();
            assert!((s1 - PI).abs() < 1e-13);
            assert!((s2 - PI / 2.0).abs() < 1e-13);
        }
        let r1 = cheb_rule(ChebKind::First, 16).unwrap();
        let v = r1.integrate(|x| cheb_t_unchecked(2, x).powi(2));
        assert!((v - PI / 2.0).abs() < 1e-14);
        let r2 = cheb_rule(ChebKind::Second, 16).unwrap();
        let v = r2.integrate(|x| cheb_u_unchecked(1, x) * cheb_u_unchecked(3, x));
        assert!(v.abs() < 1e-14);
    }

    #[test]
    fn first_kind_rule_orthogonality_is_exact() {
        let n = 12;
        let r = cheb_rule(ChebKind::First, n).unwrap();
        for i in 0..2 * n {
            for j in 0..2 * n - i {
                let v = r.integrate(|x| cheb_t_unchecked(i, x) * cheb_t_unchecked(j, x));
                let exact = match (i == j, i) {
                    (false, _) => 0.0,
                    (true, 0) => PI,
                    (true, _) => PI / 2.0,
                };
                assert!((v - exact).abs() < 1e-13, "i={i} j={j}: {v}");
            }
        }
    }

    /// Principal value of `(1/π)∫ T_m(η)/((η−y)√(1−η²)) dη` with
    /// `η = cos φ`, subtracting the singular point's value over a
    /// symmetric interval around `φ_y`.
    fn pv_oracle(m: usize, y: f64) -> f64 {
        let phi_y = y.acos();
        let f = |phi: f64| (m as f64 * phi).cos();
        let fy = f(phi_y);
        // g(φ) = (f(φ) − f(φ_y)) / (cos φ − y) is smooth; the subtracted
        // term integrates to PV∫ dφ/(cos φ − y) = 0 over (0, π).
        let g = |phi: f64| {
            let d = phi.cos() - y;
            if d.abs() < 1e-300 {
                0.0
            } else {
                (f(phi) - fy) / d
            }
        };
        let (a, _) = adaptive_gauss(&g, 0.0, phi_y, 1e-14, 20, 4000);
        let (b, _) = adaptive_gauss(&g, phi_y, PI, 1e-14, 20, 4000);
        (a + b) / PI
    }

    #[test]
    fn spectral_relation_against_principal_value_quadrature() {
        assert_eq!(cauchy_transform_t(1, 0.0).unwrap(), 1.0);
        assert_eq!(cauchy_transform_t(3, 0.5).unwrap(), 0.0);
        assert!((pv_oracle(4, 0.25) - cauchy_transform_t(4, 0.25).unwrap()).abs() < 1e-8);
        for m in 1..=12 {
            for i in 0..20 {
                let y = -0.95 + 1.9 * (i as f64 + 0.37) / 20.0;
                let pv = pv_oracle(m, y);
                let closed = cauchy_transform_t(m, y).unwrap();
                assert!((pv - closed).abs() < 1e-7, "m={m} y={y}: {pv} vs {closed}");
            }
        }
    }

    #[test]
    fn sign_moment_matches_nested_quadrature() {
        // inner: ∫_0^π sgn(cos θ − cos φ) cos(mφ) dφ, split at φ = θ
        for n in 1..=6 {
            for m in 1..=6 {
                let outer = |th: f64| {
                    let inner_lo = adaptive_gauss(&|p: f64| -(m as f64 * p).cos(), 0.0, th, 1e-14, 16, 500).0;
                    let inner_hi = adaptive_gauss(&|p: f64| (m as f64 * p).cos(), th, PI, 1e-14, 16, 500).0;
                    (n as f64 * th).sin() * th.sin() * (inner_lo + inner_hi)
                };
                let v = 4.0 / PI * adaptive_gauss(&outer, 0.0, PI, 1e-13, 16, 500).0;
                assert!((v - sign_kernel_moment(n, m)).abs() < 1e-11, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn log_inner_matches_direct_quadrature() {
        for m in 1..=7 {
            for y in [-0.8, -0.1, 0.35, 0.9] {
                let th = f64::acos(y);
                let f = |phi: f64| {
                    let u = y - phi.cos();
                    if u == 0.0 {
                        0.0
                    } else {
                        u * u.abs().ln() * (m as f64 * phi).cos()
                    }
                };
                let v = adaptive_gauss(&f, 0.0, th, 1e-15, 20, 4000).0 + adaptive_gauss(&f, th, PI, 1e-15, 20, 4000).0;
                assert!((v - log_kernel_inner(m, y)).abs() < 1e-12, "m={m} y={y}");
            }
        }
    }

    proptest! {
        #[test]
        fn bounded_by_one_and_u_at_one(m in 0usize..150, x in -1.0f64..=1.0) {
            prop_assert!(cheb_t(m, x).unwrap().abs() <= 1.0 + 1e-12);
            prop_assert_eq!(cheb_u(m, 1.0).unwrap(), (m + 1) as f64);
        }
    }
}
