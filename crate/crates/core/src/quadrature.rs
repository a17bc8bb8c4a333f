//! Gauss–Legendre rules and a globally adaptive panel integrator.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

/// Values that can be integrated: real or complex.
pub trait Scalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_n` from the Chebyshev-like initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Rule mapped onto `[a, b]`.
    pub fn integrate<T: Scalar, F: Fn(f64) -> T + ?Sized>(&self, f: &F, a: f64, b: f64) -> T {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = T::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(mid + half * x) * w;
        }
        acc * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// One panel of an adaptive partition.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Panel<T> {
    pub a: f64,
    pub b: f64,
    pub value: T,
    pub err: f64,
}

impl<T: Scalar> Panel<T> {
    /// Value from the two half-panels; the error estimate is the gap to the
    /// whole-panel rule.
    pub fn eval<F: Fn(f64) -> T + ?Sized>(rule: &GaussLegendre, f: &F, a: f64, b: f64) -> Self {
        let m = 0.5 * (a + b);
        let whole = rule.integrate(f, a, b);
        let halves = rule.integrate(f, a, m) + rule.integrate(f, m, b);
        Panel { a, b, value: halves, err: (halves - whole).modulus() }
    }
}

/// Partition of an interval refined by bisecting the worst panel.
pub(crate) struct Partition<T> {
    pub panels: Vec<Panel<T>>,
}

impl<T: Scalar> Partition<T> {
    pub fn new() -> Self {
        Self { panels: Vec::new() }
    }

    pub fn push<F: Fn(f64) -> T + ?Sized>(&mut self, rule: &GaussLegendre, f: &F, a: f64, b: f64) {
        self.panels.push(Panel::eval(rule, f, a, b));
    }

    /// Sum in left-to-right order, so the result does not depend on the
    /// refinement history.
    pub fn value(&self) -> T {
        self.panels.iter().fold(T::zero(), |acc, p| acc + p.value)
    }

    pub fn error(&self) -> f64 {
        self.panels.iter().map(|p| p.err).sum()
    }

    /// Bisects the panel with the largest error. Returns false when that
    /// panel can no longer be split in floating point.
    pub fn refine_worst<F: Fn(f64) -> T + ?Sized>(&mut self, rule: &GaussLegendre, f: &F) -> bool {
        let Some((idx, _)) = self.panels.iter().enumerate().max_by(|x, y| x.1.err.total_cmp(&y.1.err)) else {
            return false;
        };
        let Panel { a, b, .. } = self.panels[idx];
        let m = 0.5 * (a + b);
        if !(m > a && m < b) {
            return false;
        }
        self.panels[idx] = Panel::eval(rule, f, a, m);
        self.panels.insert(idx + 1, Panel::eval(rule, f, m, b));
        true
    }
}

/// Globally adaptive Gauss–Legendre quadrature on `[a, b]`; returns the
/// value and the summed panel error estimate.
pub fn adaptive_gauss<T: Scalar, F: Fn(f64) -> T + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    order: usize,
    max_panels: usize,
) -> (T, f64) {
    if a == b {
        return (T::zero(), 0.0);
    }
    let rule = GaussLegendre::new(order);
    let mut part = Partition::new();
    part.push(&rule, f, a, b);
    while part.error() > tol && part.panels.len() < max_panels {
        if !part.refine_worst(&rule, f) {
            break;
        }
    }
    (part.value(), part.error())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_is_exact_for_high_degree() {
        for n in [1, 2, 5, 16, 33] {
            let r = GaussLegendre::new(n);
            let s: f64 = r.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-14, "n={n}");
            for d in 0..2 * n {
                let v = r.integrate(&|x: f64| x.powi(d as i32), -1.0, 1.0);
                let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
                assert!((v - exact).abs() < 1e-14, "n={n} d={d}");
            }
        }
    }

    #[test]
    fn nodes_are_sorted_and_symmetric() {
        let r = GaussLegendre::new(16);
        for w in r.nodes.windows(2) {
            assert!(w[0] < w[1]);
        }
        for i in 0..16 {
            assert_eq!(r.nodes[i], -r.nodes[15 - i]);
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let (v, err) = adaptive_gauss(&|x: f64| x.sqrt(), 0.0, 1.0, 1e-13, 10, 1000);
        assert!((v - 2.0 / 3.0).abs() < 1e-13);
        assert!(err <= 1e-13);
        let (c, _) = adaptive_gauss(&|x: f64| Complex64::new(x.cos(), x.sin()), 0.0, 3.0, 1e-14, 10, 100);
        assert!((c - Complex64::new(3f64.sin(), 1.0 - 3f64.cos())).norm() < 1e-14);
    }
}
