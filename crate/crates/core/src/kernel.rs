//! Improper-integral kernels of the crack equation.
//!
//! Both kernels share the bracket
//!
//! ```text
//! B(α, s) = (α²/γ²) e^{−(γ−α)s} − 1,     γ = √(α² − k0²),
//! ```
//!
//! so that the regular kernel integrand is `B e^{−αs}` and the field kernel
//! integrand is `B e^{−αs} sin(αx)/α`. `B` is evaluated without the
//! cancellation of the textbook form: `γ − α = −k0²/(γ + α)` and
//! `α²/γ² = 1 + k0²/γ²`.
//!
//! Integration runs over Gauss–Legendre panels laid out geometrically from
//! the wavenumber scale `|k0|` up to a cutoff `A`. The worst panel is
//! bisected until the panel error budget is met, and `A` is doubled until
//! the analytic tail bound certifies the discarded remainder.

use std::collections::HashMap;
use std::sync::RwLock;

use num_complex::Complex64;

use crate::material::{ComplexWaveParams, Regime};
use crate::quadrature::{GaussLegendre, Partition};
use crate::{Error, Result};

/// Tolerances and truncation controls for the kernel integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// First finite upper limit `A`.
    pub initial_cutoff: f64,
    pub max_doublings: u32,
    /// Gauss–Legendre order per panel.
    pub panel_order: usize,
    pub max_panels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            initial_cutoff: 64.0,
            max_doublings: 20,
            panel_order: 16,
            max_panels: 4096,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidQuadrature(msg));
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return bad(format!("abs_tol must be positive, got {}", self.abs_tol));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return bad(format!("rel_tol must be positive, got {}", self.rel_tol));
        }
        if !(self.initial_cutoff > 0.0 && self.initial_cutoff.is_finite()) {
            return bad(format!("initial_cutoff must be positive, got {}", self.initial_cutoff));
        }
        if self.max_doublings < 1 {
            return bad("max_doublings must be at least 1".into());
        }
        if self.panel_order < 8 {
            return bad(format!("panel_order must be at least 8, got {}", self.panel_order));
        }
        if self.max_panels < 1 {
            return bad("max_panels must be at least 1".into());
        }
        Ok(())
    }

    /// Both tolerances multiplied by `factor`.
    pub fn with_tolerance_scaled(&self, factor: f64) -> Self {
        Self { abs_tol: self.abs_tol * factor, rel_tol: self.rel_tol * factor, ..*self }
    }

    /// Lowers `abs_tol` to `rel_tol · scale` when that is smaller, so that
    /// values of magnitude `scale` are resolved to `rel_tol`.
    pub fn with_relative_floor(&self, scale: f64) -> Self {
        let floor = self.rel_tol * scale;
        if floor > 0.0 && floor < self.abs_tol {
            Self { abs_tol: floor, ..*self }
        } else {
            *self
        }
    }

    fn target(&self, value: Complex64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.norm())
    }
}

/// A certified kernel value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEval {
    pub value: Complex64,
    /// Panel error estimate plus the analytic tail bound.
    pub est_error: f64,
    pub cutoff_used: f64,
    pub panels_used: usize,
}

impl KernelEval {
    fn exact_zero() -> Self {
        Self { value: Complex64::new(0.0, 0.0), est_error: 0.0, cutoff_used: 0.0, panels_used: 0 }
    }
}

fn check_regime(wp: &ComplexWaveParams) -> Result<()> {
    match wp.regime {
        Regime::Undamped => Err(Error::UnsupportedRegime),
        _ => Ok(()),
    }
}

/// `e^z − 1` without cancellation for small `|z|`.
fn expm1_c(z: Complex64) -> Complex64 {
    if z.norm() < 0.5 {
        let (s, c) = z.im.sin_cos();
        let h = (0.5 * z.im).sin();
        Complex64::new(z.re.exp_m1() * c - 2.0 * h * h, z.re.exp() * s)
    } else {
        z.exp() - 1.0
    }
}

/// `B(α, s)`; see the module docs.
#[inline]
fn bracket(alpha: f64, s: f64, wp: &ComplexWaveParams) -> Complex64 {
    let g = wp.gamma(alpha);
    let g_sq = Complex64::new(alpha * alpha, 0.0) - wp.k0_sq;
    let delta = -wp.k0_sq / (g + alpha);
    let z = -delta * s;
    expm1_c(z) + wp.k0_sq / g_sq * z.exp()
}

fn rho0_integrand(alpha: f64, s: f64, wp: &ComplexWaveParams) -> Complex64 {
    bracket(alpha, s, wp) * (-alpha * s).exp()
}

fn field_integrand(alpha: f64, x: f64, s: f64, wp: &ComplexWaveParams) -> Complex64 {
    bracket(alpha, s, wp) * ((-alpha * s).exp() * (alpha * x).sin() / alpha)
}

/// Bound on `∫_A^∞ |B(α,s)| e^{−αs} dα`, from
/// `|B| ≤ e^{cs/α} (c/(α² − c) + cs/α)` with `c = |k0²|`.
pub fn rho0_tail_bound(cutoff: f64, s: f64, k0_sq_abs: f64) -> f64 {
    let (a, c) = (cutoff, k0_sq_abs);
    if c == 0.0 {
        return 0.0;
    }
    let gap = a * a - c;
    if gap <= 0.0 {
        return f64::INFINITY;
    }
    let growth = (c * s / a).exp();
    let decay = (-a * s).exp();
    let t1 = if s > 0.0 { (c * decay / (s * gap)).min(c * a / gap) } else { c * a / gap };
    let t2 = if s > 0.0 { c * decay / a } else { 0.0 };
    growth * (t1 + t2)
}

/// Bound on `∫_A^∞ |B(α,s)| e^{−αs} / α dα` (the field integrand without
/// the oscillating factor).
pub fn field_tail_bound(cutoff: f64, s: f64, k0_sq_abs: f64) -> f64 {
    let (a, c) = (cutoff, k0_sq_abs);
    if c == 0.0 {
        return 0.0;
    }
    let gap = a * a - c;
    if gap <= 0.0 {
        return f64::INFINITY;
    }
    let growth = (c * s / a).exp();
    let decay = (-a * s).exp();
    let t1 = if s > 0.0 { (c * decay / (s * a * gap)).min(c / (2.0 * gap)) } else { c / (2.0 * gap) };
    let t2 = if s > 0.0 { c * decay / (a * a) } else { 0.0 };
    growth * (t1 + t2)
}

/// Breakpoints `0, h, 2h, 4h, …` up to the first point `≥ cutoff`, with
/// the panels around the wavenumber scale halved once more.
fn initial_breakpoints(scale: f64, cutoff: f64) -> Vec<f64> {
    let h = scale.min(cutoff) / 16.0;
    let mut pts = vec![0.0, h];
    while *pts.last().unwrap() < cutoff {
        let b = *pts.last().unwrap();
        let next = 2.0 * b;
        if b >= 0.5 * scale && b < 2.0 * scale {
            pts.push(1.5 * b);
        }
        pts.push(next);
    }
    pts
}

fn integrate_half_line<F, T>(f: &F, tail: &T, scale: f64, q: &QuadratureSpec, what: &str) -> Result<KernelEval>
where
    F: Fn(f64) -> Complex64,
    T: Fn(f64) -> f64,
{
    q.validate()?;
    let rule = GaussLegendre::new(q.panel_order);
    let pts = initial_breakpoints(scale, q.initial_cutoff);
    let mut part = Partition::new();
    for w in pts.windows(2) {
        part.push(&rule, f, w[0], w[1]);
    }
    let mut cutoff = *pts.last().unwrap();
    let mut doublings = 0;
    loop {
        let value = part.value();
        let tol = q.target(value);
        let panel_err = part.error();
        let tail_err = tail(cutoff);
        if panel_err + tail_err <= tol {
            return Ok(KernelEval {
                value,
                est_error: panel_err + tail_err,
                cutoff_used: cutoff,
                panels_used: part.panels.len(),
            });
        }
        if tail_err > 0.5 * tol {
            if doublings >= q.max_doublings {
                return Err(Error::NonConvergence(format!(
                    "{what}: tail bound {tail_err:e} above tolerance {tol:e} after {doublings} cutoff doublings (A = {cutoff})"
                )));
            }
            part.push(&rule, f, cutoff, 2.0 * cutoff);
            cutoff *= 2.0;
            doublings += 1;
            continue;
        }
        if part.panels.len() >= q.max_panels || !part.refine_worst(&rule, f) {
            return Err(Error::NonConvergence(format!(
                "{what}: panel error {panel_err:e} above tolerance {tol:e} with {} panels",
                part.panels.len()
            )));
        }
    }
}

fn wavenumber_scale(wp: &ComplexWaveParams) -> f64 {
    wp.k0_sq.norm().sqrt()
}

/// `∫_0^∞ [α² e^{−γs}/(α² − k0²) − e^{−αs}] dα` for `s ≥ 0`.
pub fn rho0(s: f64, wp: &ComplexWaveParams, q: &QuadratureSpec) -> Result<KernelEval> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::Domain(format!("kernel distance s = {s} must be finite and non-negative")));
    }
    check_regime(wp)?;
    if wp.is_static() {
        return Ok(KernelEval::exact_zero());
    }
    let c = wp.k0_sq.norm();
    integrate_half_line(
        &|a| rho0_integrand(a, s, wp),
        &|cut| rho0_tail_bound(cut, s, c),
        wavenumber_scale(wp),
        q,
        "rho0",
    )
}

fn sign(u: f64) -> f64 {
    if u > 0.0 {
        1.0
    } else if u < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn check_interval(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v.abs() <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {v} is outside [-1, 1]")))
    }
}

/// `rho0(0) = iπk0/2`, with `k0` the root in the upper half-plane.
pub fn rho0_at_zero(wp: &ComplexWaveParams) -> Complex64 {
    Complex64::i() * std::f64::consts::PI * wp.k0() / 2.0
}

/// `sgn(y − η) · rho0(|y − η|)`, with `sgn(0) = 0`.
pub fn regular_kernel(y: f64, eta: f64, wp: &ComplexWaveParams, q: &QuadratureSpec) -> Result<Complex64> {
    check_interval("y", y)?;
    check_interval("eta", eta)?;
    let u = y - eta;
    if u == 0.0 {
        check_regime(wp)?;
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(rho0(u.abs(), wp, q)?.value * sign(u))
}

/// `R(x, y−η) = sgn(y−η) ∫_0^∞ [α e^{−γs}/(α² − k0²) − e^{−αs}/α] sin(αx) dα`
/// with `s = |y − η|`; `s_signed` is `y − η`.
pub fn field_kernel(x: f64, s_signed: f64, wp: &ComplexWaveParams, q: &QuadratureSpec) -> Result<KernelEval> {
    if !x.is_finite() || !s_signed.is_finite() {
        return Err(Error::Domain(format!("field kernel arguments must be finite (x = {x}, s = {s_signed})")));
    }
    check_regime(wp)?;
    let sg = sign(s_signed);
    if wp.is_static() || x == 0.0 || sg == 0.0 {
        return Ok(KernelEval::exact_zero());
    }
    let s = s_signed.abs();
    let c = wp.k0_sq.norm();
    let mut ev = integrate_half_line(
        &|a| field_integrand(a, x, s, wp),
        &|cut| field_tail_bound(cut, s, c),
        wavenumber_scale(wp).max(1e-3 / x.abs()),
        q,
        "field kernel",
    )?;
    ev.value *= sg;
    Ok(ev)
}

/// Memoized `rho0` keyed by the distance `s`. Fills are idempotent, so
/// concurrent callers may race on a key without changing the result.
pub struct KernelCache {
    wave: ComplexWaveParams,
    spec: QuadratureSpec,
    memo: RwLock<HashMap<u64, KernelEval>>,
}

impl KernelCache {
    pub fn new(wave: ComplexWaveParams, spec: QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        check_regime(&wave)?;
        Ok(Self { wave, spec, memo: RwLock::new(HashMap::new()) })
    }

    pub fn wave(&self) -> &ComplexWaveParams {
        &self.wave
    }

    pub fn spec(&self) -> &QuadratureSpec {
        &self.spec
    }

    pub fn rho0(&self, s: f64) -> Result<KernelEval> {
        let key = s.to_bits();
        if let Some(ev) = self.memo.read().expect("kernel memo poisoned").get(&key) {
            return Ok(*ev);
        }
        let ev = rho0(s, &self.wave, &self.spec)?;
        self.memo.write().expect("kernel memo poisoned").insert(key, ev);
        Ok(ev)
    }

    /// Cached form of [`regular_kernel`] (inputs assumed in `[-1, 1]`).
    pub fn regular(&self, y: f64, eta: f64) -> Result<Complex64> {
        let u = y - eta;
        if u == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(self.rho0(u.abs())?.value * sign(u))
    }

    pub fn len(&self) -> usize {
        self.memo.read().expect("kernel memo poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
