//! Physical inputs and the derived complex wave quantities.

use num_complex::Complex64;

use crate::{Error, Result};

/// Physical problem data. The crack half-width is fixed at 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    /// Elastic shear modulus `G`, Pa.
    pub g: f64,
    /// Viscous shear modulus `G0` (multiplies the strain rate).
    pub g0: f64,
    /// Mass density, kg/m³.
    pub rho: f64,
    /// Angular frequency of the load.
    pub k: f64,
    /// Shear load amplitude `τ0`, Pa.
    pub tau0: f64,
}

impl MaterialParams {
    pub fn new(g: f64, g0: f64, rho: f64, k: f64, tau0: f64) -> Self {
        Self { g, g0, rho, k, tau0 }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [("G", self.g), ("G0", self.g0), ("rho", self.rho), ("k", self.k), ("tau0", self.tau0)];
        if let Some((name, _)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidMaterial(format!("{name} is not finite")));
        }
        if self.g <= 0.0 {
            return Err(Error::InvalidMaterial(format!("G must be positive, got {}", self.g)));
        }
        if self.rho <= 0.0 {
            return Err(Error::InvalidMaterial(format!("rho must be positive, got {}", self.rho)));
        }
        if self.k < 0.0 {
            return Err(Error::InvalidMaterial(format!("k must be non-negative, got {}", self.k)));
        }
        if self.g0 < 0.0 {
            return Err(Error::InvalidMaterial(format!("G0 must be non-negative, got {}", self.g0)));
        }
        Ok(())
    }

    pub fn wave_params(&self) -> Result<ComplexWaveParams> {
        derive_wave_params(self)
    }

    /// Same material with the load frequency set to zero.
    pub fn static_limit(&self) -> Self {
        Self { k: 0.0, ..*self }
    }
}

/// The three benchmark materials (steel-like to softer), all at
/// `τ0 = 1 Pa`, `ρ = 2700 kg/m³`, `k = 3`.
pub fn benchmark_materials() -> [MaterialParams; 3] {
    [
        MaterialParams::new(80e9, 65e9, 2700.0, 3.0, 1.0),
        MaterialParams::new(65e9, 50e9, 2700.0, 3.0, 1.0),
        MaterialParams::new(55e9, 40e9, 2700.0, 3.0, 1.0),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `k = 0`: `k0^2 = 0`, the regular kernel vanishes.
    Static,
    /// `Im k0^2 > 0`: damped waves, every kernel integrand is smooth.
    Viscoelastic,
    /// `G0 = 0`, `k > 0`: real `k0^2`, pole on the real axis.
    Undamped,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexWaveParams {
    /// `G̃ = G − i k G0`.
    pub g_tilde: Complex64,
    /// `k0^2 = ρ k² / G̃`.
    pub k0_sq: Complex64,
    pub regime: Regime,
}

impl ComplexWaveParams {
    /// `γ(α) = √(α² − k0²)` on the decaying branch.
    #[inline]
    pub fn gamma(&self, alpha: f64) -> Complex64 {
        gamma(alpha, self)
    }

    /// Root of `k0^2` with non-negative imaginary part.
    pub fn k0(&self) -> Complex64 {
        self.k0_sq.sqrt()
    }

    pub fn is_static(&self) -> bool {
        self.regime == Regime::Static
    }
}

pub fn derive_wave_params(mp: &MaterialParams) -> Result<ComplexWaveParams> {
    mp.validate()?;
    let g_tilde = Complex64::new(mp.g, -mp.k * mp.g0);
    let k0_sq = mp.rho * mp.k * mp.k / g_tilde;
    let regime = if mp.k == 0.0 {
        Regime::Static
    } else if k0_sq.im != 0.0 {
        Regime::Viscoelastic
    } else {
        Regime::Undamped
    };
    Ok(ComplexWaveParams { g_tilde, k0_sq, regime })
}

/// Square root of `α² − k0²` with `Re ≥ 0`, so that `exp(−γ|y−η|)` decays.
///
/// The principal square root already lands on that half-plane. For real
/// positive `k0²` and `α² = k0²` this returns zero.
#[inline]
pub fn gamma(alpha: f64, wp: &ComplexWaveParams) -> Complex64 {
    (Complex64::new(alpha * alpha, 0.0) - wp.k0_sq).sqrt()
}
