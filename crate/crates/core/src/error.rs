use thiserror::Error;

use crate::linsolve::SpectralSolution;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid material parameters: {0}")]
    InvalidMaterial(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("invalid quadrature settings: {0}")]
    InvalidQuadrature(String),

    #[error("quadrature order {got} is below the floor {floor}")]
    QuadratureOrder { got: usize, floor: usize },

    /// The improper kernel integral could not be certified within the
    /// cutoff-doubling or panel budget.
    #[error("kernel quadrature did not converge: {0}")]
    NonConvergence(String),

    /// Real positive `k0^2` puts a pole on the integration path.
    #[error("undamped medium (real positive k0^2) is not supported")]
    UnsupportedRegime,

    #[error("matrix is singular to working precision (column {column}, pivot modulus {pivot:e})")]
    SingularMatrix { column: usize, pivot: f64 },

    /// The truncation ladder hit `N_max`; the last solution and its
    /// history are kept for diagnosis.
    #[error("reduction ladder reached N = {} without meeting the tolerance", .solution.n)]
    NoConvergence { solution: Box<SpectralSolution> },

    #[error("point (x = {x}, y = {y}) lies on the crack faces; pick a side with the sign of x")]
    OnCrackFace { x: f64, y: f64 },
}
