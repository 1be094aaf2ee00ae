use thiserror::Error;

use crate::spectrum::Sign;

/// Errors raised by the geometry, spectral and solver routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("bipolar point (0, 0) maps to infinity")]
    PointAtInfinity,

    #[error("singular point: {0}")]
    Singular(String),

    #[error("mode index n = 0 is not part of the zero-mean space")]
    ExcludedIndex,

    #[error("eps_m = 1: particles are indistinguishable from the background")]
    DegenerateContrast,

    #[error("lambda coincides with the eigenvalue of mode (n = {n}, {sign})")]
    ResonanceSingularity { n: i32, sign: Sign },

    #[error("point outside the validity region: {0}")]
    OutOfDomain(String),

    #[error("lambda is within {distance:.3e} of the discrete eigenvalue {eigenvalue:.12}")]
    NearResonance { eigenvalue: f64, distance: f64 },

    #[error("evaluation point is {distance:.3e} from the boundary, quadrature needs at least {required:.3e}")]
    TooClose { distance: f64, required: f64 },

    #[error("invalid discretization: {0}")]
    Discretization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
