use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A physical or numerical parameter is outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        /// Parameter name as it appears in the API.
        name: &'static str,
        /// Human-readable rule that was violated.
        reason: String,
    },

    /// The operation is not defined for this input.
    #[error("domain error: {0}")]
    Domain(String),

    /// A quadrature (or tail extrapolation) failed to reach its tolerance.
    ///
    /// For half-line integrals this is how a failed Dalang condition shows up.
    #[error(
        "{context}: quadrature did not converge (partial value {partial:e}, \
         error estimate {error:e}, cutoff {cutoff:e})"
    )]
    NonConvergence {
        /// Which integral failed.
        context: &'static str,
        /// Best value obtained before giving up.
        partial: f64,
        /// Error estimate attached to `partial`.
        error: f64,
        /// Largest frequency (or smallest scale) reached.
        cutoff: f64,
        /// Last observed ratio of consecutive dyadic pieces, when applicable.
        ratio: Option<f64>,
    },

    /// A signed measure has zero total variation after merging atoms.
    #[error("degenerate measure: {0}")]
    DegenerateMeasure(String),

    /// A local-time bandwidth does not resolve the path.
    #[error("bandwidth {eps:e} rejected: {reason}")]
    Bandwidth {
        /// Requested bandwidth.
        eps: f64,
        /// Why it was rejected.
        reason: String,
    },

    /// Structure-function lags fall outside the band the grids resolve.
    #[error("lags [{min:e}, {max:e}] outside resolved band [{lower:e}, {upper:e}]: {reason}")]
    LagBand {
        /// Smallest requested lag.
        min: f64,
        /// Largest requested lag.
        max: f64,
        /// Lower edge of the resolved band.
        lower: f64,
        /// Upper edge of the resolved band.
        upper: f64,
        /// Which requirement failed.
        reason: String,
    },

    /// A conditioning bin did not collect enough paths.
    #[error(
        "conditioning bins hold {below} (S < t) and {above} (S >= t) paths, \
         need {required} each; increase paths or change t"
    )]
    Occupancy {
        /// Paths with `S(alpha) < t`.
        below: usize,
        /// Paths with `S(alpha) >= t`.
        above: usize,
        /// Required minimum per bin.
        required: usize,
    },
}

/// Shorthand result type.
pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}

impl Error {
    /// True for quadrature non-convergence.
    pub fn is_non_convergence(&self) -> bool {
        matches!(self, Error::NonConvergence { .. })
    }
}
