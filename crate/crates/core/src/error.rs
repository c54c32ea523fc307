use thiserror::Error;

/// Errors raised by model construction, spectral analysis, and propagation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("state (n_opt={n_opt}, n_mw={n_mw}, atom={atom}) is not an FSL site of the {sector}-excitation sector")]
    NotAnFslSite { n_opt: usize, n_mw: usize, atom: &'static str, sector: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max |H - H^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    /// A collapse operator leaves the retained fixed-excitation sector.
    #[error("operator '{0}' leaks out of the fixed excitation sector; use an AllSectorsUpTo basis")]
    SectorLeaking(String),

    #[error("step too coarse: norm drift {drift:e} exceeds {limit:e}")]
    NormDrift { drift: f64, limit: f64 },

    #[error("step too coarse: trace drift {drift:e} exceeds {limit:e}")]
    TraceDrift { drift: f64, limit: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors that signal a violated numerical contract (norm or
    /// trace drift) rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NormDrift { .. } | Error::TraceDrift { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
