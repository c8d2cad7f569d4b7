use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type. Configuration problems are kept distinct from
/// runtime/numerical failures so callers can map them to exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{key}`: {message}")]
    InvalidParam { key: String, message: String },

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error("config error at `{key}`: {message}")]
    ConfigInvalid { key: String, message: String },

    #[error("non-finite state in trajectory (seed {seed}) at step {step}")]
    NonFiniteState { seed: u64, step: u64 },

    #[error("{escaped} of {total} trajectories escaped the trap (> 50%)")]
    TooManyEscapes { escaped: usize, total: usize },

    #[error("{count} points fall outside the requested grid")]
    PointsOutsideGrid { count: usize },

    #[error("no spectral peak found above background")]
    NoSpectralPeak,

    #[error("insufficient data for {what}: {message}")]
    InsufficientData { what: &'static str, message: String },

    #[error("fit for {what} did not converge after {iterations} iterations (rms {residual:.3e})")]
    FitDidNotConverge {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("grid resolution check failed: {0}")]
    GridResolution(String),

    #[error("initial state tails not resolved on grid (edge density {edge_density:.3e})")]
    TailsNotResolved { edge_density: f64 },

    #[error("invariant `{what}` drifted to {value:.3e} (tolerance {tolerance:.1e}) at step {step}")]
    InvariantDrift {
        what: &'static str,
        value: f64,
        tolerance: f64,
        step: u64,
    },

    #[error("Wigner transform imaginary residue {max:.3e} above threshold")]
    ImaginaryResidue { max: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Other(String),
}

impl Error {
    pub fn invalid_param(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidParam {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::ConfigInvalid {
            key: key.into(),
            message: message.into(),
        }
    }

    /// Exit code the CLI should use for this error (1 config, 2 runtime).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParam { .. }
            | Error::ConfigParse(_)
            | Error::ConfigInvalid { .. } => 1,
            _ => 2,
        }
    }
}
