use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("constraint violated: {what} (norm {norm:.3e} above tolerance {tol:.3e})")]
    Constraint { what: String, norm: f64, tol: f64 },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("positivity violated: min n = {min_n:.6} at t = {time:.6}")]
    Positivity { min_n: f64, time: f64 },

    #[error("newton iteration did not converge after {iterations} steps (residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("blow-up guard tripped at t = {time:.6}: H2 norm {norm:.3e} exceeds {limit:.3e}")]
    BlowUp { time: f64, norm: f64, limit: f64 },

    #[error("undefined fit: {0}")]
    UndefinedFit(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Numerical(_)
                | Error::Domain(_)
                | Error::Positivity { .. }
                | Error::Convergence { .. }
                | Error::BlowUp { .. }
                | Error::UndefinedFit(_)
        )
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
