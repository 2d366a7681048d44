use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A function was evaluated outside its domain, e.g. at or behind the surface.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent or invalid input parameters.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("beam cannot scatter into any propagating order")]
    NoOpenChannels,

    /// WKB initialisation requested where the badlands function is not small.
    #[error(
        "badlands function B = {value:.3e} at y_start = {y_start_m:.4e} m exceeds {threshold:.1e}; choose a smaller y_start"
    )]
    BadlandsStart { y_start_m: f64, value: f64, threshold: f64 },

    /// Asymptotic matching requested inside the quantum-reflection region.
    #[error(
        "badlands function B = {value:.3e} at y_end = {y_end_m:.4e} m exceeds {threshold:.1e}; y_end is not asymptotic"
    )]
    BadlandsEnd { y_end_m: f64, value: f64, threshold: f64 },

    #[error("log-derivative propagation failed at step {step} (y = {y:.6e}): {reason}; the grid is too coarse")]
    Propagation { step: usize, y: f64, reason: &'static str },

    #[error("asymptotic matching failed: (iK - Z) is singular")]
    Matching,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("invalid config document: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad input rather than by a failing solve.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Json(_) | Error::Domain(_))
    }
}
