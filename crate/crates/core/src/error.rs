use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value for `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("incomplete gamma did not converge after {iterations} iterations (s = {s}, x = {x})")]
    GammaNonConvergence { s: f64, x: f64, iterations: usize },

    #[error("root is not bracketed: f({lo}) = {f_lo}, f({hi}) = {f_hi}")]
    InvalidBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("root finding did not converge after {iterations} iterations in [{lo}, {hi}]")]
    RootNonConvergence { lo: f64, hi: f64, iterations: usize },

    #[error("degenerate computation: {0}")]
    Degenerate(String),

    #[error("age distribution of seller {seller} lost normalization at t = {time}: total mass {mass}")]
    NormalizationDrift { seller: usize, time: f64, mass: f64 },

    #[error("no time-series rows at or after t = {burn_in}")]
    EmptyWindow { burn_in: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// Process exit status for this error: 1 configuration, 2 numerical, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter { .. } | Error::Config(_) => 1,
            Error::Io(_) => 3,
            _ => 2,
        }
    }
}
