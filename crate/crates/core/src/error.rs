use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("parameter search did not converge: {0}")]
    NoConvergence(String),
    #[error("probe inconclusive: {0}")]
    Inconclusive(String),
    #[error("resolution: {0}")]
    Resolution(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("data is not {lipschitz}-Lipschitz: points {i} and {j} have ratio {ratio}")]
    NotLipschitz { i: usize, j: usize, ratio: f64, lipschitz: f64 },
    #[error("ambiguous: {0}")]
    Ambiguous(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("JSON error: {0}")]
    Json(String),
    #[error("CSV error: {0}")]
    Csv(String),
}

impl Error {
    /// Prefixes the message with `ctx`, keeping the variant.
    pub fn context(self, ctx: impl std::fmt::Display) -> Self {
        let wrap = |m: String| format!("{ctx}: {m}");
        match self {
            Error::InvalidInput(m) => Error::InvalidInput(wrap(m)),
            Error::NoConvergence(m) => Error::NoConvergence(wrap(m)),
            Error::Inconclusive(m) => Error::Inconclusive(wrap(m)),
            Error::Resolution(m) => Error::Resolution(wrap(m)),
            Error::Infeasible(m) => Error::Infeasible(wrap(m)),
            Error::Invariant(m) => Error::Invariant(wrap(m)),
            Error::Ambiguous(m) => Error::Ambiguous(wrap(m)),
            Error::Parse(m) => Error::Parse(wrap(m)),
            Error::Config(m) => Error::Config(wrap(m)),
            Error::Io(m) => Error::Io(wrap(m)),
            Error::Json(m) => Error::Json(wrap(m)),
            Error::Csv(m) => Error::Csv(wrap(m)),
            other @ (Error::Dimension { .. } | Error::NotLipschitz { .. }) => {
                Error::InvalidInput(wrap(other.to_string()))
            }
        }
    }

    /// Process exit code: 2 for I/O and configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Json(_) | Error::Csv(_) | Error::Parse(_) | Error::Config(_) => 2,
            _ => 1,
        }
    }
}
