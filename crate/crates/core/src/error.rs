use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// The starting value of a chain lies outside the posterior support.
    #[error("infeasible initial value {theta:?}: {hint}")]
    InfeasibleInitial { theta: Vec<f64>, hint: String },

    #[error("gradient of the log empirical likelihood requested at an infeasible parameter")]
    InfeasibleGradient,

    #[error("autocorrelation is undefined for a constant series")]
    ConstantSeries,

    #[error("data error: {0}")]
    Data(String),

    #[error("data error on line {line}: {message}")]
    DataLine { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status used by the `elhmc` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Dimension(_) => 2,
            Error::InfeasibleInitial { .. } => 3,
            Error::Data(_) | Error::DataLine { .. } => 4,
            _ => 1,
        }
    }
}
