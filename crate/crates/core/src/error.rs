use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid search space: {0}")]
    InvalidSpace(String),

    #[error("row {row}, column `{column}`: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("missing target column `{0}`")]
    MissingTarget(String),

    #[error("target not binary: found {0} distinct labels")]
    TargetNotBinary(usize),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("feature schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("invalid hyperparameter configuration: {0}")]
    InvalidConfig(String),

    #[error("support violation for {family}: {message}")]
    Support { family: String, message: String },

    #[error("optimizer did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("no admissible shift for family {0}")]
    NoAdmissibleShift(String),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
