use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates a precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{what} = {value} is outside [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),

    /// The physics cannot deliver what was asked (precision unreachable, N < 1, ...).
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// The modulator cannot realize the requested number of weight levels.
    #[error(
        "{bits}-bit weighting not realizable; max feasible precision is {max_feasible_bits} bits"
    )]
    Capability { bits: u32, max_feasible_bits: u32 },

    #[error("accumulator saturated at cycle {cycle}: |{charge}| > {capacity}")]
    Saturation {
        cycle: u64,
        charge: f64,
        capacity: f64,
    },

    #[error("schema error in {source_name}: {message}")]
    Schema {
        source_name: String,
        message: String,
    },

    #[error("no peripheral record for {0}")]
    MissingRecord(String),

    #[error("config error: {0}")]
    Config(String),

    /// A self-check found results that disagree with their reference.
    #[error("verification failed: {0}")]
    Verification(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable class name used in CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::OutOfRange { .. } => "out_of_range",
            Error::UnknownParameter(_) => "unknown_parameter",
            Error::Infeasible(_) => "infeasible",
            Error::Capability { .. } => "capability",
            Error::Saturation { .. } => "saturation",
            Error::Schema { .. } => "schema",
            Error::MissingRecord(_) => "missing_record",
            Error::Config(_) => "config",
            Error::Verification(_) => "verification",
            Error::Io { .. } => "io",
        }
    }
}
