//! Error type shared across the crate.
//!
//! Every variant maps to a stable category string and process exit code so
//! batch callers can dispatch on failures without parsing messages.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration: bad flags, incompatible options, degenerate
    /// chain settings, overlapping diagnostic windows.
    #[error("configuration error: {0}")]
    Config(String),

    /// A required CSV column is absent from the header.
    #[error("schema error: column {0:?} not found in header")]
    Schema(String),

    /// Structurally invalid data (treatment not in {{0,1}}, inconsistent
    /// treatment within a cluster, missing arm, non-finite values, ...).
    #[error("data error: {0}")]
    Data(String),

    /// A cell failed to parse as a finite number.
    #[error("parse error at row {row}, column {column:?}: {value:?} is not a finite number")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },

    /// Effect-scale domain violation (e.g. risk ratio with a non-positive
    /// control mean).
    #[error("scale domain error: {0}")]
    ScaleDomain(String),

    /// Numerical linear-algebra failure inside the sampler.
    #[error("linear algebra error: {0}")]
    LinearAlgebra(String),

    /// Bootstrap calibration could not be completed.
    #[error("calibration error: {0}")]
    Calibration(String),

    /// Too few posterior draws for the requested summary.
    #[error("insufficient draws: {0}")]
    InsufficientDraws(String),

    /// A metric is undefined for the given inputs (e.g. relative bias with a
    /// zero truth).
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable category tag.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Schema(_) => "schema",
            Error::Data(_) => "data",
            Error::Parse { .. } => "parse",
            Error::ScaleDomain(_) => "scale-domain",
            Error::LinearAlgebra(_) => "linear-algebra",
            Error::Calibration(_) => "calibration",
            Error::InsufficientDraws(_) => "insufficient-draws",
            Error::UndefinedMetric(_) => "undefined-metric",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }

    /// Process exit code used by the CLI; nonzero codes identify the category.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Schema(_) => 3,
            Error::Data(_) => 4,
            Error::Parse { .. } => 5,
            Error::ScaleDomain(_) => 6,
            Error::LinearAlgebra(_) => 7,
            Error::Calibration(_) => 8,
            Error::InsufficientDraws(_) => 9,
            Error::UndefinedMetric(_) => 10,
            Error::Io(_) | Error::Csv(_) => 11,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
