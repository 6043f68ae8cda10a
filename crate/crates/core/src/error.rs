use std::path::PathBuf;

use thiserror::Error;

use crate::expfam::Family;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {family} parameter `{field}` = {value}")]
    InvalidParameter {
        family: Family,
        field: &'static str,
        value: f64,
    },

    #[error("{family} expects {expected} parameters, got {got}")]
    ParameterCount {
        family: Family,
        expected: usize,
        got: usize,
    },

    #[error("x = {x} is outside the support of {family}")]
    OutOfSupport { family: Family, x: f64 },

    #[error("{function} is only defined for x > 0, got {x}")]
    SpecialDomain { function: &'static str, x: f64 },

    #[error("degenerate column: {statistic} = {value}")]
    DegenerateColumn { statistic: &'static str, value: f64 },

    #[error("scale factor must be positive and finite, got {0}")]
    InvalidScale(f64),

    #[error("{family} does not support {operation}")]
    UnsupportedFamily {
        family: Family,
        operation: &'static str,
    },

    #[error("finite-difference step underflow for {family} near the natural-domain boundary")]
    StepUnderflow { family: Family },

    #[error("target smoothness {l_star} is not reachable: it must exceed L1 = {l1}")]
    InfeasibleTarget { l_star: f64, l1: f64 },

    #[error("no root bracket for {family} at target smoothness {l_star}")]
    NoRoot { family: Family, l_star: f64 },

    #[error("category code {value} is out of range for K = {k}")]
    InvalidCategory { value: f64, k: usize },

    #[error("expected a non-negative integer count, got {value}")]
    InvalidCount { value: f64 },

    #[error("gradient ascent diverged on column `{column}` at iteration {iteration}")]
    Divergence { column: String, iteration: usize },

    #[error("column `{column}` has zero initial log-likelihood; cannot normalize improvements")]
    DegenerateNormalization { column: String },

    #[error("column `{column}` has a constant ground truth; range normalization undefined")]
    DegenerateRange { column: String },

    #[error("parse error at row {row}, column `{column}`: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("metadata mismatch: no entry for column `{column}`")]
    MetadataMismatch { column: String },

    #[error("column `{column}` is discrete and cannot be Lipschitz-standardized without a trick (use a trick or allow unscaled discrete columns)")]
    UnscaledDiscrete { column: String },

    #[error("{0}")]
    Invalid(String),

    #[error("column `{column}`: {source}")]
    Column {
        column: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn in_column(self, column: impl Into<String>) -> Self {
        match self {
            already @ Error::Column { .. } => already,
            other => Error::Column {
                column: column.into(),
                source: Box::new(other),
            },
        }
    }

    /// Innermost error, skipping column context.
    pub fn root(&self) -> &Error {
        match self {
            Error::Column { source, .. } => source.root(),
            other => other,
        }
    }

    /// Numeric failures (solver, fitting, finite differences) as opposed to
    /// malformed input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self.root(),
            Error::SpecialDomain { .. }
                | Error::StepUnderflow { .. }
                | Error::InfeasibleTarget { .. }
                | Error::NoRoot { .. }
                | Error::Divergence { .. }
                | Error::DegenerateNormalization { .. }
        )
    }
}
