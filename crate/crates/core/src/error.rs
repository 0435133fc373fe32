use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the elicitation toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate slope: m11 + m00 = {sum:e} is too close to zero")]
    DegenerateSlope { sum: f64 },

    #[error("slope (0, 0) has no direction")]
    ZeroSlope,

    #[error("angle {theta} lies outside [0, pi/2] and [pi, 3pi/2]")]
    OutOfRange { theta: f64 },

    #[error("integration did not reach tolerance {tolerance:e} within depth {max_depth}")]
    IntegrationFailure { tolerance: f64, max_depth: usize },

    #[error("metric denominator {value:e} vanishes at ({tp}, {tn})")]
    ZeroDenominator { value: f64, tp: f64, tn: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular system: Q' = {q:e}")]
    SingularSystem { q: f64 },

    #[error("q0 vanished while the hyperplane offset {offset:e} did not")]
    ZeroQ0 { offset: f64 },

    #[error("no grid candidate produced a finite ratio spread")]
    NoValidPoints,

    #[error("search exceeded {limit} iterations")]
    IterationOverflow { limit: usize },

    #[error("no query is pending")]
    NoPendingQuery,

    #[error("session is closed")]
    SessionClosed,

    #[error("answer for query {got} does not match pending query {pending}")]
    DuplicateAnswer { pending: usize, got: usize },

    #[error("row {row}, column `{column}`: cannot parse {value:?} as a number")]
    ParseError {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row}: label {value:?} is not binary")]
    NonBinaryLabel { row: usize, value: String },

    #[error("label column `{0}` not found in header")]
    MissingLabelColumn(String),

    #[error("degenerate split: {0}")]
    DegenerateSplit(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
