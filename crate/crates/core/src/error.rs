use std::io;

use thiserror::Error;

use crate::schedule::Violation;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vector must have at least one coordinate")]
    EmptyVector,

    #[error("non-finite coordinate at index {index}")]
    NonFinite { index: usize },

    #[error("invalid constraint set: {0}")]
    InvalidConstraint(String),

    #[error("invalid step range [{lo}, {hi}]: need 0 < lo <= hi < inf")]
    InvalidStepRange { lo: f64, hi: f64 },

    #[error("fixed step requires lo == hi, got [{lo}, {hi}]")]
    NotFixedRange { lo: f64, hi: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("problem needs at least one component")]
    NoComponents,

    #[error("inadmissible step schedule: {}", join_violations(.0))]
    InadmissibleSchedule(Vec<Violation>),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
