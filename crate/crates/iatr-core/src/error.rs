//! Error type for the classifier core.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IatrError {
    #[error("training set has no classes")]
    EmptyTrainingSet,
    #[error("class {0} has no instances")]
    EmptyClass(String),
    #[error("query set has no vectors")]
    EmptyQuerySet,
    #[error("duplicate class label {0}")]
    DuplicateLabel(String),
    #[error("non-finite value in input data")]
    NonFiniteValue,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("phase 1 needs at least two classes, got {0}")]
    InsufficientClasses(usize),
    #[error("K = {k} out of range: every class must keep 1..={max} templates")]
    BadK { k: usize, max: usize },
    #[error("F = {f} out of range: 1..={max}")]
    BadF { f: usize, max: usize },
    #[error("S = {s} out of range: 1..={max}")]
    BadS { s: usize, max: usize },
    #[error("unknown class {0}")]
    UnknownClass(String),
    #[error("majority vote over an empty vote list")]
    EmptyVotes,
}
