//! Instance-based adaptive template reconstruction (I-ATR).
//!
//! An instance-based classifier for windowed time-series features (built for
//! EEG biometrics, usable for any per-class instance data). Training
//! instances are reshaped element-wise in two phases:
//!
//! 1. **Between-class separation** ([`phase1`]): per class and feature
//!    dimension, the elements farthest (on average) from the other classes
//!    are retained, forming intermediate templates.
//! 2. **Query-coupled matching** ([`phase2`]): per candidate class, the
//!    intermediate templates and the query vectors are reconstructed
//!    together around their closest boundary; vector-wise Euclidean matching
//!    plus majority voting yields the decision.
//!
//! The crate also ships everything needed to run and evaluate the classifier
//! end to end: wavelet-packet variance features ([`features`]), EDF/CSV
//! signal ingestion ([`ingest`]), identification/verification metrics and
//! protocols ([`eval`]), a deterministic synthetic dataset generator
//! ([`synth`]), template-store persistence ([`store`]), and brute-force
//! reference implementations for self-checking ([`validation`]).

pub mod data;
pub mod error;
pub mod eval;
pub mod features;
pub mod ingest;
pub mod phase1;
pub mod phase2;
pub mod store;
pub mod synth;
pub mod validation;

pub use data::{QuerySet, TrainingSet};
pub use error::IatrError;
pub use phase1::{
    default_retention, elementwise_mean_distance, phase1_reconstruct, retention_from_percent,
    IntermediateTemplateSet,
};
pub use phase2::{
    classify, majority_vote, phase2_reconstruct, verification_score, ClassificationResult,
    Phase2Pair,
};
