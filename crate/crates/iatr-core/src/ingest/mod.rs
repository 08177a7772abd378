//! Signal ingestion: EDF recordings, the PhysioNet motor movement/imagery
//! directory layout, and a plain CSV signal format for local data.

pub mod csv;
pub mod edf;
pub mod mmi;

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EdfError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed EDF header: {0}")]
    MalformedHeader(String),
    #[error("file size mismatch: expected {expected} bytes, found {actual}")]
    SizeMismatch { expected: usize, actual: usize },
    #[error("bad scaling for signal {label:?}: {reason}")]
    BadScaling { label: String, reason: String },
    #[error("missing file {0}")]
    MissingFile(PathBuf),
    #[error("channel {requested:?} not found; available: {available:?}")]
    ChannelNotFound {
        requested: String,
        available: Vec<String>,
    },
    #[error("signal csv row {row}: {message}")]
    Csv { row: usize, message: String },
}

/// One labeled 1-D signal in physical units.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSignal {
    /// Class identity (e.g. subject id).
    pub class_label: String,
    /// Recording/run/task identity within the class.
    pub task_label: String,
    pub sample_rate_hz: f64,
    pub samples: Vec<f64>,
}

/// A nonempty collection of labeled signals.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabeledSignalSet {
    pub entries: Vec<LabeledSignal>,
}

impl LabeledSignalSet {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
