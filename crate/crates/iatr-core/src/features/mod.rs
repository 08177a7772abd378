//! Signal-to-feature pipeline: overlapping epochs, wavelet packet
//! decomposition, band variance features, and the feature CSV interchange
//! format shared by the extractor, the synthetic generator, and the
//! evaluation harness.

pub mod wavelet;

use std::fs;
use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::data::{QuerySet, TrainingSet};
use crate::error::IatrError;
pub use wavelet::{band_variance_features, wpd_decompose, Wavelet, WpdConfig, WpdLeaves};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("signal of {len} samples is shorter than one {window}-sample window")]
    SignalTooShort { len: usize, window: usize },
    #[error("window of {len} samples is too short; need at least {required}")]
    WindowTooShort { len: usize, required: usize },
    #[error("bad feature config: {0}")]
    BadConfig(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("feature csv row {row}: {message}")]
    Csv { row: usize, message: String },
    #[error(transparent)]
    Data(#[from] IatrError),
}

/// Epoching configuration: fixed-length windows with fractional overlap.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochConfig {
    pub window_seconds: f64,
    /// Fraction of the window shared with its successor, in `[0, 1)`.
    pub overlap_fraction: f64,
    pub sample_rate_hz: f64,
}

impl EpochConfig {
    pub fn new(sample_rate_hz: f64) -> Self {
        Self {
            window_seconds: 4.0,
            overlap_fraction: 0.5,
            sample_rate_hz,
        }
    }

    pub fn validate(&self) -> Result<(), FeatureError> {
        if !self.sample_rate_hz.is_finite() || self.sample_rate_hz <= 0.0 {
            return Err(FeatureError::BadConfig(format!(
                "sample rate must be positive, got {}",
                self.sample_rate_hz
            )));
        }
        if !self.window_seconds.is_finite() || self.window_samples() < 2 {
            return Err(FeatureError::BadConfig(format!(
                "window of {}s at {} Hz is shorter than 2 samples",
                self.window_seconds, self.sample_rate_hz
            )));
        }
        if !self.overlap_fraction.is_finite() || !(0.0..1.0).contains(&self.overlap_fraction) {
            return Err(FeatureError::BadConfig(format!(
                "overlap fraction must lie in [0, 1), got {}",
                self.overlap_fraction
            )));
        }
        Ok(())
    }

    /// Window length in samples: `round(window_seconds * fs)`.
    pub fn window_samples(&self) -> usize {
        (self.window_seconds * self.sample_rate_hz).round() as usize
    }

    /// Hop in samples: `round(window * (1 - overlap))`, at least 1.
    pub fn hop_samples(&self) -> usize {
        let w = self.window_samples() as f64;
        ((w * (1.0 - self.overlap_fraction)).round() as usize).max(1)
    }
}

/// Slices a signal into overlapping windows (verbatim copies).
pub fn epoch_signal(samples: &[f64], cfg: &EpochConfig) -> Result<Vec<Vec<f64>>, FeatureError> {
    cfg.validate()?;
    let window = cfg.window_samples();
    let hop = cfg.hop_samples();
    if samples.len() < window {
        return Err(FeatureError::SignalTooShort {
            len: samples.len(),
            window,
        });
    }
    let count = (samples.len() - window) / hop + 1;
    Ok((0..count)
        .map(|i| samples[i * hop..i * hop + window].to_vec())
        .collect())
}

/// One labeled feature vector with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub class_id: String,
    pub recording_id: String,
    pub window_index: usize,
    pub values: Vec<f64>,
}

/// A labeled feature collection, the unit of interchange between pipeline
/// stages. Row order is meaningful (temporal order within a recording).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub dim: usize,
    pub rows: Vec<FeatureRow>,
}

impl FeatureTable {
    pub fn new(dim: usize) -> Self {
        Self { dim, rows: Vec::new() }
    }

    pub fn push(&mut self, row: FeatureRow) -> Result<(), FeatureError> {
        if row.values.len() != self.dim {
            return Err(FeatureError::BadConfig(format!(
                "feature vector of dim {} in a table of dim {}",
                row.values.len(),
                self.dim
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    /// Class labels in first-appearance order.
    pub fn class_labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = Vec::new();
        for row in &self.rows {
            if !labels.contains(&row.class_id) {
                labels.push(row.class_id.clone());
            }
        }
        labels
    }

    /// Groups rows into the per-class instance tensor, preserving row order
    /// within each class.
    pub fn to_training_set(&self) -> Result<TrainingSet, IatrError> {
        let labels = self.class_labels();
        let mut classes: Vec<Vec<Vec<f64>>> = vec![Vec::new(); labels.len()];
        for row in &self.rows {
            let class = labels.iter().position(|l| *l == row.class_id).unwrap();
            classes[class].push(row.values.clone());
        }
        TrainingSet::new(labels, classes)
    }

    /// Groups rows into per-recording query sets:
    /// `(class_id, recording_id, query)`.
    pub fn to_recording_queries(&self) -> Result<Vec<(String, String, QuerySet)>, IatrError> {
        let mut keys: Vec<(String, String)> = Vec::new();
        let mut groups: Vec<Vec<Vec<f64>>> = Vec::new();
        for row in &self.rows {
            let key = (row.class_id.clone(), row.recording_id.clone());
            match keys.iter().position(|k| *k == key) {
                Some(i) => groups[i].push(row.values.clone()),
                None => {
                    keys.push(key);
                    groups.push(vec![row.values.clone()]);
                }
            }
        }
        keys.into_iter()
            .zip(groups)
            .map(|((class, rec), vectors)| Ok((class, rec, QuerySet::new(vectors)?)))
            .collect()
    }
}

fn header(dim: usize) -> String {
    let mut h = String::from("class_id,recording_id,window_index");
    for i in 1..=dim {
        h.push_str(&format!(",f{i}"));
    }
    h
}

/// Writes the feature CSV format:
/// `class_id,recording_id,window_index,f1..fB`.
pub fn write_features_csv(table: &FeatureTable, path: &Path) -> Result<(), FeatureError> {
    let mut out = Vec::new();
    writeln!(out, "{}", header(table.dim))?;
    for row in &table.rows {
        for field in [&row.class_id, &row.recording_id] {
            if field.contains(',') || field.contains('\n') {
                return Err(FeatureError::BadConfig(format!(
                    "field {field:?} cannot be written to CSV"
                )));
            }
        }
        write!(out, "{},{},{}", row.class_id, row.recording_id, row.window_index)?;
        for v in &row.values {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn features_csv_to_string(table: &FeatureTable) -> String {
    let mut out = header(table.dim);
    out.push('\n');
    for row in &table.rows {
        out.push_str(&format!(
            "{},{},{}",
            row.class_id, row.recording_id, row.window_index
        ));
        for v in &row.values {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

pub fn read_features_csv(path: &Path) -> Result<FeatureTable, FeatureError> {
    parse_features_csv(&fs::read_to_string(path)?)
}

pub fn parse_features_csv(text: &str) -> Result<FeatureTable, FeatureError> {
    let mut lines = text.lines().enumerate();
    let (_, head) = lines.next().ok_or(FeatureError::Csv {
        row: 1,
        message: "empty file".into(),
    })?;
    let head_fields: Vec<&str> = head.trim().split(',').collect();
    if head_fields.len() < 4
        || head_fields[..3] != ["class_id", "recording_id", "window_index"]
    {
        return Err(FeatureError::Csv {
            row: 1,
            message: format!("bad header {head:?}"),
        });
    }
    for (i, f) in head_fields[3..].iter().enumerate() {
        if *f != format!("f{}", i + 1) {
            return Err(FeatureError::Csv {
                row: 1,
                message: format!("bad feature column name {f:?}"),
            });
        }
    }
    let dim = head_fields.len() - 3;
    let mut table = FeatureTable::new(dim);
    for (idx, line) in lines {
        let row_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 3 {
            return Err(FeatureError::Csv {
                row: row_no,
                message: format!("expected {} fields, got {}", dim + 3, fields.len()),
            });
        }
        let window_index = fields[2].trim().parse::<usize>().map_err(|e| FeatureError::Csv {
            row: row_no,
            message: format!("bad window_index: {e}"),
        })?;
        let mut values = Vec::with_capacity(dim);
        for f in &fields[3..] {
            let v = f.trim().parse::<f64>().map_err(|e| FeatureError::Csv {
                row: row_no,
                message: format!("bad feature value {f:?}: {e}"),
            })?;
            values.push(v);
        }
        table
            .push(FeatureRow {
                class_id: fields[0].to_string(),
                recording_id: fields[1].to_string(),
                window_index,
                values,
            })
            .map_err(|e| FeatureError::Csv {
                row: row_no,
                message: e.to_string(),
            })?;
    }
    if table.rows.is_empty() {
        return Err(FeatureError::Csv {
            row: 1,
            message: "no feature rows".into(),
        });
    }
    Ok(table)
}

/// Full pipeline for one recording: epochs -> WPD -> band variances.
pub fn extract_features(
    samples: &[f64],
    class_id: &str,
    recording_id: &str,
    epoch_cfg: &EpochConfig,
    wpd_cfg: &WpdConfig,
) -> Result<Vec<FeatureRow>, FeatureError> {
    let windows = epoch_signal(samples, epoch_cfg)?;
    windows
        .iter()
        .enumerate()
        .map(|(index, window)| {
            let leaves = wpd_decompose(window, epoch_cfg.sample_rate_hz, wpd_cfg)?;
            let values = band_variance_features(&leaves, wpd_cfg)?;
            Ok(FeatureRow {
                class_id: class_id.to_string(),
                recording_id: recording_id.to_string(),
                window_index: index,
                values,
            })
        })
        .collect()
}

/// Renders a training set as a feature table (one synthetic "recording" per
/// class). Lets synthetic data flow through the same CSV paths as real data.
pub fn table_from_training_set(train: &TrainingSet, recording_id: &str) -> FeatureTable {
    let mut table = FeatureTable::new(train.dim());
    for (label, instances) in train.iter_classes() {
        for (i, values) in instances.iter().enumerate() {
            table
                .push(FeatureRow {
                    class_id: label.to_string(),
                    recording_id: recording_id.to_string(),
                    window_index: i,
                    values: values.clone(),
                })
                .expect("dims agree by construction");
        }
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epoch_counts_match_the_formula() {
        // 19200 samples at 160 Hz, 4 s windows, 50% overlap: W=640, H=320,
        // (19200-640)/320 + 1 = 59 windows.
        let cfg = EpochConfig::new(160.0);
        assert_eq!(cfg.window_samples(), 640);
        assert_eq!(cfg.hop_samples(), 320);
        let signal = vec![0.25; 19200];
        let windows = epoch_signal(&signal, &cfg).unwrap();
        assert_eq!(windows.len(), 59);
        assert!(windows.iter().all(|w| w.len() == 640));
    }

    #[test]
    fn exact_length_gives_one_window() {
        let cfg = EpochConfig::new(160.0);
        let signal: Vec<f64> = (0..640).map(|i| i as f64).collect();
        let windows = epoch_signal(&signal, &cfg).unwrap();
        assert_eq!(windows.len(), 1);
        assert_eq!(windows[0], signal);
    }

    #[test]
    fn short_signal_is_rejected() {
        let cfg = EpochConfig::new(160.0);
        let err = epoch_signal(&vec![0.0; 639], &cfg).unwrap_err();
        assert!(matches!(
            err,
            FeatureError::SignalTooShort { len: 639, window: 640 }
        ));
    }

    #[test]
    fn non_overlapping_windows_cover_a_prefix() {
        let cfg = EpochConfig {
            window_seconds: 0.05,
            overlap_fraction: 0.0,
            sample_rate_hz: 100.0,
        };
        let signal: Vec<f64> = (0..23).map(|i| i as f64).collect();
        let windows = epoch_signal(&signal, &cfg).unwrap();
        let flat: Vec<f64> = windows.into_iter().flatten().collect();
        assert_eq!(flat.as_slice(), &signal[..flat.len()]);
        assert_eq!(flat.len(), 20);
    }

    #[test]
    fn overlap_can_express_the_120_window_hop() {
        // hop 155 on 19200 samples yields 120 windows.
        let cfg = EpochConfig {
            window_seconds: 4.0,
            overlap_fraction: 1.0 - 155.0 / 640.0,
            sample_rate_hz: 160.0,
        };
        assert_eq!(cfg.hop_samples(), 155);
        let windows = epoch_signal(&vec![0.0; 19200], &cfg).unwrap();
        assert_eq!(windows.len(), 120);
    }

    #[test]
    fn feature_csv_round_trips() {
        let mut table = FeatureTable::new(3);
        for (class, rec, idx, v) in [
            ("s1", "r1", 0, [0.5, -1.25, 3e-9]),
            ("s1", "r1", 1, [1.0, 2.0, 3.0]),
            ("s2", "r1", 0, [0.1, 0.2, 0.30000000000000004]),
        ] {
            table
                .push(FeatureRow {
                    class_id: class.into(),
                    recording_id: rec.into(),
                    window_index: idx,
                    values: v.to_vec(),
                })
                .unwrap();
        }
        let text = features_csv_to_string(&table);
        let parsed = parse_features_csv(&text).unwrap();
        assert_eq!(parsed, table);
    }

    #[test]
    fn feature_csv_errors_name_the_row() {
        let text = "class_id,recording_id,window_index,f1\na,r,0,1.0\nb,r,zero,2.0\n";
        match parse_features_csv(text).unwrap_err() {
            FeatureError::Csv { row, .. } => assert_eq!(row, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_features_csv("bogus\n").is_err());
    }

    #[test]
    fn training_set_groups_by_class_in_first_appearance_order() {
        let mut table = FeatureTable::new(1);
        for (class, v) in [("b", 1.0), ("a", 2.0), ("b", 3.0)] {
            table
                .push(FeatureRow {
                    class_id: class.into(),
                    recording_id: "r".into(),
                    window_index: 0,
                    values: vec![v],
                })
                .unwrap();
        }
        let train = table.to_training_set().unwrap();
        assert_eq!(train.labels(), &["b".to_string(), "a".to_string()]);
        assert_eq!(train.instances(0), &[vec![1.0], vec![3.0]]);
        assert_eq!(train.instances(1), &[vec![2.0]]);
    }

    #[test]
    fn end_to_end_extraction_yields_six_dims_at_160hz() {
        let samples: Vec<f64> = (0..19200)
            .map(|t| (2.0 * std::f64::consts::PI * 25.0 * t as f64 / 160.0).sin())
            .collect();
        let rows = extract_features(
            &samples,
            "s1",
            "r1",
            &EpochConfig::new(160.0),
            &WpdConfig::default(),
        )
        .unwrap();
        assert_eq!(rows.len(), 59);
        assert!(rows.iter().all(|r| r.values.len() == 6));
        assert!(rows
            .iter()
            .all(|r| r.values.iter().all(|v| v.is_finite() && *v >= 0.0)));
    }
}
