//! CSV ingestion, smoothing, windowing, feature extraction and splitting.

mod features;
mod load;
mod preprocess;
mod split;

pub use features::{extract_features, feature_names, fit_stats, FeatureStats, FEATURES_PER_CHANNEL};
pub use load::{load_csv, load_csv_reader, parse_key_values, Channel, Recording, Schema};
pub use preprocess::{moving_average, segment, LabelPolicy, RawWindow, Segmentation};
pub use split::{split, SplitStrategy};

use std::collections::BTreeSet;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("line {line}, column {column:?}: cannot use {value:?} as a sample")]
    Parse { line: u64, column: String, value: String },
    #[error("input is empty")]
    EmptyInput,
    #[error("unknown subject {0:?}")]
    UnknownSubject(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// One labelled feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: String,
    pub subject: String,
}

/// Feature vectors in temporal order per subject.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WindowedDataset {
    pub samples: Vec<Sample>,
    pub feature_names: Vec<String>,
}

impl WindowedDataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn arity(&self) -> usize {
        self.feature_names.len()
    }

    /// Distinct labels, sorted.
    pub fn classes(&self) -> Vec<String> {
        self.samples
            .iter()
            .map(|s| s.label.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// Subjects in order of first appearance.
    pub fn subjects(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for s in &self.samples {
            if !out.contains(&s.subject) {
                out.push(s.subject.clone());
            }
        }
        out
    }

    pub(crate) fn subset(&self, indices: &[usize]) -> WindowedDataset {
        WindowedDataset {
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
            feature_names: self.feature_names.clone(),
        }
    }
}

/// Windowing and smoothing settings shared by every recording.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    /// Moving-average length; 1 disables smoothing.
    pub smooth: usize,
    pub window: usize,
    pub stride: usize,
    pub policy: LabelPolicy,
}

/// Smooths, segments and featurizes every recording, keeping input order.
pub fn build_dataset(recordings: &[Recording], cfg: &PipelineConfig) -> Result<WindowedDataset, DataError> {
    let first = recordings.first().ok_or(DataError::EmptyInput)?;
    let names: Vec<String> = first.channels.iter().map(|c| c.name.clone()).collect();
    let mut samples = Vec::new();
    for rec in recordings {
        let rec_names: Vec<&str> = rec.channels.iter().map(|c| c.name.as_str()).collect();
        if rec_names != names.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(DataError::Schema(format!(
                "recording {:?} has channels {rec_names:?}, expected {names:?}",
                rec.subject_id
            )));
        }
        let smoothed = rec.smoothed(cfg.smooth)?;
        let seg = segment(&smoothed, cfg.window, cfg.stride, cfg.policy)?;
        for w in seg.windows {
            samples.push(Sample {
                features: extract_features(&w.channels)?,
                label: w.label,
                subject: w.subject,
            });
        }
    }
    Ok(WindowedDataset {
        samples,
        feature_names: feature_names(&names),
    })
}
