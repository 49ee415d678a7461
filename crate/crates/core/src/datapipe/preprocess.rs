use std::collections::BTreeMap;

use super::{DataError, Recording};

/// Centered moving average; windows are truncated at the edges.
///
/// For even `window_len` the extra sample is taken on the right.
pub fn moving_average(signal: &[f64], window_len: usize) -> Result<Vec<f64>, DataError> {
    if window_len == 0 {
        return Err(DataError::InvalidArgument(
            "moving-average window must be at least 1".into(),
        ));
    }
    if window_len == 1 {
        return Ok(signal.to_vec());
    }
    let left = (window_len - 1) / 2;
    let right = window_len / 2;
    let mut prefix = Vec::with_capacity(signal.len() + 1);
    prefix.push(0.0);
    for &x in signal {
        prefix.push(prefix.last().copied().unwrap_or(0.0) + x);
    }
    Ok((0..signal.len())
        .map(|i| {
            let lo = i.saturating_sub(left);
            let hi = (i + right + 1).min(signal.len());
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelPolicy {
    /// Most frequent label; ties go to the smallest label.
    #[default]
    Majority,
    LastSample,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawWindow {
    pub subject: String,
    pub label: String,
    pub start: usize,
    /// One slice per channel, in recording channel order.
    pub channels: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    pub windows: Vec<RawWindow>,
    /// Set when the recording is shorter than one window.
    pub too_short: bool,
}

fn majority(labels: &[String]) -> String {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for l in labels {
        *counts.entry(l).or_default() += 1;
    }
    let mut best = ("", 0);
    for (l, c) in counts {
        if c > best.1 {
            best = (l, c);
        }
    }
    best.0.to_string()
}

/// Sliding windows of `window_samples` every `stride` samples.
pub fn segment(
    rec: &Recording,
    window_samples: usize,
    stride: usize,
    policy: LabelPolicy,
) -> Result<Segmentation, DataError> {
    if window_samples == 0 || stride == 0 {
        return Err(DataError::InvalidArgument(
            "window and stride must be at least 1".into(),
        ));
    }
    if rec.len() < window_samples {
        return Ok(Segmentation {
            windows: Vec::new(),
            too_short: true,
        });
    }
    let count = (rec.len() - window_samples) / stride + 1;
    let windows = (0..count)
        .map(|w| {
            let start = w * stride;
            let end = start + window_samples;
            let labels = &rec.labels[start..end];
            RawWindow {
                subject: rec.subject_id.clone(),
                label: match policy {
                    LabelPolicy::Majority => majority(labels),
                    LabelPolicy::LastSample => labels[labels.len() - 1].clone(),
                },
                start,
                channels: rec.channels.iter().map(|c| c.samples[start..end].to_vec()).collect(),
            }
        })
        .collect();
    Ok(Segmentation {
        windows,
        too_short: false,
    })
}
