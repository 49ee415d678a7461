//! Seeded generators for benchmark datasets.
//!
//! Everything here is deterministic in its seed. Feature-level generators
//! return [`WindowedDataset`]s ready for [`fit_stats`](crate::datapipe::fit_stats);
//! the raw-signal generator writes CSV that goes through the full pipeline.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::datapipe::{Sample, Schema, WindowedDataset};
use crate::hv::rng::stream_rng;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

// stream ids keep the draws of different parts independent
const CENTER_STREAM: u64 = 1;
const TRAIN_STREAM: u64 = 2;
const TEST_STREAM: u64 = 3;
const SUBJECT_STREAM: u64 = 4;

pub fn class_label(k: usize) -> String {
    format!("class{k}")
}

fn feature_names(m: usize) -> Vec<String> {
    (0..m).map(|i| format!("f{i}")).collect()
}

fn normal(sd: f64) -> Result<Normal<f64>, SynthError> {
    Normal::new(0.0, sd).map_err(|e| SynthError::InvalidArgument(format!("standard deviation {sd}: {e}")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainTest {
    pub train: WindowedDataset,
    pub test: WindowedDataset,
}

/// Isotropic Gaussian clusters, one per class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSpec {
    pub classes: usize,
    pub features: usize,
    pub train: usize,
    pub test: usize,
    /// Class centers are drawn uniformly from `[-center_range, center_range]`.
    pub center_range: f64,
    pub noise_sd: f64,
    pub seed: u64,
}

impl Default for ClusterSpec {
    fn default() -> Self {
        ClusterSpec {
            classes: 4,
            features: 7,
            train: 2000,
            test: 800,
            center_range: 1.0,
            noise_sd: 0.35,
            seed: 7,
        }
    }
}

fn draw_centers(rng: &mut ChaCha8Rng, classes: usize, features: usize, range: f64) -> Vec<Vec<f64>> {
    (0..classes)
        .map(|_| (0..features).map(|_| rng.gen_range(-range..=range)).collect())
        .collect()
}

fn draw_points(
    rng: &mut ChaCha8Rng,
    centers: &[Vec<f64>],
    count: usize,
    noise: &Normal<f64>,
    subject: &str,
) -> Vec<Sample> {
    // classes cycle so every split is balanced, then the order is shuffled
    let mut samples: Vec<Sample> = (0..count)
        .map(|i| {
            let k = i % centers.len();
            Sample {
                features: centers[k].iter().map(|c| c + noise.sample(rng)).collect(),
                label: class_label(k),
                subject: subject.to_string(),
            }
        })
        .collect();
    samples.shuffle(rng);
    samples
}

pub fn gaussian_clusters(spec: &ClusterSpec) -> Result<TrainTest, SynthError> {
    if spec.classes < 1 || spec.features < 1 || spec.train < 1 {
        return Err(SynthError::InvalidArgument(
            "need at least one class, one feature and one training sample".into(),
        ));
    }
    let noise = normal(spec.noise_sd)?;
    let centers = draw_centers(
        &mut stream_rng(spec.seed, CENTER_STREAM),
        spec.classes,
        spec.features,
        spec.center_range,
    );
    let names = feature_names(spec.features);
    let build = |stream, count| WindowedDataset {
        samples: draw_points(&mut stream_rng(spec.seed, stream), &centers, count, &noise, "synthetic"),
        feature_names: names.clone(),
    };
    Ok(TrainTest {
        train: build(TRAIN_STREAM, spec.train),
        test: build(TEST_STREAM, spec.test),
    })
}

/// Two classes; the training stream is dominated by `class0`, the test set is
/// balanced between classes.
///
/// `class0` is a mixture: most of its samples repeat a dominant pattern and a
/// `secondary_fraction` share comes from a second cluster. Plain summation lets
/// the dominant pattern swamp the rare one.
#[derive(Debug, Clone, PartialEq)]
pub struct ImbalanceSpec {
    pub features: usize,
    pub train: usize,
    pub test: usize,
    /// Share of `class0` in the training stream.
    pub majority_fraction: f64,
    /// Share of `class0` samples drawn from its second cluster.
    pub secondary_fraction: f64,
    pub center_range: f64,
    pub noise_sd: f64,
    pub seed: u64,
}

impl Default for ImbalanceSpec {
    fn default() -> Self {
        ImbalanceSpec {
            features: 7,
            train: 1000,
            test: 400,
            majority_fraction: 0.9,
            secondary_fraction: 0.2,
            center_range: 1.0,
            noise_sd: 0.3,
            seed: 11,
        }
    }
}

pub fn imbalanced_stream(spec: &ImbalanceSpec) -> Result<TrainTest, SynthError> {
    if !(0.0..1.0).contains(&spec.majority_fraction)
        || !(0.0..=1.0).contains(&spec.secondary_fraction)
        || spec.features < 1
        || spec.train < 1
    {
        return Err(SynthError::InvalidArgument(format!(
            "majority fraction {} must lie in [0, 1) with non-empty data",
            spec.majority_fraction
        )));
    }
    let noise = normal(spec.noise_sd)?;
    // centers: class0 dominant, class1, class0 secondary
    let centers = draw_centers(
        &mut stream_rng(spec.seed, CENTER_STREAM),
        3,
        spec.features,
        spec.center_range,
    );
    let sample = |rng: &mut ChaCha8Rng, k: usize| {
        let center = if k == 0 && rng.gen_bool(spec.secondary_fraction) {
            2
        } else {
            k
        };
        Sample {
            features: centers[center].iter().map(|c| c + noise.sample(rng)).collect(),
            label: class_label(k),
            subject: "synthetic".into(),
        }
    };
    let majority = (spec.majority_fraction * spec.train as f64).round() as usize;
    let mut rng = stream_rng(spec.seed, TRAIN_STREAM);
    let mut train: Vec<Sample> = (0..spec.train)
        .map(|i| sample(&mut rng, usize::from(i >= majority)))
        .collect();
    train.shuffle(&mut rng);
    let mut rng = stream_rng(spec.seed, TEST_STREAM);
    let test = (0..spec.test).map(|i| sample(&mut rng, i % 2)).collect();
    let names = feature_names(spec.features);
    Ok(TrainTest {
        train: WindowedDataset {
            samples: train,
            feature_names: names.clone(),
        },
        test: WindowedDataset {
            samples: test,
            feature_names: names,
        },
    })
}

/// Gaussian clusters shared by all subjects, shifted by a per-subject offset.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectSpec {
    pub subjects: usize,
    pub classes: usize,
    pub features: usize,
    pub windows_per_subject: usize,
    pub center_range: f64,
    pub noise_sd: f64,
    /// Standard deviation of each subject's per-feature offset.
    pub subject_bias: f64,
    pub seed: u64,
}

impl Default for SubjectSpec {
    fn default() -> Self {
        SubjectSpec {
            subjects: 4,
            classes: 4,
            features: 7,
            windows_per_subject: 200,
            center_range: 1.0,
            noise_sd: 0.3,
            subject_bias: 0.8,
            seed: 5,
        }
    }
}

pub fn subject_name(s: usize) -> String {
    format!("subject{s}")
}

/// Feature-level multi-subject dataset; each subject's windows cycle through
/// the classes so both temporal halves see every class.
pub fn multi_subject(spec: &SubjectSpec) -> Result<WindowedDataset, SynthError> {
    if spec.subjects < 1 || spec.classes < 1 || spec.features < 1 {
        return Err(SynthError::InvalidArgument(
            "subjects, classes and features must be positive".into(),
        ));
    }
    let noise = normal(spec.noise_sd)?;
    let bias = normal(spec.subject_bias)?;
    let centers = draw_centers(
        &mut stream_rng(spec.seed, CENTER_STREAM),
        spec.classes,
        spec.features,
        spec.center_range,
    );
    let mut brng = stream_rng(spec.seed, SUBJECT_STREAM);
    let mut rng = stream_rng(spec.seed, TRAIN_STREAM);
    let mut samples = Vec::with_capacity(spec.subjects * spec.windows_per_subject);
    for s in 0..spec.subjects {
        let offset: Vec<f64> = (0..spec.features).map(|_| bias.sample(&mut brng)).collect();
        for w in 0..spec.windows_per_subject {
            let k = w % spec.classes;
            samples.push(Sample {
                features: centers[k]
                    .iter()
                    .zip(&offset)
                    .map(|(c, o)| c + o + noise.sample(&mut rng))
                    .collect(),
                label: class_label(k),
                subject: subject_name(s),
            });
        }
    }
    Ok(WindowedDataset {
        samples,
        feature_names: feature_names(spec.features),
    })
}

/// Raw multi-channel recordings: each class is a sinusoid with its own
/// offset, amplitude and frequency per channel; each subject adds a constant
/// per-channel offset.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSpec {
    pub subjects: usize,
    pub classes: usize,
    pub channels: usize,
    /// Activity bouts per class and subject.
    pub bouts_per_class: usize,
    pub bout_samples: usize,
    pub sample_rate_hz: f64,
    pub noise_sd: f64,
    pub subject_bias: f64,
    pub seed: u64,
}

impl Default for SignalSpec {
    fn default() -> Self {
        SignalSpec {
            subjects: 4,
            classes: 4,
            channels: 3,
            bouts_per_class: 4,
            bout_samples: 200,
            sample_rate_hz: 50.0,
            noise_sd: 0.5,
            subject_bias: 0.8,
            seed: 3,
        }
    }
}

impl SignalSpec {
    pub fn channel_names(&self) -> Vec<String> {
        (0..self.channels).map(|c| format!("ch{c}")).collect()
    }

    /// Schema describing the CSV written by [`write_signal_csv`].
    pub fn schema(&self) -> Schema {
        Schema {
            channels: self.channel_names(),
            label: Some("label".into()),
            subject: Some("subject".into()),
            delimiter: b',',
            sample_rate_hz: self.sample_rate_hz,
        }
    }
}

struct ClassShape {
    offset: Vec<f64>,
    amplitude: Vec<f64>,
    freq_hz: Vec<f64>,
}

/// Writes `subject,<channels...>,label` rows, subject by subject.
///
/// Bouts come in rounds that visit every class once in a shuffled order.
pub fn write_signal_csv<W: Write>(spec: &SignalSpec, out: W) -> Result<usize, SynthError> {
    if spec.subjects < 1 || spec.classes < 1 || spec.channels < 1 || spec.bout_samples < 1 {
        return Err(SynthError::InvalidArgument(
            "subjects, classes, channels and bout length must be positive".into(),
        ));
    }
    if !(spec.sample_rate_hz.is_finite() && spec.sample_rate_hz > 0.0) {
        return Err(SynthError::InvalidArgument(format!(
            "sample rate {}",
            spec.sample_rate_hz
        )));
    }
    let noise = normal(spec.noise_sd)?;
    let bias = normal(spec.subject_bias)?;
    let mut crng = stream_rng(spec.seed, CENTER_STREAM);
    let shapes: Vec<ClassShape> = (0..spec.classes)
        .map(|_| ClassShape {
            offset: (0..spec.channels).map(|_| crng.gen_range(-1.0..=1.0)).collect(),
            amplitude: (0..spec.channels).map(|_| crng.gen_range(0.2..=1.5)).collect(),
            freq_hz: (0..spec.channels).map(|_| crng.gen_range(0.5..=3.0)).collect(),
        })
        .collect();

    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["subject".to_string()];
    header.extend(spec.channel_names());
    header.push("label".into());
    w.write_record(&header)?;

    let mut brng = stream_rng(spec.seed, SUBJECT_STREAM);
    let mut rng = stream_rng(spec.seed, TRAIN_STREAM);
    let mut rows = 0;
    for s in 0..spec.subjects {
        let subject = subject_name(s);
        let offset: Vec<f64> = (0..spec.channels).map(|_| bias.sample(&mut brng)).collect();
        let mut order: Vec<usize> = (0..spec.classes).collect();
        let mut t = 0usize;
        for _ in 0..spec.bouts_per_class {
            order.shuffle(&mut rng);
            for &k in &order {
                let shape = &shapes[k];
                let label = class_label(k);
                for _ in 0..spec.bout_samples {
                    let time = t as f64 / spec.sample_rate_hz;
                    let mut record = Vec::with_capacity(spec.channels + 2);
                    record.push(subject.clone());
                    for (c, subject_offset) in offset.iter().enumerate() {
                        let phase = std::f64::consts::TAU * shape.freq_hz[c] * time;
                        let v = shape.offset[c]
                            + subject_offset
                            + shape.amplitude[c] * phase.sin()
                            + noise.sample(&mut rng);
                        record.push(format!("{v:.6}"));
                    }
                    record.push(label.clone());
                    w.write_record(&record)?;
                    t += 1;
                    rows += 1;
                }
            }
        }
    }
    w.flush()?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datapipe::load_csv_reader;

    #[test]
    fn cluster_benchmark_shape() {
        let data = gaussian_clusters(&ClusterSpec::default()).unwrap();
        assert_eq!(data.train.len(), 2000);
        assert_eq!(data.test.len(), 800);
        assert_eq!(data.train.arity(), 7);
        assert_eq!(data.train.classes(), vec!["class0", "class1", "class2", "class3"]);
        let count = |k: &str| data.test.samples.iter().filter(|s| s.label == k).count();
        assert_eq!(count("class2"), 200);
    }

    #[test]
    fn generators_are_seeded() {
        let spec = ClusterSpec {
            train: 50,
            test: 10,
            ..ClusterSpec::default()
        };
        assert_eq!(gaussian_clusters(&spec).unwrap(), gaussian_clusters(&spec).unwrap());
        let other = gaussian_clusters(&ClusterSpec { seed: 8, ..spec }).unwrap();
        assert_ne!(
            other,
            gaussian_clusters(&ClusterSpec {
                train: 50,
                test: 10,
                ..ClusterSpec::default()
            })
            .unwrap()
        );
    }

    #[test]
    fn imbalance_ratio() {
        let data = imbalanced_stream(&ImbalanceSpec::default()).unwrap();
        let majority = data.train.samples.iter().filter(|s| s.label == "class0").count();
        assert_eq!(majority, 900);
        let test_majority = data.test.samples.iter().filter(|s| s.label == "class0").count();
        assert_eq!(test_majority, 200);
        assert!(imbalanced_stream(&ImbalanceSpec {
            majority_fraction: 1.0,
            ..ImbalanceSpec::default()
        })
        .is_err());
    }

    #[test]
    fn subjects_are_shifted() {
        let spec = SubjectSpec::default();
        let ds = multi_subject(&spec).unwrap();
        assert_eq!(ds.len(), spec.subjects * spec.windows_per_subject);
        assert_eq!(ds.subjects().len(), spec.subjects);
        let mean0 = |subject: &str| {
            let xs: Vec<f64> = ds
                .samples
                .iter()
                .filter(|s| s.subject == subject && s.label == "class0")
                .map(|s| s.features[0])
                .collect();
            xs.iter().sum::<f64>() / xs.len() as f64
        };
        assert!((mean0("subject0") - mean0("subject1")).abs() > 1e-3);
    }

    #[test]
    fn signal_csv_round_trips_through_loader() {
        let spec = SignalSpec {
            subjects: 2,
            bout_samples: 20,
            bouts_per_class: 2,
            ..SignalSpec::default()
        };
        let mut buf = Vec::new();
        let rows = write_signal_csv(&spec, &mut buf).unwrap();
        assert_eq!(rows, 2 * 4 * 2 * 20);
        let recs = load_csv_reader(buf.as_slice(), &spec.schema(), "x").unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].len(), rows / 2);
        assert_eq!(recs[1].subject_id, "subject1");
    }
}
