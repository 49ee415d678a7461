use rand::seq::{index, SliceRandom};

use super::{DataError, WindowedDataset};
use crate::hv::rng::stream_rng;

#[derive(Debug, Clone, PartialEq)]
pub enum SplitStrategy {
    /// Uniform random split; `train_fraction` of the windows go to training.
    Random { seed: u64, train_fraction: f64 },
    /// First half of each subject's windows trains, the rest tests.
    SubjectHalf,
    /// Train on every other subject, test on a seeded random half of `subject`.
    LeaveOneSubjectOut { subject: String, seed: u64 },
}

/// Splits into disjoint `(train, test)` sets; both keep dataset order.
///
/// Halves round toward the training side for subject halves and toward the
/// test side for the held-out subject, so odd counts never leave a side empty
/// when the subject has a single window.
pub fn split(
    dataset: &WindowedDataset,
    strategy: &SplitStrategy,
) -> Result<(WindowedDataset, WindowedDataset), DataError> {
    let n = dataset.len();
    let (train, test): (Vec<usize>, Vec<usize>) = match strategy {
        SplitStrategy::Random { seed, train_fraction } => {
            if !(0.0..=1.0).contains(train_fraction) {
                return Err(DataError::InvalidArgument(format!(
                    "train fraction {train_fraction} outside [0, 1]"
                )));
            }
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut stream_rng(*seed, 0));
            let cut = (train_fraction * n as f64).round() as usize;
            let mut train = order[..cut].to_vec();
            let mut test = order[cut..].to_vec();
            train.sort_unstable();
            test.sort_unstable();
            (train, test)
        }
        SplitStrategy::SubjectHalf => {
            let mut train = Vec::new();
            let mut test = Vec::new();
            for subject in dataset.subjects() {
                let idx: Vec<usize> = (0..n).filter(|&i| dataset.samples[i].subject == subject).collect();
                let cut = idx.len() - idx.len() / 2;
                train.extend_from_slice(&idx[..cut]);
                test.extend_from_slice(&idx[cut..]);
            }
            train.sort_unstable();
            test.sort_unstable();
            (train, test)
        }
        SplitStrategy::LeaveOneSubjectOut { subject, seed } => {
            let subjects = dataset.subjects();
            if !subjects.contains(subject) {
                return Err(DataError::UnknownSubject(subject.clone()));
            }
            if subjects.len() < 2 {
                return Err(DataError::InvalidArgument(
                    "leave-one-subject-out needs at least two subjects".into(),
                ));
            }
            let held: Vec<usize> = (0..n).filter(|&i| dataset.samples[i].subject == *subject).collect();
            let train = (0..n).filter(|&i| dataset.samples[i].subject != *subject).collect();
            let take = held.len().div_ceil(2);
            let mut test: Vec<usize> = index::sample(&mut stream_rng(*seed, 0), held.len(), take)
                .into_iter()
                .map(|j| held[j])
                .collect();
            test.sort_unstable();
            (train, test)
        }
    };
    Ok((dataset.subset(&train), dataset.subset(&test)))
}
