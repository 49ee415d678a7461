use rand::seq::SliceRandom;

use super::{LearnError, Model};
use crate::hv::rng::stream_rng;
use crate::hv::AccumHv;

/// One adaptive pass over `stream`, in order.
pub fn train_online<'a, I>(model: &mut Model, stream: I) -> Result<(), LearnError>
where
    I: IntoIterator<Item = (&'a AccumHv, usize)>,
{
    for (h, class) in stream {
        model.online_update(h, class)?;
    }
    model.set_trained_epochs(0);
    Ok(())
}

/// Baseline single pass that adds every sample with weight 1.
pub fn train_accumulate<'a, I>(model: &mut Model, stream: I) -> Result<(), LearnError>
where
    I: IntoIterator<Item = (&'a AccumHv, usize)>,
{
    for (h, class) in stream {
        model.accumulate(h, class)?;
    }
    model.set_trained_epochs(0);
    Ok(())
}

/// One retraining sweep; returns the number of mispredicted samples.
pub fn retrain_epoch(model: &mut Model, data: &[(AccumHv, usize)]) -> Result<usize, LearnError> {
    let mut misses = 0;
    for (h, class) in data {
        if model.retrain_step(h, *class)?.is_some() {
            misses += 1;
        }
    }
    Ok(misses)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IterativeOptions {
    pub max_epochs: u32,
    /// Non-improving epochs tolerated before stopping.
    pub patience: u32,
    /// Reshuffle the presentation order each epoch when set.
    pub shuffle_seed: Option<u64>,
}

impl Default for IterativeOptions {
    fn default() -> Self {
        IterativeOptions {
            max_epochs: 20,
            patience: 3,
            shuffle_seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterativeSummary {
    pub epochs_run: u32,
    /// Mispredictions counted during each epoch.
    pub mispredictions: Vec<usize>,
    /// 1-based epoch whose end-state was kept.
    pub best_epoch: u32,
}

/// Repeats [`retrain_epoch`] and keeps the epoch-end model with the fewest
/// mispredictions.
///
/// Stops after `max_epochs`, after an epoch with no misses, or once more than
/// `patience` consecutive epochs fail to improve on the best count.
pub fn train_iterative(
    model: &mut Model,
    data: &[(AccumHv, usize)],
    opts: &IterativeOptions,
) -> Result<IterativeSummary, LearnError> {
    if opts.max_epochs < 1 {
        return Err(LearnError::InvalidArgument("max_epochs must be at least 1".into()));
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut best: Option<(usize, u32, Model)> = None;
    let mut stale = 0;
    let mut curve = Vec::new();

    for epoch in 1..=opts.max_epochs {
        if let Some(seed) = opts.shuffle_seed {
            order.shuffle(&mut stream_rng(seed, epoch as u64));
        }
        let mut misses = 0;
        for &i in &order {
            let (h, class) = &data[i];
            if model.retrain_step(h, *class)?.is_some() {
                misses += 1;
            }
        }
        curve.push(misses);

        let improved = best.as_ref().is_none_or(|(b, _, _)| misses < *b);
        if improved {
            best = Some((misses, epoch, model.clone()));
            stale = 0;
        } else {
            stale += 1;
        }
        if misses == 0 || stale > opts.patience {
            break;
        }
    }

    let (_, best_epoch, mut kept) = best.expect("at least one epoch ran");
    kept.set_trained_epochs(best_epoch);
    *model = kept;
    Ok(IterativeSummary {
        epochs_run: curve.len() as u32,
        mispredictions: curve,
        best_epoch,
    })
}
