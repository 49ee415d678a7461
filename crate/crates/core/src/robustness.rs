//! 1-bit model quantization and bit-flip fault injection.
//!
//! Faults are injected into the stored class bits only; queries are left
//! intact. Each injection flips exactly `round(rate * K * D)` distinct bits.

use std::fmt;

use rand::seq::index;
use rayon::prelude::*;
use thiserror::Error;

use crate::hv::rng::{derive_seed, stream_rng};
use crate::hv::{sign_quantize, AccumHv, BipolarHv, Dot, HvError};
use crate::learning::{EvalReport, LearnError, Model, ModelFileError};

/// Error rates of the reference robustness table: 1, 2, 4, 6, 10 and 12 %.
pub const TABLE_RATES: [f64; 6] = [0.01, 0.02, 0.04, 0.06, 0.10, 0.12];
pub const DEFAULT_TRIALS: usize = 10;

#[derive(Debug, Error)]
pub enum RobustnessError {
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Hv(#[from] HvError),
    #[error(transparent)]
    ModelFile(#[from] ModelFileError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Sign-quantized copy of a [`Model`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryModel {
    dim: usize,
    classes: Vec<String>,
    class_bits: Vec<BipolarHv>,
    source_hash: u32,
}

pub fn quantize_model(model: &Model, tie_seed: u64) -> Result<BinaryModel, RobustnessError> {
    if !model.is_trained() {
        return Err(LearnError::NotTrained.into());
    }
    let class_bits = model
        .class_hvs()
        .iter()
        .enumerate()
        .map(|(l, c)| sign_quantize(c, derive_seed(tie_seed, l as u64)))
        .collect();
    Ok(BinaryModel {
        dim: model.dim(),
        classes: model.classes().to_vec(),
        class_bits,
        source_hash: model.checksum()?,
    })
}

impl BinaryModel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn class_bits(&self) -> &[BipolarHv] {
        &self.class_bits
    }

    /// CRC32 of the model this was quantized from.
    pub fn source_hash(&self) -> u32 {
        self.source_hash
    }

    /// Cosine of `h` against each class; `|B_l| = sqrt(D)` for every class.
    pub fn similarities(&self, h: &AccumHv) -> Result<Vec<f64>, HvError> {
        let hn = h.as_slice().iter().map(|&c| c as f64 * c as f64).sum::<f64>().sqrt();
        let denom = hn * (self.dim as f64).sqrt();
        self.class_bits
            .iter()
            .map(|b| {
                let d = h.dot(b)?;
                Ok(if denom == 0.0 { 0.0 } else { d / denom })
            })
            .collect()
    }

    /// Most similar class, ties to the lowest index.
    pub fn predict_index(&self, h: &AccumHv) -> Result<usize, HvError> {
        let mut best = 0;
        let mut best_dot = f64::NEG_INFINITY;
        for (i, b) in self.class_bits.iter().enumerate() {
            let d = h.dot(b)?;
            if d > best_dot {
                best = i;
                best_dot = d;
            }
        }
        Ok(best)
    }

    /// Number of stored bits that differ from `other`.
    pub fn bits_differing(&self, other: &BinaryModel) -> Result<usize, HvError> {
        if self.class_bits.len() != other.class_bits.len() {
            return Err(HvError::InvalidArgument("class counts differ".into()));
        }
        self.class_bits
            .iter()
            .zip(&other.class_bits)
            .map(|(a, b)| a.hamming(b))
            .sum()
    }
}

/// Flips exactly `round(rate * K * D)` distinct stored bits chosen by `trial_seed`.
pub fn inject_bitflips(bm: &BinaryModel, rate: f64, trial_seed: u64) -> Result<BinaryModel, RobustnessError> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(RobustnessError::InvalidArgument(format!(
            "flip rate {rate} outside [0, 1]"
        )));
    }
    let total = bm.class_bits.len() * bm.dim;
    let amount = (rate * total as f64).round() as usize;
    let mut out = bm.clone();
    let mut rng = stream_rng(trial_seed, 0);
    for pos in index::sample(&mut rng, total, amount.min(total)) {
        out.class_bits[pos / bm.dim].flip(pos % bm.dim);
    }
    Ok(out)
}

pub fn evaluate_binary(bm: &BinaryModel, data: &[(AccumHv, usize)]) -> Result<EvalReport, RobustnessError> {
    if data.is_empty() {
        return Err(LearnError::EmptyDataset.into());
    }
    let pairs = data
        .par_iter()
        .map(|(h, c)| {
            if *c >= bm.classes.len() {
                return Err(LearnError::UnknownClass(format!("#{c}")).into());
            }
            Ok((*c, bm.predict_index(h)?))
        })
        .collect::<Result<Vec<_>, RobustnessError>>()?;
    Ok(EvalReport::from_predictions(bm.classes.clone(), pairs))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatePoint {
    pub rate: f64,
    pub mean_acc: f64,
    pub sd_acc: f64,
    pub mean_loss: f64,
    pub accuracies: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessReport {
    /// Accuracy of the quantized model without faults.
    pub acc_clean: f64,
    pub points: Vec<RatePoint>,
    pub trials: usize,
    pub seed: u64,
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Quantizes once, then runs `trials` independent injections per rate.
///
/// Trial seeds are derived from `(seed, rate index, trial)`, so the report does
/// not depend on thread scheduling.
pub fn robustness_sweep(
    model: &Model,
    test_set: &[(AccumHv, usize)],
    rates: &[f64],
    trials: usize,
    seed: u64,
) -> Result<RobustnessReport, RobustnessError> {
    if trials < 1 {
        return Err(RobustnessError::InvalidArgument("trials must be at least 1".into()));
    }
    if let Some(r) = rates.iter().find(|r| !(0.0..=1.0).contains(*r)) {
        return Err(RobustnessError::InvalidArgument(format!(
            "flip rate {r} outside [0, 1]"
        )));
    }
    let clean = quantize_model(model, model.encoder().seeds.tie)?;
    let acc_clean = evaluate_binary(&clean, test_set)?.accuracy;
    let mut points = Vec::with_capacity(rates.len());
    for (ri, &rate) in rates.iter().enumerate() {
        let rate_seed = derive_seed(seed, ri as u64);
        let accuracies = (0..trials)
            .into_par_iter()
            .map(|t| {
                let noisy = inject_bitflips(&clean, rate, derive_seed(rate_seed, t as u64))?;
                Ok(evaluate_binary(&noisy, test_set)?.accuracy)
            })
            .collect::<Result<Vec<_>, RobustnessError>>()?;
        let (mean_acc, sd_acc) = mean_sd(&accuracies);
        points.push(RatePoint {
            rate,
            mean_acc,
            sd_acc,
            mean_loss: acc_clean - mean_acc,
            accuracies,
        });
    }
    Ok(RobustnessReport {
        acc_clean,
        points,
        trials,
        seed,
    })
}

impl RobustnessReport {
    /// `rate,mean_acc,sd_acc,mean_loss` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rate,mean_acc,sd_acc,mean_loss\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{:.6},{:.6},{:.6}\n",
                p.rate, p.mean_acc, p.sd_acc, p.mean_loss
            ));
        }
        out
    }
}

impl fmt::Display for RobustnessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "clean 1-bit accuracy: {:.2}%  ({} trials, seed {})",
            100.0 * self.acc_clean,
            self.trials,
            self.seed
        )?;
        writeln!(f, "{:>8} {:>10} {:>8} {:>10}", "error", "mean acc", "sd", "loss (pt)")?;
        for p in &self.points {
            writeln!(
                f,
                "{:>7.1}% {:>9.2}% {:>8.2} {:>10.2}",
                100.0 * p.rate,
                100.0 * p.mean_acc,
                100.0 * p.sd_acc,
                100.0 * p.mean_loss
            )?;
        }
        Ok(())
    }
}
