use rayon::prelude::*;

use super::{quantize, EncodeError, SensorCodebook};
use crate::hv::rng::derive_seed;
use crate::hv::{AccumHv, BipolarHv, HvError, LevelMemory};

/// Codebook seeds, one per random source in the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seeds {
    pub item: u64,
    pub level: u64,
    pub sensor: u64,
    pub tie: u64,
}

impl Seeds {
    /// Derives all four seeds from a single master seed.
    pub fn from_master(seed: u64) -> Self {
        Seeds {
            item: derive_seed(seed, 1),
            level: derive_seed(seed, 2),
            sensor: derive_seed(seed, 3),
            tie: derive_seed(seed, 4),
        }
    }
}

/// Everything needed to rebuild bit-identical feature encodings.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderConfig {
    pub dim: usize,
    pub q_levels: usize,
    /// n-gram length for the sequence encoders; recorded with the model.
    pub n: usize,
    pub seeds: Seeds,
    /// Per-feature `(v_min, v_max)` fitted on the training split.
    pub feature_bounds: Vec<(f64, f64)>,
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<(), EncodeError> {
        if self.dim < 2 {
            return Err(HvError::InvalidDimension(self.dim).into());
        }
        if self.q_levels < 2 {
            return Err(EncodeError::InvalidConfig(format!(
                "need at least 2 levels, got {}",
                self.q_levels
            )));
        }
        if self.n < 1 {
            return Err(EncodeError::InvalidConfig("n-gram length must be at least 1".into()));
        }
        if self.feature_bounds.is_empty() {
            return Err(EncodeError::InvalidConfig("no feature bounds".into()));
        }
        for (i, &(lo, hi)) in self.feature_bounds.iter().enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(EncodeError::InvalidConfig(format!(
                    "feature {i} has invalid bounds ({lo}, {hi})"
                )));
            }
        }
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.feature_bounds.len()
    }
}

fn feature_ids(m: usize) -> Vec<String> {
    (0..m).map(|i| format!("feature_{i}")).collect()
}

/// Reference encoder: `H = Σ_i P_i * L(quantize(f_i))`.
///
/// [`FeatureEncoder::encode`] computes the same vector from a precomputed
/// table of bound signatures.
pub fn encode_feature_record(
    features: &[f64],
    bounds: &[(f64, f64)],
    lm: &LevelMemory,
    cb: &SensorCodebook,
) -> Result<AccumHv, EncodeError> {
    if features.len() != cb.len() || bounds.len() != cb.len() {
        return Err(EncodeError::ArityMismatch {
            expected: cb.len(),
            got: features.len(),
        });
    }
    let mut acc = AccumHv::zeros(cb.dim())?;
    for (i, (&f, &(lo, hi))) in features.iter().zip(bounds).enumerate() {
        let level = lm.level(quantize(f, lo, hi, lm.len())?)?;
        acc.bundle(&cb.signature(i)?.bind(level)?, 1.0)?;
    }
    Ok(acc)
}

/// Feature-record encoder with every `P_i * L_q` precomputed.
#[derive(Debug, Clone)]
pub struct FeatureEncoder {
    config: EncoderConfig,
    levels: LevelMemory,
    sensors: SensorCodebook,
    bound: Vec<BipolarHv>,
}

impl FeatureEncoder {
    pub fn new(config: EncoderConfig) -> Result<Self, EncodeError> {
        config.validate()?;
        let levels = LevelMemory::new(config.seeds.level, config.dim, config.q_levels)?;
        let sensors = SensorCodebook::new(config.seeds.sensor, config.dim, feature_ids(config.arity()))?;
        let mut bound = Vec::with_capacity(config.arity() * config.q_levels);
        for i in 0..config.arity() {
            let p = sensors.signature(i)?;
            for level in levels.levels() {
                bound.push(p.bind(level)?);
            }
        }
        Ok(FeatureEncoder {
            config,
            levels,
            sensors,
            bound,
        })
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.config
    }

    pub fn levels(&self) -> &LevelMemory {
        &self.levels
    }

    pub fn sensors(&self) -> &SensorCodebook {
        &self.sensors
    }

    pub fn arity(&self) -> usize {
        self.config.arity()
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    pub fn encode(&self, features: &[f64]) -> Result<AccumHv, EncodeError> {
        if features.len() != self.arity() {
            return Err(EncodeError::ArityMismatch {
                expected: self.arity(),
                got: features.len(),
            });
        }
        let q = self.config.q_levels;
        let mut acc = AccumHv::zeros(self.config.dim)?;
        for (i, (&f, &(lo, hi))) in features.iter().zip(&self.config.feature_bounds).enumerate() {
            let level = quantize(f, lo, hi, q)?;
            acc.bundle(&self.bound[i * q + level], 1.0)?;
        }
        Ok(acc)
    }

    /// Encodes records in parallel; output order matches input order.
    pub fn encode_batch<R>(&self, records: &[R]) -> Result<Vec<AccumHv>, EncodeError>
    where
        R: AsRef<[f64]> + Sync,
    {
        records.par_iter().map(|r| self.encode(r.as_ref())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hv::{cosine, sign_quantize};

    fn config(m: usize, dim: usize) -> EncoderConfig {
        EncoderConfig {
            dim,
            q_levels: 16,
            n: 3,
            seeds: Seeds::from_master(11),
            feature_bounds: vec![(0.0, 1.0); m],
        }
    }

    #[test]
    fn fast_path_matches_reference() {
        let enc = FeatureEncoder::new(config(7, 1000)).unwrap();
        let rec = [0.0, 0.1, 0.33, 0.5, 0.99, 1.0, 1.7];
        let reference = encode_feature_record(&rec, &enc.config().feature_bounds, enc.levels(), enc.sensors()).unwrap();
        assert_eq!(enc.encode(&rec).unwrap(), reference);
    }

    #[test]
    fn single_feature_sign_is_bound_level() {
        let enc = FeatureEncoder::new(config(1, 512)).unwrap();
        let acc = enc.encode(&[0.4]).unwrap();
        let expected = enc
            .sensors()
            .signature(0)
            .unwrap()
            .bind(enc.levels().level(6).unwrap())
            .unwrap();
        assert_eq!(sign_quantize(&acc, 0), expected);
    }

    #[test]
    fn deterministic_and_arity_checked() {
        let a = FeatureEncoder::new(config(3, 256)).unwrap();
        let b = FeatureEncoder::new(config(3, 256)).unwrap();
        assert_eq!(a.encode(&[0.2, 0.4, 0.6]).unwrap(), b.encode(&[0.2, 0.4, 0.6]).unwrap());
        assert_eq!(
            a.encode(&[0.2]),
            Err(EncodeError::ArityMismatch { expected: 3, got: 1 })
        );
    }

    #[test]
    fn full_range_change_in_one_feature_lowers_similarity() {
        let enc = FeatureEncoder::new(config(7, 4096)).unwrap();
        let a = [0.0, 0.2, 0.4, 0.6, 0.8, 0.5, 0.3];
        let mut b = a;
        b[0] = 1.0;
        let c = cosine(&enc.encode(&a).unwrap(), &enc.encode(&b).unwrap()).unwrap();
        assert!(c < 0.9, "cosine {c}");
    }

    #[test]
    fn batch_preserves_order() {
        let enc = FeatureEncoder::new(config(2, 128)).unwrap();
        let recs = vec![vec![0.1, 0.9], vec![0.9, 0.1], vec![0.5, 0.5]];
        let batch = enc.encode_batch(&recs).unwrap();
        for (r, h) in recs.iter().zip(&batch) {
            assert_eq!(&enc.encode(r).unwrap(), h);
        }
    }

    #[test]
    fn invalid_bounds_rejected() {
        let mut c = config(2, 128);
        c.feature_bounds[1] = (2.0, 1.0);
        assert!(FeatureEncoder::new(c).is_err());
    }
}
