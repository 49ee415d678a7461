//! Encoders from text, time-series windows, sensor groups and feature records
//! into hypervectors.
//!
//! Two rotation conventions are used, each as stated by its encoder:
//! text n-grams rotate the first symbol most (`ρρL_A * ρL_B * L_C`), while
//! time-series windows rotate the newest sample most (`ρρL_t3 * ρL_t2 * L_t1`).

mod feature;

pub use feature::{encode_feature_record, EncoderConfig, FeatureEncoder, Seeds};

use thiserror::Error;

use crate::hv::{AccumHv, BipolarHv, HvError, ItemMemory, LevelMemory};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EncodeError {
    #[error(transparent)]
    Hv(#[from] HvError),
    #[error("non-finite sample value {0}")]
    InvalidSample(f64),
    #[error("invalid encoder configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown sensor {0:?}")]
    UnknownSensor(String),
    #[error("expected {expected} values, got {got}")]
    ArityMismatch { expected: usize, got: usize },
}

/// Sliding n-gram encoder settings for a single signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NGramConfig {
    pub n: usize,
    pub dim: usize,
    pub q_levels: usize,
    pub v_min: f64,
    pub v_max: f64,
    pub stride: usize,
}

impl Default for NGramConfig {
    fn default() -> Self {
        NGramConfig {
            n: 3,
            dim: 4096,
            q_levels: 16,
            v_min: 0.0,
            v_max: 1.0,
            stride: 1,
        }
    }
}

impl NGramConfig {
    pub fn validate(&self) -> Result<(), EncodeError> {
        let bad = |msg: String| Err(EncodeError::InvalidConfig(msg));
        if self.n < 1 {
            return bad("n-gram length must be at least 1".into());
        }
        if self.dim == 0 {
            return Err(HvError::InvalidDimension(0).into());
        }
        if self.q_levels < 2 {
            return bad(format!("need at least 2 levels, got {}", self.q_levels));
        }
        if self.v_min.partial_cmp(&self.v_max) != Some(std::cmp::Ordering::Less) {
            return bad(format!("v_min {} must be below v_max {}", self.v_min, self.v_max));
        }
        if self.stride < 1 {
            return bad("stride must be at least 1".into());
        }
        Ok(())
    }
}

/// Maps `x` to a level in `0..q` after clamping to `[v_min, v_max]`.
///
/// A degenerate range (`v_min >= v_max`) maps every value to level 0.
pub fn quantize(x: f64, v_min: f64, v_max: f64, q: usize) -> Result<usize, EncodeError> {
    if !x.is_finite() {
        return Err(EncodeError::InvalidSample(x));
    }
    if v_min.partial_cmp(&v_max) != Some(std::cmp::Ordering::Less) || q == 0 {
        return Ok(0);
    }
    let x = x.clamp(v_min, v_max);
    let scaled = ((x - v_min) / (v_max - v_min) * q as f64).floor();
    Ok((scaled as usize).min(q - 1))
}

pub fn quantize_value(x: f64, cfg: &NGramConfig) -> Result<usize, EncodeError> {
    quantize(x, cfg.v_min, cfg.v_max, cfg.q_levels)
}

/// `L_{t1} * ρL_{t2} * ρρL_{t3} * ...`, with `levels[0]` the oldest sample.
pub fn encode_window(levels: &[usize], n: usize, lm: &LevelMemory) -> Result<BipolarHv, EncodeError> {
    if levels.len() != n || n == 0 {
        return Err(HvError::InvalidArgument(format!("window has {} samples, expected {n}", levels.len())).into());
    }
    let mut out = lm.level(levels[0])?.clone();
    for (i, &lvl) in levels.iter().enumerate().skip(1) {
        out.bind_assign(&lm.level(lvl)?.permute(i))?;
    }
    Ok(out)
}

/// Result of [`encode_timeseries`]; `too_short` is set when the signal had
/// fewer than `n` samples and no window could be formed.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesEncoding {
    pub vectors: Vec<BipolarHv>,
    pub too_short: bool,
}

/// Number of n-gram windows over `len` samples at `stride`.
pub fn window_count(len: usize, n: usize, stride: usize) -> usize {
    if len < n || stride == 0 {
        0
    } else {
        (len - n) / stride + 1
    }
}

pub fn encode_timeseries(
    signal: &[f64],
    cfg: &NGramConfig,
    lm: &LevelMemory,
) -> Result<TimeSeriesEncoding, EncodeError> {
    cfg.validate()?;
    if lm.dim() != cfg.dim {
        return Err(HvError::DimensionMismatch {
            left: cfg.dim,
            right: lm.dim(),
        }
        .into());
    }
    if signal.len() < cfg.n {
        return Ok(TimeSeriesEncoding {
            vectors: Vec::new(),
            too_short: true,
        });
    }
    let levels = signal
        .iter()
        .map(|&x| quantize_value(x, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let count = window_count(signal.len(), cfg.n, cfg.stride);
    let vectors = (0..count)
        .map(|w| {
            let start = w * cfg.stride;
            encode_window(&levels[start..start + cfg.n], cfg.n, lm)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TimeSeriesEncoding {
        vectors,
        too_short: false,
    })
}

/// Signature hypervectors `P_m`, one per named sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorCodebook {
    sensor_ids: Vec<String>,
    id_memory: ItemMemory,
}

impl SensorCodebook {
    pub fn new(seed: u64, dim: usize, sensor_ids: Vec<String>) -> Result<Self, EncodeError> {
        for (i, id) in sensor_ids.iter().enumerate() {
            if sensor_ids[..i].contains(id) {
                return Err(EncodeError::InvalidConfig(format!("duplicate sensor id {id:?}")));
            }
        }
        let id_memory = ItemMemory::with_capacity(seed, dim, sensor_ids.len() as u64)?;
        Ok(SensorCodebook { sensor_ids, id_memory })
    }

    pub fn sensor_ids(&self) -> &[String] {
        &self.sensor_ids
    }

    pub fn len(&self) -> usize {
        self.sensor_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sensor_ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.id_memory.dim()
    }

    pub fn index_of(&self, sensor: &str) -> Result<usize, EncodeError> {
        self.sensor_ids
            .iter()
            .position(|s| s == sensor)
            .ok_or_else(|| EncodeError::UnknownSensor(sensor.to_string()))
    }

    /// Signature of the sensor at `index`.
    pub fn signature(&self, index: usize) -> Result<std::sync::Arc<BipolarHv>, EncodeError> {
        Ok(self.id_memory.get(index as u64)?)
    }
}

/// `P_1 * H_1 + P_2 * H_2 + ... + P_m * H_m`.
pub fn encode_multisensor(per_sensor: &[(&str, &BipolarHv)], cb: &SensorCodebook) -> Result<AccumHv, EncodeError> {
    let mut acc = AccumHv::zeros(cb.dim())?;
    for (sensor, hv) in per_sensor {
        let p = cb.signature(cb.index_of(sensor)?)?;
        acc.bundle(&p.bind(hv)?, 1.0)?;
    }
    Ok(acc)
}

/// Bundle of all n-grams `ρ^{n-1}L_{s0} * ... * ρL_{s(n-2)} * L_{s(n-1)}`.
pub fn encode_text(text: &[u64], n: usize, im: &ItemMemory) -> Result<AccumHv, EncodeError> {
    if n == 0 || text.len() < n {
        return Err(HvError::InvalidArgument(format!("text of length {} cannot hold a {n}-gram", text.len())).into());
    }
    let mut acc = AccumHv::zeros(im.dim())?;
    for gram in text.windows(n) {
        let mut hv = im.get(gram[n - 1])?.as_ref().clone();
        for (j, &sym) in gram.iter().enumerate().take(n - 1) {
            hv.bind_assign(&im.get(sym)?.permute(n - 1 - j))?;
        }
        acc.bundle(&hv, 1.0)?;
    }
    Ok(acc)
}

/// Maps each character of `text` to its index in `alphabet`.
pub fn symbols_from_alphabet(text: &str, alphabet: &str) -> Result<Vec<u64>, EncodeError> {
    let table: Vec<char> = alphabet.chars().collect();
    text.chars()
        .map(|c| {
            table
                .iter()
                .position(|&a| a == c)
                .map(|p| p as u64)
                .ok_or(EncodeError::Hv(HvError::UnknownSymbol(c as u64)))
        })
        .collect()
}
