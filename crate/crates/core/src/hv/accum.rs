use super::bipolar::{BipolarHv, WORD_BITS};
use super::rng::TIE_STREAM;
use super::{check_dims, Dot, HvError, Norm};

/// Real-valued accumulator produced by bundling; also the storage for class vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct AccumHv {
    comps: Vec<f32>,
}

impl AccumHv {
    pub fn zeros(dim: usize) -> Result<Self, HvError> {
        if dim == 0 {
            return Err(HvError::InvalidDimension(dim));
        }
        Ok(AccumHv { comps: vec![0.0; dim] })
    }

    pub fn from_vec(comps: Vec<f32>) -> Result<Self, HvError> {
        if comps.is_empty() {
            return Err(HvError::InvalidDimension(0));
        }
        Ok(AccumHv { comps })
    }

    pub fn from_bipolar(hv: &BipolarHv) -> Self {
        AccumHv {
            comps: hv.to_bipolar().into_iter().map(f32::from).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.comps
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|&c| c == 0.0)
    }

    /// `self += weight * hv`, component-wise.
    pub fn bundle(&mut self, hv: &BipolarHv, weight: f64) -> Result<(), HvError> {
        check_dims(self.dim(), hv.dim())?;
        let w = weight as f32;
        for (chunk, &word) in self.comps.chunks_mut(WORD_BITS).zip(hv.words()) {
            for (j, c) in chunk.iter_mut().enumerate() {
                if (word >> j) & 1 == 1 {
                    *c += w;
                } else {
                    *c -= w;
                }
            }
        }
        Ok(())
    }

    /// `self += weight * other`, component-wise.
    pub fn add_scaled(&mut self, other: &AccumHv, weight: f64) -> Result<(), HvError> {
        check_dims(self.dim(), other.dim())?;
        let w = weight as f32;
        for (c, &o) in self.comps.iter_mut().zip(&other.comps) {
            *c += w * o;
        }
        Ok(())
    }

    /// Multiplies every component by `factor`.
    pub fn scale(&mut self, factor: f32) {
        for c in &mut self.comps {
            *c *= factor;
        }
    }
}

impl Dot for AccumHv {
    fn dot(&self, rhs: &AccumHv) -> Result<f64, HvError> {
        check_dims(self.dim(), rhs.dim())?;
        Ok(self
            .comps
            .iter()
            .zip(&rhs.comps)
            .map(|(&a, &b)| a as f64 * b as f64)
            .sum())
    }
}

impl Dot<BipolarHv> for AccumHv {
    fn dot(&self, rhs: &BipolarHv) -> Result<f64, HvError> {
        check_dims(self.dim(), rhs.dim())?;
        let mut sum = 0.0f64;
        for (chunk, &word) in self.comps.chunks(WORD_BITS).zip(rhs.words()) {
            for (j, &c) in chunk.iter().enumerate() {
                if (word >> j) & 1 == 1 {
                    sum += c as f64;
                } else {
                    sum -= c as f64;
                }
            }
        }
        Ok(sum)
    }
}

impl Dot<AccumHv> for BipolarHv {
    fn dot(&self, rhs: &AccumHv) -> Result<f64, HvError> {
        rhs.dot(self)
    }
}

impl Norm for AccumHv {
    fn norm_sq(&self) -> f64 {
        self.comps.iter().map(|&c| c as f64 * c as f64).sum()
    }
}

/// Returns `acc + weight * hv`.
pub fn bundle(mut acc: AccumHv, hv: &BipolarHv, weight: f64) -> Result<AccumHv, HvError> {
    acc.bundle(hv, weight)?;
    Ok(acc)
}

/// Sign of each component; exact zeros take a coin drawn from `(tie_seed, index)`.
pub fn sign_quantize(acc: &AccumHv, tie_seed: u64) -> BipolarHv {
    let dim = acc.dim();
    let needs_coin = acc.comps.contains(&0.0);
    let mut words = match needs_coin {
        // random() only fails on dim 0, which AccumHv rules out
        true => BipolarHv::random(tie_seed, TIE_STREAM, dim)
            .expect("positive dimension")
            .words()
            .to_vec(),
        false => vec![0u64; dim.div_ceil(WORD_BITS)],
    };
    for (i, &c) in acc.comps.iter().enumerate() {
        let (w, b) = (i / WORD_BITS, i % WORD_BITS);
        if c > 0.0 {
            words[w] |= 1 << b;
        } else if c < 0.0 {
            words[w] &= !(1 << b);
        }
    }
    BipolarHv::from_words(dim, words).expect("word count matches dim")
}
