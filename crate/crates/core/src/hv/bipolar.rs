use std::fmt;

use rand::RngCore;

use super::rng::stream_rng;
use super::{check_dims, Dot, HvError, Norm};

pub const WORD_BITS: usize = u64::BITS as usize;

/// Dense bipolar hypervector, one bit per component, `1` encodes `+1`.
///
/// Bits past `dim - 1` in the last word are always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BipolarHv {
    dim: usize,
    words: Vec<u64>,
}

fn word_count(dim: usize) -> usize {
    dim.div_ceil(WORD_BITS)
}

fn tail_mask(dim: usize) -> u64 {
    match dim % WORD_BITS {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

impl BipolarHv {
    /// The all-`+1` vector, identity element of [`bind`].
    pub fn ones(dim: usize) -> Result<Self, HvError> {
        if dim == 0 {
            return Err(HvError::InvalidDimension(dim));
        }
        let mut hv = BipolarHv {
            dim,
            words: vec![u64::MAX; word_count(dim)],
        };
        hv.canonicalize();
        Ok(hv)
    }

    /// Deterministic pseudo-random vector for `(seed, stream)`; components are i.i.d. uniform.
    pub fn random(seed: u64, stream: u64, dim: usize) -> Result<Self, HvError> {
        if dim == 0 {
            return Err(HvError::InvalidDimension(dim));
        }
        let mut rng = stream_rng(seed, stream);
        let mut words = vec![0u64; word_count(dim)];
        for w in words.iter_mut() {
            *w = rng.next_u64();
        }
        let mut hv = BipolarHv { dim, words };
        hv.canonicalize();
        Ok(hv)
    }

    /// Packs a slice of `±1` components.
    pub fn from_bipolar(components: &[i8]) -> Result<Self, HvError> {
        if components.is_empty() {
            return Err(HvError::InvalidDimension(0));
        }
        let mut words = vec![0u64; word_count(components.len())];
        for (i, &c) in components.iter().enumerate() {
            match c {
                1 => words[i / WORD_BITS] |= 1 << (i % WORD_BITS),
                -1 => {}
                other => {
                    return Err(HvError::InvalidArgument(format!(
                        "component {i} is {other}, expected -1 or +1"
                    )))
                }
            }
        }
        Ok(BipolarHv {
            dim: components.len(),
            words,
        })
    }

    /// Builds a vector from packed words; padding bits are cleared.
    pub fn from_words(dim: usize, words: Vec<u64>) -> Result<Self, HvError> {
        if dim == 0 {
            return Err(HvError::InvalidDimension(dim));
        }
        if words.len() != word_count(dim) {
            return Err(HvError::InvalidArgument(format!(
                "{} words cannot hold exactly {dim} components",
                words.len()
            )));
        }
        let mut hv = BipolarHv { dim, words };
        hv.canonicalize();
        Ok(hv)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Component `i` as `+1` or `-1`.
    pub fn get(&self, i: usize) -> i8 {
        assert!(i < self.dim, "component {i} out of range for dim {}", self.dim);
        if self.bit(i) {
            1
        } else {
            -1
        }
    }

    #[inline]
    pub(crate) fn bit(&self, i: usize) -> bool {
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    /// Negates component `i`.
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.dim, "component {i} out of range for dim {}", self.dim);
        self.words[i / WORD_BITS] ^= 1 << (i % WORD_BITS);
    }

    /// Unpacks into `±1` components.
    pub fn to_bipolar(&self) -> Vec<i8> {
        (0..self.dim).map(|i| self.get(i)).collect()
    }

    /// Number of `+1` components.
    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn negated(&self) -> Self {
        let mut out = BipolarHv {
            dim: self.dim,
            words: self.words.iter().map(|w| !w).collect(),
        };
        out.canonicalize();
        out
    }

    pub fn bind(&self, other: &BipolarHv) -> Result<Self, HvError> {
        check_dims(self.dim, other.dim)?;
        let mut out = BipolarHv {
            dim: self.dim,
            words: self.words.iter().zip(&other.words).map(|(a, b)| !(a ^ b)).collect(),
        };
        out.canonicalize();
        Ok(out)
    }

    /// In-place XNOR with `other`.
    pub fn bind_assign(&mut self, other: &BipolarHv) -> Result<(), HvError> {
        check_dims(self.dim, other.dim)?;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a = !(*a ^ b);
        }
        self.canonicalize();
        Ok(())
    }

    /// Rotates components `k` positions toward higher indices: `out[(i + k) % dim] = self[i]`.
    pub fn permute(&self, k: usize) -> Self {
        let k = k % self.dim;
        if k == 0 {
            return self.clone();
        }
        let high = shl(&self.words, k);
        let low = shr(&self.words, self.dim - k);
        let mut out = BipolarHv {
            dim: self.dim,
            words: high.iter().zip(&low).map(|(h, l)| h | l).collect(),
        };
        out.canonicalize();
        out
    }

    pub fn hamming(&self, other: &BipolarHv) -> Result<usize, HvError> {
        check_dims(self.dim, other.dim)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum())
    }

    /// Exact integer dot product, `dim - 2 * hamming`.
    pub fn dot_exact(&self, other: &BipolarHv) -> Result<i64, HvError> {
        let h = self.hamming(other)?;
        Ok(self.dim as i64 - 2 * h as i64)
    }

    fn canonicalize(&mut self) {
        if let Some(last) = self.words.last_mut() {
            *last &= tail_mask(self.dim);
        }
    }
}

/// Multi-word left shift by `k` bits; bits shifted past the last word are dropped.
fn shl(src: &[u64], k: usize) -> Vec<u64> {
    let n = src.len();
    let (ws, bs) = (k / WORD_BITS, k % WORD_BITS);
    let mut out = vec![0u64; n];
    for j in ws..n {
        let mut v = src[j - ws] << bs;
        if bs > 0 && j > ws {
            v |= src[j - ws - 1] >> (WORD_BITS - bs);
        }
        out[j] = v;
    }
    out
}

/// Multi-word logical right shift by `k` bits.
fn shr(src: &[u64], k: usize) -> Vec<u64> {
    let n = src.len();
    let (ws, bs) = (k / WORD_BITS, k % WORD_BITS);
    let mut out = vec![0u64; n];
    for j in 0..n.saturating_sub(ws) {
        let mut v = src[j + ws] >> bs;
        if bs > 0 && j + ws + 1 < n {
            v |= src[j + ws + 1] << (WORD_BITS - bs);
        }
        out[j] = v;
    }
    out
}

impl fmt::Debug for BipolarHv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BipolarHv(dim={}, ones={})", self.dim, self.count_ones())
    }
}

impl Dot for BipolarHv {
    fn dot(&self, rhs: &BipolarHv) -> Result<f64, HvError> {
        self.dot_exact(rhs).map(|d| d as f64)
    }
}

impl Norm for BipolarHv {
    fn norm_sq(&self) -> f64 {
        self.dim as f64
    }
}

pub fn random_hv(seed: u64, stream: u64, dim: usize) -> Result<BipolarHv, HvError> {
    BipolarHv::random(seed, stream, dim)
}

pub fn bind(a: &BipolarHv, b: &BipolarHv) -> Result<BipolarHv, HvError> {
    a.bind(b)
}

pub fn permute(a: &BipolarHv, k: usize) -> BipolarHv {
    a.permute(k)
}

#[cfg(test)]
mod tests {
    use super::super::cosine;
    use super::*;

    fn naive_rotate(v: &[i8], k: usize) -> Vec<i8> {
        let d = v.len();
        let mut out = vec![0; d];
        for (i, &x) in v.iter().enumerate() {
            out[(i + k) % d] = x;
        }
        out
    }

    #[test]
    fn random_is_deterministic() {
        assert_eq!(random_hv(7, 0, 64).unwrap(), random_hv(7, 0, 64).unwrap());
        assert_ne!(random_hv(7, 0, 64).unwrap(), random_hv(7, 1, 64).unwrap());
    }

    #[test]
    fn zero_dim_is_rejected() {
        assert_eq!(random_hv(7, 0, 0), Err(HvError::InvalidDimension(0)));
        assert_eq!(BipolarHv::ones(0), Err(HvError::InvalidDimension(0)));
    }

    #[test]
    fn single_component() {
        let v = random_hv(7, 0, 1).unwrap();
        assert_eq!(v.dim(), 1);
        assert!(v.get(0) == 1 || v.get(0) == -1);
        assert_eq!(v.words()[0] >> 1, 0);
    }

    #[test]
    fn padding_stays_canonical() {
        for dim in [1, 63, 65, 100, 130] {
            let v = random_hv(3, 9, dim).unwrap();
            let mask = tail_mask(dim);
            assert_eq!(v.words().last().unwrap() & !mask, 0);
            assert_eq!(v.negated().words().last().unwrap() & !mask, 0);
            assert_eq!(v.permute(5).words().last().unwrap() & !mask, 0);
            let b = v.bind(&random_hv(4, 9, dim).unwrap()).unwrap();
            assert_eq!(b.words().last().unwrap() & !mask, 0);
        }
    }

    #[test]
    fn bind_self_is_ones_and_ones_is_identity() {
        let v = random_hv(11, 2, 100).unwrap();
        let ones = BipolarHv::ones(100).unwrap();
        assert_eq!(v.bind(&v).unwrap(), ones);
        assert_eq!(v.bind(&ones).unwrap(), v);
    }

    #[test]
    fn bind_rejects_mismatch() {
        let a = random_hv(1, 0, 64).unwrap();
        let b = random_hv(1, 0, 65).unwrap();
        assert_eq!(a.bind(&b), Err(HvError::DimensionMismatch { left: 64, right: 65 }));
        assert!(a.dot(&b).is_err());
    }

    #[test]
    fn permute_matches_naive_rotation() {
        for dim in [1, 2, 63, 64, 65, 128, 200, 4096] {
            let v = random_hv(5, dim as u64, dim).unwrap();
            let unpacked = v.to_bipolar();
            for k in [0, 1, 7, 63, 64, 65, dim / 2, dim - 1, dim, 3 * dim + 2] {
                let got = v.permute(k).to_bipolar();
                assert_eq!(got, naive_rotate(&unpacked, k % dim), "dim={dim} k={k}");
            }
        }
    }

    #[test]
    fn permute_full_rotation_and_composition() {
        let v = random_hv(5, 5, 4096).unwrap();
        assert_eq!(v.permute(4096), v);
        assert_eq!(v.permute(1).permute(1), v.permute(2));
    }

    #[test]
    fn dot_of_self_and_negation() {
        let v = random_hv(8, 8, 1000).unwrap();
        assert_eq!(v.dot_exact(&v).unwrap(), 1000);
        assert_eq!(v.dot_exact(&v.negated()).unwrap(), -1000);
    }

    #[test]
    fn near_orthogonality_of_derived_vectors() {
        let a = random_hv(7, 0, 4096).unwrap();
        let b = random_hv(7, 1, 4096).unwrap();
        assert!(cosine(&a, &b).unwrap().abs() < 0.08);
        assert!(cosine(&a.bind(&b).unwrap(), &a).unwrap().abs() < 0.08);
        assert!(cosine(&a, &a.permute(1)).unwrap().abs() < 0.08);
    }

    #[test]
    fn from_bipolar_validates() {
        assert!(BipolarHv::from_bipolar(&[1, 0, -1]).is_err());
        let v = BipolarHv::from_bipolar(&[1, -1, 1]).unwrap();
        assert_eq!(v.to_bipolar(), vec![1, -1, 1]);
    }
}
