//! Bit-packed bipolar hypervectors and the HDC algebra.
//!
//! A [`BipolarHv`] stores one bit per component (`1` is `+1`, `0` is `-1`).
//! Binding is XNOR, permutation is a rotation over the logical `dim`
//! components, and the dot product of two bipolar vectors is
//! `dim - 2 * popcount(a ^ b)`. Bundling accumulates into an [`AccumHv`].

mod accum;
mod bipolar;
mod memory;
pub mod rng;

pub use accum::{bundle, sign_quantize, AccumHv};
pub use bipolar::{bind, permute, random_hv, BipolarHv, WORD_BITS};
pub use memory::{make_level_memory, ItemMemory, LevelMemory};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HvError {
    #[error("invalid dimension {0}, must be positive")]
    InvalidDimension(usize),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("similarity is undefined for a zero-norm operand")]
    ZeroNorm,
    #[error("unknown symbol {0}")]
    UnknownSymbol(u64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub(crate) fn check_dims(left: usize, right: usize) -> Result<(), HvError> {
    if left == right {
        Ok(())
    } else {
        Err(HvError::DimensionMismatch { left, right })
    }
}

/// Inner product between two hypervector representations of equal dimension.
pub trait Dot<Rhs: ?Sized = Self> {
    fn dot(&self, rhs: &Rhs) -> Result<f64, HvError>;
}

/// Squared Euclidean norm.
pub trait Norm {
    fn norm_sq(&self) -> f64;
}

/// Cosine similarity `dot(a, b) / (|a| |b|)`.
///
/// Computed as `dot / sqrt(|a|^2 |b|^2)` so that exactly parallel integer
/// vectors give exactly `1.0`. Fails with [`HvError::ZeroNorm`] when either
/// operand is the zero vector.
pub fn cosine<A, B>(a: &A, b: &B) -> Result<f64, HvError>
where
    A: Dot<B> + Norm,
    B: Norm,
{
    let dot = a.dot(b)?;
    let denom = (a.norm_sq() * b.norm_sq()).sqrt();
    if denom == 0.0 {
        return Err(HvError::ZeroNorm);
    }
    Ok((dot / denom).clamp(-1.0, 1.0))
}
