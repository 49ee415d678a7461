//! Hyperdimensional (HDC) classification for wearable time-series.
//!
//! The crate is organised bottom-up:
//!
//! - [`hv`]: bit-packed bipolar hypervectors, accumulators, codebooks and the
//!   bind / bundle / permute algebra.
//! - [`encoding`]: quantization plus text, time-series, multi-sensor and
//!   feature-record encoders.
//! - [`learning`]: class-hypervector model, adaptive single-pass training,
//!   misprediction-driven retraining, evaluation and the binary model file.
//! - [`robustness`]: 1-bit model quantization and bit-flip fault injection.
//! - [`datapipe`]: CSV ingestion, smoothing, windowing, feature extraction and
//!   train/test splitting.
//! - [`synthetic`]: seeded generators for benchmark datasets.

pub mod datapipe;
pub mod encoding;
pub mod hv;
pub mod learning;
pub mod robustness;
pub mod synthetic;
pub use datapipe::{Sample, WindowedDataset};
pub use encoding::{EncoderConfig, FeatureEncoder, NGramConfig, Seeds};
pub use hv::{AccumHv, BipolarHv, HvError, ItemMemory, LevelMemory};
pub use learning::{EvalReport, LearnError, Model};
