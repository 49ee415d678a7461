//! Class-hypervector model, adaptive single-pass training, misprediction-driven
//! retraining and evaluation.
//!
//! Single-pass training adds each encoded sample `H` to its class vector with
//! weight `η(1 - δ_l)`, so samples the class already represents add little.
//! Retraining only touches the model on a misprediction `l -> l'`, moving
//! `η(δ_l' - δ_l)·H` from `C_l'` to `C_l`.

mod eval;
mod io;
mod model;
mod train;

pub use eval::{evaluate, EvalReport};
pub use io::{load_model, save_model, ModelFileError, FORMAT_VERSION, MAGIC};
pub use model::{Correction, Model};
pub use train::{retrain_epoch, train_accumulate, train_iterative, train_online, IterativeOptions, IterativeSummary};

use thiserror::Error;

use crate::encoding::EncodeError;
use crate::hv::HvError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnError {
    #[error(transparent)]
    Hv(#[from] HvError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error("unknown class {0}")]
    UnknownClass(String),
    #[error("model has not been trained on any sample")]
    NotTrained,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
