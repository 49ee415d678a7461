use std::path::PathBuf;

use hdwear_core::datapipe::DataError;
use hdwear_core::encoding::EncodeError;
use hdwear_core::learning::{LearnError, ModelFileError};
use hdwear_core::robustness::RobustnessError;
use hdwear_core::synthetic::SynthError;
use thiserror::Error;

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_MODEL_IO: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error("model file: {0}")]
    ModelFile(#[from] ModelFileError),
    #[error(transparent)]
    Robustness(#[from] RobustnessError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("cannot write {}: {source}", path.display())]
    Output { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// 1 usage, 2 data, 3 model or report file I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::ModelFile(_) | CliError::Output { .. } => EXIT_MODEL_IO,
            CliError::Robustness(RobustnessError::ModelFile(_)) => EXIT_MODEL_IO,
            _ => EXIT_DATA,
        }
    }
}
