pub mod designer;
pub mod error;
pub mod experiment;
pub mod image;
pub mod kernels;
pub mod metrics;
pub mod resample;
pub mod sampled;
pub mod scalar;
pub mod seqalg;
pub mod special;
pub mod toeplitz;

pub use error::{Error, Result};
