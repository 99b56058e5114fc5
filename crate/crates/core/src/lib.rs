pub mod bp;
pub mod cli;
pub mod coherence;
pub mod entangle;
pub mod error;
pub mod hilbert;
pub mod kernels;
pub mod linalg;
pub mod lr;
pub mod model;
pub mod qcorr;
pub mod random;
pub mod roof;
pub mod thermal;

pub use error::{Error, Result};
