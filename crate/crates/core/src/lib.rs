pub mod complex;
pub mod distribution;
pub mod error;
pub mod infotheory;
pub mod io;
pub mod pipeline;
pub mod seed;
pub mod spectral;
pub mod synth;
pub mod transform;
pub mod workflow;

pub use error::{Error, Result};
