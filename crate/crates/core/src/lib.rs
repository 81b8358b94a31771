//! Two-party distribution testing: closeness and independence protocols
//! over a metered channel, a plaintext reference for the secure closeness
//! function, and hard-instance generators.

pub mod closeness;
pub mod dist;
pub mod error;
pub mod experiment;
pub mod hardness;
pub mod harness;
pub mod independence;
pub mod io;
pub mod rng;
pub mod sketch;
pub mod stats;
pub mod wire;

pub use error::{Error, Result};
