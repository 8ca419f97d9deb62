//! Monte-Carlo experiments for polar-code blind detection: metric CDFs, ROC
//! with decodability labels, FER/BER reference curves, candidate-pruning runs,
//! and their CSV/JSON output.

pub mod config;
pub mod emit;
mod error;
pub mod experiments;
pub mod runner;
pub mod stats;

pub use error::{Result, SimError};
