//! Experiment drivers, file formats and the `tmbqc` command line on top of
//! the `thermal-mbqc` core.
//!
//! Work is spread over a rayon pool; every unit draws from a stream derived
//! from the master seed and its own labels, so results do not depend on the
//! number of workers.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod fixtures;
pub mod format;
pub mod output;

pub use error::{LabError, LabResult};
