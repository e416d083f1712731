//! Batch front end for `hecke-core`: experiment sweeps driven by flat config
//! files, JSON-lines and CSV records, a checksummed memo cache and the
//! acceptance suite.

pub mod acceptance;
pub mod cache;
pub mod config;
pub mod error;
pub mod experiments;
pub mod record;

pub use error::{HarnessError, Result};
