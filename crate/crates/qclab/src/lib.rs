//! File formats, model persistence, a thread pool and the command line
//! around `qclab-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod model;
pub mod parallel;
pub mod pipeline;

pub use error::{Error, Result};
