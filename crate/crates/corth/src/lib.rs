pub mod bench;
pub mod dataset;
pub mod error;
pub mod linmodel;
pub mod metrics;
pub mod orthosearch;
pub mod seed;
pub mod semgen;
pub mod stats;

pub(crate) mod folds;

pub use error::{Error, Result};
