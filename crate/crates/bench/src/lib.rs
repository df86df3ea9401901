//! Std companion of `acl-core`: result files, the CPPN weights format, SVG
//! rendering, hyperparameter parsing and parallel batch runs.

pub mod batch;
pub mod error;
pub mod hp;
pub mod results;
pub mod svg;
pub mod weights;

pub use error::{BenchError, BenchResult};
