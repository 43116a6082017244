//! Phase identification in nanoindentation maps.
//!
//! Cleans indentation records, fits Gaussian mixtures to modulus and hardness
//! with EM, picks the component count by BIC, and checks the resulting phase
//! assignment with cross-validation against a k-means baseline.

pub mod error;
pub mod ingest;
pub mod mixture;
pub mod presets;
pub mod report;
pub mod seeding;
pub mod select;
pub mod stats;
pub mod validation;

pub use error::{Error, ErrorClass, Result};
