//! Surrogate modeling of daylight, glare and quality-view performance for
//! parametric shoebox rooms.

pub mod ann;
pub mod dataset;
pub mod daylight;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod pipeline;
pub mod scene;
pub mod shap;
pub mod solar;
pub mod train;
pub mod views;

pub use error::{Error, Result};
