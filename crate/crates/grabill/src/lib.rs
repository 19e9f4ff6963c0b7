//! Experiment runner for honeycomb sector billiards: configuration files,
//! the on-disk spectrum cache, CSV/SVG exports and the command line.

pub mod cache;
pub mod config;
pub mod export;
pub mod manifest;
pub mod pipeline;
pub mod repro;
pub mod svg;

pub use config::ExperimentConfig;
pub use pipeline::{run, RunOptions, RunSummary};
