//! Experiment pipelines over sampled causal models, and the pieces of the
//! `icmaxent` command-line tool.

pub mod artifacts;
pub mod env;
pub mod experiments;
pub mod output;
pub mod stats;

pub use env::Environment;
pub use experiments::{ExperimentConfig, JointRow, Method, PxMode, Setting1Row, Setting2Row};
