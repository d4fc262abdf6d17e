//! Library side of the command-line front end: experiment orchestration,
//! deployment file IO and SVG rendering. The binary in `main.rs` is a
//! thin argument-parsing layer over these functions.

pub mod depio;
pub mod error;
pub mod experiment;
pub mod svg;

pub use error::CliError;
pub use experiment::{
    default_seeds, run_experiment, Algorithm, ExperimentOutput, ExperimentSpec, MeanRow,
    ScenarioSource, SummaryRow,
};
pub use svg::{deployment_svg, emit_deployment_svg};
