//! Error types shared across the crate.

use thiserror::Error;

/// Violations of scenario or parameter invariants.
#[derive(Debug, Error, PartialEq)]
pub enum ValidationError {
    #[error("omega must have at least 3 vertices, got {count}")]
    TooFewVertices { count: usize },
    #[error("omega vertices must be positively oriented (counter-clockwise)")]
    NotPositivelyOriented,
    #[error("omega is not convex at vertex {vertex}")]
    NotConvex { vertex: usize },
    #[error("n_aps must be >= n_fcs, got N={n_aps} < M={n_fcs}")]
    NodeCounts { n_aps: usize, n_fcs: usize },
    #[error("{field} must be a positive count, got {value}")]
    NonPositiveCount { field: &'static str, value: usize },
    #[error("{field}[{index}] must be strictly positive, got {value}")]
    NonPositiveWeight { field: &'static str, index: usize, value: f64 },
    #[error("{field} has length {got}, expected {expected}")]
    WeightLength { field: &'static str, got: usize, expected: usize },
    #[error("beta must be nonnegative, got {value}")]
    NegativeBeta { value: f64 },
    #[error("invalid density: {0}")]
    BadDensity(String),
    #[error("{name} must be strictly positive, got {value}")]
    NonPositiveParam { name: &'static str, value: f64 },
}

/// Errors raised while reading or validating a config file.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("unknown preset '{0}' (available: wsn1, wsn2)")]
    UnknownPreset(String),
}

/// Errors from the geometry layer.
#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("pairwise region requires two distinct access points, got i=j={0}")]
    SamePair(usize),
    #[error("membership agreement needs a non-empty sample set")]
    EmptySampleSet,
}

/// Errors from the numerical integration layer.
#[derive(Debug, Error, PartialEq)]
pub enum IntegrateError {
    #[error("integrator resolution {got} is below the minimum {min}")]
    ResolutionTooSmall { got: usize, min: usize },
    #[error("cell {cell} has positive volume {volume} but no centroid")]
    MissingCentroid { cell: usize, volume: f64 },
}

/// Errors from the brute-force oracle.
#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("instance enumerates {candidates} candidates, above the limit {limit}")]
    TooLarge { candidates: u128, limit: u64 },
    #[error("oracle supports at most {max_aps} APs and {max_fcs} FCs, got N={n_aps}, M={n_fcs}")]
    TooManyNodes { n_aps: usize, n_fcs: usize, max_aps: usize, max_fcs: usize },
    #[error("oracle requires a thin axis-aligned strip domain: {0}")]
    NotAStrip(String),
    #[error("position step must be at least {min}, got {got}")]
    StepTooSmall { got: f64, min: f64 },
}
