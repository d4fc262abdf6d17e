//! Optimal node deployment for heterogeneous two-tier wireless sensor
//! networks, treated as a quantization problem.
//!
//! N access points (APs) collect data from densely distributed sensors
//! over a convex target region and forward it to M fusion centers (FCs).
//! The objective is the weighted two-tier transmit power: a sensor tier
//! priced by per-AP weights over generalized weighted Voronoi cells, plus
//! a relay tier priced by per-link weights and a Lagrange multiplier.
//!
//! The crate provides:
//!
//! - the scenario model and config schema ([`scenario`], [`config`]);
//! - the generalized Voronoi geometry with pairwise-region
//!   classification ([`voronoi`]);
//! - deterministic grid/Monte Carlo integration of cell moments and the
//!   objective in two algebraic routes ([`integrate`]);
//! - the four-step descent optimizer with monotone-convergence tracking
//!   ([`optimizer`]);
//! - a brute-force oracle on thin-strip instances and simplified
//!   comparison baselines ([`oracle`], [`baseline`]).

pub mod baseline;
pub mod config;
pub mod error;
pub mod geom;
pub mod integrate;
pub mod optimizer;
pub mod oracle;
pub mod scenario;
pub mod voronoi;

pub use config::{load_preset, parse_scenario_str, serialize_scenario, ParsedConfig, RunSettings};
pub use error::{ConfigError, GeometryError, IntegrateError, OracleError, ValidationError};
pub use geom::{ConvexPolygon, Point, Rect};
pub use integrate::{CellMoments, Integrator, PowerReport};
pub use optimizer::{HttlConfig, IterationRecord, RunTrace, StopReason};
pub use oracle::{BruteForceConfig, BruteForceResult, FcIncrementReport};
pub use scenario::{Deployment, Density, PhysicalLayerParams, Scenario, StyleGroups};
