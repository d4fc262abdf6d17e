//! Seeded multi-run experiments and beta sweeps.
//!
//! An experiment is the cross product of algorithms, beta values and
//! seeds over one scenario. Runs execute in parallel; all outputs are
//! written in the fixed (algorithm, beta, seed) order with plain decimal
//! formatting, so identical specs produce byte-identical files
//! independently of thread scheduling.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Deserialize;

use httl_core::baseline::nearest_fc_lloyd;
use httl_core::config::{load_preset, parse_scenario_str, ParsedConfig};
use httl_core::optimizer::{httl_run, HttlConfig, RunTrace};
use httl_core::{Integrator, Scenario};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Httl,
    NearestFcLloyd,
}

impl Algorithm {
    pub const ALL: [Algorithm; 2] = [Algorithm::Httl, Algorithm::NearestFcLloyd];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Httl => "httl",
            Algorithm::NearestFcLloyd => "nearest_fc_lloyd",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "httl" => Ok(Algorithm::Httl),
            "nearest_fc_lloyd" => Ok(Algorithm::NearestFcLloyd),
            other => Err(CliError::BadArgument(format!(
                "unknown algorithm '{other}' (expected httl or nearest_fc_lloyd)"
            ))),
        }
    }
}

/// Where the scenario comes from: a bundled preset or a config file.
#[derive(Clone, Debug)]
pub enum ScenarioSource {
    Preset(String),
    ConfigPath(PathBuf),
    Inline(Box<ParsedConfig>),
}

impl ScenarioSource {
    pub fn load(&self) -> Result<ParsedConfig, CliError> {
        match self {
            ScenarioSource::Preset(name) => Ok(load_preset(name)?),
            ScenarioSource::ConfigPath(path) => {
                let text = fs::read_to_string(path)
                    .map_err(CliError::io(path.display().to_string()))?;
                Ok(parse_scenario_str(&text)?)
            }
            ScenarioSource::Inline(cfg) => Ok((**cfg).clone()),
        }
    }
}

/// A full experiment description.
#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub scenario: ScenarioSource,
    pub betas: Vec<f64>,
    pub seeds: Vec<u64>,
    pub algorithms: Vec<Algorithm>,
    pub out_dir: PathBuf,
    pub epsilon: Option<f64>,
    pub max_iters: Option<usize>,
    pub grid_resolution: Option<usize>,
}

pub fn default_seeds() -> Vec<u64> {
    (1..=10).collect()
}

#[derive(Deserialize)]
struct RawSpec {
    preset: Option<String>,
    config: Option<PathBuf>,
    betas: Vec<f64>,
    seeds: Option<Vec<u64>>,
    algorithms: Option<Vec<String>>,
    out_dir: Option<PathBuf>,
    epsilon: Option<f64>,
    max_iters: Option<usize>,
    grid: Option<usize>,
}

impl ExperimentSpec {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let raw: RawSpec =
            toml::from_str(text).map_err(|e| CliError::BadArgument(e.to_string()))?;
        let scenario = match (raw.preset, raw.config) {
            (Some(name), None) => ScenarioSource::Preset(name),
            (None, Some(path)) => ScenarioSource::ConfigPath(path),
            (Some(_), Some(_)) => {
                return Err(CliError::BadArgument(
                    "experiment spec sets both 'preset' and 'config'".into(),
                ))
            }
            (None, None) => {
                return Err(CliError::BadArgument(
                    "experiment spec needs 'preset' or 'config'".into(),
                ))
            }
        };
        let algorithms = match raw.algorithms {
            None => Algorithm::ALL.to_vec(),
            Some(names) => names
                .iter()
                .map(|n| Algorithm::from_str(n))
                .collect::<Result<Vec<_>, _>>()?,
        };
        let spec = ExperimentSpec {
            scenario,
            betas: raw.betas,
            seeds: raw.seeds.unwrap_or_else(default_seeds),
            algorithms,
            out_dir: raw.out_dir.unwrap_or_else(|| PathBuf::from("results")),
            epsilon: raw.epsilon,
            max_iters: raw.max_iters,
            grid_resolution: raw.grid,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text =
            fs::read_to_string(path).map_err(CliError::io(path.display().to_string()))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.betas.is_empty() {
            return Err(CliError::BadArgument("betas list must not be empty".into()));
        }
        if self.seeds.is_empty() {
            return Err(CliError::BadArgument("seeds list must not be empty".into()));
        }
        if self.algorithms.is_empty() {
            return Err(CliError::BadArgument("algorithms list must not be empty".into()));
        }
        if self.betas.iter().any(|b| !(*b >= 0.0) || !b.is_finite()) {
            return Err(CliError::BadArgument("betas must be finite and nonnegative".into()));
        }
        Ok(())
    }
}

/// One line of the summary table.
#[derive(Clone, Debug)]
pub struct SummaryRow {
    pub algorithm: Algorithm,
    pub beta: f64,
    pub seed: u64,
    pub final_distortion: f64,
    pub iters: usize,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct MeanRow {
    pub beta: f64,
    pub algorithm: Algorithm,
    pub mean_final_distortion: f64,
}

/// In-memory results plus the paths of the emitted files.
#[derive(Debug)]
pub struct ExperimentOutput {
    pub rows: Vec<SummaryRow>,
    pub means: Vec<MeanRow>,
    pub summary_path: PathBuf,
    pub means_path: PathBuf,
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("algorithm,beta,seed,final_distortion,iters,converged\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.algorithm, r.beta, r.seed, r.final_distortion, r.iters, r.converged
        ));
    }
    out
}

pub fn means_csv(means: &[MeanRow]) -> String {
    let mut out = String::from("beta,algorithm,mean_final_distortion\n");
    for m in means {
        out.push_str(&format!("{},{},{}\n", m.beta, m.algorithm, m.mean_final_distortion));
    }
    out
}

fn run_one(
    s: &Scenario,
    g: &Integrator,
    algorithm: Algorithm,
    cfg: &HttlConfig,
) -> Result<RunTrace, CliError> {
    Ok(match algorithm {
        Algorithm::Httl => httl_run(s, g, cfg, None)?,
        Algorithm::NearestFcLloyd => nearest_fc_lloyd(s, g, cfg, None)?,
    })
}

/// Runs the full cross product and writes per-run traces, final
/// deployments, the per-run summary and the per-(beta, algorithm) means.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput, CliError> {
    spec.validate()?;
    let parsed = spec.scenario.load()?;
    let run0 = parsed.run;
    let epsilon = spec.epsilon.unwrap_or(run0.epsilon);
    let max_iters = spec.max_iters.unwrap_or(run0.max_iters);
    let grid = Integrator::midpoint(spec.grid_resolution.unwrap_or(run0.grid_resolution));
    grid.validate()?;

    fs::create_dir_all(&spec.out_dir)
        .map_err(CliError::io(spec.out_dir.display().to_string()))?;

    // Pre-build the per-beta scenarios once.
    let mut scenarios = Vec::with_capacity(spec.betas.len());
    for &beta in &spec.betas {
        scenarios.push(parsed.scenario.clone().with_beta(beta)?);
    }

    struct Cell {
        algorithm: Algorithm,
        beta_idx: usize,
        seed: u64,
    }
    let mut cells = Vec::new();
    for &algorithm in &spec.algorithms {
        for beta_idx in 0..spec.betas.len() {
            for &seed in &spec.seeds {
                cells.push(Cell { algorithm, beta_idx, seed });
            }
        }
    }

    let traces: Vec<Result<RunTrace, CliError>> = cells
        .par_iter()
        .map(|cell| {
            let cfg = HttlConfig { epsilon, max_iters, seed: cell.seed };
            run_one(&scenarios[cell.beta_idx], &grid, cell.algorithm, &cfg)
        })
        .collect();

    let mut rows = Vec::with_capacity(cells.len());
    for (cell, trace) in cells.iter().zip(traces) {
        let trace = trace?;
        let beta = spec.betas[cell.beta_idx];
        let stem = format!("{}_beta{}_seed{}", cell.algorithm, beta, cell.seed);
        let trace_path = spec.out_dir.join(format!("trace_{stem}.csv"));
        fs::write(&trace_path, trace.trace_csv())
            .map_err(CliError::io(trace_path.display().to_string()))?;
        let final_path = spec.out_dir.join(format!("final_{stem}.csv"));
        fs::write(&final_path, trace.deployment_csv(&scenarios[cell.beta_idx]))
            .map_err(CliError::io(final_path.display().to_string()))?;
        rows.push(SummaryRow {
            algorithm: cell.algorithm,
            beta,
            seed: cell.seed,
            final_distortion: trace.final_distortion(),
            iters: trace.iters_run(),
            converged: trace.converged,
        });
    }

    let mut means = Vec::new();
    for (beta_idx, &beta) in spec.betas.iter().enumerate() {
        for &algorithm in &spec.algorithms {
            let vals: Vec<f64> = rows
                .iter()
                .filter(|r| r.algorithm == algorithm && spec.betas[beta_idx] == r.beta)
                .map(|r| r.final_distortion)
                .collect();
            means.push(MeanRow {
                beta,
                algorithm,
                mean_final_distortion: vals.iter().sum::<f64>() / vals.len() as f64,
            });
        }
    }

    let summary_path = spec.out_dir.join("summary.csv");
    fs::write(&summary_path, summary_csv(&rows))
        .map_err(CliError::io(summary_path.display().to_string()))?;
    let means_path = spec.out_dir.join("means.csv");
    fs::write(&means_path, means_csv(&means))
        .map_err(CliError::io(means_path.display().to_string()))?;

    Ok(ExperimentOutput { rows, means, summary_path, means_path })
}
