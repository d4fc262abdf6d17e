//! `httl` binary: run the optimizer or the baseline on a preset/config,
//! drive seeded experiments and beta sweeps, query the brute-force oracle,
//! self-test the cell geometry, and render deployments to SVG.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use httl_cli::depio::parse_deployment_csv;
use httl_cli::error::CliError;
use httl_cli::experiment::{
    default_seeds, run_experiment, Algorithm, ExperimentSpec, ScenarioSource,
};
use httl_cli::svg::emit_deployment_svg;
use httl_core::baseline::nearest_fc_lloyd;
use httl_core::config::ParsedConfig;
use httl_core::geom::Point;
use httl_core::integrate::cell_moments;
use httl_core::optimizer::{httl_run, HttlConfig};
use httl_core::oracle::{brute_force_1d, BruteForceConfig};
use httl_core::voronoi::membership_agreement;
use httl_core::{Deployment, Integrator, Scenario};

#[derive(Parser)]
#[command(
    name = "httl",
    about = "Two-tier heterogeneous sensor-network node deployment optimizer",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Bundled preset name (wsn1 or wsn2).
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Scenario config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the scenario's Lagrange multiplier.
    #[arg(long)]
    beta: Option<f64>,
    /// Override the RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the relative-drop stopping threshold.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Override the iteration cap.
    #[arg(long)]
    max_iters: Option<usize>,
    /// Override the integration grid resolution.
    #[arg(long)]
    grid: Option<usize>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<ParsedConfig, CliError> {
        let source = match (&self.preset, &self.config) {
            (Some(name), None) => ScenarioSource::Preset(name.clone()),
            (None, Some(path)) => ScenarioSource::ConfigPath(path.clone()),
            (None, None) => {
                return Err(CliError::BadArgument("need --preset or --config".into()))
            }
            _ => unreachable!("clap enforces the conflict"),
        };
        let mut parsed = source.load()?;
        if let Some(beta) = self.beta {
            parsed.scenario = parsed.scenario.with_beta(beta)?;
        }
        if let Some(seed) = self.seed {
            parsed.run.seed = seed;
        }
        if let Some(epsilon) = self.epsilon {
            if !(epsilon > 0.0) {
                return Err(CliError::BadArgument(format!(
                    "epsilon must be positive, got {epsilon}"
                )));
            }
            parsed.run.epsilon = epsilon;
        }
        if let Some(max_iters) = self.max_iters {
            if max_iters == 0 {
                return Err(CliError::BadArgument("max-iters must be at least 1".into()));
            }
            parsed.run.max_iters = max_iters;
        }
        if let Some(grid) = self.grid {
            parsed.run.grid_resolution = grid;
        }
        Ok(parsed)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Output directory for the trace and final-deployment CSV files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also render the final deployment to this SVG file.
    #[arg(long)]
    render: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the four-step descent optimizer on one scenario.
    Run(RunArgs),
    /// Run the simplified nearest-FC Lloyd baseline (same outputs as run).
    Baseline(RunArgs),
    /// Run an experiment spec file (algorithms x betas x seeds).
    Experiment {
        /// Experiment spec (TOML).
        #[arg(long)]
        spec: PathBuf,
        /// Override the spec's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep beta values and tabulate per-(beta, algorithm) means.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Comma-separated beta values.
        #[arg(long, value_delimiter = ',', required = true)]
        betas: Vec<f64>,
        /// Comma-separated seeds (default 1..=10).
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Comma-separated algorithms (default: httl,nearest_fc_lloyd).
        #[arg(long, value_delimiter = ',')]
        algorithms: Option<Vec<String>>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Brute-force the optimal deployment of a thin-strip instance.
    Oracle {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Candidate position step along the strip.
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        /// Midline quadrature nodes.
        #[arg(long, default_value_t = 256)]
        quad_points: usize,
        /// Refusal threshold on the enumerated candidate count.
        #[arg(long, default_value_t = 20_000_000_000)]
        max_candidates: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Cross-check cell membership via the pairwise-region route.
    Selftest {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Interior sample points per deployment.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Number of random deployments to test.
        #[arg(long, default_value_t = 5)]
        deployments: usize,
    },
    /// Render a final-deployment CSV to SVG.
    Render {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Final-deployment CSV produced by run/baseline/experiment.
        #[arg(long)]
        deployment: PathBuf,
        /// Output SVG path.
        #[arg(long)]
        out: PathBuf,
        /// Cell raster resolution.
        #[arg(long, default_value_t = 160)]
        raster: usize,
    },
}

fn single_run(args: &RunArgs, algorithm: Algorithm) -> Result<(), CliError> {
    let parsed = args.scenario.load()?;
    let s = &parsed.scenario;
    let g = Integrator::midpoint(parsed.run.grid_resolution);
    let cfg = HttlConfig {
        epsilon: parsed.run.epsilon,
        max_iters: parsed.run.max_iters,
        seed: parsed.run.seed,
    };
    let trace = match algorithm {
        Algorithm::Httl => httl_run(s, &g, &cfg, None)?,
        Algorithm::NearestFcLloyd => nearest_fc_lloyd(s, &g, &cfg, None)?,
    };
    fs::create_dir_all(&args.out).map_err(CliError::io(args.out.display().to_string()))?;
    let stem = format!("{}_beta{}_seed{}", algorithm, s.beta(), cfg.seed);
    let trace_path = args.out.join(format!("trace_{stem}.csv"));
    fs::write(&trace_path, trace.trace_csv())
        .map_err(CliError::io(trace_path.display().to_string()))?;
    let final_path = args.out.join(format!("final_{stem}.csv"));
    fs::write(&final_path, trace.deployment_csv(s))
        .map_err(CliError::io(final_path.display().to_string()))?;
    let label = match algorithm {
        Algorithm::Httl => "httl",
        Algorithm::NearestFcLloyd => "nearest_fc_lloyd baseline (simplified)",
    };
    println!(
        "{label}: final distortion {} after {} iterations (converged: {})",
        trace.final_distortion(),
        trace.iters_run(),
        trace.converged
    );
    println!("wrote {} and {}", trace_path.display(), final_path.display());
    if let Some(render_path) = &args.render {
        emit_deployment_svg(s, &trace.final_deployment, &trace.final_moments, 160, render_path)?;
        println!("wrote {}", render_path.display());
    }
    Ok(())
}

fn interior_samples(s: &Scenario, count: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let bb = s.omega().bounding_box();
    let mut samples = Vec::with_capacity(count);
    while samples.len() < count {
        let w = Point::new(
            rng.gen_range(bb.min.x..=bb.max.x),
            rng.gen_range(bb.min.y..=bb.max.y),
        );
        if s.omega().contains(w) {
            samples.push(w);
        }
    }
    samples
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => single_run(&args, Algorithm::Httl),
        Command::Baseline(args) => single_run(&args, Algorithm::NearestFcLloyd),
        Command::Experiment { spec, out } => {
            let mut spec = ExperimentSpec::from_file(&spec)?;
            if let Some(out) = out {
                spec.out_dir = out;
            }
            let output = run_experiment(&spec)?;
            println!("wrote {} and {}", output.summary_path.display(), output.means_path.display());
            for m in &output.means {
                println!("beta {} {}: mean final distortion {}", m.beta, m.algorithm, m.mean_final_distortion);
            }
            Ok(())
        }
        Command::Sweep { scenario, betas, seeds, algorithms, out } => {
            let algorithms = match algorithms {
                None => Algorithm::ALL.to_vec(),
                Some(names) => names
                    .iter()
                    .map(|n| Algorithm::from_str(n))
                    .collect::<Result<Vec<_>, _>>()?,
            };
            let parsed = scenario.load()?;
            let spec = ExperimentSpec {
                scenario: ScenarioSource::Inline(Box::new(parsed)),
                betas,
                seeds: seeds.unwrap_or_else(default_seeds),
                algorithms,
                out_dir: out,
                epsilon: scenario.epsilon,
                max_iters: scenario.max_iters,
                grid_resolution: scenario.grid,
            };
            let output = run_experiment(&spec)?;
            println!("beta,algorithm,mean_final_distortion");
            for m in &output.means {
                println!("{},{},{}", m.beta, m.algorithm, m.mean_final_distortion);
            }
            Ok(())
        }
        Command::Oracle { scenario, step, quad_points, max_candidates, out } => {
            let parsed = scenario.load()?;
            let cfg = BruteForceConfig { step, quad_points, max_candidates };
            let result = brute_force_1d(&parsed.scenario, &cfg)?;
            fs::create_dir_all(&out).map_err(CliError::io(out.display().to_string()))?;
            let summary_path = out.join("oracle_summary.csv");
            fs::write(
                &summary_path,
                format!(
                    "distortion,grid_step,evaluations\n{},{},{}\n",
                    result.distortion, result.grid_step, result.evaluations
                ),
            )
            .map_err(CliError::io(summary_path.display().to_string()))?;
            let mut dep = String::from("kind,index,x,y,assigned_fc\n");
            for (n, p) in result.best.p.iter().enumerate() {
                dep.push_str(&format!("ap,{},{},{},{}\n", n + 1, p.x, p.y, result.best.t[n] + 1));
            }
            for (m, q) in result.best.q.iter().enumerate() {
                dep.push_str(&format!("fc,{},{},{},\n", m + 1, q.x, q.y));
            }
            let dep_path = out.join("oracle_deployment.csv");
            fs::write(&dep_path, dep).map_err(CliError::io(dep_path.display().to_string()))?;
            println!(
                "oracle optimum: distortion {} over {} candidates (step {})",
                result.distortion, result.evaluations, result.grid_step
            );
            println!("wrote {} and {}", summary_path.display(), dep_path.display());
            Ok(())
        }
        Command::Selftest { scenario, samples, deployments } => {
            let parsed = scenario.load()?;
            let s = &parsed.scenario;
            let mut min_agreement: f64 = 1.0;
            for k in 0..deployments {
                let mut rng = ChaCha8Rng::seed_from_u64(parsed.run.seed.wrapping_add(k as u64));
                let d = Deployment::random_uniform(s, &mut rng);
                let pts = interior_samples(s, samples, &mut rng);
                let agreement = membership_agreement(s, &d, &pts)
                    .map_err(|e| CliError::Runtime(e.to_string()))?;
                println!("deployment {}: agreement {agreement}", k + 1);
                min_agreement = min_agreement.min(agreement);
            }
            if min_agreement < 0.999 {
                return Err(CliError::Runtime(format!(
                    "membership self-test failed: min agreement {min_agreement} < 0.999"
                )));
            }
            println!("selftest ok: min agreement {min_agreement}");
            Ok(())
        }
        Command::Render { scenario, deployment, out, raster } => {
            let parsed = scenario.load()?;
            let text = fs::read_to_string(&deployment)
                .map_err(CliError::io(deployment.display().to_string()))?;
            let d = parse_deployment_csv(&parsed.scenario, &text)?;
            let g = Integrator::midpoint(parsed.run.grid_resolution);
            let m = cell_moments(&parsed.scenario, &d, &g)?;
            emit_deployment_svg(&parsed.scenario, &d, &m, raster, &out)?;
            println!("wrote {}", out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
