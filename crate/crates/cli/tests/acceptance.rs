//! Acceptance suite: every release criterion as one test, each printing a
//! PASS line (run with `--nocapture` to see them).
//!
//! The heavyweight descent runs (two presets, three beta values, ten seeds
//! each, plus paired baseline runs, all at grid 512) are computed once in
//! a shared fixture and reused across criteria.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use httl_cli::experiment::{run_experiment, Algorithm, ExperimentSpec, ScenarioSource};
use httl_core::baseline::{mw_owner, nearest_fc_lloyd};
use httl_core::config::load_preset;
use httl_core::geom::{dist_to_segment, ConvexPolygon, Point};
use httl_core::integrate::{
    cell_moments, distortion, distortion_parallel_axis, distortion_with_assignment,
    gradient_residual, owner_assignment, Integrator, EMPTY_CELL_VOLUME,
};
use httl_core::optimizer::{httl_run, HttlConfig, RunTrace};
use httl_core::oracle::{brute_force_1d, fc_increment_check, strip_volumes, BruteForceConfig};
use httl_core::scenario::{Deployment, Scenario};
use httl_core::voronoi::{membership_agreement, pairwise_region, PairwiseRegion};

const GRID: Integrator = Integrator::MidpointGrid { resolution: 512 };
const PRESETS: [&str; 2] = ["wsn1", "wsn2"];
const BETAS: [f64; 3] = [0.05, 0.25, 0.45];

fn scenario(preset: &str, beta: f64) -> Scenario {
    load_preset(preset).unwrap().scenario.with_beta(beta).unwrap()
}

fn random_deployment(s: &Scenario, seed: u64) -> Deployment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = Deployment::random_uniform(s, &mut rng);
    d.t = (0..s.n_aps()).map(|_| rng.gen_range(0..s.n_fcs())).collect();
    d
}

struct FixtureRun {
    preset: &'static str,
    beta: f64,
    seed: u64,
    trace: RunTrace,
}

struct Fixture {
    httl: Vec<FixtureRun>,
    baseline: Vec<FixtureRun>,
    build_time: Duration,
}

fn fixture() -> &'static Fixture {
    static FIXTURE: OnceLock<Fixture> = OnceLock::new();
    FIXTURE.get_or_init(|| {
        let start = Instant::now();
        let mut jobs: Vec<(&'static str, f64, u64, Algorithm)> = Vec::new();
        for preset in PRESETS {
            for beta in BETAS {
                for seed in 1..=10 {
                    jobs.push((preset, beta, seed, Algorithm::Httl));
                }
            }
        }
        // Paired baseline runs: all betas on wsn1, beta 0.25 on wsn2.
        for beta in BETAS {
            for seed in 1..=10 {
                jobs.push(("wsn1", beta, seed, Algorithm::NearestFcLloyd));
            }
        }
        for seed in 1..=10 {
            jobs.push(("wsn2", 0.25, seed, Algorithm::NearestFcLloyd));
        }

        let traces: Vec<(usize, RunTrace)> = jobs
            .par_iter()
            .enumerate()
            .map(|(i, (preset, beta, seed, algorithm))| {
                let s = scenario(preset, *beta);
                let cfg = HttlConfig { epsilon: 1e-5, max_iters: 100, seed: *seed };
                let trace = match algorithm {
                    Algorithm::Httl => httl_run(&s, &GRID, &cfg, None).unwrap(),
                    Algorithm::NearestFcLloyd => {
                        nearest_fc_lloyd(&s, &GRID, &cfg, None).unwrap()
                    }
                };
                (i, trace)
            })
            .collect();

        let mut httl = Vec::new();
        let mut baseline = Vec::new();
        for (i, trace) in traces {
            let (preset, beta, seed, algorithm) = jobs[i];
            let run = FixtureRun { preset, beta, seed, trace };
            match algorithm {
                Algorithm::Httl => httl.push(run),
                Algorithm::NearestFcLloyd => baseline.push(run),
            }
        }
        Fixture { httl, baseline, build_time: start.elapsed() }
    })
}

/// Strip instance used throughout: two APs with heavily skewed weights.
fn heavy_strip() -> Scenario {
    let omega = ConvexPolygon::rect(0.0, 0.0, 1.0, 1e-3).unwrap();
    Scenario::new(omega, None, 2, 1, vec![1.0, 100.0], vec![1.0, 100.0], 1.0).unwrap()
}

/// Fresh two-worker rayon pool so wall-time budgets are not distorted by
/// queueing behind the shared fixture build.
fn own_pool<T: Send>(job: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(2)
        .build()
        .unwrap()
        .install(job)
}

#[test]
fn c01_strip_brute_force_example() {
    let start = Instant::now();
    let s = heavy_strip();
    let cfg = BruteForceConfig { step: 0.01, ..Default::default() };
    let result = own_pool(|| brute_force_1d(&s, &cfg)).unwrap();
    let volumes = strip_volumes(&s, &result.best, &cfg).unwrap();
    let elapsed = start.elapsed();

    assert!(
        (result.best.p[0].x - 0.5).abs() <= 0.01 + 1e-12,
        "light AP at {}, expected 0.5 within one step",
        result.best.p[0].x
    );
    assert!(
        (result.best.q[0].x - 0.5).abs() <= 0.01 + 1e-12,
        "FC at {}, expected 0.5 within one step",
        result.best.q[0].x
    );
    assert!(volumes[1] < 1e-6, "heavy AP volume {} should vanish", volumes[1]);
    assert!(
        (result.distortion - 1.0 / 12.0).abs() <= 2e-3,
        "optimal distortion {} vs analytic 1/12",
        result.distortion
    );
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}, budget 1 min");
    println!("criterion 01 (strip brute-force optimum): PASS ({elapsed:?})");
}

#[test]
fn c02a_monotone_descent() {
    let fx = fixture();
    for run in &fx.httl {
        for w in run.trace.iterations.windows(2) {
            assert!(
                w[1].distortion <= w[0].distortion * (1.0 + 1e-9),
                "{} beta {} seed {}: distortion rose {} -> {}",
                run.preset,
                run.beta,
                run.seed,
                w[0].distortion,
                w[1].distortion
            );
        }
        assert!(run.trace.iters_run() <= 100);
    }
    assert!(
        fx.build_time < Duration::from_secs(600),
        "fixture took {:?}, budget 10 min",
        fx.build_time
    );
    println!(
        "criterion 02a (monotone descent on all {} runs): PASS (fixture {:?})",
        fx.httl.len(),
        fx.build_time
    );
}

/// The termination clause of criterion 02, asserted exactly as stated:
/// at epsilon = 1e-5 with a 100-iteration cap, at least 9/10 seeds per
/// (preset, beta) setting must reach the relative-drop stop.
///
/// This clause does not hold for these instances: the descent frequently
/// crosses shallow plateaus where the relative drop stays in the
/// 1e-5..1e-4 band past iteration 100 while the objective is still
/// genuinely improving (stragglers converge by roughly iteration 180, at
/// better optima than many fast seeds). A 40-seed estimate of the true
/// convergence-within-100 rate on wsn1 at beta 0.25 is about 2/3, so no
/// ten-seed set is reliably above 9/10. The check is kept faithful and
/// red rather than loosened.
#[test]
fn c02b_termination_rate() {
    let fx = fixture();
    let mut table = String::new();
    let mut failures = Vec::new();
    for preset in PRESETS {
        for beta in BETAS {
            let runs: Vec<&FixtureRun> = fx
                .httl
                .iter()
                .filter(|r| r.preset == preset && r.beta == beta)
                .collect();
            assert_eq!(runs.len(), 10);
            let converged = runs.iter().filter(|r| r.trace.converged).count();
            let stragglers: Vec<u64> =
                runs.iter().filter(|r| !r.trace.converged).map(|r| r.seed).collect();
            table.push_str(&format!(
                "  {preset} beta {beta}: {converged}/10 converged, stragglers {stragglers:?}\n"
            ));
            if converged < 9 {
                failures.push(format!("{preset} beta {beta}: {converged}/10"));
            }
        }
    }
    println!("criterion 02b (termination rate at epsilon 1e-5, cap 100):\n{table}");
    assert!(
        failures.is_empty(),
        "settings below the 9/10 convergence threshold: {}\n{table}",
        failures.join(", ")
    );
    println!("criterion 02b (termination 9/10 per setting): PASS");
}

#[test]
fn c03_fixed_point_conditions() {
    let fx = fixture();
    let mut checked = 0;
    let mut max_res_ratio: f64 = 0.0;
    let mut max_seg_dist: f64 = 0.0;
    for run in &fx.httl {
        if !run.trace.converged {
            continue;
        }
        checked += 1;
        let s = scenario(run.preset, run.beta);
        let d = &run.trace.final_deployment;
        let diam = s.omega().diameter();

        // Gradient residuals at the moments the final placement used.
        let last = run.trace.iterations.last().unwrap();
        let res = last.max_ap_res.max(last.max_fc_res);
        max_res_ratio = max_res_ratio.max(res / last.distortion);
        assert!(
            res <= 1e-3 * last.distortion,
            "{} beta {} seed {}: residual {res} > 1e-3 * {}",
            run.preset,
            run.beta,
            run.seed,
            last.distortion
        );

        // Every AP owning mass lies on the segment between its cell
        // centroid and its FC.
        let m = &run.trace.final_moments;
        for n in 0..s.n_aps() {
            if m.v[n] > EMPTY_CELL_VOLUME {
                let dist = dist_to_segment(d.p[n], m.c[n].unwrap(), d.q[d.t[n]]);
                max_seg_dist = max_seg_dist.max(dist / diam);
                assert!(
                    dist <= 1e-6 * diam,
                    "{} beta {} seed {} AP {}: {dist} off the centroid-FC segment",
                    run.preset,
                    run.beta,
                    run.seed,
                    n + 1
                );
            }
        }
    }
    assert!(checked > 0, "no converged runs to check");
    println!(
        "criterion 03 (fixed-point residuals & collinearity over {checked} runs): PASS \
         (max residual ratio {max_res_ratio:.2e}, max segment offset {max_seg_dist:.2e} diam)"
    );
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

fn unit(x: u64) -> f64 {
    (x >> 11) as f64 / (1u64 << 53) as f64
}

#[test]
fn c04_voronoi_partition_optimality() {
    let s = scenario("wsn2", 0.25);
    let n = s.n_aps();
    for trial in 0..100u64 {
        let d = random_deployment(&s, 40_000 + trial);
        let voronoi = distortion(&s, &d, &GRID).unwrap().distortion;

        let frozen = owner_assignment(&s, &d);
        let perturbed = distortion_with_assignment(&s, &d, &GRID, |idx, w| {
            let h = splitmix(trial ^ (idx as u64).wrapping_mul(0x9E3779B97F4A7C15));
            if unit(h) < 0.05 {
                (splitmix(h) % n as u64) as usize
            } else {
                frozen(idx, w)
            }
        })
        .unwrap()
        .distortion;
        assert!(
            voronoi <= perturbed + 1e-6 * voronoi,
            "trial {trial}: voronoi {voronoi} > perturbed {perturbed}"
        );

        let mw = distortion_with_assignment(&s, &d, &GRID, |_, w| mw_owner(&s, &d, w))
            .unwrap()
            .distortion;
        assert!(
            voronoi <= mw + 1e-6 * voronoi,
            "trial {trial}: voronoi {voronoi} > multiplicative-only {mw}"
        );
    }
    println!("criterion 04 (partition optimality vs perturbed and multiplicative-only): PASS");
}

#[test]
fn c05_parallel_axis_identity() {
    for preset in PRESETS {
        let s = scenario(preset, 0.25);
        for trial in 0..100u64 {
            let d = random_deployment(&s, 50_000 + trial);
            let direct = distortion(&s, &d, &GRID).unwrap().distortion;
            let m = cell_moments(&s, &d, &GRID).unwrap();
            let pa = distortion_parallel_axis(&s, &d, &GRID, &m).unwrap();
            let rel = (direct - pa).abs() / direct.abs().max(1e-300);
            assert!(rel <= 1e-6, "{preset} trial {trial}: routes differ by {rel}");
        }
    }
    println!("criterion 05 (parallel-axis identity on 100 deployments per preset): PASS");
}

#[test]
fn c06_membership_agreement_and_region_kinds() {
    // 20 random heterogeneous deployments, 1e5 interior samples each.
    let s = scenario("wsn2", 0.25);
    let bb = s.omega().bounding_box();
    for trial in 0..20u64 {
        let d = random_deployment(&s, 60_000 + trial);
        let mut rng = ChaCha8Rng::seed_from_u64(61_000 + trial);
        let mut samples = Vec::with_capacity(100_000);
        while samples.len() < 100_000 {
            let w = Point::new(
                rng.gen_range(bb.min.x..=bb.max.x),
                rng.gen_range(bb.min.y..=bb.max.y),
            );
            if s.omega().contains(w) {
                samples.push(w);
            }
        }
        let agreement = membership_agreement(&s, &d, &samples).unwrap();
        assert!(agreement >= 0.999, "trial {trial}: agreement {agreement}");
    }

    // Constructed deployments exhibiting all five pairwise-region kinds.
    let omega = ConvexPolygon::rect(0.0, 0.0, 10.0, 10.0).unwrap();
    let mk = |a: [f64; 2], b: [f64; 2], beta: f64, p0: Point, p1: Point, q: Point| {
        let s = Scenario::new(
            omega.clone(),
            None,
            2,
            1,
            a.to_vec(),
            b.to_vec(),
            beta,
        )
        .unwrap();
        let d = Deployment { p: vec![p0, p1], q: vec![q], t: vec![0, 0] };
        (s, d)
    };
    let cases: Vec<(&str, Scenario, Deployment, fn(&PairwiseRegion) -> bool)> = vec![
        {
            let (s, d) = mk(
                [1.0, 1.0],
                [1.0, 1.0],
                0.5,
                Point::new(3.0, 5.0),
                Point::new(7.0, 5.0),
                Point::new(5.0, 5.0),
            );
            ("half-space", s, d, |r| matches!(r, PairwiseRegion::HalfSpace { .. }))
        },
        {
            let (s, d) = mk(
                [2.0, 1.0],
                [1.0, 1.0],
                0.0,
                Point::new(4.0, 5.0),
                Point::new(6.0, 5.0),
                Point::new(5.0, 5.0),
            );
            ("disk", s, d, |r| matches!(r, PairwiseRegion::Disk { .. }))
        },
        {
            let (s, d) = mk(
                [1.0, 2.0],
                [1.0, 1.0],
                0.0,
                Point::new(4.0, 5.0),
                Point::new(6.0, 5.0),
                Point::new(5.0, 5.0),
            );
            ("disk-complement", s, d, |r| matches!(r, PairwiseRegion::DiskComplement { .. }))
        },
        {
            // Heavy additive penalty on the strong-weight AP empties it.
            let (s, d) = mk(
                [2.0, 1.0],
                [50.0, 1.0],
                10.0,
                Point::new(2.0, 2.0),
                Point::new(5.0, 5.0),
                Point::new(9.0, 9.0),
            );
            ("empty", s, d, |r| matches!(r, PairwiseRegion::Empty))
        },
        {
            let (s, d) = mk(
                [1.0, 2.0],
                [1.0, 50.0],
                10.0,
                Point::new(5.0, 5.0),
                Point::new(2.0, 2.0),
                Point::new(9.0, 9.0),
            );
            ("whole-plane", s, d, |r| matches!(r, PairwiseRegion::WholePlane))
        },
    ];
    for (name, s, d, expect) in &cases {
        let region = pairwise_region(s, d, 0, 1).unwrap();
        assert!(expect(&region), "case {name}: got {region:?}");
        let mut rng = ChaCha8Rng::seed_from_u64(62_000);
        let samples: Vec<Point> = (0..10_000)
            .map(|_| Point::new(rng.gen_range(0.0..=10.0), rng.gen_range(0.0..=10.0)))
            .collect();
        let agreement = membership_agreement(s, &d, &samples).unwrap();
        assert!(agreement >= 0.999, "case {name}: agreement {agreement}");
    }
    println!("criterion 06 (membership agreement >= 0.999, all five region kinds): PASS");
}

#[test]
fn c07_fc_increment_desk_check() {
    let start = Instant::now();
    let cfg = BruteForceConfig { step: 0.01, ..Default::default() };
    let omega = || ConvexPolygon::rect(0.0, 0.0, 1.0, 1e-3).unwrap();

    let two_ap =
        Scenario::new(omega(), None, 2, 1, vec![1.0, 1.0], vec![1.0, 1.0], 1.0).unwrap();
    let report2 = own_pool(|| fc_increment_check(&two_ap, &[1.0, 1.0], &cfg)).unwrap();
    assert!(
        report2.extended.distortion < report2.base.distortion,
        "2-AP: {} !< {}",
        report2.extended.distortion,
        report2.base.distortion
    );
    assert!(report2.extended_fc_volumes.iter().all(|&v| v > 0.0), "2-AP: an FC carries no mass");
    // Closed forms for this instance: with one FC the optimum places the
    // APs at 0.5 -+ 1/8 around the centered FC, D = 5/96; with two FCs it
    // collapses to the plain two-cell quantizer, D = 1/48.
    assert!(
        (report2.base.distortion - 5.0 / 96.0).abs() <= 1e-3,
        "2-AP one-FC optimum {} vs analytic 5/96",
        report2.base.distortion
    );
    assert!(
        (report2.extended.distortion - 1.0 / 48.0).abs() <= 1e-3,
        "2-AP two-FC optimum {} vs analytic 1/48",
        report2.extended.distortion
    );

    let three_ap = Scenario::new(
        omega(),
        None,
        3,
        1,
        vec![1.0, 2.0, 1.0],
        vec![1.0, 1.0, 2.0],
        1.0,
    )
    .unwrap();
    let report3 = own_pool(|| fc_increment_check(&three_ap, &[2.0, 1.0, 1.0], &cfg)).unwrap();
    assert!(
        report3.extended.distortion < report3.base.distortion,
        "3-AP: {} !< {}",
        report3.extended.distortion,
        report3.base.distortion
    );
    assert!(report3.extended_fc_volumes.iter().all(|&v| v > 0.0), "3-AP: an FC carries no mass");

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(300), "took {elapsed:?}, budget 5 min");
    println!(
        "criterion 07 (extra FC strictly improves, all FCs loaded): PASS ({elapsed:?}, \
         2-AP {} -> {}, 3-AP {} -> {})",
        report2.base.distortion,
        report2.extended.distortion,
        report3.base.distortion,
        report3.extended.distortion
    );
}

#[test]
fn c08_comparative_performance() {
    let fx = fixture();
    let mean = |runs: &[FixtureRun], preset: &str, beta: f64| -> f64 {
        let vals: Vec<f64> = runs
            .iter()
            .filter(|r| r.preset == preset && r.beta == beta)
            .map(|r| r.trace.final_distortion())
            .collect();
        assert_eq!(vals.len(), 10, "{preset} beta {beta}");
        vals.iter().sum::<f64>() / vals.len() as f64
    };

    for preset in PRESETS {
        let ours = mean(&fx.httl, preset, 0.25);
        let base = mean(&fx.baseline, preset, 0.25);
        assert!(
            ours <= base,
            "{preset} beta 0.25: descent mean {ours} exceeds baseline mean {base}"
        );
    }
    let gap_low = mean(&fx.baseline, "wsn1", 0.05) - mean(&fx.httl, "wsn1", 0.05);
    let gap_high = mean(&fx.baseline, "wsn1", 0.45) - mean(&fx.httl, "wsn1", 0.45);
    assert!(
        gap_high >= gap_low,
        "gap should widen with beta: {gap_low} at 0.05 vs {gap_high} at 0.45"
    );

    // FC coverage at descent optima (reported, not asserted: the descent
    // may stop in local minima where an FC ends up starved, unlike
    // brute-force-verified global optima).
    let mut starved = 0usize;
    for run in fx.httl.iter().filter(|r| r.trace.converged) {
        let s = scenario(run.preset, run.beta);
        let d = &run.trace.final_deployment;
        let covered = (0..s.n_fcs()).all(|fc| {
            (0..s.n_aps()).any(|n| d.t[n] == fc && run.trace.final_moments.v[n] > 0.0)
        });
        if !covered {
            starved += 1;
        }
    }
    println!(
        "criterion 08 (beats baseline on means; gap widens with beta): PASS \
         (gap {gap_low:.4} -> {gap_high:.4}; {starved} converged runs left an FC without mass)"
    );
}

#[test]
fn c09_gradient_matches_finite_differences() {
    let s = scenario("wsn2", 0.25);
    let g = Integrator::midpoint(256);
    let h = 1e-4 * s.omega().diameter();

    let eval = |d: &Deployment, p: &[Point], q: &[Point]| -> f64 {
        let moved = Deployment { p: p.to_vec(), q: q.to_vec(), t: d.t.clone() };
        distortion_with_assignment(&s, &moved, &g, owner_assignment(&s, d))
            .unwrap()
            .distortion
    };

    for trial in 0..20u64 {
        let d = random_deployment(&s, 90_000 + trial);
        let m = cell_moments(&s, &d, &g).unwrap();
        let (ap_res, fc_res) = gradient_residual(&s, &d, &m);

        for n in 0..s.n_aps() {
            let mut grad = [0.0f64; 2];
            for (axis, slot) in grad.iter_mut().enumerate() {
                let mut plus = d.p.clone();
                let mut minus = d.p.clone();
                if axis == 0 {
                    plus[n].x += h;
                    minus[n].x -= h;
                } else {
                    plus[n].y += h;
                    minus[n].y -= h;
                }
                *slot = (eval(&d, &plus, &d.q) - eval(&d, &minus, &d.q)) / (2.0 * h);
            }
            let fd = (grad[0] * grad[0] + grad[1] * grad[1]).sqrt();
            let tol = (1e-2 * ap_res[n]).max(1e-4);
            assert!(
                (fd - ap_res[n]).abs() <= tol,
                "trial {trial} AP {}: analytic {} vs fd {fd}",
                n + 1,
                ap_res[n]
            );
        }
        for fc in 0..s.n_fcs() {
            let mut grad = [0.0f64; 2];
            for (axis, slot) in grad.iter_mut().enumerate() {
                let mut plus = d.q.clone();
                let mut minus = d.q.clone();
                if axis == 0 {
                    plus[fc].x += h;
                    minus[fc].x -= h;
                } else {
                    plus[fc].y += h;
                    minus[fc].y -= h;
                }
                *slot = (eval(&d, &d.p, &plus) - eval(&d, &d.p, &minus)) / (2.0 * h);
            }
            let fd = (grad[0] * grad[0] + grad[1] * grad[1]).sqrt();
            let tol = (1e-2 * fc_res[fc]).max(1e-4);
            assert!(
                (fd - fc_res[fc]).abs() <= tol,
                "trial {trial} FC {}: analytic {} vs fd {fd}",
                fc + 1,
                fc_res[fc]
            );
        }
    }
    println!("criterion 09 (analytic gradients match finite differences): PASS");
}

#[test]
fn c10_reproducible_experiment_outputs() {
    let run_once = |dir: &std::path::Path| {
        let spec = ExperimentSpec {
            scenario: ScenarioSource::Preset("wsn1".into()),
            betas: vec![0.25],
            seeds: vec![1, 2, 3],
            algorithms: vec![Algorithm::Httl, Algorithm::NearestFcLloyd],
            out_dir: dir.to_path_buf(),
            epsilon: None,
            max_iters: None,
            grid_resolution: Some(256),
        };
        let out = run_experiment(&spec).unwrap();
        (
            std::fs::read(out.summary_path).unwrap(),
            std::fs::read(out.means_path).unwrap(),
        )
    };
    let dir1 = tempfile::tempdir().unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    let (summary1, means1) = run_once(dir1.path());
    let (summary2, means2) = run_once(dir2.path());
    assert_eq!(summary1, summary2, "summary files differ between identical runs");
    assert_eq!(means1, means2, "means files differ between identical runs");
    println!("criterion 10 (byte-identical experiment outputs): PASS");
}
