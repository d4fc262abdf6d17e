//! The four-step descent loop: index-map update, partition/moment refresh,
//! FC relocation, AP relocation, with convergence tracking.
//!
//! Each iteration performs exactly one quadrature pass (the moment
//! refresh); the objective after the moves is evaluated over that frozen
//! partition through the parallel-axis identity, which is exact for the
//! quadrature sum. Every step provably never increases the discrete
//! objective, so recorded distortion traces are non-increasing up to
//! floating-point rounding.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::IntegrateError;
use crate::geom::Point;
use crate::integrate::{build_blocks, extended_moments, CellMoments, Integrator};
use crate::scenario::{Deployment, Scenario};
use crate::voronoi::best_fc;

/// Loop controls. `epsilon` is the relative-drop stopping threshold,
/// `seed` drives the uniform-random initialization (ignored when an
/// initial deployment is provided).
#[derive(Clone, Copy, Debug)]
pub struct HttlConfig {
    pub epsilon: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for HttlConfig {
    fn default() -> Self {
        HttlConfig { epsilon: 1e-5, max_iters: 100, seed: 1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    RelativeDrop,
    MaxIters,
}

/// One trace row. Row 0 records the initial deployment; rows >= 1 record
/// the state after that iteration's full four-step pass, evaluated over
/// the partition refreshed in that iteration.
#[derive(Clone, Debug)]
pub struct IterationRecord {
    pub iter: usize,
    pub distortion: f64,
    pub sensor_power: f64,
    pub ap_power: f64,
    pub max_ap_res: f64,
    pub max_fc_res: f64,
    /// Wall time of the four steps (index map, moments, FC move, AP move).
    pub step_ms: [f64; 4],
}

/// Full optimization trace plus the final state.
#[derive(Clone, Debug)]
pub struct RunTrace {
    pub iterations: Vec<IterationRecord>,
    pub final_deployment: Deployment,
    /// Moments of the partition used for the final placement (the last
    /// step-two refresh). The final AP positions are exact convex
    /// combinations of these centroids and their FCs.
    pub final_moments: CellMoments,
    pub converged: bool,
    pub stop_reason: StopReason,
}

impl RunTrace {
    pub fn final_distortion(&self) -> f64 {
        self.iterations.last().expect("trace has at least the initial row").distortion
    }

    pub fn iters_run(&self) -> usize {
        self.iterations.last().map(|r| r.iter).unwrap_or(0)
    }

    pub fn trace_csv_header() -> &'static str {
        "iter,distortion,sensor_power,ap_power,max_ap_res,max_fc_res"
    }

    pub fn trace_csv(&self) -> String {
        let mut out = String::from(Self::trace_csv_header());
        out.push('\n');
        for r in &self.iterations {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.iter, r.distortion, r.sensor_power, r.ap_power, r.max_ap_res, r.max_fc_res
            ));
        }
        out
    }

    /// Final deployment as CSV rows `kind,index,x,y,assigned_fc,volume`
    /// (one-based indices; FC rows carry their total assigned volume).
    pub fn deployment_csv(&self, s: &Scenario) -> String {
        let mut out = String::from("kind,index,x,y,assigned_fc,volume\n");
        let d = &self.final_deployment;
        for (n, p) in d.p.iter().enumerate() {
            out.push_str(&format!(
                "ap,{},{},{},{},{}\n",
                n + 1,
                p.x,
                p.y,
                d.t[n] + 1,
                self.final_moments.v[n]
            ));
        }
        for (m, q) in d.q.iter().enumerate() {
            let volume: f64 =
                (0..s.n_aps()).filter(|&n| d.t[n] == m).map(|n| self.final_moments.v[n]).sum();
            out.push_str(&format!("fc,{},{},{},,{}\n", m + 1, q.x, q.y, volume));
        }
        out
    }
}

/// Optimal index map for the current positions: `t[n] = argmin_m
/// b[n][m] |p_n - q_m|^2`, ties toward the smaller index.
pub fn update_index_map(s: &Scenario, d: &Deployment) -> Vec<usize> {
    (0..s.n_aps()).map(|n| best_fc(s, n, d.p[n], &d.q)).collect()
}

/// FC relocation: each FC moves to the b-and-volume weighted mean of its
/// assigned APs. FCs with no assigned mass keep their position.
pub fn update_fc_positions(s: &Scenario, d: &Deployment, m: &CellMoments) -> Vec<Point> {
    let mut num = vec![Point::new(0.0, 0.0); s.n_fcs()];
    let mut den = vec![0.0; s.n_fcs()];
    for n in 0..s.n_aps() {
        let w = s.b_of(n, d.t[n]) * m.v[n];
        num[d.t[n]].x += w * d.p[n].x;
        num[d.t[n]].y += w * d.p[n].y;
        den[d.t[n]] += w;
    }
    (0..s.n_fcs())
        .map(|i| if den[i] > 0.0 { Point::new(num[i].x / den[i], num[i].y / den[i]) } else { d.q[i] })
        .collect()
}

/// AP relocation: each AP moves onto the segment between its cell centroid
/// and its FC. APs owning no mass are parked on their FC.
pub fn update_ap_positions(s: &Scenario, d: &Deployment, m: &CellMoments) -> Vec<Point> {
    (0..s.n_aps())
        .map(|n| {
            let q = d.q[d.t[n]];
            match m.c[n] {
                Some(c) => {
                    let a = s.a_of(n);
                    let bb = s.beta() * s.b_of(n, d.t[n]);
                    Point::new((a * c.x + bb * q.x) / (a + bb), (a * c.y + bb * q.y) / (a + bb))
                }
                None => q,
            }
        })
        .collect()
}

/// Runs the descent loop from a random initialization (or from `init` when
/// provided) until the relative distortion drop falls below
/// `cfg.epsilon` or `cfg.max_iters` iterations complete.
///
/// Panics if the config violates its invariants (`epsilon > 0`,
/// `max_iters >= 1`).
pub fn httl_run(
    s: &Scenario,
    g: &Integrator,
    cfg: &HttlConfig,
    init: Option<Deployment>,
) -> Result<RunTrace, IntegrateError> {
    assert!(cfg.epsilon > 0.0, "epsilon must be positive, got {}", cfg.epsilon);
    assert!(cfg.max_iters >= 1, "max_iters must be at least 1");
    let blocks = build_blocks(s, g)?;
    let mut d = init.unwrap_or_else(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Deployment::random_uniform(s, &mut rng)
    });

    // Initial evaluation over the initial partition.
    let mut moments = extended_moments(s, &d, &blocks);
    let report = moments.evaluate(s, &d.p, &d.q, &d.t);
    let (ap_res, fc_res) = crate::integrate::gradient_residual(s, &d, &moments.cell_moments());
    let mut iterations = vec![IterationRecord {
        iter: 0,
        distortion: report.distortion,
        sensor_power: report.sensor_power,
        ap_power: report.ap_power,
        max_ap_res: max_of(&ap_res),
        max_fc_res: max_of(&fc_res),
        step_ms: [0.0; 4],
    }];
    let mut d_old = report.distortion;
    let mut converged = false;
    let mut stop_reason = StopReason::MaxIters;

    for iter in 1..=cfg.max_iters {
        // (i) index map
        let t0 = Instant::now();
        d.t = update_index_map(s, &d);
        let ms_index = t0.elapsed().as_secs_f64() * 1e3;

        // (ii) partition refresh: volumes and centroids
        let t1 = Instant::now();
        moments = extended_moments(s, &d, &blocks);
        let ms_moments = t1.elapsed().as_secs_f64() * 1e3;

        // (iii) FC relocation
        let t2 = Instant::now();
        d.q = update_fc_positions(s, &d, &moments.cell_moments());
        let ms_fc = t2.elapsed().as_secs_f64() * 1e3;

        // (iv) AP relocation
        let t3 = Instant::now();
        d.p = update_ap_positions(s, &d, &moments.cell_moments());
        let ms_ap = t3.elapsed().as_secs_f64() * 1e3;

        let report = moments.evaluate(s, &d.p, &d.q, &d.t);
        let cm = moments.cell_moments();
        let (ap_res, fc_res) = crate::integrate::gradient_residual(s, &d, &cm);
        iterations.push(IterationRecord {
            iter,
            distortion: report.distortion,
            sensor_power: report.sensor_power,
            ap_power: report.ap_power,
            max_ap_res: max_of(&ap_res),
            max_fc_res: max_of(&fc_res),
            step_ms: [ms_index, ms_moments, ms_fc, ms_ap],
        });

        let drop = if d_old > 0.0 { (d_old - report.distortion) / d_old } else { 0.0 };
        d_old = report.distortion;
        if drop < cfg.epsilon {
            converged = true;
            stop_reason = StopReason::RelativeDrop;
            break;
        }
    }

    Ok(RunTrace {
        iterations,
        final_deployment: d,
        final_moments: moments.cell_moments(),
        converged,
        stop_reason,
    })
}

/// Applies the four steps one at a time and reports the change in the
/// discrete objective after each. The index-map delta is taken at the old
/// partition, the partition delta compares old vs refreshed cells, and
/// both relocation deltas are taken at the refreshed partition. All four
/// must be nonpositive up to rounding.
pub fn step_monotonicity_probe(
    s: &Scenario,
    d: &Deployment,
    g: &Integrator,
) -> Result<[f64; 4], IntegrateError> {
    let blocks = build_blocks(s, g)?;

    let moments_old = extended_moments(s, d, &blocks);
    let d0 = moments_old.evaluate(s, &d.p, &d.q, &d.t).distortion;

    let t_new = update_index_map(s, d);
    let d1 = moments_old.evaluate(s, &d.p, &d.q, &t_new).distortion;

    let with_t = Deployment { p: d.p.clone(), q: d.q.clone(), t: t_new.clone() };
    let moments_new = extended_moments(s, &with_t, &blocks);
    let d2 = moments_new.evaluate(s, &with_t.p, &with_t.q, &with_t.t).distortion;

    let q_new = update_fc_positions(s, &with_t, &moments_new.cell_moments());
    let d3 = moments_new.evaluate(s, &with_t.p, &q_new, &with_t.t).distortion;

    let moved = Deployment { p: with_t.p.clone(), q: q_new.clone(), t: t_new };
    let p_new = update_ap_positions(s, &moved, &moments_new.cell_moments());
    let d4 = moments_new.evaluate(s, &p_new, &q_new, &moved.t).distortion;

    Ok([d1 - d0, d2 - d1, d3 - d2, d4 - d3])
}

fn max_of(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(0.0, f64::max)
}
