//! Simplified comparison baselines.
//!
//! `nearest_fc_lloyd` is plain Lloyd descent that ignores the
//! heterogeneous weights and the relay penalty when partitioning: cells
//! are unweighted nearest-AP regions, each AP moves to its cell centroid,
//! each FC to the plain mean of its assigned APs, and APs connect to their
//! nearest FC. Its traces report the true two-tier objective of the
//! deployments it visits, so runs are directly comparable with the
//! optimizer, but the baseline is labeled as the simplification it is.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::IntegrateError;
use crate::geom::Point;
use crate::integrate::{
    build_blocks, extended_moments_with, quadrature_nodes, Integrator, EMPTY_CELL_VOLUME,
};
use crate::optimizer::{HttlConfig, IterationRecord, RunTrace, StopReason};
use crate::scenario::{Deployment, Scenario};

/// Owner under multiplicative weighting only: `argmin_n a_n |p_n - w|^2`,
/// ties toward the smaller index. Ignores the additive relay penalty.
#[inline]
pub fn mw_owner(s: &Scenario, d: &Deployment, w: Point) -> usize {
    let mut best = 0usize;
    let mut best_cost = s.a_of(0) * d.p[0].dist2(w);
    for n in 1..s.n_aps() {
        let c = s.a_of(n) * d.p[n].dist2(w);
        if c < best_cost {
            best = n;
            best_cost = c;
        }
    }
    best
}

/// Multiplicatively weighted partition of the quadrature nodes: the cell
/// index of every node, in the fixed node enumeration order.
pub fn mw_partition_grid(
    s: &Scenario,
    d: &Deployment,
    g: &Integrator,
) -> Result<Vec<usize>, IntegrateError> {
    Ok(quadrature_nodes(s, g)?.into_iter().map(|(w, _)| mw_owner(s, d, w)).collect())
}

#[inline]
fn nearest_ap(p: &[Point], w: Point) -> usize {
    let mut best = 0usize;
    let mut best_d = p[0].dist2(w);
    for (n, pn) in p.iter().enumerate().skip(1) {
        let dn = pn.dist2(w);
        if dn < best_d {
            best = n;
            best_d = dn;
        }
    }
    best
}

#[inline]
fn nearest_fc(q: &[Point], p: Point) -> usize {
    let mut best = 0usize;
    let mut best_d = q[0].dist2(p);
    for (m, qm) in q.iter().enumerate().skip(1) {
        let dm = qm.dist2(p);
        if dm < best_d {
            best = m;
            best_d = dm;
        }
    }
    best
}

/// Classic Lloyd baseline. Positions are initialized exactly like the
/// optimizer for the same seed, so runs pair up; only the update rules
/// differ. Stopping uses the relative drop of the baseline's own
/// quantizer objective; the recorded rows carry the two-tier objective.
pub fn nearest_fc_lloyd(
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
    d.t = (0..s.n_aps()).map(|n| nearest_fc(&d.q, d.p[n])).collect();

    let kmeans_objective = |m: &crate::integrate::ExtendedMoments, p: &[Point]| -> f64 {
        (0..p.len())
            .map(|n| {
                let c = m.c[n].unwrap_or(p[n]);
                m.second_about_c[n] + p[n].dist2(c) * m.v[n]
            })
            .sum()
    };

    let mut moments = {
        let p = d.p.clone();
        extended_moments_with(s, &blocks, move |_, w| nearest_ap(&p, w))
    };
    let report = moments.evaluate(s, &d.p, &d.q, &d.t);
    let (ap_res, fc_res) = crate::integrate::gradient_residual(s, &d, &moments.cell_moments());
    let mut iterations = vec![IterationRecord {
        iter: 0,
        distortion: report.distortion,
        sensor_power: report.sensor_power,
        ap_power: report.ap_power,
        max_ap_res: ap_res.iter().copied().fold(0.0, f64::max),
        max_fc_res: fc_res.iter().copied().fold(0.0, f64::max),
        step_ms: [0.0; 4],
    }];
    let mut objective_old = kmeans_objective(&moments, &d.p);
    let mut converged = false;
    let mut stop_reason = StopReason::MaxIters;

    for iter in 1..=cfg.max_iters {
        d.t = (0..s.n_aps()).map(|n| nearest_fc(&d.q, d.p[n])).collect();
        moments = {
            let p = d.p.clone();
            extended_moments_with(s, &blocks, move |_, w| nearest_ap(&p, w))
        };

        // FC -> plain mean of assigned AP positions.
        let mut num = vec![Point::new(0.0, 0.0); s.n_fcs()];
        let mut cnt = vec![0usize; s.n_fcs()];
        for n in 0..s.n_aps() {
            num[d.t[n]].x += d.p[n].x;
            num[d.t[n]].y += d.p[n].y;
            cnt[d.t[n]] += 1;
        }
        for m in 0..s.n_fcs() {
            if cnt[m] > 0 {
                d.q[m] = Point::new(num[m].x / cnt[m] as f64, num[m].y / cnt[m] as f64);
            }
        }

        // AP -> centroid of its nearest-AP cell (empty cells stay put).
        for n in 0..s.n_aps() {
            if let Some(c) = moments.c[n] {
                if moments.v[n] > EMPTY_CELL_VOLUME {
                    d.p[n] = c;
                }
            }
        }

        let report = moments.evaluate(s, &d.p, &d.q, &d.t);
        let cm = moments.cell_moments();
        let (ap_res, fc_res) = crate::integrate::gradient_residual(s, &d, &cm);
        iterations.push(IterationRecord {
            iter,
            distortion: report.distortion,
            sensor_power: report.sensor_power,
            ap_power: report.ap_power,
            max_ap_res: ap_res.iter().copied().fold(0.0, f64::max),
            max_fc_res: fc_res.iter().copied().fold(0.0, f64::max),
            step_ms: [0.0; 4],
        });

        let objective_new = kmeans_objective(&moments, &d.p);
        let drop = if objective_old > 0.0 {
            (objective_old - objective_new) / objective_old
        } else {
            0.0
        };
        objective_old = objective_new;
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
