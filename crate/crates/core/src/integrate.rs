//! Numerical integration of the density over the implicit Voronoi cells:
//! volumes, centroids, per-tier powers and the two-tier objective.
//!
//! Cells are never extracted as explicit boundaries. Every integral is a
//! quadrature sum over nodes of the target region; each node is assigned
//! to a cell (normally by [`crate::voronoi::owner`]) and accumulated.
//! Accumulation is blocked by grid row, partial sums are merged in fixed
//! block order, so results are bit-identical across runs and independent
//! of the rayon thread count.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::IntegrateError;
use crate::geom::Point;
use crate::scenario::{Deployment, Scenario};
use crate::voronoi::CostModel;

/// Minimum grid resolution / sample count accepted by the integrators.
pub const MIN_RESOLUTION: usize = 16;

/// Cells with less mass than this are treated as empty and get no centroid.
pub const EMPTY_CELL_VOLUME: f64 = 1e-12;

/// Deterministic quadrature rule over the target region.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Integrator {
    /// Midpoint rule on a `resolution` x `resolution` grid over omega's
    /// bounding box, with nodes outside the polygon masked away.
    MidpointGrid { resolution: usize },
    /// Uniform rejection sampling of `samples` points from the bounding
    /// box; deterministic for a fixed seed.
    MonteCarlo { samples: usize, seed: u64 },
}

impl Integrator {
    pub fn midpoint(resolution: usize) -> Self {
        Integrator::MidpointGrid { resolution }
    }

    pub fn validate(&self) -> Result<(), IntegrateError> {
        let got = match self {
            Integrator::MidpointGrid { resolution } => *resolution,
            Integrator::MonteCarlo { samples, .. } => *samples,
        };
        if got < MIN_RESOLUTION {
            return Err(IntegrateError::ResolutionTooSmall { got, min: MIN_RESOLUTION });
        }
        Ok(())
    }
}

/// One contiguous run of quadrature nodes (a grid row, or a Monte Carlo
/// chunk), carrying its offset into the global node enumeration.
pub(crate) struct Block {
    pub start: usize,
    pub pts: Vec<Point>,
    pub mass: Vec<f64>,
}

pub(crate) struct QuadBlocks {
    pub blocks: Vec<Block>,
}

impl QuadBlocks {
    pub fn total_mass(&self) -> f64 {
        self.blocks.iter().map(|b| b.mass.iter().sum::<f64>()).sum()
    }
}

pub(crate) fn build_blocks(s: &Scenario, g: &Integrator) -> Result<QuadBlocks, IntegrateError> {
    g.validate()?;
    let omega = s.omega();
    let bb = omega.bounding_box();
    let mut blocks = Vec::new();
    let mut start = 0usize;
    match *g {
        Integrator::MidpointGrid { resolution } => {
            let dx = bb.width() / resolution as f64;
            let dy = bb.height() / resolution as f64;
            let cell_area = dx * dy;
            for iy in 0..resolution {
                let y = bb.min.y + (iy as f64 + 0.5) * dy;
                let mut pts = Vec::new();
                let mut mass = Vec::new();
                for ix in 0..resolution {
                    let w = Point::new(bb.min.x + (ix as f64 + 0.5) * dx, y);
                    if omega.contains(w) {
                        pts.push(w);
                        mass.push(s.density().eval(w) * cell_area);
                    }
                }
                if !pts.is_empty() {
                    let len = pts.len();
                    blocks.push(Block { start, pts, mass });
                    start += len;
                }
            }
        }
        Integrator::MonteCarlo { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let weight = bb.width() * bb.height() / samples as f64;
            const CHUNK: usize = 8192;
            let mut pts = Vec::new();
            let mut mass = Vec::new();
            for _ in 0..samples {
                let w = Point::new(
                    bb.min.x + rng.gen::<f64>() * bb.width(),
                    bb.min.y + rng.gen::<f64>() * bb.height(),
                );
                if omega.contains(w) {
                    pts.push(w);
                    mass.push(s.density().eval(w) * weight);
                    if pts.len() == CHUNK {
                        blocks.push(Block {
                            start,
                            pts: std::mem::take(&mut pts),
                            mass: std::mem::take(&mut mass),
                        });
                        start += CHUNK;
                    }
                }
            }
            if !pts.is_empty() {
                blocks.push(Block { start, pts, mass });
            }
        }
    }
    Ok(QuadBlocks { blocks })
}

/// The quadrature nodes and masses in their fixed enumeration order.
pub fn quadrature_nodes(s: &Scenario, g: &Integrator) -> Result<Vec<(Point, f64)>, IntegrateError> {
    let blocks = build_blocks(s, g)?;
    Ok(blocks
        .blocks
        .iter()
        .flat_map(|b| b.pts.iter().copied().zip(b.mass.iter().copied()))
        .collect())
}

/// Total density mass over omega under the given quadrature (used to check
/// that densities are normalized).
pub fn density_mass(s: &Scenario, g: &Integrator) -> Result<f64, IntegrateError> {
    Ok(build_blocks(s, g)?.total_mass())
}

/// Per-cell volume (density mass) and centroid; empty cells carry `None`.
#[derive(Clone, Debug)]
pub struct CellMoments {
    pub v: Vec<f64>,
    pub c: Vec<Option<Point>>,
}

/// Moments extended with the second moment about the centroid, enough to
/// evaluate the objective at any node positions over a frozen partition.
#[derive(Clone, Debug)]
pub(crate) struct ExtendedMoments {
    pub v: Vec<f64>,
    pub c: Vec<Option<Point>>,
    /// `integral of |c_n - w|^2 f(w) dw` over cell n (0 for empty cells).
    pub second_about_c: Vec<f64>,
}

impl ExtendedMoments {
    pub fn cell_moments(&self) -> CellMoments {
        CellMoments { v: self.v.clone(), c: self.c.clone() }
    }

    /// Evaluates the objective for positions `(p, q, t)` over the frozen
    /// partition these moments were computed from, via the parallel-axis
    /// identity. Exact (up to rounding) for the underlying quadrature sum.
    pub fn evaluate(&self, s: &Scenario, p: &[Point], q: &[Point], t: &[usize]) -> PowerReport {
        let n = s.n_aps();
        let mut per_cell = vec![0.0; n];
        let mut sensor = 0.0;
        let mut ap = 0.0;
        for i in 0..n {
            let v = self.v[i];
            let c = self.c[i].unwrap_or(p[i]);
            let sensor_i = s.a_of(i) * (self.second_about_c[i] + p[i].dist2(c) * v);
            let ap_i = s.b_of(i, t[i]) * p[i].dist2(q[t[i]]) * v;
            sensor += sensor_i;
            ap += ap_i;
            per_cell[i] = sensor_i + s.beta() * ap_i;
        }
        PowerReport { sensor_power: sensor, ap_power: ap, distortion: sensor + s.beta() * ap, per_cell }
    }
}

struct MomentPartial {
    v: Vec<f64>,
    sx: Vec<f64>,
    sy: Vec<f64>,
    m2: Vec<f64>,
}

/// Extended moments of the partition induced by `assign` (cell index per
/// quadrature node). `assign` receives the global node index and position.
pub(crate) fn extended_moments_with<A>(
    s: &Scenario,
    blocks: &QuadBlocks,
    assign: A,
) -> ExtendedMoments
where
    A: Fn(usize, Point) -> usize + Sync,
{
    let n = s.n_aps();
    let partials: Vec<MomentPartial> = blocks
        .blocks
        .par_iter()
        .map(|block| {
            let mut p = MomentPartial {
                v: vec![0.0; n],
                sx: vec![0.0; n],
                sy: vec![0.0; n],
                m2: vec![0.0; n],
            };
            for (k, (&w, &mass)) in block.pts.iter().zip(&block.mass).enumerate() {
                let cell = assign(block.start + k, w);
                p.v[cell] += mass;
                p.sx[cell] += mass * w.x;
                p.sy[cell] += mass * w.y;
                p.m2[cell] += mass * w.norm2();
            }
            p
        })
        .collect();

    let mut v = vec![0.0; n];
    let mut sx = vec![0.0; n];
    let mut sy = vec![0.0; n];
    let mut m2 = vec![0.0; n];
    for p in partials {
        for i in 0..n {
            v[i] += p.v[i];
            sx[i] += p.sx[i];
            sy[i] += p.sy[i];
            m2[i] += p.m2[i];
        }
    }

    let mut c = Vec::with_capacity(n);
    let mut second = Vec::with_capacity(n);
    for i in 0..n {
        if v[i] >= EMPTY_CELL_VOLUME {
            let ci = Point::new(sx[i] / v[i], sy[i] / v[i]);
            c.push(Some(ci));
            // Parallel axis: integral |c-w|^2 = integral |w|^2 - v |c|^2.
            second.push((m2[i] - v[i] * ci.norm2()).max(0.0));
        } else {
            c.push(None);
            second.push(0.0);
        }
    }
    ExtendedMoments { v, c, second_about_c: second }
}

pub(crate) fn extended_moments(
    s: &Scenario,
    d: &Deployment,
    blocks: &QuadBlocks,
) -> ExtendedMoments {
    let cm = CostModel::new(s, d);
    extended_moments_with(s, blocks, |_, w| cm.owner(w))
}

/// Volumes and centroids of the generalized Voronoi cells of `d`.
pub fn cell_moments(
    s: &Scenario,
    d: &Deployment,
    g: &Integrator,
) -> Result<CellMoments, IntegrateError> {
    let blocks = build_blocks(s, g)?;
    Ok(extended_moments(s, d, &blocks).cell_moments())
}

/// Two-tier power breakdown of a deployment.
#[derive(Clone, Debug)]
pub struct PowerReport {
    pub sensor_power: f64,
    pub ap_power: f64,
    pub distortion: f64,
    pub per_cell: Vec<f64>,
}

impl PowerReport {
    pub fn csv_header() -> &'static str {
        "iter,distortion,sensor_power,ap_power"
    }

    pub fn csv_row(&self, iter: usize) -> String {
        format!("{},{},{},{}", iter, self.distortion, self.sensor_power, self.ap_power)
    }
}

struct DirectPartial {
    sensor: Vec<f64>,
    v: Vec<f64>,
}

/// Direct evaluation of the objective with an arbitrary node-to-cell
/// assignment: the sensor term is summed pointwise, the relay term uses
/// the accumulated cell masses.
pub fn distortion_with_assignment<A>(
    s: &Scenario,
    d: &Deployment,
    g: &Integrator,
    assign: A,
) -> Result<PowerReport, IntegrateError>
where
    A: Fn(usize, Point) -> usize + Sync,
{
    let blocks = build_blocks(s, g)?;
    Ok(distortion_with_assignment_on(s, d, &blocks, assign))
}

pub(crate) fn distortion_with_assignment_on<A>(
    s: &Scenario,
    d: &Deployment,
    blocks: &QuadBlocks,
    assign: A,
) -> PowerReport
where
    A: Fn(usize, Point) -> usize + Sync,
{
    let n = s.n_aps();
    let partials: Vec<DirectPartial> = blocks
        .blocks
        .par_iter()
        .map(|block| {
            let mut p = DirectPartial { sensor: vec![0.0; n], v: vec![0.0; n] };
            for (k, (&w, &mass)) in block.pts.iter().zip(&block.mass).enumerate() {
                let cell = assign(block.start + k, w);
                p.sensor[cell] += mass * s.a_of(cell) * d.p[cell].dist2(w);
                p.v[cell] += mass;
            }
            p
        })
        .collect();

    let mut sensor_per = vec![0.0; n];
    let mut v = vec![0.0; n];
    for p in partials {
        for i in 0..n {
            sensor_per[i] += p.sensor[i];
            v[i] += p.v[i];
        }
    }
    let mut per_cell = vec![0.0; n];
    let mut sensor = 0.0;
    let mut ap = 0.0;
    for i in 0..n {
        let ap_i = s.b_of(i, d.t[i]) * d.p[i].dist2(d.q[d.t[i]]) * v[i];
        sensor += sensor_per[i];
        ap += ap_i;
        per_cell[i] = sensor_per[i] + s.beta() * ap_i;
    }
    PowerReport { sensor_power: sensor, ap_power: ap, distortion: sensor + s.beta() * ap, per_cell }
}

/// Assignment closure that freezes the Voronoi partition of `d`.
pub fn owner_assignment<'a>(
    s: &'a Scenario,
    d: &'a Deployment,
) -> impl Fn(usize, Point) -> usize + Sync + 'a {
    let cm = CostModel::new(s, d);
    move |_, w| cm.owner(w)
}

/// Total sensor-tier transmit power over the Voronoi partition of `d`.
pub fn sensor_power(s: &Scenario, d: &Deployment, g: &Integrator) -> Result<f64, IntegrateError> {
    Ok(distortion_with_assignment(s, d, g, owner_assignment(s, d))?.sensor_power)
}

/// Total AP-tier transmit power over the Voronoi partition of `d`.
pub fn ap_power(s: &Scenario, d: &Deployment, g: &Integrator) -> Result<f64, IntegrateError> {
    Ok(distortion_with_assignment(s, d, g, owner_assignment(s, d))?.ap_power)
}

/// Two-tier distortion of `d` over its Voronoi partition (direct route).
pub fn distortion(s: &Scenario, d: &Deployment, g: &Integrator) -> Result<PowerReport, IntegrateError> {
    distortion_with_assignment(s, d, g, owner_assignment(s, d))
}

/// Two-tier distortion via the parallel-axis decomposition: the second
/// moment about each supplied centroid is integrated directly, then the
/// offset and relay terms are added per cell.
pub fn distortion_parallel_axis(
    s: &Scenario,
    d: &Deployment,
    g: &Integrator,
    m: &CellMoments,
) -> Result<f64, IntegrateError> {
    let n = s.n_aps();
    for i in 0..n {
        if m.v[i] >= EMPTY_CELL_VOLUME && m.c[i].is_none() {
            return Err(IntegrateError::MissingCentroid { cell: i, volume: m.v[i] });
        }
    }
    let blocks = build_blocks(s, g)?;
    let cm = CostModel::new(s, d);
    let centroids: Vec<Point> = (0..n).map(|i| m.c[i].unwrap_or(d.p[i])).collect();
    let partials: Vec<Vec<f64>> = blocks
        .blocks
        .par_iter()
        .map(|block| {
            let mut second = vec![0.0; n];
            for (&w, &mass) in block.pts.iter().zip(&block.mass) {
                let cell = cm.owner(w);
                second[cell] += mass * centroids[cell].dist2(w);
            }
            second
        })
        .collect();
    let mut second = vec![0.0; n];
    for p in partials {
        for i in 0..n {
            second[i] += p[i];
        }
    }
    let mut total = 0.0;
    for i in 0..n {
        total += s.a_of(i) * (second[i] + d.p[i].dist2(centroids[i]) * m.v[i])
            + s.beta() * s.b_of(i, d.t[i]) * d.p[i].dist2(d.q[d.t[i]]) * m.v[i];
    }
    Ok(total)
}

/// Norms of the objective gradient with the partition held fixed:
/// `ap_res[n] = |2 (a_n (p_n - c_n) + beta b (p_n - q)) v_n|` and
/// `fc_res[m] = |2 beta sum_{n: t(n)=m} b (q_m - p_n) v_n|`.
pub fn gradient_residual(
    s: &Scenario,
    d: &Deployment,
    m: &CellMoments,
) -> (Vec<f64>, Vec<f64>) {
    let n = s.n_aps();
    let mut ap_res = vec![0.0; n];
    let mut fc_grad = vec![Point::new(0.0, 0.0); s.n_fcs()];
    for i in 0..n {
        let v = m.v[i];
        let c = m.c[i].unwrap_or(d.p[i]);
        let q = d.q[d.t[i]];
        let b = s.b_of(i, d.t[i]);
        let gx = 2.0 * (s.a_of(i) * (d.p[i].x - c.x) + s.beta() * b * (d.p[i].x - q.x)) * v;
        let gy = 2.0 * (s.a_of(i) * (d.p[i].y - c.y) + s.beta() * b * (d.p[i].y - q.y)) * v;
        ap_res[i] = (gx * gx + gy * gy).sqrt();
        let f = 2.0 * s.beta() * b * v;
        fc_grad[d.t[i]].x += f * (q.x - d.p[i].x);
        fc_grad[d.t[i]].y += f * (q.y - d.p[i].y);
    }
    let fc_res = fc_grad.iter().map(|g| g.norm()).collect();
    (ap_res, fc_res)
}
