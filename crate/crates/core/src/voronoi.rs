//! Generalized weighted Voronoi geometry.
//!
//! AP `n` claims the points where `a[n]*|p[n]-w|^2 + beta*b[n][t[n]]*
//! |p[n]-q[t[n]]|^2` is minimal. The additive relay term makes cells
//! non-convex, not star-shaped, or even empty, so cells are kept implicit:
//! [`owner`] is the authoritative membership route, and [`pairwise_region`]
//! classifies the pairwise dominance regions (half-space, disk, disk
//! complement, empty, whole plane) for validation and self-tests.

use crate::error::GeometryError;
use crate::geom::Point;
use crate::scenario::{Deployment, Scenario};

/// Combined cost of assigning location `w` to AP `n` under deployment `d`.
///
/// Panics if `n` or the index map entry is out of range.
#[inline]
pub fn cell_cost(s: &Scenario, d: &Deployment, n: usize, w: Point) -> f64 {
    let relay = d.p[n].dist2(d.q[d.t[n]]);
    s.a_of(n) * d.p[n].dist2(w) + s.beta() * s.b_of(n, d.t[n]) * relay
}

/// Index of the AP owning location `w`: the argmin of [`cell_cost`], ties
/// broken toward the smaller index by exact comparison.
#[inline]
pub fn owner(s: &Scenario, d: &Deployment, w: Point) -> usize {
    let mut best = 0usize;
    let mut best_cost = cell_cost(s, d, 0, w);
    for n in 1..s.n_aps() {
        let c = cell_cost(s, d, n, w);
        if c < best_cost {
            best = n;
            best_cost = c;
        }
    }
    best
}

/// Optimal FC for AP `n` at position `p`: argmin over `m` of
/// `b[n][m]*|p-q[m]|^2`, ties toward the smaller index.
#[inline]
pub fn best_fc(s: &Scenario, n: usize, p: Point, q: &[Point]) -> usize {
    let mut best = 0usize;
    let mut best_cost = s.b_of(n, 0) * p.dist2(q[0]);
    for m in 1..q.len() {
        let c = s.b_of(n, m) * p.dist2(q[m]);
        if c < best_cost {
            best = m;
            best_cost = c;
        }
    }
    best
}

/// Precomputed per-deployment cost coefficients for tight integration
/// loops: `cost_n(w) = a[n] * |p[n]-w|^2 + add[n]`.
pub(crate) struct CostModel<'a> {
    a: &'a [f64],
    p: &'a [Point],
    add: Vec<f64>,
}

impl<'a> CostModel<'a> {
    pub fn new(s: &'a Scenario, d: &'a Deployment) -> Self {
        let add = (0..s.n_aps())
            .map(|n| s.beta() * s.b_of(n, d.t[n]) * d.p[n].dist2(d.q[d.t[n]]))
            .collect();
        CostModel { a: s.a(), p: &d.p, add }
    }

    #[inline(always)]
    pub fn cost(&self, n: usize, w: Point) -> f64 {
        self.a[n] * self.p[n].dist2(w) + self.add[n]
    }

    #[inline(always)]
    pub fn owner(&self, w: Point) -> usize {
        let mut best = 0usize;
        let mut best_cost = self.cost(0, w);
        for n in 1..self.p.len() {
            let c = self.cost(n, w);
            if c < best_cost {
                best = n;
                best_cost = c;
            }
        }
        best
    }

}

/// The set where AP `i` beats AP `j`, classified by the sign of
/// `a[i] - a[j]` and of the discriminant `L`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PairwiseRegion {
    /// `a_i = a_j`: the set `{w : A.w + B <= 0}`.
    HalfSpace { a: Point, b: f64 },
    /// `a_i > a_j`, `L >= 0`: closed disk around `center`.
    Disk { center: Point, radius: f64 },
    /// `a_i < a_j`, `L >= 0`: complement of the open disk around `center`.
    DiskComplement { center: Point, radius: f64 },
    /// `a_i > a_j`, `L < 0`: AP `i` beats `j` nowhere.
    Empty,
    /// `a_i < a_j`, `L < 0`: AP `i` beats `j` everywhere.
    WholePlane,
}

impl PairwiseRegion {
    /// Boundary-inclusive membership in the unclipped region (the actual
    /// pairwise cell is this set intersected with omega).
    pub fn contains(&self, w: Point) -> bool {
        match self {
            PairwiseRegion::HalfSpace { a, b } => a.dot(w) + b <= 0.0,
            PairwiseRegion::Disk { center, radius } => w.dist2(*center) <= radius * radius,
            PairwiseRegion::DiskComplement { center, radius } => {
                w.dist2(*center) >= radius * radius
            }
            PairwiseRegion::Empty => false,
            PairwiseRegion::WholePlane => true,
        }
    }
}

/// Classifies the pairwise dominance region of AP `i` against AP `j`.
///
/// With `e_n = beta * b[n][t[n]] * |p[n]-q[t[n]]|^2`, the comparison
/// `cost_i(w) <= cost_j(w)` expands to a linear constraint when
/// `a_i = a_j` and otherwise to a disk (or its complement) with center
/// `c_ij = (a_i p_i - a_j p_j) / (a_i - a_j)` and squared radius
/// `L_ij = a_i a_j |p_i - p_j|^2 / (a_i - a_j)^2 - (e_i - e_j) / (a_i - a_j)`.
pub fn pairwise_region(
    s: &Scenario,
    d: &Deployment,
    i: usize,
    j: usize,
) -> Result<PairwiseRegion, GeometryError> {
    if i == j {
        return Err(GeometryError::SamePair(i));
    }
    let (ai, aj) = (s.a_of(i), s.a_of(j));
    let (pi, pj) = (d.p[i], d.p[j]);
    let ei = s.beta() * s.b_of(i, d.t[i]) * pi.dist2(d.q[d.t[i]]);
    let ej = s.beta() * s.b_of(j, d.t[j]) * pj.dist2(d.q[d.t[j]]);
    if ai == aj {
        let a = Point::new(aj * pj.x - ai * pi.x, aj * pj.y - ai * pi.y);
        let b = (ai * pi.norm2() - aj * pj.norm2() + ei - ej) / 2.0;
        return Ok(PairwiseRegion::HalfSpace { a, b });
    }
    let diff = ai - aj;
    let center = Point::new((ai * pi.x - aj * pj.x) / diff, (ai * pi.y - aj * pj.y) / diff);
    let l = ai * aj * pi.dist2(pj) / (diff * diff) - (ei - ej) / diff;
    Ok(if ai > aj {
        if l >= 0.0 {
            PairwiseRegion::Disk { center, radius: l.sqrt() }
        } else {
            PairwiseRegion::Empty
        }
    } else if l >= 0.0 {
        PairwiseRegion::DiskComplement { center, radius: l.sqrt() }
    } else {
        PairwiseRegion::WholePlane
    })
}

/// Fraction of samples where the intersection-of-pairwise-regions route
/// names exactly the same single owner as [`owner`]. Disagreements only
/// occur on the measure-zero cell boundaries, so values should sit at 1.0
/// for samples kept away from them.
pub fn membership_agreement(
    s: &Scenario,
    d: &Deployment,
    samples: &[Point],
) -> Result<f64, GeometryError> {
    if samples.is_empty() {
        return Err(GeometryError::EmptySampleSet);
    }
    let n = s.n_aps();
    let mut regions = vec![Vec::with_capacity(n.saturating_sub(1)); n];
    for (i, row) in regions.iter_mut().enumerate() {
        for j in 0..n {
            if i != j {
                row.push(pairwise_region(s, d, i, j).expect("distinct indices"));
            }
        }
    }
    let mut agree = 0usize;
    for &w in samples {
        let direct = owner(s, d, w);
        let mut claimants = 0usize;
        let mut claimant = usize::MAX;
        for (i, row) in regions.iter().enumerate() {
            if row.iter().all(|r| r.contains(w)) {
                claimants += 1;
                if claimants > 1 {
                    break;
                }
                claimant = i;
            }
        }
        if claimants == 1 && claimant == direct {
            agree += 1;
        }
    }
    Ok(agree as f64 / samples.len() as f64)
}
