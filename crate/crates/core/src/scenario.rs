//! Domain model: the deployment scenario (target region, data-rate density,
//! node counts and weights) and node deployments.
//!
//! A `Scenario` fixes the optimization instance: N access points (APs)
//! relay sensor data from their cells to one of M fusion centers (FCs).
//! Sensor-side weights `a[n]` price the sensor-to-AP hop, relay-side
//! weights `b[n][m]` price the AP-to-FC hop, and `beta` trades the two
//! tiers against each other. Both types are immutable after construction
//! and safe to share across threads.

use rand::Rng;

use crate::error::ValidationError;
use crate::geom::{ConvexPolygon, Point, Rect};

/// Data-rate density over the target region, normalized so it integrates
/// to one over omega.
#[derive(Clone, Debug)]
pub enum Density {
    /// Constant density; `value` is fixed to 1/area(omega) at construction.
    Uniform { value: f64 },
    /// Bilinearly interpolated table over omega's bounding box.
    Table(TableDensity),
}

/// Values on an `nx` x `ny` vertex lattice spanning a rectangle, addressed
/// row-major from the bottom-left corner (index `iy * nx + ix`).
#[derive(Clone, Debug)]
pub struct TableDensity {
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
    pub rect: Rect,
}

impl TableDensity {
    fn eval(&self, w: Point) -> f64 {
        let fx = ((w.x - self.rect.min.x) / self.rect.width() * (self.nx - 1) as f64)
            .clamp(0.0, (self.nx - 1) as f64);
        let fy = ((w.y - self.rect.min.y) / self.rect.height() * (self.ny - 1) as f64)
            .clamp(0.0, (self.ny - 1) as f64);
        let ix = (fx as usize).min(self.nx - 2);
        let iy = (fy as usize).min(self.ny - 2);
        let tx = fx - ix as f64;
        let ty = fy - iy as f64;
        let v00 = self.values[iy * self.nx + ix];
        let v10 = self.values[iy * self.nx + ix + 1];
        let v01 = self.values[(iy + 1) * self.nx + ix];
        let v11 = self.values[(iy + 1) * self.nx + ix + 1];
        v00 * (1.0 - tx) * (1.0 - ty) + v10 * tx * (1.0 - ty) + v01 * (1.0 - tx) * ty + v11 * tx * ty
    }
}

impl Density {
    #[inline]
    pub fn eval(&self, w: Point) -> f64 {
        match self {
            Density::Uniform { value } => *value,
            Density::Table(t) => t.eval(w),
        }
    }
}

/// Strong/weak node groups used only for plot styling. Indices are
/// zero-based internally; config files use one-based indices.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StyleGroups {
    pub strong_aps: Vec<usize>,
    pub strong_fcs: Vec<usize>,
}

/// A validated optimization instance.
#[derive(Clone, Debug)]
pub struct Scenario {
    omega: ConvexPolygon,
    density: Density,
    n_aps: usize,
    n_fcs: usize,
    a: Vec<f64>,
    b: Vec<f64>, // row-major N x M
    beta: f64,
    style: Option<StyleGroups>,
}

impl Scenario {
    /// Validates counts, weights and geometry. The uniform density value is
    /// derived from the polygon area here; callers never supply it.
    pub fn new(
        omega: ConvexPolygon,
        density: Option<TableDensity>,
        n_aps: usize,
        n_fcs: usize,
        a: Vec<f64>,
        b: Vec<f64>,
        beta: f64,
    ) -> Result<Self, ValidationError> {
        if n_aps == 0 {
            return Err(ValidationError::NonPositiveCount { field: "n_aps", value: n_aps });
        }
        if n_fcs == 0 {
            return Err(ValidationError::NonPositiveCount { field: "n_fcs", value: n_fcs });
        }
        if n_aps < n_fcs {
            return Err(ValidationError::NodeCounts { n_aps, n_fcs });
        }
        if a.len() != n_aps {
            return Err(ValidationError::WeightLength { field: "a", got: a.len(), expected: n_aps });
        }
        if b.len() != n_aps * n_fcs {
            return Err(ValidationError::WeightLength {
                field: "b",
                got: b.len(),
                expected: n_aps * n_fcs,
            });
        }
        for (i, &w) in a.iter().enumerate() {
            if !(w > 0.0) || !w.is_finite() {
                return Err(ValidationError::NonPositiveWeight { field: "a", index: i, value: w });
            }
        }
        for (i, &w) in b.iter().enumerate() {
            if !(w > 0.0) || !w.is_finite() {
                return Err(ValidationError::NonPositiveWeight { field: "b", index: i, value: w });
            }
        }
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(ValidationError::NegativeBeta { value: beta });
        }
        let density = match density {
            None => Density::Uniform { value: 1.0 / omega.area() },
            Some(t) => {
                if t.nx < 2 || t.ny < 2 {
                    return Err(ValidationError::BadDensity(format!(
                        "table needs nx, ny >= 2, got {}x{}",
                        t.nx, t.ny
                    )));
                }
                if t.values.len() != t.nx * t.ny {
                    return Err(ValidationError::BadDensity(format!(
                        "table has {} values, expected {}",
                        t.values.len(),
                        t.nx * t.ny
                    )));
                }
                if t.values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(ValidationError::BadDensity(
                        "table values must be finite and nonnegative".into(),
                    ));
                }
                if !t.values.iter().any(|v| *v > 0.0) {
                    return Err(ValidationError::BadDensity("table is identically zero".into()));
                }
                Density::Table(TableDensity { rect: omega.bounding_box(), ..t })
            }
        };
        Ok(Scenario { omega, density, n_aps, n_fcs, a, b, beta, style: None })
    }

    pub fn with_style(mut self, style: StyleGroups) -> Self {
        self.style = Some(style);
        self
    }

    /// Same instance with one additional FC whose per-AP relay weights are
    /// `extra_b`; requires that the AP count still dominates the FC count.
    pub fn with_extra_fc(&self, extra_b: &[f64]) -> Result<Self, ValidationError> {
        if extra_b.len() != self.n_aps {
            return Err(ValidationError::WeightLength {
                field: "extra_b",
                got: extra_b.len(),
                expected: self.n_aps,
            });
        }
        let m = self.n_fcs + 1;
        if self.n_aps < m {
            return Err(ValidationError::NodeCounts { n_aps: self.n_aps, n_fcs: m });
        }
        for (i, &w) in extra_b.iter().enumerate() {
            if !(w > 0.0) || !w.is_finite() {
                return Err(ValidationError::NonPositiveWeight {
                    field: "extra_b",
                    index: i,
                    value: w,
                });
            }
        }
        let mut b = Vec::with_capacity(self.n_aps * m);
        for n in 0..self.n_aps {
            b.extend_from_slice(&self.b[n * self.n_fcs..(n + 1) * self.n_fcs]);
            b.push(extra_b[n]);
        }
        Ok(Scenario { n_fcs: m, b, style: None, ..self.clone() })
    }

    /// Same scenario with a different Lagrange multiplier.
    pub fn with_beta(mut self, beta: f64) -> Result<Self, ValidationError> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(ValidationError::NegativeBeta { value: beta });
        }
        self.beta = beta;
        Ok(self)
    }

    pub fn omega(&self) -> &ConvexPolygon {
        &self.omega
    }

    pub fn density(&self) -> &Density {
        &self.density
    }

    pub fn n_aps(&self) -> usize {
        self.n_aps
    }

    pub fn n_fcs(&self) -> usize {
        self.n_fcs
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// Sensor-side weight of AP `n`.
    #[inline(always)]
    pub fn a_of(&self, n: usize) -> f64 {
        self.a[n]
    }

    /// Relay-side weight of the AP `n` -> FC `m` link.
    #[inline(always)]
    pub fn b_of(&self, n: usize, m: usize) -> f64 {
        self.b[n * self.n_fcs + m]
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn style(&self) -> Option<&StyleGroups> {
        self.style.as_ref()
    }
}

/// Node positions plus the AP-to-FC index map. `t[n]` is zero-based
/// internally; all file formats use one-based indices.
#[derive(Clone, Debug, PartialEq)]
pub struct Deployment {
    pub p: Vec<Point>,
    pub q: Vec<Point>,
    pub t: Vec<usize>,
}

impl Deployment {
    /// Uniform-random positions over omega (rejection sampling from the
    /// bounding box, APs first then FCs), with the index map chosen
    /// optimally for the sampled positions.
    pub fn random_uniform<R: Rng>(s: &Scenario, rng: &mut R) -> Deployment {
        let sample = |rng: &mut R| -> Point {
            let bb = s.omega().bounding_box();
            loop {
                let w = Point::new(
                    rng.gen_range(bb.min.x..=bb.max.x),
                    rng.gen_range(bb.min.y..=bb.max.y),
                );
                if s.omega().contains(w) {
                    return w;
                }
            }
        };
        let p: Vec<Point> = (0..s.n_aps()).map(|_| sample(rng)).collect();
        let q: Vec<Point> = (0..s.n_fcs()).map(|_| sample(rng)).collect();
        let t = (0..s.n_aps()).map(|n| crate::voronoi::best_fc(s, n, p[n], &q)).collect();
        Deployment { p, q, t }
    }
}

/// A deployment constraint violation found by [`validate_deployment`].
#[derive(Clone, Debug, PartialEq)]
pub enum DeploymentIssue {
    ApCount { got: usize, expected: usize },
    FcCount { got: usize, expected: usize },
    IndexMapLength { got: usize, expected: usize },
    IndexOutOfRange { ap: usize, fc: usize, n_fcs: usize },
    OutsideBoundingBox { kind: &'static str, index: usize },
}

impl std::fmt::Display for DeploymentIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DeploymentIssue::ApCount { got, expected } => {
                write!(f, "deployment has {got} AP positions, scenario expects {expected}")
            }
            DeploymentIssue::FcCount { got, expected } => {
                write!(f, "deployment has {got} FC positions, scenario expects {expected}")
            }
            DeploymentIssue::IndexMapLength { got, expected } => {
                write!(f, "index map has length {got}, expected {expected}")
            }
            DeploymentIssue::IndexOutOfRange { ap, fc, n_fcs } => {
                write!(f, "index map sends AP {} to FC {}, valid range is 1..={}", ap + 1, fc + 1, n_fcs)
            }
            DeploymentIssue::OutsideBoundingBox { kind, index } => {
                write!(f, "{kind} {} lies outside omega's bounding box", index + 1)
            }
        }
    }
}

/// Collects every constraint violation instead of stopping at the first.
/// An empty list means the deployment is consistent with the scenario.
pub fn validate_deployment(s: &Scenario, d: &Deployment) -> Vec<DeploymentIssue> {
    let mut issues = Vec::new();
    if d.p.len() != s.n_aps() {
        issues.push(DeploymentIssue::ApCount { got: d.p.len(), expected: s.n_aps() });
    }
    if d.q.len() != s.n_fcs() {
        issues.push(DeploymentIssue::FcCount { got: d.q.len(), expected: s.n_fcs() });
    }
    if d.t.len() != s.n_aps() {
        issues.push(DeploymentIssue::IndexMapLength { got: d.t.len(), expected: s.n_aps() });
    }
    for (n, &m) in d.t.iter().enumerate() {
        if m >= s.n_fcs() {
            issues.push(DeploymentIssue::IndexOutOfRange { ap: n, fc: m, n_fcs: s.n_fcs() });
        }
    }
    let bb = s.omega().bounding_box();
    for (i, w) in d.p.iter().enumerate() {
        if !bb.contains(*w) {
            issues.push(DeploymentIssue::OutsideBoundingBox { kind: "AP", index: i });
        }
    }
    for (i, w) in d.q.iter().enumerate() {
        if !bb.contains(*w) {
            issues.push(DeploymentIssue::OutsideBoundingBox { kind: "FC", index: i });
        }
    }
    issues
}

/// Free-space link-budget parameters used to derive the combined weights.
#[derive(Clone, Copy, Debug)]
pub struct PhysicalLayerParams {
    /// Transmitter antenna gain.
    pub g_t: f64,
    /// Receiver antenna gain.
    pub g_r: f64,
    /// Signal wavelength (m).
    pub lambda: f64,
    /// Required SNR threshold at the receiver.
    pub gamma: f64,
    /// Noise power (W).
    pub n0: f64,
    /// Instant transmitter data rate (bits/s).
    pub zeta: f64,
}

/// Combined per-link weight from the free-space link budget.
///
/// Solving `P_r / n0 = gamma` with `P_r = P_t g_t g_r lambda^2 / (16 pi^2 d^2)`
/// for the transmit power at unit distance gives `eta = 16 pi^2 gamma n0 /
/// (g_t g_r lambda^2)`; dividing by the transmitter data rate `zeta` yields
/// the weight that multiplies the squared link distance in the objective.
pub fn derive_weight(params: &PhysicalLayerParams) -> Result<f64, ValidationError> {
    let fields = [
        ("g_t", params.g_t),
        ("g_r", params.g_r),
        ("lambda", params.lambda),
        ("gamma", params.gamma),
        ("n0", params.n0),
        ("zeta", params.zeta),
    ];
    for (name, value) in fields {
        if !(value > 0.0) || !value.is_finite() {
            return Err(ValidationError::NonPositiveParam { name, value });
        }
    }
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let eta = 16.0 * pi2 * params.gamma * params.n0 / (params.g_t * params.g_r * params.lambda * params.lambda);
    Ok(eta / params.zeta)
}
