//! Planar primitives: points, axis-aligned rectangles and convex polygons.
//!
//! The target region is always a convex polygon given as a positively
//! oriented (counter-clockwise) vertex list. Membership tests are
//! boundary-inclusive; everything downstream treats boundaries as
//! measure-zero sets.

use serde::{Deserialize, Serialize};

use crate::error::ValidationError;

/// A point (or vector) in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// Squared Euclidean distance to `other`.
    ///
    /// This is the one distance formula used everywhere (cost evaluation,
    /// ownership, integration), so partitions and tie-breaks stay mutually
    /// consistent at the bit level.
    #[inline(always)]
    pub fn dist2(&self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    #[inline]
    pub fn norm2(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm2().sqrt()
    }

    #[inline]
    pub fn dot(&self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

/// Axis-aligned bounding rectangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn contains(&self, w: Point) -> bool {
        w.x >= self.min.x && w.x <= self.max.x && w.y >= self.min.y && w.y <= self.max.y
    }
}

/// Convex polygon with positively oriented (counter-clockwise) vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexPolygon {
    verts: Vec<Point>,
    area: f64,
    bbox: Rect,
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

impl ConvexPolygon {
    /// Builds a polygon from its vertex list, checking vertex count,
    /// orientation and convexity.
    pub fn new(verts: Vec<Point>) -> Result<Self, ValidationError> {
        if verts.len() < 3 {
            return Err(ValidationError::TooFewVertices { count: verts.len() });
        }
        // Shoelace area; positive means counter-clockwise.
        let mut twice_area = 0.0;
        for i in 0..verts.len() {
            let a = verts[i];
            let b = verts[(i + 1) % verts.len()];
            twice_area += a.x * b.y - b.x * a.y;
        }
        if twice_area <= 0.0 {
            return Err(ValidationError::NotPositivelyOriented);
        }
        // All turns must be left turns (collinear runs allowed).
        for i in 0..verts.len() {
            let o = verts[i];
            let a = verts[(i + 1) % verts.len()];
            let b = verts[(i + 2) % verts.len()];
            if cross(o, a, b) < 0.0 {
                return Err(ValidationError::NotConvex { vertex: (i + 1) % verts.len() });
            }
        }
        let mut bbox = Rect { min: verts[0], max: verts[0] };
        for v in &verts {
            bbox.min.x = bbox.min.x.min(v.x);
            bbox.min.y = bbox.min.y.min(v.y);
            bbox.max.x = bbox.max.x.max(v.x);
            bbox.max.y = bbox.max.y.max(v.y);
        }
        Ok(ConvexPolygon { area: twice_area * 0.5, verts, bbox })
    }

    /// Convenience constructor for an axis-aligned rectangle.
    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self, ValidationError> {
        ConvexPolygon::new(vec![
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ])
    }

    pub fn vertices(&self) -> &[Point] {
        &self.verts
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn bounding_box(&self) -> Rect {
        self.bbox
    }

    /// Maximum pairwise vertex distance; for a convex polygon this is the
    /// true diameter of the region.
    pub fn diameter(&self) -> f64 {
        let mut best: f64 = 0.0;
        for i in 0..self.verts.len() {
            for j in i + 1..self.verts.len() {
                best = best.max(self.verts[i].dist2(self.verts[j]));
            }
        }
        best.sqrt()
    }

    /// Exact centroid of the polygon (area-weighted, shoelace form).
    pub fn centroid(&self) -> Point {
        let mut cx = 0.0;
        let mut cy = 0.0;
        for i in 0..self.verts.len() {
            let a = self.verts[i];
            let b = self.verts[(i + 1) % self.verts.len()];
            let w = a.x * b.y - b.x * a.y;
            cx += (a.x + b.x) * w;
            cy += (a.y + b.y) * w;
        }
        let scale = 1.0 / (6.0 * self.area);
        Point::new(cx * scale, cy * scale)
    }

    /// Boundary-inclusive membership test (left-of-every-edge for a CCW
    /// polygon), with a bounding-box fast reject.
    #[inline]
    pub fn contains(&self, w: Point) -> bool {
        if !self.bbox.contains(w) {
            return false;
        }
        for i in 0..self.verts.len() {
            let a = self.verts[i];
            let b = self.verts[(i + 1) % self.verts.len()];
            if cross(a, b, w) < 0.0 {
                return false;
            }
        }
        true
    }

    /// True if the polygon is an axis-aligned rectangle (any vertex order
    /// that reduces to 4 corners).
    pub fn is_axis_aligned_rect(&self) -> bool {
        if self.verts.len() != 4 {
            return false;
        }
        self.verts.iter().all(|v| {
            (v.x == self.bbox.min.x || v.x == self.bbox.max.x)
                && (v.y == self.bbox.min.y || v.y == self.bbox.max.y)
        })
    }
}

/// Distance from `w` to the segment `[a, b]`.
pub fn dist_to_segment(w: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm2();
    if len2 == 0.0 {
        return (w - a).norm();
    }
    let t = ((w - a).dot(ab) / len2).clamp(0.0, 1.0);
    (w - (a + ab * t)).norm()
}
