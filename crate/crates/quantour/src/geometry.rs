//! Plane geometry for quantile regions: direction grids on the unit circle,
//! orthonormal complements, projections, and convex region construction by
//! halfplane intersection (Sutherland–Hodgman clipping against a bounding box).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for "is a unit vector" checks.
pub const UNIT_TOL: f64 = 1e-12;

/// Boundary tolerance for point-in-polygon tests (perpendicular distance).
pub const CONTAINS_TOL: f64 = 1e-9;

pub type Vec2 = [f64; 2];

#[inline]
pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
fn cross(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm(a: Vec2) -> f64 {
    dot(a, a).sqrt()
}

/// A unit direction `u` on the circle together with its position in the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub u: Vec2,
    pub index: usize,
}

impl Direction {
    pub fn new(u: Vec2, index: usize) -> Result<Self> {
        if (norm(u) - 1.0).abs() > UNIT_TOL {
            return Err(Error::Parameter(format!(
                "direction must be a unit vector, got norm {}",
                norm(u)
            )));
        }
        Ok(Self { u, index })
    }

    /// The orthonormal complement, fixed as the +90° rotation of `u`.
    pub fn complement(&self) -> Vec2 {
        [-self.u[1], self.u[0]]
    }
}

/// Equally spaced unit directions covering the full circle:
/// `u_j = (cos(2πj/m), sin(2πj/m))`, j = 0..m−1.
pub fn direction_grid(m: usize) -> Result<Vec<Direction>> {
    if m < 3 {
        return Err(Error::Parameter(format!("direction grid needs m >= 3, got {m}")));
    }
    Ok((0..m)
        .map(|j| {
            let angle = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
            Direction { u: [angle.cos(), angle.sin()], index: j }
        })
        .collect())
}

/// The +90° rotation `Γ_u = (−u₂, u₁)`, so that `(u, Γ_u)` is a right-handed
/// orthonormal basis (determinant +1).
pub fn orthonormal_complement(u: Vec2) -> Result<Vec2> {
    if (norm(u) - 1.0).abs() > UNIT_TOL {
        return Err(Error::Parameter(format!(
            "orthonormal complement requires a unit vector, got norm {}",
            norm(u)
        )));
    }
    Ok([-u[1], u[0]])
}

/// Project standardized responses onto the direction basis:
/// `y_u[i] = uᵀz_i`, `y_perp[i] = Γ_uᵀz_i`.
pub fn project(z: &[Vec2], dir: &Direction) -> (Vec<f64>, Vec<f64>) {
    let gamma = dir.complement();
    let mut y_u = Vec::with_capacity(z.len());
    let mut y_perp = Vec::with_capacity(z.len());
    for &row in z {
        y_u.push(dot(dir.u, row));
        y_perp.push(dot(gamma, row));
    }
    (y_u, y_perp)
}

/// A closed upper halfplane `{y : cᵀy ≥ d}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Halfplane {
    pub normal: Vec2,
    pub offset: f64,
}

impl Halfplane {
    pub fn new(normal: Vec2, offset: f64) -> Self {
        debug_assert!(norm(normal) > 0.0, "halfplane normal must be nonzero");
        Self { normal, offset }
    }

    /// Signed slack `cᵀy − d`; nonnegative inside.
    #[inline]
    pub fn slack(&self, y: Vec2) -> f64 {
        dot(self.normal, y) - self.offset
    }

    #[inline]
    pub fn contains(&self, y: Vec2) -> bool {
        self.slack(y) >= 0.0
    }

    /// Perpendicular distance from `y` to the boundary line.
    pub fn boundary_distance(&self, y: Vec2) -> f64 {
        self.slack(y).abs() / norm(self.normal)
    }
}

/// The fitted directional quantile halfspace `{y : uᵀy − b̂·Γ_uᵀy ≥ xᵀβ̂}`,
/// i.e. normal `c = u − b̂·Γ_u` and offset `xᵀβ̂`. Since `Γ_u ⟂ u`, the normal
/// is never zero and `‖c‖² = 1 + b̂²`.
pub fn halfplane_from_fit(dir: &Direction, b_hat: f64, xbeta: f64) -> Halfplane {
    let gamma = dir.complement();
    Halfplane::new([dir.u[0] - b_hat * gamma[0], dir.u[1] - b_hat * gamma[1]], xbeta)
}

/// A convex polygon with counterclockwise vertex order; may be empty.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    vertices: Vec<Vec2>,
}

impl Polygon {
    /// Builds from vertices assumed convex; normalizes to counterclockwise
    /// order and drops duplicate consecutive vertices.
    pub fn new(vertices: Vec<Vec2>) -> Self {
        let mut p = Self { vertices };
        p.dedup();
        if p.signed_area() < 0.0 {
            p.vertices.reverse();
        }
        p
    }

    pub fn empty() -> Self {
        Self { vertices: Vec::new() }
    }

    /// Axis-aligned rectangle, counterclockwise.
    pub fn rect(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Self {
        Self { vertices: vec![[xmin, ymin], [xmax, ymin], [xmax, ymax], [xmin, ymax]] }
    }

    /// Axis-aligned square `[-half, half]²` used as the clipping universe.
    pub fn bounding_square(half: f64) -> Self {
        Self::rect(-half, -half, half, half)
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() < 3
    }

    fn signed_area(&self) -> f64 {
        if self.vertices.len() < 3 {
            return 0.0;
        }
        let n = self.vertices.len();
        let mut acc = 0.0;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            acc += cross(a, b);
        }
        acc / 2.0
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn centroid(&self) -> Option<Vec2> {
        if self.is_empty() {
            return None;
        }
        let n = self.vertices.len();
        let a = self.signed_area();
        if a.abs() < 1e-300 {
            // Degenerate sliver: fall back to the vertex mean.
            let mut cx = 0.0;
            let mut cy = 0.0;
            for v in &self.vertices {
                cx += v[0];
                cy += v[1];
            }
            return Some([cx / n as f64, cy / n as f64]);
        }
        let mut cx = 0.0;
        let mut cy = 0.0;
        for i in 0..n {
            let p = self.vertices[i];
            let q = self.vertices[(i + 1) % n];
            let w = cross(p, q);
            cx += (p[0] + q[0]) * w;
            cy += (p[1] + q[1]) * w;
        }
        Some([cx / (6.0 * a), cy / (6.0 * a)])
    }

    fn dedup(&mut self) {
        if self.vertices.len() < 2 {
            return;
        }
        let mut out: Vec<Vec2> = Vec::with_capacity(self.vertices.len());
        for &v in &self.vertices {
            if let Some(&last) = out.last() {
                if (v[0] - last[0]).abs() < 1e-12 && (v[1] - last[1]).abs() < 1e-12 {
                    continue;
                }
            }
            out.push(v);
        }
        if out.len() >= 2 {
            let (first, last) = (out[0], *out.last().unwrap());
            if (first[0] - last[0]).abs() < 1e-12 && (first[1] - last[1]).abs() < 1e-12 {
                out.pop();
            }
        }
        self.vertices = out;
    }

    /// Clip against one halfplane (one Sutherland–Hodgman pass).
    pub fn clip_halfplane(&self, h: &Halfplane) -> Polygon {
        if self.is_empty() {
            return Polygon::empty();
        }
        let n = self.vertices.len();
        let mut out: Vec<Vec2> = Vec::with_capacity(n + 1);
        for i in 0..n {
            let s = self.vertices[i];
            let e = self.vertices[(i + 1) % n];
            let sc = h.slack(s);
            let ec = h.slack(e);
            let s_in = sc >= 0.0;
            let e_in = ec >= 0.0;
            match (s_in, e_in) {
                (true, true) => out.push(e),
                (true, false) => {
                    if let Some(p) = intersect_edge(s, e, sc, ec) {
                        out.push(p);
                    }
                }
                (false, true) => {
                    if let Some(p) = intersect_edge(s, e, sc, ec) {
                        out.push(p);
                    }
                    out.push(e);
                }
                (false, false) => {}
            }
        }
        let mut poly = Polygon { vertices: out };
        poly.dedup();
        if poly.vertices.len() < 3 {
            return Polygon::empty();
        }
        poly
    }

    /// Intersection with another convex polygon (clip against its edges).
    pub fn intersect_convex(&self, other: &Polygon) -> Polygon {
        if self.is_empty() || other.is_empty() {
            return Polygon::empty();
        }
        let n = other.vertices.len();
        let mut result = self.clone();
        for i in 0..n {
            let a = other.vertices[i];
            let b = other.vertices[(i + 1) % n];
            // Inward normal of a counterclockwise edge a→b.
            let normal = [-(b[1] - a[1]), b[0] - a[0]];
            let h = Halfplane::new(normal, dot(normal, a));
            result = result.clip_halfplane(&h);
            if result.is_empty() {
                return Polygon::empty();
            }
        }
        result
    }

    /// Closed membership test with boundary tolerance on perpendicular distance.
    pub fn contains(&self, y: Vec2, tol: f64) -> bool {
        if self.is_empty() {
            return false;
        }
        let n = self.vertices.len();
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let edge = [b[0] - a[0], b[1] - a[1]];
            let rel = [y[0] - a[0], y[1] - a[1]];
            let c = cross(edge, rel);
            let len = norm(edge);
            if len > 0.0 && c < -tol * len {
                return false;
            }
        }
        true
    }
}

fn intersect_edge(s: Vec2, e: Vec2, sc: f64, ec: f64) -> Option<Vec2> {
    let denom = sc - ec;
    if denom.abs() < 1e-300 {
        return None;
    }
    let t = sc / denom;
    Some([s[0] + (e[0] - s[0]) * t, s[1] + (e[1] - s[1]) * t])
}

/// Intersect halfplanes within a finite convex bounding polygon.
///
/// Clips `bbox` successively against each halfplane; the result is convex,
/// counterclockwise, and possibly empty (a valid outcome, not an error).
pub fn intersect_halfplanes(hs: &[Halfplane], bbox: &Polygon) -> Polygon {
    let mut poly = bbox.clone();
    for h in hs {
        poly = poly.clip_halfplane(h);
        if poly.is_empty() {
            return Polygon::empty();
        }
    }
    poly
}

/// Membership in a convex polygon with the default boundary tolerance.
pub fn contains(p: &Polygon, y: Vec2) -> bool {
    p.contains(y, CONTAINS_TOL)
}

/// Area of the symmetric difference of two convex polygons:
/// `|A| + |B| − 2·|A ∩ B|`.
pub fn symmetric_difference_area(a: &Polygon, b: &Polygon) -> f64 {
    a.area() + b.area() - 2.0 * a.intersect_convex(b).area()
}
