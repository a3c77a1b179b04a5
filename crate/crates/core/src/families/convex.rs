//! Convex bodies through their support functions.

use crate::error::{Error, Result};
use crate::vec2::Vec2;

/// A convex body: a Euclidean ball centered at 0, or the convex hull of a
/// counterclockwise vertex list (one vertex for a point, two for a segment).
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexBody {
    Ball { radius: f64 },
    Polygon(Vec<Vec2>),
}

const FACE_TOL: f64 = 1e-12;

impl ConvexBody {
    pub fn unit_ball() -> Self {
        ConvexBody::Ball { radius: 1.0 }
    }

    pub fn point(q: Vec2) -> Self {
        ConvexBody::Polygon(vec![q])
    }

    pub fn segment(a: Vec2, b: Vec2) -> Self {
        if a == b {
            ConvexBody::Polygon(vec![a])
        } else {
            ConvexBody::Polygon(vec![a, b])
        }
    }

    /// Axis-parallel square of the given side centered at `c`.
    pub fn square(c: Vec2, side: f64) -> Self {
        let s = 0.5 * side;
        ConvexBody::Polygon(vec![
            c + Vec2::new(-s, -s),
            c + Vec2::new(s, -s),
            c + Vec2::new(s, s),
            c + Vec2::new(-s, s),
        ])
    }

    /// Convex polygon from vertices in either orientation; collinear vertices are kept.
    pub fn polygon(mut v: Vec<Vec2>) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::InvalidArgument("convex body needs at least one vertex".into()));
        }
        if v.len() <= 2 {
            return Ok(ConvexBody::Polygon(v));
        }
        let n = v.len();
        let turns: Vec<f64> = (0..n).map(|i| (v[(i + 1) % n] - v[i]).cross(v[(i + 2) % n] - v[(i + 1) % n])).collect();
        let scale = v.iter().map(|p| p.norm()).fold(0.0, f64::max).max(1.0);
        let tol = 1e-12 * scale * scale;
        let pos = turns.iter().any(|&t| t > tol);
        let neg = turns.iter().any(|&t| t < -tol);
        if pos && neg {
            return Err(Error::NonConvex);
        }
        if neg {
            v.reverse();
        }
        // a convex polygon winds once
        let winding: f64 = (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum();
        let mut angle = 0.0;
        for i in 0..n {
            let e0 = v[(i + 1) % n] - v[i];
            let e1 = v[(i + 2) % n] - v[(i + 1) % n];
            angle += e0.cross(e1).atan2(e0.dot(e1));
        }
        if winding.abs() > tol && (angle.abs() - 2.0 * std::f64::consts::PI).abs() > 1e-6 {
            return Err(Error::NonConvex);
        }
        Ok(ConvexBody::Polygon(v))
    }

    pub fn vertices(&self) -> &[Vec2] {
        match self {
            ConvexBody::Ball { .. } => &[],
            ConvexBody::Polygon(v) => v,
        }
    }

    /// `h_K(u) = max_{y in K} <y, u>`.
    pub fn support(&self, u: Vec2) -> f64 {
        match self {
            ConvexBody::Ball { radius } => radius * u.norm(),
            ConvexBody::Polygon(v) => v.iter().map(|p| p.dot(u)).fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Largest norm of a point of the face of `K` in direction `u`.
    pub fn face_norm(&self, u: Vec2) -> f64 {
        match self {
            ConvexBody::Ball { radius } => *radius,
            ConvexBody::Polygon(v) => {
                let h = self.support(u);
                v.iter()
                    .filter(|p| p.dot(u) >= h - FACE_TOL * (1.0 + h.abs()))
                    .map(|p| p.norm())
                    .fold(0.0, f64::max)
            }
        }
    }

    /// `max_{y in K} |y|`.
    pub fn radius(&self) -> f64 {
        match self {
            ConvexBody::Ball { radius } => *radius,
            ConvexBody::Polygon(v) => v.iter().map(|p| p.norm()).fold(0.0, f64::max),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            ConvexBody::Ball { radius } => 2.0 * radius,
            ConvexBody::Polygon(v) => {
                let mut d: f64 = 0.0;
                for a in v {
                    for b in v {
                        d = d.max(a.dist(*b));
                    }
                }
                d
            }
        }
    }

    /// Steiner point: vertices weighted by their exterior angles.
    pub fn steiner_point(&self) -> Vec2 {
        match self {
            ConvexBody::Ball { .. } => Vec2::ZERO,
            ConvexBody::Polygon(v) if v.len() == 1 => v[0],
            ConvexBody::Polygon(v) if v.len() == 2 => (v[0] + v[1]) * 0.5,
            ConvexBody::Polygon(v) => {
                let n = v.len();
                let mut acc = Vec2::ZERO;
                let mut total = 0.0;
                for i in 0..n {
                    let e0 = v[i] - v[(i + n - 1) % n];
                    let e1 = v[(i + 1) % n] - v[i];
                    let ext = e0.cross(e1).atan2(e0.dot(e1));
                    acc += v[i] * ext;
                    total += ext;
                }
                acc * (1.0 / total)
            }
        }
    }

    /// Closed-set membership.
    pub fn contains(&self, z: Vec2) -> bool {
        match self {
            ConvexBody::Ball { radius } => z.norm() <= *radius,
            ConvexBody::Polygon(v) => match v.len() {
                1 => z == v[0],
                2 => crate::gridgeom::shape::point_segment_distance(z, v[0], v[1]) == 0.0,
                n => (0..n).all(|i| (v[(i + 1) % n] - v[i]).cross(z - v[i]) >= 0.0),
            },
        }
    }

    /// `c K` for `c >= 0`.
    pub fn scaled(&self, c: f64) -> ConvexBody {
        match self {
            ConvexBody::Ball { radius } => ConvexBody::Ball { radius: c * radius },
            ConvexBody::Polygon(v) => ConvexBody::Polygon(v.iter().map(|&p| p * c).collect()),
        }
    }

    /// Edges of the polygon (none for a point or a ball).
    pub fn edges(&self) -> Vec<(Vec2, Vec2)> {
        match self {
            ConvexBody::Ball { .. } => Vec::new(),
            ConvexBody::Polygon(v) => match v.len() {
                1 => Vec::new(),
                2 => vec![(v[0], v[1])],
                n => (0..n).map(|i| (v[i], v[(i + 1) % n])).collect(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_support() {
        let k = ConvexBody::square(Vec2::ZERO, 1.0);
        let u = Vec2::new(0.6, 0.8);
        assert!((k.support(u) - 0.7).abs() < 1e-15);
        assert!((k.support(Vec2::new(-1.0, 0.0)) - 0.5).abs() < 1e-15);
        assert!((k.face_norm(Vec2::new(1.0, 0.0)) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(k.face_norm(u) >= k.support(u).abs());
        assert_eq!(k.steiner_point(), Vec2::ZERO);
    }

    #[test]
    fn point_and_segment() {
        let q = Vec2::new(0.5, 0.25);
        let p = ConvexBody::point(q);
        assert_eq!(p.support(Vec2::new(-1.0, 0.0)), -0.5);
        let s = ConvexBody::segment(Vec2::new(-0.5, 0.0), Vec2::new(0.5, 0.0));
        assert_eq!(s.support(Vec2::new(0.0, 1.0)), 0.0);
        assert_eq!(s.steiner_point(), Vec2::ZERO);
    }

    #[test]
    fn orientation_and_convexity() {
        let cw = vec![Vec2::new(0.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(1.0, 1.0), Vec2::new(1.0, 0.0)];
        let k = ConvexBody::polygon(cw).unwrap();
        assert!(k.contains(Vec2::new(0.5, 0.5)));
        let dart = vec![Vec2::new(0.0, 0.0), Vec2::new(2.0, 1.0), Vec2::new(0.0, 2.0), Vec2::new(1.0, 1.0)];
        assert_eq!(ConvexBody::polygon(dart), Err(Error::NonConvex));
    }
}
