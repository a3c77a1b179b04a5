//! Grid representation of compact planar sets, distance transforms, boundary
//! extraction and metric projection.

pub mod contour;
pub mod edt;
pub mod grid;
pub mod polyline;
pub mod shape;

use std::sync::OnceLock;

pub use contour::extract_boundary;
pub use edt::{distance_transform, DistanceField, DistanceFieldPair};
pub use grid::{build_grid_set, GridSet, Mode};
pub use polyline::{BoundaryPolyline, Nearest};
pub use shape::{Comb, CombSequence, Rect, ShapeSpec};

use crate::error::{Error, Result};
use crate::region::Region;
use crate::vec2::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Outer,
    Inner,
}

/// Nearest boundary point of an off-boundary point.
#[derive(Debug, Clone, Copy)]
pub struct Projection {
    pub p: Vec2,
    /// Unit normal in the outward convention: `(z - p)/d` outside, `(p - z)/d` inside.
    pub u: Vec2,
    pub d: f64,
    pub on_skeleton: bool,
    /// Boundary segment carrying `p`.
    pub seg: u32,
    /// True when `p` is a segment endpoint rather than an interior point.
    pub at_vertex: bool,
}

/// A grid set together with its continuum boundary and (lazily) its distance fields.
///
/// Point queries (membership, distance, projection) are answered against the
/// boundary polyline, which resolves positions below the cell size.
#[derive(Debug)]
pub struct SetGeometry {
    pub grid: GridSet,
    pub boundary: BoundaryPolyline,
    fields: OnceLock<DistanceFieldPair>,
}

/// Skeleton tolerance in units of the grid spacing.
pub const SKELETON_TOL_CELLS: f64 = 2.0;

impl SetGeometry {
    pub fn new(grid: GridSet) -> Result<Self> {
        let boundary = extract_boundary(&grid)?;
        Ok(SetGeometry { grid, boundary, fields: OnceLock::new() })
    }

    pub fn from_shape(shape: &ShapeSpec, h: f64, margin: f64) -> Result<Self> {
        SetGeometry::new(build_grid_set(shape, h, margin)?)
    }

    pub fn h(&self) -> f64 {
        self.grid.h
    }

    pub fn mode(&self) -> Mode {
        self.grid.mode
    }

    pub fn is_solid(&self) -> bool {
        self.grid.mode == Mode::Solid
    }

    /// Exact grid distance fields, computed on first use.
    pub fn fields(&self) -> &DistanceFieldPair {
        self.fields.get_or_init(|| distance_transform(&self.grid))
    }

    pub fn nearest(&self, z: Vec2) -> Option<Nearest> {
        self.boundary.nearest(z)
    }

    /// Continuum membership (closed set). Boundary sets have empty interior.
    pub fn inside(&self, z: Vec2) -> bool {
        self.boundary.inside(z)
    }

    /// Distance from `z` to the boundary.
    pub fn boundary_distance(&self, z: Vec2) -> f64 {
        self.nearest(z).map_or(f64::INFINITY, |n| n.dist)
    }

    /// Distance from `z` to the set (zero inside).
    pub fn distance(&self, z: Vec2) -> f64 {
        match self.nearest(z) {
            Some(n) if self.boundary.inside_with(z, &n) => 0.0,
            Some(n) => n.dist,
            None => f64::INFINITY,
        }
    }

    fn raw_projection(&self, z: Vec2) -> Option<(Nearest, bool)> {
        let n = self.nearest(z)?;
        let inside = self.boundary.closed && self.boundary.inside_with(z, &n);
        Some((n, inside))
    }

    /// Metric projection onto `F` (outer side) or `F*` (inner side).
    pub fn metric_projection(&self, z: Vec2, side: Side) -> Result<Projection> {
        if !self.grid.bbox().contains(z) {
            return Err(Error::OutOfDomain);
        }
        if side == Side::Inner && !self.is_solid() {
            return Err(Error::ModeViolation("inner projection needs a solid set".into()));
        }
        let (n, inside) = self.raw_projection(z).ok_or(Error::EmptySet)?;
        if n.dist == 0.0 || (side == Side::Outer) == inside {
            return Err(Error::OnSet);
        }
        let diff = z - n.point;
        let u = match side {
            Side::Outer => diff * (1.0 / n.dist),
            Side::Inner => diff * (-1.0 / n.dist),
        };
        Ok(Projection {
            p: n.point,
            u,
            d: n.dist,
            on_skeleton: self.on_skeleton(z, n.point, n.dist),
            seg: n.seg,
            at_vertex: n.param <= 0.0 || n.param >= 1.0,
        })
    }

    /// Skeleton test: the projection jumps by more than `max(2 tau, d)` under
    /// perturbations of size `tau = 2h`.
    pub fn on_skeleton(&self, z: Vec2, p: Vec2, d: f64) -> bool {
        let tau = SKELETON_TOL_CELLS * self.h();
        let limit = (2.0 * tau).max(d);
        [Vec2::new(tau, 0.0), Vec2::new(-tau, 0.0), Vec2::new(0.0, tau), Vec2::new(0.0, -tau)]
            .iter()
            .any(|&w| self.nearest(z + w).is_some_and(|n| n.point.dist(p) > limit))
    }
}

impl Region for SetGeometry {
    fn contains(&self, z: Vec2) -> bool {
        self.inside(z)
    }
    fn safe_radius(&self, z: Vec2) -> f64 {
        self.boundary_distance(z)
    }
    fn bounds(&self) -> Option<Rect> {
        Some(self.grid.bbox())
    }
    fn probe(&self, z: Vec2) -> (bool, f64) {
        match self.nearest(z) {
            Some(n) => (self.boundary.inside_with(z, &n), n.dist),
            None => (false, f64::INFINITY),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(h: f64) -> SetGeometry {
        SetGeometry::from_shape(&ShapeSpec::Disk { center: Vec2::ZERO, radius: 1.0 }, h, 1.0).unwrap()
    }

    #[test]
    fn disk_projection_outside() {
        let g = disk(1.0 / 256.0);
        let p = g.metric_projection(Vec2::new(2.0, 0.0), Side::Outer).unwrap();
        assert!(p.p.dist(Vec2::new(1.0, 0.0)) < 1e-3);
        assert!(p.u.dist(Vec2::new(1.0, 0.0)) < 1e-3);
        assert!((p.d - 1.0).abs() < 1e-3);
        assert!(!p.on_skeleton);
    }

    #[test]
    fn square_inner_projection() {
        let sq = ShapeSpec::Rect(Rect::new(Vec2::ZERO, Vec2::new(1.0, 1.0)));
        let g = SetGeometry::from_shape(&sq, 1.0 / 256.0, 0.25).unwrap();
        let p = g.metric_projection(Vec2::new(0.5, 0.25), Side::Inner).unwrap();
        assert!(p.p.dist(Vec2::new(0.5, 0.0)) < 1e-12);
        // outward convention: the inward ray direction is -u
        assert!(p.u.dist(Vec2::new(0.0, -1.0)) < 1e-12);
        assert!((p.d - 0.25).abs() < 1e-12);
        assert!(matches!(g.metric_projection(Vec2::new(0.5, 0.25), Side::Outer), Err(Error::OnSet)));
    }

    #[test]
    fn disk_center_is_skeleton() {
        let g = disk(1.0 / 128.0);
        let p = g.metric_projection(Vec2::new(1e-4, 0.0), Side::Inner).unwrap();
        assert!(p.on_skeleton);
        let q = g.metric_projection(Vec2::new(0.5, 0.0), Side::Inner).unwrap();
        assert!(!q.on_skeleton);
    }
}
