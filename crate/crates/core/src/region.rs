//! Point-membership regions with distance bounds, the common currency of families,
//! the magnification map and quadrature.

use std::sync::Arc;

use crate::gridgeom::{Rect, ShapeSpec};
use crate::vec2::Vec2;

/// A planar set given by membership.
pub trait Region: Send + Sync {
    fn contains(&self, z: Vec2) -> bool;

    /// A lower bound on the distance from `z` to the boundary of the region.
    /// Zero means no information.
    fn safe_radius(&self, _z: Vec2) -> f64 {
        0.0
    }

    /// A box containing the region, if known.
    fn bounds(&self) -> Option<Rect> {
        None
    }

    /// Membership and `safe_radius` together.
    fn probe(&self, z: Vec2) -> (bool, f64) {
        (self.contains(z), self.safe_radius(z))
    }
}

pub type SharedRegion = Arc<dyn Region>;

impl<R: Region + ?Sized> Region for Arc<R> {
    fn contains(&self, z: Vec2) -> bool {
        (**self).contains(z)
    }
    fn safe_radius(&self, z: Vec2) -> f64 {
        (**self).safe_radius(z)
    }
    fn bounds(&self) -> Option<Rect> {
        (**self).bounds()
    }
    fn probe(&self, z: Vec2) -> (bool, f64) {
        (**self).probe(z)
    }
}

impl<R: Region + ?Sized> Region for &R {
    fn contains(&self, z: Vec2) -> bool {
        (**self).contains(z)
    }
    fn safe_radius(&self, z: Vec2) -> f64 {
        (**self).safe_radius(z)
    }
    fn bounds(&self) -> Option<Rect> {
        (**self).bounds()
    }
    fn probe(&self, z: Vec2) -> (bool, f64) {
        (**self).probe(z)
    }
}

impl Region for ShapeSpec {
    fn contains(&self, z: Vec2) -> bool {
        ShapeSpec::contains(self, z)
    }
    fn safe_radius(&self, z: Vec2) -> f64 {
        self.sdf(z).map_or(0.0, f64::abs)
    }
    fn probe(&self, z: Vec2) -> (bool, f64) {
        match self.sdf(z) {
            Some(d) => (d <= 0.0, d.abs()),
            None => (ShapeSpec::contains(self, z), 0.0),
        }
    }
    fn bounds(&self) -> Option<Rect> {
        Some(self.bbox())
    }
}

/// The empty set.
pub struct Empty;

impl Region for Empty {
    fn contains(&self, _z: Vec2) -> bool {
        false
    }
    fn safe_radius(&self, _z: Vec2) -> f64 {
        f64::INFINITY
    }
    fn bounds(&self) -> Option<Rect> {
        Some(Rect::empty())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetOp {
    Union,
    Intersection,
    Difference,
    SymDiff,
}

impl SetOp {
    pub fn apply(self, a: bool, b: bool) -> bool {
        match self {
            SetOp::Union => a || b,
            SetOp::Intersection => a && b,
            SetOp::Difference => a && !b,
            SetOp::SymDiff => a != b,
        }
    }
}

fn box_intersection(a: Rect, b: Rect) -> Rect {
    Rect::new(
        Vec2::new(a.min.x.max(b.min.x), a.min.y.max(b.min.y)),
        Vec2::new(a.max.x.min(b.max.x), a.max.y.min(b.max.y)),
    )
}

/// Binary set operation on two regions.
pub struct Combined<A, B> {
    pub op: SetOp,
    pub a: A,
    pub b: B,
}

impl<A: Region, B: Region> Combined<A, B> {
    pub fn new(op: SetOp, a: A, b: B) -> Self {
        Combined { op, a, b }
    }
}

impl<A: Region, B: Region> Region for Combined<A, B> {
    fn contains(&self, z: Vec2) -> bool {
        let a = self.a.contains(z);
        match self.op {
            SetOp::Intersection | SetOp::Difference if !a => false,
            SetOp::Union if a => true,
            _ => self.op.apply(a, self.b.contains(z)),
        }
    }
    fn safe_radius(&self, z: Vec2) -> f64 {
        self.probe(z).1
    }
    fn bounds(&self) -> Option<Rect> {
        match self.op {
            SetOp::Union | SetOp::SymDiff => Some(self.a.bounds()?.union(self.b.bounds()?)),
            SetOp::Intersection => match (self.a.bounds(), self.b.bounds()) {
                (Some(x), Some(y)) => Some(box_intersection(x, y)),
                (x, y) => x.or(y),
            },
            SetOp::Difference => self.a.bounds(),
        }
    }
    fn probe(&self, z: Vec2) -> (bool, f64) {
        let (ia, ra) = self.a.probe(z);
        let (ib, rb) = self.b.probe(z);
        let inside = self.op.apply(ia, ib);
        // an operand that alone decides membership keeps it for its whole safe ball
        let decides_a = match self.op {
            SetOp::Union => ia,
            SetOp::Intersection | SetOp::Difference => !ia,
            SetOp::SymDiff => false,
        };
        let decides_b = match self.op {
            SetOp::Union => ib,
            SetOp::Intersection => !ib,
            SetOp::Difference => ib,
            SetOp::SymDiff => false,
        };
        let r = match (decides_a, decides_b) {
            (true, true) => ra.max(rb),
            (true, false) => ra,
            (false, true) => rb,
            (false, false) => ra.min(rb),
        };
        (inside, r)
    }
}

/// Membership given by a closure, with an optional distance bound and box.
pub struct FnRegion<F, S = fn(Vec2) -> f64> {
    pub f: F,
    pub safe: Option<S>,
    pub bounds: Option<Rect>,
}

impl<F: Fn(Vec2) -> bool + Send + Sync> FnRegion<F> {
    pub fn new(f: F, bounds: Option<Rect>) -> Self {
        FnRegion { f, safe: None, bounds }
    }
}

impl<F: Fn(Vec2) -> bool + Send + Sync, S: Fn(Vec2) -> f64 + Send + Sync> FnRegion<F, S> {
    pub fn with_safe(f: F, safe: S, bounds: Option<Rect>) -> Self {
        FnRegion { f, safe: Some(safe), bounds }
    }
}

impl<F: Fn(Vec2) -> bool + Send + Sync, S: Fn(Vec2) -> f64 + Send + Sync> Region for FnRegion<F, S> {
    fn contains(&self, z: Vec2) -> bool {
        (self.f)(z)
    }
    fn safe_radius(&self, z: Vec2) -> f64 {
        self.safe.as_ref().map_or(0.0, |s| s(z).max(0.0))
    }
    fn bounds(&self) -> Option<Rect> {
        self.bounds
    }
}

/// Region given by one closure returning membership and safe radius.
pub struct ProbeRegion<P> {
    pub probe: P,
    pub bounds: Option<Rect>,
}

impl<P: Fn(Vec2) -> (bool, f64) + Send + Sync> ProbeRegion<P> {
    pub fn new(probe: P, bounds: Option<Rect>) -> Self {
        ProbeRegion { probe, bounds }
    }
}

impl<P: Fn(Vec2) -> (bool, f64) + Send + Sync> Region for ProbeRegion<P> {
    fn contains(&self, z: Vec2) -> bool {
        (self.probe)(z).0
    }
    fn safe_radius(&self, z: Vec2) -> f64 {
        (self.probe)(z).1.max(0.0)
    }
    fn bounds(&self) -> Option<Rect> {
        self.bounds
    }
    fn probe(&self, z: Vec2) -> (bool, f64) {
        let (c, r) = (self.probe)(z);
        (c, r.max(0.0))
    }
}
