//! Set families `F(eps)` and candidate derivatives predicted for them.

pub mod comb;
pub mod convex;
pub mod split;

use std::sync::Arc;

use rayon::prelude::*;

use crate::bundle::{BundleSample, NormalBundle};
use crate::cylinder::{FiberIntervalSet, SetFamily};
use crate::error::{Error, Result};
use crate::gridgeom::{Comb, GridSet, Rect, SetGeometry, ShapeSpec, Side};
use crate::region::{Combined, Empty, FnRegion, ProbeRegion, SetOp, SharedRegion};
use crate::vec2::Vec2;

pub use comb::{comb_instance, CombInstance};
pub use convex::ConvexBody;
pub use split::{split_instance, BoundarySegments, NormalDecomposition, SplitInstance};

/// Per-sample height profile `g(x, u)` of a subgraph family.
#[derive(Clone)]
pub enum Profile {
    Const(f64),
    /// `c0 + <c, x>`.
    Affine { c0: f64, c: Vec2 },
    /// `h_K(u)`.
    SupportOf(ConvexBody),
    /// `min(r(x, u), 1)`.
    ReachCapped,
    Custom(Arc<dyn Fn(&BundleSample) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for Profile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Profile::Const(c) => write!(f, "Const({c})"),
            Profile::Affine { c0, c } => write!(f, "Affine({c0}, {c:?})"),
            Profile::SupportOf(k) => write!(f, "SupportOf({k:?})"),
            Profile::ReachCapped => f.write_str("ReachCapped"),
            Profile::Custom(_) => f.write_str("Custom"),
        }
    }
}

impl Profile {
    pub fn eval(&self, s: &BundleSample) -> f64 {
        match self {
            Profile::Const(c) => *c,
            Profile::Affine { c0, c } => c0 + c.dot(s.x),
            Profile::SupportOf(k) => k.support(s.u),
            Profile::ReachCapped => s.reach().cap(1.0),
            Profile::Custom(f) => f(s),
        }
    }
}

/// `h_eps(x, u) = eps^power * max(g(x, u), 0)` stamped on outer fibers.
#[derive(Debug, Clone)]
pub struct SubgraphSpec {
    pub profile: Profile,
    pub power: f64,
    /// Declared bound `T` of `max h_eps / eps`.
    pub declared_t: f64,
}

impl SubgraphSpec {
    pub fn height(&self, s: &BundleSample, eps: f64) -> f64 {
        eps.powf(self.power) * self.profile.eval(s).max(0.0)
    }

    /// Derivative `g` of `h_eps` at `eps = 0`.
    pub fn derivative(&self, s: &BundleSample) -> f64 {
        if self.power == 1.0 {
            self.profile.eval(s).max(0.0)
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone)]
pub enum FamilyKind {
    Constant,
    /// `F + eps r B`.
    ParallelBall { radius: f64 },
    /// `F + eps K`.
    ParallelBody(ConvexBody),
    /// `F` together with the subgraph of `h_eps` over the outer normals.
    Subgraph { nb: Arc<NormalBundle>, spec: SubgraphSpec, g_max: f64 },
    /// Comb `F1` with `F2(eps) = [-1, eps] x [0, height]`.
    Comb { comb: Comb, f2: Rect },
    /// `F1 ∪ (F2 + eps shift)`.
    Split { f1: Rect, f2: Rect, shift: Vec2 },
    /// Pointwise set operation on the difference sets.
    Composite { op: SetOp, a: Box<FamilySpec>, b: Box<FamilySpec> },
    /// `eps -> F(scale eps^power)`.
    Reparam { inner: Box<FamilySpec>, scale: f64, power: f64 },
}

#[derive(Debug, Clone)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub base: Arc<SetGeometry>,
}

fn closed_rect(min: Vec2, max: Vec2) -> ShapeSpec {
    ShapeSpec::Rect(Rect::new(min, max))
}

fn shifted(r: Rect, v: Vec2) -> Rect {
    Rect::new(r.min + v, r.max + v)
}

/// `(z - K) ∩ F ≠ ∅` for a polygonal `K`.
fn body_meets(geom: &SetGeometry, k: &ConvexBody, z: Vec2) -> bool {
    let v = k.vertices();
    if v.iter().any(|&p| geom.inside(z - p)) {
        return true;
    }
    if k.edges().iter().any(|&(a, b)| geom.boundary.segment_hits(z - a, z - b)) {
        return true;
    }
    v.len() >= 3 && geom.nearest(z).is_some_and(|n| k.contains(z - n.point))
}

impl FamilySpec {
    pub fn constant(base: Arc<SetGeometry>) -> Self {
        FamilySpec { kind: FamilyKind::Constant, base }
    }

    pub fn parallel_ball(base: Arc<SetGeometry>, radius: f64) -> Self {
        FamilySpec { kind: FamilyKind::ParallelBall { radius }, base }
    }

    /// `F + eps K` for `0 <= eps <= eps_max`.
    pub fn parallel_body(base: Arc<SetGeometry>, k: ConvexBody, eps_max: f64) -> Result<Self> {
        let extent = eps_max * k.diameter().max(k.radius());
        let available = 0.5 * base.grid.margin;
        if extent > available {
            let h = base.h();
            return Err(Error::MarginTooSmall {
                needed: (2.0 * extent / h).ceil() as usize,
                available: (base.grid.margin / h).floor() as usize,
            });
        }
        Ok(match k {
            ConvexBody::Ball { radius } => FamilySpec::parallel_ball(base, radius),
            k => FamilySpec { kind: FamilyKind::ParallelBody(k), base },
        })
    }

    /// Subgraph family with condition (b) checked on the given ε values.
    pub fn subgraph(base: Arc<SetGeometry>, nb: Arc<NormalBundle>, spec: SubgraphSpec, eps: &[f64]) -> Result<Self> {
        if !Arc::ptr_eq(nb.geometry(), &base) {
            return Err(Error::InvalidArgument("bundle belongs to a different geometry".into()));
        }
        let mut observed: f64 = 0.0;
        for &e in eps.iter().filter(|&&e| e > 0.0) {
            for s in nb.samples.iter().filter(|s| s.side == Side::Outer) {
                observed = observed.max(spec.height(s, e) / e);
            }
        }
        if observed > spec.declared_t {
            return Err(Error::ConditionBViolated { observed, declared: spec.declared_t });
        }
        let g_max = nb.samples.iter().map(|s| spec.profile.eval(s).max(0.0)).fold(0.0, f64::max);
        Ok(FamilySpec { kind: FamilyKind::Subgraph { nb, spec, g_max }, base })
    }

    /// `F ∪ {x + t u : 0 < t <= eps (r ∧ 1)}`.
    pub fn local_parallel(base: Arc<SetGeometry>, nb: Arc<NormalBundle>) -> Result<Self> {
        let spec = SubgraphSpec { profile: Profile::ReachCapped, power: 1.0, declared_t: 1.0 };
        FamilySpec::subgraph(base, nb, spec, &[1.0])
    }

    pub fn composite(op: SetOp, a: FamilySpec, b: FamilySpec) -> Result<Self> {
        if !Arc::ptr_eq(&a.base, &b.base) {
            return Err(Error::InvalidArgument("composite families need a common base".into()));
        }
        let base = a.base.clone();
        Ok(FamilySpec { kind: FamilyKind::Composite { op, a: Box::new(a), b: Box::new(b) }, base })
    }

    /// `f(eps) = scale eps^power`.
    pub fn reparam(inner: FamilySpec, scale: f64, power: f64) -> Self {
        let base = inner.base.clone();
        FamilySpec { kind: FamilyKind::Reparam { inner: Box::new(inner), scale, power }, base }
    }

    /// `F(eps)` as a region.
    pub fn region(&self, eps: f64) -> Result<SharedRegion> {
        let g = self.base.clone();
        Ok(match &self.kind {
            FamilyKind::Constant => g,
            FamilyKind::ParallelBall { radius } => {
                let r = eps * radius;
                Arc::new(ProbeRegion::new(
                    move |z| {
                        let s = g.boundary.signed_distance(z);
                        (s <= r, (s - r).abs())
                    },
                    Some(self.base.grid.bbox()),
                ))
            }
            FamilyKind::ParallelBody(k) => {
                let ke = k.scaled(eps);
                let reach = ke.radius();
                let g2 = g.clone();
                Arc::new(FnRegion::with_safe(
                    move |z| body_meets(&g, &ke, z),
                    move |z| g2.boundary_distance(z) - reach,
                    Some(self.base.grid.bbox()),
                ))
            }
            FamilyKind::Subgraph { .. } | FamilyKind::Composite { .. } => {
                Arc::new(Combined::new(SetOp::SymDiff, g, self.a_region(eps)?))
            }
            FamilyKind::Comb { comb, f2 } => {
                let mut parts = vec![ShapeSpec::Comb(comb.clone())];
                if eps > 0.0 || f2.max.x > 0.0 {
                    parts.push(closed_rect(f2.min, Vec2::new(f2.max.x + eps, f2.max.y)));
                }
                Arc::new(ShapeSpec::Union(parts))
            }
            FamilyKind::Split { f1, f2, shift } => {
                let moved = shifted(*f2, *shift * eps);
                Arc::new(ShapeSpec::Union(vec![ShapeSpec::Rect(*f1), ShapeSpec::Rect(moved)]))
            }
            FamilyKind::Reparam { inner, scale, power } => inner.region(scale * eps.powf(*power))?,
        })
    }

    /// `A(eps) = F(eps) △ F` as a region.
    pub fn a_region(&self, eps: f64) -> Result<SharedRegion> {
        let g = self.base.clone();
        Ok(match &self.kind {
            FamilyKind::Constant => Arc::new(Empty),
            FamilyKind::ParallelBall { radius } => {
                let r = eps * radius;
                Arc::new(ProbeRegion::new(
                    move |z| {
                        let s = g.boundary.signed_distance(z);
                        if s <= 0.0 {
                            (false, -s)
                        } else {
                            (s <= r, s.min((s - r).abs()))
                        }
                    },
                    Some(self.base.grid.bbox()),
                ))
            }
            FamilyKind::ParallelBody(_) => Arc::new(Combined::new(SetOp::SymDiff, self.region(eps)?, g)),
            FamilyKind::Split { f1, f2, .. } => {
                let base = ShapeSpec::Union(vec![ShapeSpec::Rect(*f1), ShapeSpec::Rect(*f2)]);
                Arc::new(Combined::new(SetOp::SymDiff, self.region(eps)?, base))
            }
            FamilyKind::Subgraph { nb, spec, g_max } => {
                let band = eps.powf(spec.power) * g_max;
                let (nb, spec) = (nb.clone(), spec.clone());
                Arc::new(ProbeRegion::new(
                    move |z| {
                        let Some(n) = g.nearest(z) else { return (false, f64::INFINITY) };
                        if g.boundary.inside_with(z, &n) {
                            return (false, n.dist);
                        }
                        if n.dist > band {
                            return (false, n.dist - band);
                        }
                        let hit = n.dist > 0.0
                            && nb.fiber_of(z, &n, false).is_some_and(|k| {
                                let s = &nb.samples[k as usize];
                                n.dist <= s.reach().cap(spec.height(s, eps))
                            });
                        (hit, 0.0)
                    },
                    Some(self.base.grid.bbox()),
                ))
            }
            FamilyKind::Comb { comb, f2 } => {
                if eps <= 0.0 {
                    return Ok(Arc::new(Empty));
                }
                let strip = closed_rect(Vec2::new(f2.max.x, f2.min.y), Vec2::new(f2.max.x + eps, f2.max.y));
                Arc::new(Combined::new(SetOp::Difference, strip, ShapeSpec::Comb(comb.clone())))
            }
            FamilyKind::Composite { op, a, b } => Arc::new(Combined::new(*op, a.a_region(eps)?, b.a_region(eps)?)),
            FamilyKind::Reparam { inner, scale, power } => inner.a_region(scale * eps.powf(*power))?,
        })
    }

    /// `F(eps)` materialized by cell-center membership on the base grid.
    pub fn eval(&self, eps: f64) -> Result<GridSet> {
        let grid = &self.base.grid;
        if eps == 0.0 {
            return Ok(grid.clone());
        }
        let region = self.region(eps)?;
        let cells: Vec<bool> =
            (0..grid.nx * grid.ny).into_par_iter().map(|k| region.contains(grid.center_of_index(k))).collect();
        let (nx, ny) = (grid.nx, grid.ny);
        let on_frame = (0..nx).any(|i| cells[i] || cells[(ny - 1) * nx + i])
            || (0..ny).any(|j| cells[j * nx] || cells[j * nx + nx - 1]);
        if on_frame {
            return Err(Error::MarginTooSmall { needed: 1, available: 0 });
        }
        Ok(grid.with_cells(cells))
    }
}

impl SetFamily for FamilySpec {
    fn a_region(&self, eps: f64) -> Result<SharedRegion> {
        FamilySpec::a_region(self, eps)
    }
}

/// `{0 < t <= g(x, u)}` on the outer fibers.
pub fn subgraph_candidate(nb: &Arc<NormalBundle>, spec: &SubgraphSpec) -> FiberIntervalSet {
    let bound = spec.declared_t;
    FiberIntervalSet::from_fn(nb.clone(), bound, |_, s| match s.side {
        Side::Outer => vec![(0.0, spec.derivative(s))],
        Side::Inner => Vec::new(),
    })
}

/// `{0 <= t <= r ∧ 1}` on the outer fibers.
pub fn local_parallel_candidate(nb: &Arc<NormalBundle>) -> FiberIntervalSet {
    FiberIntervalSet::from_fn(nb.clone(), 1.0, |_, s| match s.side {
        Side::Outer => vec![(0.0, s.reach().cap(1.0))],
        Side::Inner => Vec::new(),
    })
}

/// `{0 < t <= h_K(u)} ∪ {h_K(u) <= t < 0}`.
pub fn support_subgraph(nb: &Arc<NormalBundle>, k: &ConvexBody) -> FiberIntervalSet {
    let bound = nb.samples.iter().map(|s| k.support(s.u).abs()).fold(0.0, f64::max);
    FiberIntervalSet::from_fn(nb.clone(), bound, |_, s| {
        let hk = k.support(s.u);
        if hk >= 0.0 {
            vec![(0.0, hk)]
        } else {
            vec![(hk, 0.0)]
        }
    })
}
