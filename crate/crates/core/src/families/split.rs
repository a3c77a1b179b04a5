//! Decompositions `F = F1 ∪ F2` along a common boundary piece and the
//! bifurcation (crack opening) instance.

use std::sync::Arc;

use crate::bundle::{sample_bundle, NormalBundle};
use crate::cylinder::fiber::{combine, Interval};
use crate::cylinder::FiberIntervalSet;
use crate::error::{Error, Result};
use crate::families::{convex::ConvexBody, support_subgraph, FamilyKind, FamilySpec};
use crate::gridgeom::shape::point_segment_distance;
use crate::gridgeom::{Rect, SetGeometry, ShapeSpec, Side};
use crate::quadrature::counted_area;
use crate::region::{Combined, ProbeRegion, Region, SetOp};
use crate::vec2::Vec2;

/// A finite union of segments with exact distance queries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundarySegments {
    pub segs: Vec<(Vec2, Vec2)>,
}

impl BoundarySegments {
    pub fn new(segs: Vec<(Vec2, Vec2)>) -> Self {
        BoundarySegments { segs }
    }

    pub fn rect(r: Rect) -> Self {
        let (a, b) = (r.min, r.max);
        let c = [a, Vec2::new(b.x, a.y), b, Vec2::new(a.x, b.y)];
        BoundarySegments { segs: (0..4).map(|i| (c[i], c[(i + 1) % 4])).collect() }
    }

    pub fn extend(&mut self, o: &BoundarySegments) {
        self.segs.extend_from_slice(&o.segs);
    }

    pub fn distance(&self, z: Vec2) -> f64 {
        self.segs.iter().map(|&(a, b)| point_segment_distance(z, a, b)).fold(f64::INFINITY, f64::min)
    }

    pub fn length(&self) -> f64 {
        self.segs.iter().map(|&(a, b)| a.dist(b)).sum()
    }

    pub fn bbox(&self) -> Rect {
        self.segs.iter().fold(Rect::empty(), |r, &(a, b)| r.union(Rect::new(a, a)).union(Rect::new(b, b)))
    }

    /// The closed `r`-neighborhood.
    pub fn collar(&self, r: f64) -> impl Region + '_ {
        ProbeRegion::new(
            move |z| {
                let d = self.distance(z);
                (d <= r, (d - r).abs())
            },
            None,
        )
    }
}

/// Collar volumes governing a decomposition `F = F1 ∪ F2`.
#[derive(Debug, Clone)]
pub struct NormalDecomposition {
    pub f: BoundarySegments,
    pub f1: BoundarySegments,
    pub f2: BoundarySegments,
    /// `∂F1 △ ∂F2`.
    pub sym: BoundarySegments,
    /// `∂F1 ∩ ∂F2`.
    pub common: BoundarySegments,
}

/// Lattice spacing of the collar counts relative to ε.
pub const COLLAR_CELLS_PER_EPS: f64 = 64.0;

impl NormalDecomposition {
    fn window(&self, eps: f64) -> Rect {
        self.f.bbox().union(self.f1.bbox()).union(self.f2.bbox()).inflate(eps)
    }

    fn rate<R: Region>(&self, region: &R, eps: f64) -> f64 {
        counted_area(region, self.window(eps), eps / COLLAR_CELLS_PER_EPS) / eps
    }

    /// `(1/eps) μ((∂F)_eps ∩ (∂F1)_eps ∩ (∂F2)_eps)`.
    pub fn triple_collar(&self, eps: f64) -> f64 {
        let r = Combined::new(
            SetOp::Intersection,
            self.f.collar(eps),
            Combined::new(SetOp::Intersection, self.f1.collar(eps), self.f2.collar(eps)),
        );
        self.rate(&r, eps)
    }

    /// `(1/eps) μ((∂F1 △ ∂F2)_eps ∩ (∂F1 ∩ ∂F2)_eps)`.
    pub fn sym_common_collar(&self, eps: f64) -> f64 {
        let r = Combined::new(SetOp::Intersection, self.sym.collar(eps), self.common.collar(eps));
        self.rate(&r, eps)
    }

    /// `(1/eps) μ(((∂F1)_eps ∩ (∂F2)_eps) \ (∂F1 ∩ ∂F2)_eps)`.
    pub fn off_common_collar(&self, eps: f64) -> f64 {
        let r = Combined::new(
            SetOp::Difference,
            Combined::new(SetOp::Intersection, self.f1.collar(eps), self.f2.collar(eps)),
            self.common.collar(eps),
        );
        self.rate(&r, eps)
    }

    /// The triple-collar sequence; it must decay at least like `sqrt(eps)` between
    /// consecutive ε values.
    pub fn check(&self, eps: &[f64]) -> Result<Vec<f64>> {
        if eps.len() < 2 || eps.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::InvalidArgument("need at least two strictly decreasing ε values".into()));
        }
        let values: Vec<f64> = eps.iter().map(|&e| self.triple_collar(e)).collect();
        let decays = eps
            .windows(2)
            .zip(values.windows(2))
            .all(|(e, v)| v[1] <= v[0] * (e[1] / e[0]).sqrt());
        if decays {
            Ok(values)
        } else {
            Err(Error::NormalDecompositionFails(values))
        }
    }
}

/// Two unit squares side by side; `F2` moves by `eps shift`.
#[derive(Debug, Clone)]
pub struct SplitInstance {
    pub f1: Rect,
    pub f2: Rect,
    pub shift: Vec2,
    pub geom_f: Arc<SetGeometry>,
    pub geom_f1: Arc<SetGeometry>,
    pub geom_f2: Arc<SetGeometry>,
    /// `C = ∂F1 ∪ ∂F2` in boundary mode.
    pub geom_c: Arc<SetGeometry>,
    pub family: FamilySpec,
    pub decomposition: NormalDecomposition,
}

pub fn split_instance(shift: Vec2, h: f64, margin: f64) -> Result<SplitInstance> {
    let f1 = Rect::new(Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0));
    let f2 = Rect::new(Vec2::new(-1.0, 0.0), Vec2::new(0.0, 1.0));
    let f = Rect::new(f2.min, f1.max);
    let geom_f = Arc::new(SetGeometry::from_shape(&ShapeSpec::Rect(f), h, margin)?);
    let geom_f1 = Arc::new(SetGeometry::from_shape(&ShapeSpec::Rect(f1), h, margin)?);
    let geom_f2 = Arc::new(SetGeometry::from_shape(&ShapeSpec::Rect(f2), h, margin)?);
    let outer = ShapeSpec::Polyline(vec![
        f.min,
        Vec2::new(0.0, 0.0),
        Vec2::new(f.max.x, f.min.y),
        f.max,
        Vec2::new(0.0, 1.0),
        Vec2::new(f.min.x, f.max.y),
        f.min,
    ]);
    let crack = ShapeSpec::Polyline(vec![Vec2::new(0.0, 0.0), Vec2::new(0.0, 1.0)]);
    let geom_c = Arc::new(SetGeometry::from_shape(&ShapeSpec::Union(vec![outer, crack]), h, margin)?);
    let family = FamilySpec { kind: FamilyKind::Split { f1, f2, shift }, base: geom_f.clone() };
    let common = BoundarySegments::new(vec![(Vec2::new(0.0, 0.0), Vec2::new(0.0, 1.0))]);
    let bf = BoundarySegments::rect(f);
    let decomposition = NormalDecomposition {
        f: bf.clone(),
        f1: BoundarySegments::rect(f1),
        f2: BoundarySegments::rect(f2),
        sym: bf,
        common,
    };
    Ok(SplitInstance { f1, f2, shift, geom_f, geom_f1, geom_f2, geom_c, family, decomposition })
}

/// Weights entering the support-measure decomposition of `C`.
#[derive(Debug, Clone, Copy)]
pub struct WeightDecomposition {
    pub c_total: f64,
    pub f_outer: f64,
    pub f1_inner: f64,
    pub f2_inner: f64,
}

impl WeightDecomposition {
    pub fn rel_err(&self) -> f64 {
        let rhs = self.f_outer + self.f1_inner + self.f2_inner;
        (self.c_total - rhs).abs() / rhs
    }
}

impl SplitInstance {
    pub fn bundles(&self) -> Result<[Arc<NormalBundle>; 4]> {
        Ok([
            Arc::new(sample_bundle(self.geom_c.clone())?),
            Arc::new(sample_bundle(self.geom_f.clone())?),
            Arc::new(sample_bundle(self.geom_f1.clone())?),
            Arc::new(sample_bundle(self.geom_f2.clone())?),
        ])
    }

    pub fn weights(nb_c: &NormalBundle, nb_f: &NormalBundle, nb_1: &NormalBundle, nb_2: &NormalBundle) -> WeightDecomposition {
        WeightDecomposition {
            c_total: nb_c.total_weight,
            f_outer: nb_f.side_weight(Side::Outer),
            f1_inner: nb_1.side_weight(Side::Inner),
            f2_inner: nb_2.side_weight(Side::Inner),
        }
    }

    /// Derivatives of the pieces: `F1` is constant, `F2` translates.
    pub fn piece_derivatives(&self, nb_1: &Arc<NormalBundle>, nb_2: &Arc<NormalBundle>) -> [FiberIntervalSet; 2] {
        [FiberIntervalSet::empty(nb_1.clone(), 1.0), support_subgraph(nb_2, &ConvexBody::point(self.shift))]
    }
}

/// Contribution of one piece on the `C`-fiber from `x` in direction `v`:
/// the piece's interval data at the located fiber, with inner parts reflected
/// to positive `t`. Returns `(intervals, reflected)`.
fn piece_part(b: &FiberIntervalSet, x: Vec2, v: Vec2, h: f64) -> Option<(Vec<Interval>, bool)> {
    let nb = b.bundle();
    // the piece's vertices may sit exactly on the probe; nudge along the tangent
    let tan = v.right_perp() * (0.25 * h);
    let z = x + v * (0.5 * h);
    let (k, _) = nb.locate(z).or_else(|| nb.locate(z + tan)).or_else(|| nb.locate(z - tan))?;
    let s = &nb.samples[k as usize];
    if s.x.dist(x) > 2.0 * h {
        return None;
    }
    let f = b.fiber(k as usize);
    Some(match s.side {
        Side::Outer => (f.iter().copied().filter(|i| i.1 > 0.0).collect(), false),
        Side::Inner => (f.iter().map(|&(a, c)| (-c, -a)).filter(|i| i.1 > 0.0).collect(), true),
    })
}

/// Candidate derivative on the bundle of `C = ∂F1 ∪ ∂F2`: on fibers over the
/// common boundary `R(B_i^-) \ B_j^+`, elsewhere `B_i^+ ∪ R(B_i^-)`.
pub fn bifurcation_candidate(nb_c: &Arc<NormalBundle>, parts: [&FiberIntervalSet; 2], t_max: f64) -> FiberIntervalSet {
    let h = nb_c.h();
    let on: Vec<Arc<SetGeometry>> = parts.iter().map(|b| b.bundle().geometry().clone()).collect();
    FiberIntervalSet::from_fn(nb_c.clone(), t_max, |_, s| {
        let near: Vec<bool> = on.iter().map(|g| g.boundary_distance(s.x) <= h).collect();
        let got: Vec<Option<(Vec<Interval>, bool)>> = parts
            .iter()
            .zip(&near)
            .map(|(b, &n)| if n { piece_part(b, s.x, s.u, h) } else { None })
            .collect();
        if near[0] && near[1] {
            let mut out = Vec::new();
            for i in 0..2 {
                if let (Some((ri, true)), Some((bj, false))) = (&got[i], &got[1 - i]) {
                    out.extend(combine(ri, bj, SetOp::Difference));
                }
            }
            out
        } else {
            got.into_iter().flatten().flat_map(|(v, _)| v).collect()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_collar_rates_halve() {
        let s = split_instance(Vec2::new(-1.0, 0.0), 1.0 / 64.0, 0.25).unwrap();
        let v: Vec<f64> = [0.125, 0.0625, 0.03125].iter().map(|&e| s.decomposition.triple_collar(e)).collect();
        assert!(v[0] > 0.0);
        assert_eq!(v[0] / v[1], 2.0);
        assert_eq!(v[1] / v[2], 2.0);
        assert!(s.decomposition.check(&[0.125, 0.0625, 0.03125]).is_ok());
    }

    #[test]
    fn boundary_segment_distance() {
        let b = BoundarySegments::rect(Rect::new(Vec2::ZERO, Vec2::new(1.0, 1.0)));
        assert_eq!(b.distance(Vec2::new(0.5, 0.25)), 0.25);
        assert_eq!(b.length(), 4.0);
    }
}
