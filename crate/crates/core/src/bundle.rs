//! Discrete samples of the (extended) normal bundle with reach values and
//! first-order support-measure weights.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gridgeom::{Mode, Nearest, SetGeometry, Side};
use crate::vec2::Vec2;

/// Reach along a normal: a finite value or the infinite flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reach {
    Finite(f64),
    Infinite,
}

impl Reach {
    pub fn is_infinite(self) -> bool {
        matches!(self, Reach::Infinite)
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Reach::Finite(r) => Some(r),
            Reach::Infinite => None,
        }
    }

    /// `min(r, c)`.
    pub fn cap(self, c: f64) -> f64 {
        match self {
            Reach::Finite(r) => r.min(c),
            Reach::Infinite => c,
        }
    }

    pub fn exceeds(self, c: f64) -> bool {
        match self {
            Reach::Finite(r) => r > c,
            Reach::Infinite => true,
        }
    }

    pub fn min(self, o: Reach) -> Reach {
        match (self, o) {
            (Reach::Infinite, r) | (r, Reach::Infinite) => r,
            (Reach::Finite(a), Reach::Finite(b)) => Reach::Finite(a.min(b)),
        }
    }
}

impl std::fmt::Display for Reach {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Reach::Finite(r) => write!(f, "{r}"),
            Reach::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BundleSample {
    pub x: Vec2,
    /// Unit normal, outward convention on both sides.
    pub u: Vec2,
    pub side: Side,
    pub r_plus: Reach,
    pub r_minus: Reach,
    pub weight: f64,
    pub regular: bool,
    pub seg: u32,
}

impl BundleSample {
    /// Reach on the sample's own side.
    pub fn reach(&self) -> Reach {
        match self.side {
            Side::Outer => self.r_plus,
            Side::Inner => self.r_minus,
        }
    }

    /// Direction of the fiber ray `x + s * dir`, `s > 0`.
    pub fn ray_dir(&self) -> Vec2 {
        match self.side {
            Side::Outer => self.u,
            Side::Inner => -self.u,
        }
    }

    /// Sign of the cylinder coordinate `t` on this fiber.
    pub fn t_sign(&self) -> f64 {
        match self.side {
            Side::Outer => 1.0,
            Side::Inner => -1.0,
        }
    }
}

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, Clone)]
pub struct NormalBundle {
    pub samples: Vec<BundleSample>,
    pub mode: Mode,
    /// First-order support measure of the sampled bundle: boundary length carrying
    /// at least one sample (solid mode) or the sum of all weights (boundary mode).
    pub total_weight: f64,
    /// Boundary length rejected by the probe test on some side.
    pub rejected_length: f64,
    geom: Arc<SetGeometry>,
    /// Per boundary segment: sample for the outer (or `+n`) and inner (or `-n`) side.
    by_segment: Vec<[Option<u32>; 2]>,
    /// For restricted bundles: index of each sample in the parent bundle.
    parent: Option<(u64, Vec<u32>)>,
    id: u64,
}

struct SideResult {
    u: Vec2,
    reach: Reach,
}

fn side_slot(side: Side) -> usize {
    match side {
        Side::Outer => 0,
        Side::Inner => 1,
    }
}

/// Reach along `dir` from `x` by bisection on the projection predicate.
pub fn reach(geom: &SetGeometry, x: Vec2, dir: Vec2, side: Side, r_max: f64) -> Result<Reach> {
    let h = geom.h();
    let solid = geom.is_solid();
    let pred = |s: f64| -> bool {
        let z = x + dir * s;
        let Some(n) = geom.nearest(z) else { return false };
        if n.point.dist(x) > 2.0 * h || (n.dist - s).abs() > 2.0 * h {
            return false;
        }
        if !solid {
            return true;
        }
        geom.boundary.inside_with(z, &n) == (side == Side::Inner)
    };
    if !pred(h) {
        return Err(Error::InvalidDirection);
    }
    if pred(r_max) {
        return Ok(Reach::Infinite);
    }
    let (mut lo, mut hi) = (h, r_max);
    while hi - lo > 0.5 * h {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Reach::Finite(0.5 * (lo + hi)))
}

/// Probe from `x` along `v` and project back; accepted normals come with their reach.
fn probe(geom: &SetGeometry, x: Vec2, v: Vec2, side: Side, r_max: f64) -> Option<SideResult> {
    let h = geom.h();
    let z = x + v * h;
    let n = geom.nearest(z)?;
    if geom.is_solid() && geom.boundary.inside_with(z, &n) != (side == Side::Inner) {
        return None;
    }
    if n.point.dist(x) > 2.0 * h || n.dist == 0.0 {
        return None;
    }
    let w = (z - n.point) * (1.0 / n.dist);
    let reach = reach(geom, x, w, side, r_max).ok()?;
    let u = if side == Side::Inner { -w } else { w };
    Some(SideResult { u, reach })
}

impl NormalBundle {
    /// One sample per boundary segment and side.
    pub fn sample(geom: Arc<SetGeometry>) -> Result<NormalBundle> {
        let bp = &geom.boundary;
        let solid = geom.is_solid();
        let r_out = 0.5 * geom.grid.margin;
        let bb = geom.grid.bbox();
        let r_in = (bb.width().powi(2) + bb.height().powi(2)).sqrt();
        let per_seg: Vec<[Option<SideResult>; 2]> = (0..bp.len())
            .into_par_iter()
            .map(|k| {
                if bp.lengths[k] == 0.0 {
                    return [None, None];
                }
                let x = bp.midpoint(k);
                let n = bp.normals[k];
                if solid {
                    [probe(&geom, x, n, Side::Outer, r_out), probe(&geom, x, -n, Side::Inner, r_in)]
                } else {
                    [probe(&geom, x, n, Side::Outer, r_out), probe(&geom, x, -n, Side::Outer, r_out)]
                }
            })
            .collect();
        let mut samples = Vec::new();
        let mut by_segment = vec![[None, None]; bp.len()];
        let mut total = 0.0;
        let mut rejected = 0.0;
        for (k, res) in per_seg.iter().enumerate() {
            let l = bp.lengths[k];
            let x = bp.midpoint(k);
            let both = res[0].is_some() && res[1].is_some();
            if solid {
                if res[0].is_some() || res[1].is_some() {
                    total += l;
                }
                if !both {
                    rejected += l;
                }
            }
            for slot in 0..2 {
                let Some(r) = &res[slot] else {
                    if !solid {
                        rejected += l;
                    }
                    continue;
                };
                let (side, r_plus, r_minus) = if solid {
                    let other = res[1 - slot].as_ref().map_or(Reach::Finite(0.0), |o| o.reach);
                    if slot == 0 {
                        (Side::Outer, r.reach, other)
                    } else {
                        (Side::Inner, other, r.reach)
                    }
                } else {
                    (Side::Outer, r.reach, Reach::Infinite)
                };
                if !solid {
                    total += l;
                }
                by_segment[k][slot] = Some(samples.len() as u32);
                samples.push(BundleSample {
                    x,
                    u: r.u,
                    side,
                    r_plus,
                    r_minus,
                    weight: l,
                    regular: !solid || both,
                    seg: k as u32,
                });
            }
        }
        if samples.is_empty() {
            return Err(Error::EmptyBundle);
        }
        Ok(NormalBundle {
            samples,
            mode: geom.mode(),
            total_weight: total,
            rejected_length: rejected,
            geom,
            by_segment,
            parent: None,
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
        })
    }

    pub fn geometry(&self) -> &Arc<SetGeometry> {
        &self.geom
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn h(&self) -> f64 {
        self.geom.h()
    }

    /// Parent bundle id and index map, for restricted bundles.
    pub fn parent(&self) -> Option<(u64, &[u32])> {
        self.parent.as_ref().map(|(id, m)| (*id, m.as_slice()))
    }

    /// Sum of weights over samples on the given side.
    pub fn side_weight(&self, side: Side) -> f64 {
        self.samples.iter().filter(|s| s.side == side).fold(0.0, |a, s| a + s.weight)
    }

    /// Sample whose fiber carries the point with nearest-boundary data `n`.
    /// In solid mode `inside` selects the side; in boundary mode the direction
    /// of `z - p` selects between the two antipodal samples.
    pub fn fiber_of(&self, z: Vec2, n: &Nearest, inside: bool) -> Option<u32> {
        if n.param <= 0.0 || n.param >= 1.0 || n.dist == 0.0 {
            return None;
        }
        let slots = self.by_segment.get(n.seg as usize)?;
        let slot = match self.mode {
            Mode::Solid => usize::from(inside),
            Mode::Boundary => usize::from((z - n.point).dot(self.geom.boundary.normals[n.seg as usize]) < 0.0),
        };
        slots[slot]
    }

    /// Locate the fiber through `z`: sample index and distance `s` along the ray.
    pub fn locate(&self, z: Vec2) -> Option<(u32, f64)> {
        let n = self.geom.nearest(z)?;
        let inside = self.geom.is_solid() && self.geom.boundary.inside_with(z, &n);
        self.fiber_of(z, &n, inside).map(|k| (k, n.dist))
    }

    /// Samples with `min(r_plus, r_minus) > c`; weights unchanged.
    pub fn restrict(&self, c: f64) -> Result<NormalBundle> {
        let keep: Vec<u32> = (0..self.samples.len() as u32)
            .filter(|&k| {
                let s = &self.samples[k as usize];
                s.r_plus.min(s.r_minus).exceeds(c)
            })
            .collect();
        self.subset(&keep)
    }

    /// Bundle on the given samples (indices into this bundle).
    pub fn subset(&self, keep: &[u32]) -> Result<NormalBundle> {
        if keep.is_empty() {
            return Err(Error::EmptyBundle);
        }
        let mut by_segment = vec![[None, None]; self.by_segment.len()];
        let mut samples = Vec::with_capacity(keep.len());
        for (new, &old) in keep.iter().enumerate() {
            let s = self.samples[old as usize];
            let slot = self.by_segment[s.seg as usize]
                .iter()
                .position(|&v| v == Some(old))
                .unwrap_or(side_slot(s.side));
            by_segment[s.seg as usize][slot] = Some(new as u32);
            samples.push(s);
        }
        let total_weight = match self.mode {
            Mode::Solid => by_segment
                .iter()
                .enumerate()
                .filter(|(_, v)| v[0].is_some() || v[1].is_some())
                .map(|(k, _)| self.geom.boundary.lengths[k])
                .sum(),
            Mode::Boundary => samples.iter().map(|s| s.weight).sum(),
        };
        let (root, map) = match &self.parent {
            Some((root, m)) => (*root, keep.iter().map(|&k| m[k as usize]).collect()),
            None => (self.id, keep.to_vec()),
        };
        Ok(NormalBundle {
            samples,
            mode: self.mode,
            total_weight,
            rejected_length: self.rejected_length,
            geom: self.geom.clone(),
            by_segment,
            parent: Some((root, map)),
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
        })
    }

    /// CSV dump: `x0,x1,u0,u1,side,r_plus,r_minus,weight,regular`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x0,x1,u0,u1,side,r_plus,r_minus,weight,regular\n");
        for s in &self.samples {
            let side = match s.side {
                Side::Outer => "outer",
                Side::Inner => "inner",
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                s.x.x, s.x.y, s.u.x, s.u.y, side, s.r_plus, s.r_minus, s.weight, s.regular
            );
        }
        out
    }
}

/// Build the bundle of a geometry.
pub fn sample_bundle(geom: Arc<SetGeometry>) -> Result<NormalBundle> {
    NormalBundle::sample(geom)
}

/// Samples with `min(r_plus, r_minus) > c`.
pub fn restrict_bundle(nb: &NormalBundle, c: f64) -> Result<NormalBundle> {
    nb.restrict(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridgeom::{Rect, ShapeSpec};

    fn geom(s: &ShapeSpec, h: f64, margin: f64) -> Arc<SetGeometry> {
        Arc::new(SetGeometry::from_shape(s, h, margin).unwrap())
    }

    #[test]
    fn disk_bundle() {
        let g = geom(&ShapeSpec::Disk { center: Vec2::ZERO, radius: 1.0 }, 1.0 / 512.0, 0.5);
        let nb = sample_bundle(g).unwrap();
        let outer: Vec<_> = nb.samples.iter().filter(|s| s.side == Side::Outer).collect();
        let w: f64 = outer.iter().map(|s| s.weight).sum();
        assert!((w - 2.0 * std::f64::consts::PI).abs() < 0.02 * 2.0 * std::f64::consts::PI);
        let rms = (outer.iter().map(|s| s.u.cross(s.x.normalized().unwrap()).asin().powi(2)).sum::<f64>()
            / outer.len() as f64)
            .sqrt();
        assert!(rms.to_degrees() < 1.0);
        assert!(outer.iter().all(|s| s.r_plus.is_infinite()));
    }

    #[test]
    fn disk_inner_reach_is_radius() {
        let h = 1.0 / 256.0;
        let g = geom(&ShapeSpec::Disk { center: Vec2::ZERO, radius: 1.0 }, h, 0.5);
        let nb = sample_bundle(g).unwrap();
        let s = nb
            .samples
            .iter()
            .filter(|s| s.side == Side::Inner)
            .min_by(|a, b| a.x.y.abs().partial_cmp(&b.x.y.abs()).unwrap().then(b.x.x.partial_cmp(&a.x.x).unwrap()))
            .unwrap();
        let r = s.r_minus.value().unwrap();
        assert!((r - 1.0).abs() <= 2.0 * h, "{r}");
    }

    #[test]
    fn segment_boundary_bundle_doubles() {
        let s = ShapeSpec::Polyline(vec![Vec2::new(0.0, 0.0), Vec2::new(0.0, 1.0)]);
        let nb = sample_bundle(geom(&s, 1.0 / 128.0, 0.25)).unwrap();
        assert!((nb.total_weight - 2.0).abs() < 0.04 * 2.0 / 2.0);
        assert!(nb.samples.iter().all(|s| (s.u.x.abs() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn restriction_of_convex_body_is_identity_up_to_inner_reach() {
        let sq = ShapeSpec::Rect(Rect::new(Vec2::ZERO, Vec2::new(1.0, 1.0)));
        let nb = sample_bundle(geom(&sq, 1.0 / 128.0, 0.25)).unwrap();
        let outer_only: Vec<u32> =
            (0..nb.len() as u32).filter(|&k| nb.samples[k as usize].side == Side::Outer).collect();
        let ob = nb.subset(&outer_only).unwrap();
        assert!(ob.samples.iter().all(|s| s.r_plus.is_infinite()));
        assert!(matches!(nb.restrict(10.0), Err(Error::EmptyBundle)));
    }
}
