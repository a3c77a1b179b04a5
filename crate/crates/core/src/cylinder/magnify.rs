//! The local magnification map, pointwise and fiberwise on sets.

use std::sync::Arc;

use rayon::prelude::*;

use crate::bundle::{BundleSample, NormalBundle};
use crate::cylinder::fiber::{FiberIntervalSet, Interval};
use crate::error::{Error, Result};
use crate::gridgeom::SetGeometry;
use crate::region::Region;
use crate::vec2::Vec2;

/// Image of a point under the magnification map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Magnified {
    /// `(t, x, u)` with `u` in the outward convention and `t < 0` inside the set.
    Point { t: f64, x: Vec2, u: Vec2 },
    Skeleton,
    OnBoundary,
}

impl Magnified {
    /// Inverse map `(t, x, u) -> x + eps t u`.
    pub fn invert(&self, eps: f64) -> Option<Vec2> {
        match *self {
            Magnified::Point { t, x, u } => Some(x + u * (eps * t)),
            _ => None,
        }
    }
}

pub fn magnify_point(geom: &SetGeometry, z: Vec2, eps: f64) -> Result<Magnified> {
    if !geom.grid.bbox().contains(z) {
        return Err(Error::OutOfDomain);
    }
    let n = geom.nearest(z).ok_or(Error::EmptySet)?;
    if n.dist == 0.0 {
        return Ok(Magnified::OnBoundary);
    }
    if geom.on_skeleton(z, n.point, n.dist) {
        return Ok(Magnified::Skeleton);
    }
    let inside = geom.is_solid() && geom.boundary.inside_with(z, &n);
    let w = (z - n.point) * (1.0 / n.dist);
    Ok(if inside {
        Magnified::Point { t: -n.dist / eps, x: n.point, u: -w }
    } else {
        Magnified::Point { t: n.dist / eps, x: n.point, u: w }
    })
}

/// Bisection iterations used to locate a membership change along a ray.
const REFINE_ITERS: usize = 40;

/// Smallest ray step, in cells, where the region gives no safe radius.
const MIN_STEP: f64 = 0.125;

/// Run-length encoding of `{s in (0, len) : x + s dir in A}` along one ray.
fn scan_ray<R: Region + ?Sized>(a: &R, s: &BundleSample, len: f64, h: f64) -> Vec<Interval> {
    let dir = s.ray_dir();
    let at = |r: f64| s.x + dir * r;
    let end = len * (1.0 - 1e-9);
    let mut runs: Vec<Interval> = Vec::new();
    // start just off the base point so thin runs attached to it are kept
    let mut pos = (1e-3 * h).min(0.5 * len);
    let (mut inside, mut safe) = a.probe(at(pos));
    let mut start = if inside { Some(0.0) } else { None };
    while pos < end {
        let next = (pos + (MIN_STEP * h).max(safe)).min(end);
        let (now, r) = a.probe(at(next));
        safe = r;
        if now != inside {
            let (mut lo, mut hi) = (pos, next);
            for _ in 0..REFINE_ITERS {
                if hi - lo <= 1e-12 * h {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                if a.contains(at(mid)) == inside {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let edge = 0.5 * (lo + hi);
            if now {
                start = Some(edge);
            } else if let Some(s0) = start.take() {
                runs.push((s0, edge));
            }
            inside = now;
        }
        pos = next;
    }
    if let Some(s0) = start {
        runs.push((s0, len));
    }
    // close gaps below the grid scale
    let mut merged: Vec<Interval> = Vec::with_capacity(runs.len());
    for r in runs {
        match merged.last_mut() {
            Some(last) if r.0 - last.1 < h => last.1 = r.1,
            _ => merged.push(r),
        }
    }
    merged
}

/// Fiberwise image of `A` in `Σ_T`: on each sample the ray up to `min(eps T, reach)`.
pub fn magnify_set<R: Region + ?Sized>(nb: &Arc<NormalBundle>, a: &R, eps: f64, t_max: f64) -> FiberIntervalSet {
    let h = nb.h();
    let fibers: Vec<Vec<Interval>> = nb
        .samples
        .par_iter()
        .map(|s| {
            let len = s.reach().cap(eps * t_max);
            if len <= 0.0 {
                return Vec::new();
            }
            let sign = s.t_sign();
            let mut v: Vec<Interval> = scan_ray(a, s, len, h)
                .into_iter()
                .map(|(s0, s1)| if sign > 0.0 { (s0 / eps, s1 / eps) } else { (-s1 / eps, -s0 / eps) })
                .collect();
            v.sort_by(|x, y| x.0.total_cmp(&y.0));
            v
        })
        .collect();
    FiberIntervalSet::from_fibers(nb.clone(), t_max, fibers).expect("one fiber per sample")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::sample_bundle;
    use crate::gridgeom::{Side, ShapeSpec};
    use crate::region::{Combined, Empty, SetOp};

    fn disk_geom(h: f64) -> Arc<SetGeometry> {
        Arc::new(SetGeometry::from_shape(&ShapeSpec::Disk { center: Vec2::ZERO, radius: 1.0 }, h, 0.5).unwrap())
    }

    #[test]
    fn disk_point_images() {
        let g = disk_geom(1.0 / 256.0);
        let Magnified::Point { t, x, u } = magnify_point(&g, Vec2::new(1.5, 0.0), 0.25).unwrap() else { panic!() };
        assert!((t - 2.0).abs() < 1e-3 && x.dist(Vec2::new(1.0, 0.0)) < 1e-3 && u.dist(Vec2::new(1.0, 0.0)) < 1e-3);
        let Magnified::Point { t, x, u } = magnify_point(&g, Vec2::new(0.5, 0.0), 0.25).unwrap() else { panic!() };
        assert!((t + 2.0).abs() < 1e-3 && x.dist(Vec2::new(1.0, 0.0)) < 1e-3 && u.dist(Vec2::new(1.0, 0.0)) < 1e-3);
        assert_eq!(magnify_point(&g, Vec2::ZERO, 0.25).unwrap(), Magnified::Skeleton);
        assert!(matches!(magnify_point(&g, Vec2::new(5.0, 0.0), 0.25), Err(Error::OutOfDomain)));
    }

    #[test]
    fn annulus_maps_to_unit_slab() {
        let g = disk_geom(1.0 / 256.0);
        let nb = Arc::new(sample_bundle(g).unwrap());
        let big = ShapeSpec::Disk { center: Vec2::ZERO, radius: 1.1 };
        let unit = ShapeSpec::Disk { center: Vec2::ZERO, radius: 1.0 };
        let ann = Combined::new(SetOp::Difference, &big, &unit);
        let img = magnify_set(&nb, &ann, 0.1, 2.0);
        let mass = img.m_measure();
        let two_pi = 2.0 * std::f64::consts::PI;
        assert!((mass - two_pi).abs() < 0.03 * two_pi, "{mass}");
        for (s, f) in nb.samples.iter().zip(img.fibers()) {
            if s.side == Side::Outer {
                assert_eq!(f.len(), 1);
                assert_eq!(f[0].0, 0.0);
            } else {
                assert!(f.is_empty());
            }
        }
        assert_eq!(magnify_set(&nb, &Empty, 0.1, 2.0).m_measure(), 0.0);
    }
}
