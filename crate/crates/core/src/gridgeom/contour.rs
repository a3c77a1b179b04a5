//! Subcell boundary extraction.
//!
//! Solid sets use marching squares on the cell-center lattice. Crossing positions
//! come from the signed distance of the source shape when one is attached to the
//! grid, and from the midpoint of the occupancy jump otherwise. Boundary sets use
//! their source curves subdivided at the grid spacing, or the 4-neighbor graph of
//! occupied cell centers for raw bitmaps.

use std::collections::HashMap;

use rayon::prelude::*;

use super::grid::{GridSet, Mode};
use super::polyline::BoundaryPolyline;
use crate::error::{Error, Result};
use crate::vec2::Vec2;

const T_CLAMP: f64 = 1e-6;

/// Grid edge between two horizontally (`dir = 0`) or vertically (`dir = 1`)
/// adjacent cell centers, identified by its lower-left cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct EdgeKey {
    i: u32,
    j: u32,
    dir: u8,
}

pub fn extract_boundary(gs: &GridSet) -> Result<BoundaryPolyline> {
    if gs.count() == 0 {
        return Err(Error::EmptySet);
    }
    match gs.mode {
        Mode::Solid => Ok(marching_squares(gs)),
        Mode::Boundary => Ok(curve_polyline(gs)),
    }
}

fn crossing(gs: &GridSet, k: EdgeKey) -> Vec2 {
    let (i, j) = (k.i as usize, k.j as usize);
    let (i2, j2) = if k.dir == 0 { (i + 1, j) } else { (i, j + 1) };
    let (mut p, mut q) = ((i, j), (i2, j2));
    if !gs.occupied(p.0, p.1) {
        std::mem::swap(&mut p, &mut q);
    }
    let cp = gs.cell_center(p.0, p.1);
    let cq = gs.cell_center(q.0, q.1);
    let t = match gs.source().and_then(|s| Some((s.sdf(cp)?, s.sdf(cq)?))) {
        Some((vp, vq)) if vp <= 0.0 && vq > 0.0 => (vp / (vp - vq)).clamp(T_CLAMP, 1.0 - T_CLAMP),
        _ => 0.5,
    };
    cp + (cq - cp) * t
}

fn marching_squares(gs: &GridSet) -> BoundaryPolyline {
    let (nx, ny) = (gs.nx, gs.ny);
    let sdf_center = |i: usize, j: usize| -> Option<f64> {
        let s = gs.source()?;
        let c = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
        let mut sum = 0.0;
        for (a, b) in c {
            sum += s.sdf(gs.cell_center(a, b))?;
        }
        Some(sum / 4.0)
    };
    let rows: Vec<Vec<(EdgeKey, EdgeKey)>> = (0..ny.saturating_sub(1))
        .into_par_iter()
        .map(|j| {
            let mut out = Vec::new();
            for i in 0..nx - 1 {
                let b = [
                    gs.occupied(i, j),
                    gs.occupied(i + 1, j),
                    gs.occupied(i + 1, j + 1),
                    gs.occupied(i, j + 1),
                ];
                if b.iter().all(|&x| x) || b.iter().all(|&x| !x) {
                    continue;
                }
                let (iu, ju) = (i as u32, j as u32);
                let e = [
                    EdgeKey { i: iu, j: ju, dir: 0 },
                    EdgeKey { i: iu + 1, j: ju, dir: 1 },
                    EdgeKey { i: iu, j: ju + 1, dir: 0 },
                    EdgeKey { i: iu, j: ju, dir: 1 },
                ];
                // edge k runs from corner k to corner k+1 counterclockwise
                let in_out: Vec<usize> = (0..4).filter(|&k| b[k] && !b[(k + 1) % 4]).collect();
                let out_in: Vec<usize> = (0..4).filter(|&k| !b[k] && b[(k + 1) % 4]).collect();
                if in_out.len() == 1 {
                    out.push((e[in_out[0]], e[out_in[0]]));
                    continue;
                }
                let center_inside = match sdf_center(i, j) {
                    Some(v) => v <= 0.0,
                    None => false,
                };
                if b[0] {
                    // corners 0 and 2 inside
                    if center_inside {
                        out.push((e[0], e[1]));
                        out.push((e[2], e[3]));
                    } else {
                        out.push((e[0], e[3]));
                        out.push((e[2], e[1]));
                    }
                } else if center_inside {
                    out.push((e[3], e[0]));
                    out.push((e[1], e[2]));
                } else {
                    out.push((e[1], e[0]));
                    out.push((e[3], e[2]));
                }
            }
            out
        })
        .collect();
    let pairs: Vec<(EdgeKey, EdgeKey)> = rows.into_iter().flatten().collect();
    let mut index: HashMap<EdgeKey, u32> = HashMap::with_capacity(pairs.len());
    let mut keys: Vec<EdgeKey> = Vec::with_capacity(pairs.len());
    let mut segments = Vec::with_capacity(pairs.len());
    for &(a, b) in &pairs {
        let mut id = |k: EdgeKey| {
            *index.entry(k).or_insert_with(|| {
                keys.push(k);
                (keys.len() - 1) as u32
            })
        };
        let ia = id(a);
        let ib = id(b);
        segments.push((ia, ib));
    }
    let vertices: Vec<Vec2> = keys.par_iter().map(|&k| crossing(gs, k)).collect();
    BoundaryPolyline::new(vertices, segments, true)
}

fn curve_polyline(gs: &GridSet) -> BoundaryPolyline {
    let mut vertices = Vec::new();
    let mut segments = Vec::new();
    let curves = gs.source().map(|s| s.curve_segments()).unwrap_or_default();
    if !curves.is_empty() {
        for (a, b) in curves {
            let len = a.dist(b);
            if len == 0.0 {
                continue;
            }
            let n = (len / gs.h).ceil().max(1.0) as usize;
            let base = vertices.len() as u32;
            for k in 0..=n {
                vertices.push(a + (b - a) * (k as f64 / n as f64));
            }
            for k in 0..n as u32 {
                segments.push((base + k, base + k + 1));
            }
        }
        return BoundaryPolyline::new(vertices, segments, false);
    }
    if gs.source().is_some() {
        // point sets carry no curve
        return BoundaryPolyline::new(vertices, segments, false);
    }
    let mut id = vec![u32::MAX; gs.nx * gs.ny];
    for j in 0..gs.ny {
        for i in 0..gs.nx {
            if gs.occupied(i, j) {
                id[gs.idx(i, j)] = vertices.len() as u32;
                vertices.push(gs.cell_center(i, j));
            }
        }
    }
    for j in 0..gs.ny {
        for i in 0..gs.nx {
            if !gs.occupied(i, j) {
                continue;
            }
            let a = id[gs.idx(i, j)];
            if i + 1 < gs.nx && gs.occupied(i + 1, j) {
                segments.push((a, id[gs.idx(i + 1, j)]));
            }
            if j + 1 < gs.ny && gs.occupied(i, j + 1) {
                segments.push((a, id[gs.idx(i, j + 1)]));
            }
        }
    }
    BoundaryPolyline::new(vertices, segments, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridgeom::grid::build_grid_set;
    use crate::gridgeom::shape::{Rect, ShapeSpec};

    #[test]
    fn square_perimeter() {
        let s = ShapeSpec::Rect(Rect::new(Vec2::ZERO, Vec2::new(1.0, 1.0)));
        let gs = build_grid_set(&s, 1.0 / 512.0, 0.1).unwrap();
        let bp = extract_boundary(&gs).unwrap();
        assert!((bp.total_length() - 4.0).abs() < 0.08);
        for n in &bp.normals {
            assert!((n.norm() - 1.0).abs() < 1e-12);
        }
        assert!(bp.prev.iter().all(|p| p.is_some()) && bp.next.iter().all(|p| p.is_some()));
    }

    #[test]
    fn disk_circumference_and_orientation() {
        let s = ShapeSpec::Disk { center: Vec2::ZERO, radius: 1.0 };
        let gs = build_grid_set(&s, 1.0 / 512.0, 0.1).unwrap();
        let bp = extract_boundary(&gs).unwrap();
        let l = bp.total_length();
        assert!((l - 2.0 * std::f64::consts::PI).abs() < 0.02 * 2.0 * std::f64::consts::PI);
        for k in 0..bp.len() {
            let m = bp.midpoint(k);
            assert!(bp.normals[k].dot(m) > 0.99 * m.norm());
        }
        assert!(bp.inside(Vec2::new(0.3, -0.2)));
        assert!(!bp.inside(Vec2::new(1.01, 0.0)));
    }

    #[test]
    fn bitmap_contour_uses_midpoints() {
        let mut cells = vec![false; 36];
        for j in 2..4 {
            for i in 2..4 {
                cells[j * 6 + i] = true;
            }
        }
        let gs = GridSet::from_cells(Vec2::ZERO, 1.0, 6, 6, cells, Mode::Solid, 1.0).unwrap();
        let bp = extract_boundary(&gs).unwrap();
        // diamond-cornered square through edge midpoints between centers
        assert_eq!(bp.len(), 8);
        assert!((bp.total_length() - (4.0 + 4.0 * 0.5f64.sqrt())).abs() < 1e-12);
    }
}
