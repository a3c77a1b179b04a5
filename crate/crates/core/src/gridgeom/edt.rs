//! Exact Euclidean distance transform with nearest-site labels.

use rayon::prelude::*;

use super::grid::{GridSet, Mode};

/// Per-cell distance to the nearest occupied cell center, the index of that cell,
/// and the skeleton indicator.
#[derive(Debug, Clone)]
pub struct DistanceField {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub distance: Vec<f64>,
    pub site: Vec<u32>,
    pub multi: Vec<bool>,
}

/// Outer field against `F` and, for solid sets, inner field against `F*`.
#[derive(Debug, Clone)]
pub struct DistanceFieldPair {
    pub outer: DistanceField,
    pub inner: Option<DistanceField>,
}

/// Squared distances in cell units and sites for an occupancy bitmap
/// (two-pass lower-envelope transform).
pub fn squared_edt(nx: usize, ny: usize, occ: &[bool]) -> (Vec<f64>, Vec<u32>) {
    assert_eq!(occ.len(), nx * ny);
    const INF: f64 = f64::INFINITY;
    // column pass, column-major output
    let cols: Vec<(Vec<f64>, Vec<u32>)> = (0..nx)
        .into_par_iter()
        .map(|i| {
            let mut d = vec![INF; ny];
            let mut r = vec![u32::MAX; ny];
            let mut last: Option<usize> = None;
            for j in 0..ny {
                if occ[j * nx + i] {
                    last = Some(j);
                }
                if let Some(l) = last {
                    d[j] = (j - l) as f64;
                    r[j] = l as u32;
                }
            }
            last = None;
            for j in (0..ny).rev() {
                if occ[j * nx + i] {
                    last = Some(j);
                }
                if let Some(l) = last {
                    let dd = (l - j) as f64;
                    if dd < d[j] {
                        d[j] = dd;
                        r[j] = l as u32;
                    }
                }
            }
            for v in d.iter_mut() {
                *v *= *v;
            }
            (d, r)
        })
        .collect();
    let rows: Vec<(Vec<f64>, Vec<u32>)> = (0..ny)
        .into_par_iter()
        .map(|j| {
            let f: Vec<f64> = (0..nx).map(|i| cols[i].0[j]).collect();
            let mut out_d = vec![INF; nx];
            let mut out_s = vec![u32::MAX; nx];
            let mut v: Vec<usize> = Vec::with_capacity(nx);
            let mut z: Vec<f64> = Vec::with_capacity(nx + 1);
            for q in 0..nx {
                if !f[q].is_finite() {
                    continue;
                }
                let fq = f[q] + (q * q) as f64;
                loop {
                    match v.last() {
                        None => {
                            v.push(q);
                            z.clear();
                            z.push(f64::NEG_INFINITY);
                            break;
                        }
                        Some(&p) => {
                            let fp = f[p] + (p * p) as f64;
                            let s = (fq - fp) / (2.0 * (q as f64 - p as f64));
                            if s <= *z.last().unwrap() {
                                v.pop();
                                z.pop();
                                continue;
                            }
                            v.push(q);
                            z.push(s);
                            break;
                        }
                    }
                }
            }
            if v.is_empty() {
                return (out_d, out_s);
            }
            let mut k = 0;
            for i in 0..nx {
                while k + 1 < v.len() && z[k + 1] < i as f64 {
                    k += 1;
                }
                let q = v[k];
                let di = i as f64 - q as f64;
                out_d[i] = di * di + f[q];
                out_s[i] = cols[q].1[j] * nx as u32 + q as u32;
            }
            (out_d, out_s)
        })
        .collect();
    let mut d = Vec::with_capacity(nx * ny);
    let mut s = Vec::with_capacity(nx * ny);
    for (rd, rs) in rows {
        d.extend(rd);
        s.extend(rs);
    }
    (d, s)
}

impl DistanceField {
    /// Exact distance field for an occupancy bitmap with spacing `h`;
    /// the skeleton tolerance is `2h`.
    pub fn compute(nx: usize, ny: usize, h: f64, occ: &[bool]) -> DistanceField {
        let (d2, site) = squared_edt(nx, ny, occ);
        let distance: Vec<f64> = d2.iter().map(|v| v.sqrt() * h).collect();
        let tau = 2.0 * h;
        let center = |k: u32| -> (f64, f64) { ((k as usize % nx) as f64 * h, (k as usize / nx) as f64 * h) };
        let multi: Vec<bool> = (0..nx * ny)
            .into_par_iter()
            .map(|k| {
                let d = distance[k];
                if d == 0.0 || site[k] == u32::MAX {
                    return false;
                }
                let (i, j) = ((k % nx) as isize, (k / nx) as isize);
                let z = (i as f64 * h, j as f64 * h);
                let s = center(site[k]);
                for dj in -1..=1 {
                    for di in -1..=1 {
                        let (a, b) = (i + di, j + dj);
                        if (di == 0 && dj == 0) || a < 0 || b < 0 || a >= nx as isize || b >= ny as isize {
                            continue;
                        }
                        let s2 = site[b as usize * nx + a as usize];
                        if s2 == u32::MAX || s2 == site[k] {
                            continue;
                        }
                        let q = center(s2);
                        let sep = ((s.0 - q.0).powi(2) + (s.1 - q.1).powi(2)).sqrt();
                        let dz = ((z.0 - q.0).powi(2) + (z.1 - q.1).powi(2)).sqrt();
                        if sep > (2.0 * tau).max(d) && dz <= d + tau {
                            return true;
                        }
                    }
                }
                false
            })
            .collect();
        DistanceField { nx, ny, h, distance, site, multi }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.distance[j * self.nx + i]
    }
}

/// Distance fields of `F` and, in solid mode, of `F*`.
pub fn distance_transform(gs: &GridSet) -> DistanceFieldPair {
    let outer = DistanceField::compute(gs.nx, gs.ny, gs.h, gs.occupancy());
    let inner = match gs.mode {
        Mode::Solid => gs
            .complement_closure()
            .ok()
            .map(|c| DistanceField::compute(gs.nx, gs.ny, gs.h, c.occupancy())),
        Mode::Boundary => None,
    };
    DistanceFieldPair { outer, inner }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridgeom::grid::build_grid_set;
    use crate::gridgeom::shape::{Rect, ShapeSpec};
    use crate::vec2::Vec2;

    #[test]
    fn disk_outer_distance() {
        let h = 1.0 / 64.0;
        let gs = build_grid_set(&ShapeSpec::Disk { center: Vec2::ZERO, radius: 1.0 }, h, 1.0).unwrap();
        let df = distance_transform(&gs);
        let (i, j) = gs.cell_of(Vec2::new(1.5, 0.0)).unwrap();
        let d = df.outer.at(i, j);
        assert!((d - 0.5).abs() <= h, "{d}");
        let s = gs.center_of_index(df.outer.site[gs.idx(i, j)] as usize);
        assert!(s.dist(Vec2::new(1.0, 0.0)) < 2.0 * h);
    }

    #[test]
    fn square_inner_distance_at_center() {
        let h = 1.0 / 64.0;
        let sq = ShapeSpec::Rect(Rect::new(Vec2::ZERO, Vec2::new(1.0, 1.0)));
        let gs = build_grid_set(&sq, h, 0.25).unwrap();
        let df = distance_transform(&gs);
        let (i, j) = gs.cell_of(Vec2::new(0.5 + 1e-9, 0.5 + 1e-9)).unwrap();
        let d = df.inner.as_ref().unwrap().at(i, j);
        assert!((d - 0.5).abs() <= h, "{d}");
    }

    #[test]
    fn two_points_have_skeleton_between() {
        let h = 1.0 / 32.0;
        let pts = ShapeSpec::Points(vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)]);
        let gs = build_grid_set(&pts, h, 0.5).unwrap();
        let df = distance_transform(&gs);
        let (i, j) = gs.cell_of(Vec2::new(0.5, 0.3)).unwrap();
        assert!(df.outer.multi[gs.idx(i, j)]);
        let (i, j) = gs.cell_of(Vec2::new(0.1, 0.3)).unwrap();
        assert!(!df.outer.multi[gs.idx(i, j)]);
    }
}
