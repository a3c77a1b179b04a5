//! Occupancy grids, rasterization and the portable bitmap format.

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;

use super::shape::{Rect, ShapeSpec};
use crate::error::{Error, Result};
use crate::vec2::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Solid,
    Boundary,
}

/// A compact set sampled on a uniform grid of square cells.
///
/// Cell `(i, j)` covers `[x0 + i h, x0 + (i+1) h) x [y0 + j h, y0 + (j+1) h)` and has
/// linear index `j * nx + i`.
#[derive(Debug, Clone)]
pub struct GridSet {
    pub origin: Vec2,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    occ: Vec<bool>,
    pub mode: Mode,
    pub degenerate: bool,
    /// Free distance guaranteed around the occupied region.
    pub margin: f64,
    source: Option<ShapeSpec>,
}

const BLOCK: usize = 16;

impl GridSet {
    /// Grid from explicit cells, validated against the mode invariants and `margin`.
    pub fn from_cells(
        origin: Vec2,
        h: f64,
        nx: usize,
        ny: usize,
        cells: Vec<bool>,
        mode: Mode,
        margin: f64,
    ) -> Result<Self> {
        if cells.len() != nx * ny {
            return Err(Error::Format(format!("expected {} cells, got {}", nx * ny, cells.len())));
        }
        let mut gs = GridSet {
            origin,
            h,
            nx,
            ny,
            occ: cells,
            mode,
            degenerate: false,
            margin,
            source: None,
        };
        gs.validate(margin)?;
        Ok(gs)
    }

    pub fn bbox(&self) -> Rect {
        Rect::new(
            self.origin,
            self.origin + Vec2::new(self.nx as f64 * self.h, self.ny as f64 * self.h),
        )
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn occupied(&self, i: usize, j: usize) -> bool {
        self.occ[j * self.nx + i]
    }

    /// Occupancy with out-of-range cells reported as empty.
    #[inline]
    pub fn occupied_signed(&self, i: isize, j: isize) -> bool {
        i >= 0 && j >= 0 && (i as usize) < self.nx && (j as usize) < self.ny && self.occupied(i as usize, j as usize)
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occ
    }

    pub fn count(&self) -> usize {
        self.occ.iter().filter(|&&b| b).count()
    }

    pub fn source(&self) -> Option<&ShapeSpec> {
        self.source.as_ref()
    }

    #[inline]
    pub fn cell_center(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(
            self.origin.x + (i as f64 + 0.5) * self.h,
            self.origin.y + (j as f64 + 0.5) * self.h,
        )
    }

    pub fn center_of_index(&self, k: usize) -> Vec2 {
        self.cell_center(k % self.nx, k / self.nx)
    }

    /// The cell containing `z`, if inside the grid.
    pub fn cell_of(&self, z: Vec2) -> Option<(usize, usize)> {
        let fx = ((z.x - self.origin.x) / self.h).floor();
        let fy = ((z.y - self.origin.y) / self.h).floor();
        if fx < 0.0 || fy < 0.0 || fx >= self.nx as f64 || fy >= self.ny as f64 {
            return None;
        }
        Some((fx as usize, fy as usize))
    }

    /// Occupied-cell membership of a point.
    pub fn contains_point(&self, z: Vec2) -> bool {
        self.cell_of(z).is_some_and(|(i, j)| self.occupied(i, j))
    }

    /// Smallest number of empty cells between the occupied region and the grid edge.
    pub fn free_cells(&self) -> usize {
        let mut best = usize::MAX;
        for j in 0..self.ny {
            for i in 0..self.nx {
                if self.occupied(i, j) {
                    let d = i.min(j).min(self.nx - 1 - i).min(self.ny - 1 - j);
                    best = best.min(d);
                }
            }
        }
        best
    }

    fn validate(&mut self, margin: f64) -> Result<()> {
        let n = self.count();
        if n == 0 {
            return Err(Error::EmptySet);
        }
        let needed = (margin / self.h - 1e-9).ceil().max(0.0) as usize;
        let available = self.free_cells();
        if available < needed {
            return Err(Error::MarginTooSmall { needed, available });
        }
        let neighbors = |i: usize, j: usize| -> usize {
            let (i, j) = (i as isize, j as isize);
            [(1, 0), (-1, 0), (0, 1), (0, -1)]
                .iter()
                .filter(|(di, dj)| self.occupied_signed(i + di, j + dj))
                .count()
        };
        match self.mode {
            Mode::Solid => {
                if n == 1 {
                    self.degenerate = true;
                } else {
                    for j in 0..self.ny {
                        for i in 0..self.nx {
                            if self.occupied(i, j) && neighbors(i, j) == 0 {
                                return Err(Error::ModeViolation(format!("isolated occupied cell ({i}, {j})")));
                            }
                        }
                    }
                }
            }
            Mode::Boundary => {
                for j in 0..self.ny {
                    for i in 0..self.nx {
                        if self.occupied(i, j) && neighbors(i, j) == 4 {
                            return Err(Error::ModeViolation(format!("interior cell ({i}, {j}) in boundary set")));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Closure of the complement: empty cells dilated by one cell (4-neighborhood),
    /// with everything outside the grid counted as complement.
    pub fn complement_closure(&self) -> Result<GridSet> {
        if self.mode != Mode::Solid {
            return Err(Error::ModeViolation("complement closure needs a solid set".into()));
        }
        let (nx, ny) = (self.nx, self.ny);
        let mut cells = vec![false; nx * ny];
        let mut any_free = false;
        for j in 0..ny {
            for i in 0..nx {
                let (si, sj) = (i as isize, j as isize);
                let free = |a: isize, b: isize| !self.occupied_signed(a, b);
                let on = free(si, sj)
                    || free(si + 1, sj)
                    || free(si - 1, sj)
                    || free(si, sj + 1)
                    || free(si, sj - 1);
                cells[j * nx + i] = on;
                any_free |= !self.occupied(i, j);
            }
        }
        Ok(GridSet {
            origin: self.origin,
            h: self.h,
            nx,
            ny,
            occ: cells,
            mode: Mode::Solid,
            degenerate: !any_free,
            margin: 0.0,
            source: None,
        })
    }

    /// Serialize to the portable bitmap format.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.occ.len() / 8 + 41);
        out.extend_from_slice(b"SDGS");
        out.extend_from_slice(&1u16.to_le_bytes());
        out.extend_from_slice(&(self.nx as u32).to_le_bytes());
        out.extend_from_slice(&(self.ny as u32).to_le_bytes());
        out.push(match self.mode {
            Mode::Solid => 0,
            Mode::Boundary => 1,
        });
        out.push(self.degenerate as u8);
        let mut bytes = vec![0u8; self.occ.len().div_ceil(8)];
        for (k, &b) in self.occ.iter().enumerate() {
            if b {
                bytes[k / 8] |= 1 << (k % 8);
            }
        }
        out.extend_from_slice(&bytes);
        let bb = self.bbox();
        for v in [bb.min.x, bb.min.y, bb.max.x, bb.max.y, self.h] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// Parse the portable bitmap format. The free margin is measured from the data.
    pub fn from_bytes(data: &[u8]) -> Result<GridSet> {
        let bad = |m: &str| Error::Format(m.to_string());
        if data.len() < 16 || &data[0..4] != b"SDGS" {
            return Err(bad("missing SDGS header"));
        }
        let version = u16::from_le_bytes([data[4], data[5]]);
        if version != 1 {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let nx = u32::from_le_bytes(data[6..10].try_into().unwrap()) as usize;
        let ny = u32::from_le_bytes(data[10..14].try_into().unwrap()) as usize;
        let mode = match data[14] {
            0 => Mode::Solid,
            1 => Mode::Boundary,
            m => return Err(Error::Format(format!("unknown mode {m}"))),
        };
        let nbytes = (nx * ny).div_ceil(8);
        if data.len() != 16 + nbytes + 40 {
            return Err(bad("length does not match header"));
        }
        let bits = &data[16..16 + nbytes];
        let occ: Vec<bool> = (0..nx * ny).map(|k| bits[k / 8] >> (k % 8) & 1 == 1).collect();
        let tr = &data[16 + nbytes..];
        let f = |k: usize| f64::from_le_bytes(tr[8 * k..8 * k + 8].try_into().unwrap());
        let (xmin, ymin, h) = (f(0), f(1), f(4));
        if !(h > 0.0) {
            return Err(bad("non-positive spacing"));
        }
        let mut gs = GridSet {
            origin: Vec2::new(xmin, ymin),
            h,
            nx,
            ny,
            occ,
            mode,
            degenerate: data[15] & 1 == 1,
            margin: 0.0,
            source: None,
        };
        if gs.count() == 0 {
            return Err(Error::EmptySet);
        }
        gs.margin = gs.free_cells() as f64 * h;
        Ok(gs)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<GridSet> {
        let mut buf = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut buf)?;
        GridSet::from_bytes(&buf)
    }

    /// A grid with the same layout and the given occupancy (no validation).
    pub fn with_cells(&self, cells: Vec<bool>) -> GridSet {
        GridSet { occ: cells, source: None, degenerate: false, ..self.clone() }
    }
}

/// Grid layout covering `bbox` inflated by `margin`, snapped outward to multiples of `h`.
pub fn layout(bbox: Rect, h: f64, margin: f64) -> (Vec2, usize, usize) {
    let lo = bbox.min - Vec2::new(margin, margin);
    let hi = bbox.max + Vec2::new(margin, margin);
    let x0 = (lo.x / h).floor() * h;
    let y0 = (lo.y / h).floor() * h;
    // half-open cells: a point on the upper grid line belongs to the next cell
    let nx = ((hi.x - x0) / h).floor() as usize + 1;
    let ny = ((hi.y - y0) / h).floor() as usize + 1;
    (Vec2::new(x0, y0), nx, ny)
}

/// Rasterize a shape: solid shapes by cell-center membership, zero-area shapes by
/// the half-open cells they meet.
pub fn build_grid_set(shape: &ShapeSpec, h: f64, margin: f64) -> Result<GridSet> {
    if !(h > 0.0) || !(margin >= 0.0) {
        return Err(Error::Format("grid spacing must be positive and margin nonnegative".into()));
    }
    let bbox = shape.bbox();
    if bbox.is_empty() {
        return Err(Error::EmptySet);
    }
    let (origin, nx, ny) = layout(bbox, h, margin);
    let solid = shape.is_solid();
    let cells = if solid { rasterize_solid(shape, origin, h, nx, ny) } else { rasterize_curve(shape, origin, h, nx, ny) };
    let mut gs = GridSet {
        origin,
        h,
        nx,
        ny,
        occ: cells,
        mode: if solid { Mode::Solid } else { Mode::Boundary },
        degenerate: false,
        margin,
        source: Some(shape.clone()),
    };
    gs.validate(margin)?;
    Ok(gs)
}

fn rasterize_solid(shape: &ShapeSpec, origin: Vec2, h: f64, nx: usize, ny: usize) -> Vec<bool> {
    let bx = nx.div_ceil(BLOCK);
    let by = ny.div_ceil(BLOCK);
    let center = |i: usize, j: usize| Vec2::new(origin.x + (i as f64 + 0.5) * h, origin.y + (j as f64 + 0.5) * h);
    let rows: Vec<Vec<bool>> = (0..by)
        .into_par_iter()
        .map(|b| {
            let j0 = b * BLOCK;
            let j1 = (j0 + BLOCK).min(ny);
            let mut band = vec![false; (j1 - j0) * nx];
            for a in 0..bx {
                let i0 = a * BLOCK;
                let i1 = (i0 + BLOCK).min(nx);
                let c = Vec2::new(
                    origin.x + 0.5 * (i0 + i1) as f64 * h,
                    origin.y + 0.5 * (j0 + j1) as f64 * h,
                );
                let half = 0.5 * h * (((i1 - i0) as f64).powi(2) + ((j1 - j0) as f64).powi(2)).sqrt();
                let uniform = shape.sdf(c).filter(|d| d.abs() > half * (1.0 + 1e-9) + 1e-300);
                for j in j0..j1 {
                    for i in i0..i1 {
                        band[(j - j0) * nx + i] = match uniform {
                            Some(d) => d <= 0.0,
                            None => shape.contains(center(i, j)),
                        };
                    }
                }
            }
            band
        })
        .collect();
    rows.concat()
}

fn rasterize_curve(shape: &ShapeSpec, origin: Vec2, h: f64, nx: usize, ny: usize) -> Vec<bool> {
    let mut cells = vec![false; nx * ny];
    let clampi = |v: f64, n: usize| -> usize { (v.floor().max(0.0) as usize).min(n - 1) };
    for (a, b) in shape.curve_segments() {
        let i0 = clampi((a.x.min(b.x) - origin.x) / h - 1.0, nx);
        let i1 = clampi((a.x.max(b.x) - origin.x) / h + 1.0, nx);
        let j0 = clampi((a.y.min(b.y) - origin.y) / h - 1.0, ny);
        let j1 = clampi((a.y.max(b.y) - origin.y) / h + 1.0, ny);
        let single = ShapeSpec::Polyline(vec![a, b]);
        for j in j0..=j1 {
            for i in i0..=i1 {
                let lo = Vec2::new(origin.x + i as f64 * h, origin.y + j as f64 * h);
                if !cells[j * nx + i] && single.curve_meets_cell(lo, h) {
                    cells[j * nx + i] = true;
                }
            }
        }
    }
    if let ShapeSpec::Points(pts) = shape {
        for p in pts {
            let fx = ((p.x - origin.x) / h).floor();
            let fy = ((p.y - origin.y) / h).floor();
            if fx >= 0.0 && fy >= 0.0 && (fx as usize) < nx && (fy as usize) < ny {
                cells[fy as usize * nx + fx as usize] = true;
            }
        }
    }
    cells
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_disk_cell_count() {
        let gs = build_grid_set(&ShapeSpec::Disk { center: Vec2::ZERO, radius: 1.0 }, 0.01, 1.0).unwrap();
        let area = gs.count() as f64 * 1e-4;
        assert!((area - std::f64::consts::PI).abs() < 0.01);
        assert_eq!(gs.mode, Mode::Solid);
        let bb = gs.bbox();
        assert!((bb.width() - gs.nx as f64 * gs.h).abs() < 1e-12);
    }

    #[test]
    fn segment_is_boundary_mode() {
        let s = ShapeSpec::Polygon(vec![Vec2::new(0.0, 0.0), Vec2::new(0.0, 1.0)]);
        let gs = build_grid_set(&s, 1.0 / 64.0, 0.25).unwrap();
        assert_eq!(gs.mode, Mode::Boundary);
        assert!(gs.count() >= 64);
    }

    #[test]
    fn margin_is_enforced_on_explicit_cells() {
        let mut cells = vec![false; 16];
        cells[5] = true;
        cells[6] = true;
        let err = GridSet::from_cells(Vec2::ZERO, 1.0, 4, 4, cells, Mode::Solid, 2.0).unwrap_err();
        assert!(matches!(err, Error::MarginTooSmall { .. }));
    }

    #[test]
    fn isolated_cells_violate_solid_mode() {
        let mut cells = vec![false; 25];
        cells[6] = true;
        cells[18] = true;
        let err = GridSet::from_cells(Vec2::ZERO, 1.0, 5, 5, cells, Mode::Solid, 0.0).unwrap_err();
        assert!(matches!(err, Error::ModeViolation(_)));
    }

    #[test]
    fn full_box_complement_is_frame() {
        let gs = GridSet::from_cells(Vec2::ZERO, 1.0, 4, 3, vec![true; 12], Mode::Solid, 0.0).unwrap();
        let c = gs.complement_closure().unwrap();
        assert!(c.degenerate);
        assert_eq!(c.count(), 10);
        assert!(!c.occupied(1, 1) && !c.occupied(2, 1));
    }

    #[test]
    fn bitmap_round_trip() {
        let gs = build_grid_set(&ShapeSpec::Disk { center: Vec2::new(0.1, 0.2), radius: 0.3 }, 1.0 / 50.0, 0.1).unwrap();
        let back = GridSet::from_bytes(&gs.to_bytes()).unwrap();
        assert_eq!(back.nx, gs.nx);
        assert_eq!(back.ny, gs.ny);
        assert_eq!(back.occupancy(), gs.occupancy());
        assert_eq!(back.origin, gs.origin);
        assert_eq!(back.h, gs.h);
        assert!(back.margin >= 0.1 - 1e-12);
        let bytes = gs.to_bytes();
        assert_eq!(&bytes[0..4], b"SDGS");
    }
}
