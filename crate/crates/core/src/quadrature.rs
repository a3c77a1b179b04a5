//! Cell-center quadrature over regions, refined in cells the region boundary may cross.

use rayon::prelude::*;

use crate::gridgeom::Rect;
use crate::region::Region;
use crate::vec2::Vec2;

/// Index range `[lo, hi)` of cells of size `h` (aligned to multiples of `h`) covering `[a, b]`.
fn cell_range(a: f64, b: f64, h: f64) -> (i64, i64) {
    ((a / h).floor() as i64, (b / h).ceil() as i64)
}

/// `∫_region f dμ` by cell-center sums on an `h`-grid aligned to the origin. Cells
/// whose center lies closer than half a cell diagonal to the region boundary (per
/// `safe_radius`) are split into `sub x sub` subcells. Blocks of cells that lie
/// entirely outside the region are skipped in one query.
pub fn integrate<R, F>(region: &R, f: F, window: Rect, h: f64, sub: usize) -> f64
where
    R: Region + ?Sized,
    F: Fn(Vec2) -> f64 + Sync,
{
    if window.is_empty() {
        return 0.0;
    }
    const TOP: i64 = 64;
    let (i0, i1) = cell_range(window.min.x, window.max.x, h);
    let (j0, j1) = cell_range(window.min.y, window.max.y, h);
    let bx = (i1 - i0 + TOP - 1) / TOP;
    let by = (j1 - j0 + TOP - 1) / TOP;
    let q = Quad { region, f: &f, h, sub };
    let parts: Vec<f64> = (0..bx * by)
        .into_par_iter()
        .map(|b| {
            let a = i0 + (b % bx) * TOP;
            let c = j0 + (b / bx) * TOP;
            q.block(a, c, (a + TOP).min(i1), (c + TOP).min(j1))
        })
        .collect();
    parts.iter().fold(0.0, |s, x| s + x)
}

struct Quad<'a, R: ?Sized, F> {
    region: &'a R,
    f: &'a F,
    h: f64,
    sub: usize,
}

impl<R: Region + ?Sized, F: Fn(Vec2) -> f64> Quad<'_, R, F> {
    fn block(&self, i0: i64, j0: i64, i1: i64, j1: i64) -> f64 {
        let (w, hgt) = (i1 - i0, j1 - j0);
        if w <= 0 || hgt <= 0 {
            return 0.0;
        }
        let h = self.h;
        if w == 1 && hgt == 1 {
            return self.cell(i0, j0);
        }
        let c = Vec2::new(0.5 * (i0 + i1) as f64 * h, 0.5 * (j0 + j1) as f64 * h);
        let reach = 0.5 * h * ((w * w + hgt * hgt) as f64).sqrt();
        let (inside, safe) = self.region.probe(c);
        if !inside && safe > reach * (1.0 + 1e-9) {
            return 0.0;
        }
        let im = i0 + (w + 1) / 2;
        let jm = j0 + (hgt + 1) / 2;
        self.block(i0, j0, im, jm) + self.block(im, j0, i1, jm) + self.block(i0, jm, im, j1) + self.block(im, jm, i1, j1)
    }

    fn cell(&self, i: i64, j: i64) -> f64 {
        let h = self.h;
        let c = Vec2::new((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
        let (inside, safe) = self.region.probe(c);
        if safe > h * std::f64::consts::FRAC_1_SQRT_2 {
            return if inside { (self.f)(c) * h * h } else { 0.0 };
        }
        let hs = h / self.sub as f64;
        let lo = Vec2::new(i as f64 * h, j as f64 * h);
        let mut cell = 0.0;
        for b in 0..self.sub {
            for a in 0..self.sub {
                let z = lo + Vec2::new((a as f64 + 0.5) * hs, (b as f64 + 0.5) * hs);
                if self.region.contains(z) {
                    cell += (self.f)(z);
                }
            }
        }
        cell * hs * hs
    }
}

/// Area of the region inside `window`.
pub fn measure<R: Region + ?Sized>(region: &R, window: Rect, h: f64, sub: usize) -> f64 {
    integrate(region, |_| 1.0, window, h, sub)
}

/// Exact number of lattice cells `origin + [i δ, (i+1) δ) x [j δ, (j+1) δ)`,
/// `0 <= i < nx`, `0 <= j < ny`, whose centers lie in the region. Blocks far from
/// the region boundary are classified in one query.
pub fn count_cells<R: Region + ?Sized>(region: &R, origin: Vec2, delta: f64, nx: usize, ny: usize) -> u64 {
    const TOP: usize = 64;
    let bx = nx.div_ceil(TOP);
    let by = ny.div_ceil(TOP);
    (0..bx * by)
        .into_par_iter()
        .map(|b| {
            let (a, c) = (b % bx, b / bx);
            let i0 = a * TOP;
            let j0 = c * TOP;
            count_block(region, origin, delta, i0, j0, (i0 + TOP).min(nx), (j0 + TOP).min(ny))
        })
        .collect::<Vec<u64>>()
        .iter()
        .sum()
}

/// Area inside `window` by exact cell-center counting on a `delta`-lattice aligned to 0.
pub fn counted_area<R: Region + ?Sized>(region: &R, window: Rect, delta: f64) -> f64 {
    if window.is_empty() {
        return 0.0;
    }
    let (i0, i1) = cell_range(window.min.x, window.max.x, delta);
    let (j0, j1) = cell_range(window.min.y, window.max.y, delta);
    let origin = Vec2::new(i0 as f64 * delta, j0 as f64 * delta);
    let n = count_cells(region, origin, delta, (i1 - i0) as usize, (j1 - j0) as usize);
    n as f64 * delta * delta
}

fn count_block<R: Region + ?Sized>(
    region: &R,
    origin: Vec2,
    delta: f64,
    i0: usize,
    j0: usize,
    i1: usize,
    j1: usize,
) -> u64 {
    let (w, hgt) = (i1 - i0, j1 - j0);
    if w == 0 || hgt == 0 {
        return 0;
    }
    let c = Vec2::new(
        origin.x + 0.5 * (i0 + i1) as f64 * delta,
        origin.y + 0.5 * (j0 + j1) as f64 * delta,
    );
    if w == 1 && hgt == 1 {
        return region.contains(c) as u64;
    }
    let spread = 0.5 * delta * (((w - 1) as f64).powi(2) + ((hgt - 1) as f64).powi(2)).sqrt();
    let (inside, safe) = region.probe(c);
    if safe > spread * (1.0 + 1e-9) + 1e-300 {
        return if inside { (w * hgt) as u64 } else { 0 };
    }
    let im = i0 + w.div_ceil(2);
    let jm = j0 + hgt.div_ceil(2);
    count_block(region, origin, delta, i0, j0, im, jm)
        + count_block(region, origin, delta, im, j0, i1, jm)
        + count_block(region, origin, delta, i0, jm, im, j1)
        + count_block(region, origin, delta, im, jm, i1, j1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridgeom::ShapeSpec;
    use crate::region::FnRegion;

    #[test]
    fn disk_area() {
        let d = ShapeSpec::Disk { center: Vec2::new(0.1, -0.2), radius: 0.7 };
        let a = measure(&d, d.bbox().inflate(0.01), 1.0 / 128.0, 8);
        assert!((a - std::f64::consts::PI * 0.49).abs() < 1e-4, "{a}");
    }

    #[test]
    fn counting_matches_brute_force() {
        let d = ShapeSpec::Disk { center: Vec2::new(0.3, 0.4), radius: 0.35 };
        let delta = 1.0 / 100.0;
        let n = count_cells(&d, Vec2::ZERO, delta, 100, 100);
        let mut brute = 0;
        for j in 0..100 {
            for i in 0..100 {
                let z = Vec2::new((i as f64 + 0.5) * delta, (j as f64 + 0.5) * delta);
                brute += d.contains(z) as u64;
            }
        }
        assert_eq!(n, brute);
        let no_bound = FnRegion::new(|z: Vec2| z.x < 0.5, None);
        assert_eq!(count_cells(&no_bound, Vec2::ZERO, delta, 100, 100), 5000);
    }
}
