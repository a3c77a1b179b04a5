//! Declarative shape descriptions and their exact point-membership / signed-distance.

use crate::vec2::Vec2;

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub fn new(min: Vec2, max: Vec2) -> Self {
        Rect { min, max }
    }

    pub fn empty() -> Self {
        Rect::new(
            Vec2::new(f64::INFINITY, f64::INFINITY),
            Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        )
    }

    pub fn union(self, o: Rect) -> Rect {
        Rect::new(
            Vec2::new(self.min.x.min(o.min.x), self.min.y.min(o.min.y)),
            Vec2::new(self.max.x.max(o.max.x), self.max.y.max(o.max.y)),
        )
    }

    pub fn inflate(self, m: f64) -> Rect {
        Rect::new(self.min - Vec2::new(m, m), self.max + Vec2::new(m, m))
    }

    pub fn contains(&self, z: Vec2) -> bool {
        z.x >= self.min.x && z.x <= self.max.x && z.y >= self.min.y && z.y <= self.max.y
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x || self.min.y > self.max.y
    }

    /// Signed distance of `z` to the closed rectangle (negative inside).
    pub fn sdf(&self, z: Vec2) -> f64 {
        let c = (self.min + self.max) * 0.5;
        let half = (self.max - self.min) * 0.5;
        let q = Vec2::new((z.x - c.x).abs() - half.x, (z.y - c.y).abs() - half.y);
        let outside = Vec2::new(q.x.max(0.0), q.y.max(0.0)).norm();
        outside + q.x.max(q.y).min(0.0)
    }
}

/// The parameter sequence of a comb `a_1 > a_2 > ... > 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum CombSequence {
    /// `a_k = ratio^k`.
    Geometric { ratio: f64 },
    /// Explicit values `a_1, a_2, ...`; needs at least `teeth + 1` entries.
    Explicit(Vec<f64>),
}

impl CombSequence {
    /// `a_1 ..= a_n`.
    pub fn values(&self, n: usize) -> Vec<f64> {
        match self {
            CombSequence::Geometric { ratio } => (1..=n).map(|k| ratio.powi(k as i32)).collect(),
            CombSequence::Explicit(v) => v.iter().copied().take(n).collect(),
        }
    }
}

/// Comb `F_1`: teeth `[b_k, a_k] x [0, height]` with `b_k = (a_k + a_{k+1}) / 2`
/// for `k = 1..=teeth`, and the unresolved tail `k > teeth` replaced by the block
/// `[0, a_{teeth+1} / 2] x [0, height]`. The block carries exactly the tooth mass of
/// the tail, so slot widths summed over any window `k..` are preserved.
#[derive(Debug, Clone, PartialEq)]
pub struct Comb {
    pub a: Vec<f64>,
    pub teeth: usize,
    pub height: f64,
}

impl Comb {
    pub fn new(seq: &CombSequence, teeth: usize, height: f64) -> Self {
        Comb { a: seq.values(teeth + 2), teeth, height }
    }

    /// `a_k`, 1-based.
    pub fn a(&self, k: usize) -> f64 {
        self.a[k - 1]
    }

    /// `b_k = (a_k + a_{k+1}) / 2`, 1-based.
    pub fn b(&self, k: usize) -> f64 {
        0.5 * (self.a(k) + self.a(k + 1))
    }

    /// Right edge of the tail block.
    pub fn tail_width(&self) -> f64 {
        0.5 * self.a(self.teeth + 1)
    }

    pub fn rects(&self) -> Vec<Rect> {
        let mut out: Vec<Rect> = (1..=self.teeth)
            .map(|k| Rect::new(Vec2::new(self.b(k), 0.0), Vec2::new(self.a(k), self.height)))
            .collect();
        out.push(Rect::new(Vec2::ZERO, Vec2::new(self.tail_width(), self.height)));
        out
    }

    /// Smallest feature (tooth width or slot width) in the represented comb.
    pub fn smallest_feature(&self) -> f64 {
        let mut m = self.tail_width();
        for k in 1..=self.teeth {
            m = m.min(self.a(k) - self.b(k));
            let next_edge = if k < self.teeth { self.a(k + 1) } else { self.tail_width() };
            m = m.min(self.b(k) - next_edge);
        }
        m
    }
}

/// A declarative description of a compact planar set.
#[derive(Debug, Clone, PartialEq)]
pub enum ShapeSpec {
    /// Closed polygon. If its area vanishes it is read as the union of its edges.
    Polygon(Vec<Vec2>),
    /// Open polygonal curve (zero area).
    Polyline(Vec<Vec2>),
    Disk { center: Vec2, radius: f64 },
    Rect(Rect),
    Union(Vec<ShapeSpec>),
    Difference(Box<ShapeSpec>, Box<ShapeSpec>),
    Comb(Comb),
    /// Finite point set (zero area).
    Points(Vec<Vec2>),
    /// Explicit occupancy, row-major, cell size `h`, lower-left corner `origin`.
    Bitmap { origin: Vec2, h: f64, nx: usize, ny: usize, cells: Vec<bool> },
}

pub(crate) fn polygon_area(v: &[Vec2]) -> f64 {
    let n = v.len();
    (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>() * 0.5
}

pub(crate) fn point_segment_distance(z: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let l2 = ab.norm2();
    let t = if l2 > 0.0 { ((z - a).dot(ab) / l2).clamp(0.0, 1.0) } else { 0.0 };
    z.dist(a + ab * t)
}

fn point_in_polygon(z: Vec2, v: &[Vec2]) -> bool {
    let n = v.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (v[i], v[j]);
        if (a.y > z.y) != (b.y > z.y) {
            let xc = a.x + (z.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if z.x < xc {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

impl ShapeSpec {
    /// True when the shape has positive area.
    pub fn is_solid(&self) -> bool {
        match self {
            ShapeSpec::Polygon(v) => v.len() >= 3 && polygon_area(v).abs() > 1e-14,
            ShapeSpec::Polyline(_) | ShapeSpec::Points(_) => false,
            ShapeSpec::Disk { radius, .. } => *radius > 0.0,
            ShapeSpec::Rect(r) => r.width() > 0.0 && r.height() > 0.0,
            ShapeSpec::Union(parts) => parts.iter().any(|p| p.is_solid()),
            ShapeSpec::Difference(a, _) => a.is_solid(),
            ShapeSpec::Comb(_) => true,
            ShapeSpec::Bitmap { .. } => true,
        }
    }

    /// Edges of a zero-area shape.
    pub fn curve_segments(&self) -> Vec<(Vec2, Vec2)> {
        match self {
            ShapeSpec::Polyline(v) => v.windows(2).map(|w| (w[0], w[1])).collect(),
            ShapeSpec::Polygon(v) if !self.is_solid() => {
                let n = v.len();
                let mut segs: Vec<(Vec2, Vec2)> = Vec::new();
                for i in 0..n {
                    let (a, b) = (v[i], v[(i + 1) % n]);
                    if a == b || segs.iter().any(|&(p, q)| (p == b && q == a) || (p == a && q == b)) {
                        continue;
                    }
                    segs.push((a, b));
                }
                segs
            }
            ShapeSpec::Union(parts) => parts.iter().flat_map(|p| p.curve_segments()).collect(),
            _ => Vec::new(),
        }
    }

    /// Bounding box of the set.
    pub fn bbox(&self) -> Rect {
        match self {
            ShapeSpec::Polygon(v) | ShapeSpec::Polyline(v) | ShapeSpec::Points(v) => v.iter().fold(Rect::empty(), |r, &p| {
                r.union(Rect::new(p, p))
            }),
            ShapeSpec::Disk { center, radius } => Rect::new(
                *center - Vec2::new(*radius, *radius),
                *center + Vec2::new(*radius, *radius),
            ),
            ShapeSpec::Rect(r) => *r,
            ShapeSpec::Union(parts) => parts.iter().fold(Rect::empty(), |r, p| r.union(p.bbox())),
            ShapeSpec::Difference(a, _) => a.bbox(),
            ShapeSpec::Comb(c) => c.rects().into_iter().fold(Rect::empty(), Rect::union),
            ShapeSpec::Bitmap { origin, h, nx, ny, cells } => {
                let mut r = Rect::empty();
                for j in 0..*ny {
                    for i in 0..*nx {
                        if cells[j * nx + i] {
                            let lo = *origin + Vec2::new(i as f64 * h, j as f64 * h);
                            r = r.union(Rect::new(lo, lo + Vec2::new(*h, *h)));
                        }
                    }
                }
                r
            }
        }
    }

    /// Signed distance (negative inside) for solid shapes built from primitives.
    /// Unsigned distance for zero-area curves; `None` for bitmaps.
    /// Unions and differences use min/max, exact in sign and exact in value near
    /// the zero level away from junctions.
    pub fn sdf(&self, z: Vec2) -> Option<f64> {
        Some(match self {
            ShapeSpec::Polygon(v) if self.is_solid() => {
                let n = v.len();
                let d = (0..n)
                    .map(|i| point_segment_distance(z, v[i], v[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min);
                if point_in_polygon(z, v) {
                    -d
                } else {
                    d
                }
            }
            ShapeSpec::Points(v) => v.iter().map(|p| z.dist(*p)).fold(f64::INFINITY, f64::min),
            ShapeSpec::Polygon(_) | ShapeSpec::Polyline(_) => self
                .curve_segments()
                .iter()
                .map(|&(a, b)| point_segment_distance(z, a, b))
                .fold(f64::INFINITY, f64::min),
            ShapeSpec::Disk { center, radius } => z.dist(*center) - radius,
            ShapeSpec::Rect(r) => r.sdf(z),
            ShapeSpec::Union(parts) => {
                let mut m = f64::INFINITY;
                for p in parts {
                    m = m.min(p.sdf(z)?);
                }
                m
            }
            ShapeSpec::Difference(a, b) => a.sdf(z)?.max(-b.sdf(z)?),
            ShapeSpec::Comb(c) => c.rects().iter().map(|r| r.sdf(z)).fold(f64::INFINITY, f64::min),
            ShapeSpec::Bitmap { .. } => return None,
        })
    }

    /// Closed-set membership.
    pub fn contains(&self, z: Vec2) -> bool {
        if let Some(d) = self.sdf(z) {
            return d <= 0.0;
        }
        match self {
            ShapeSpec::Bitmap { origin, h, nx, ny, cells } => {
                let fx = ((z.x - origin.x) / h).floor();
                let fy = ((z.y - origin.y) / h).floor();
                if fx < 0.0 || fy < 0.0 || fx >= *nx as f64 || fy >= *ny as f64 {
                    return false;
                }
                cells[fy as usize * nx + fx as usize]
            }
            ShapeSpec::Union(parts) => parts.iter().any(|p| p.contains(z)),
            ShapeSpec::Difference(a, b) => a.contains(z) && !b.contains(z),
            _ => false,
        }
    }

    /// Distance from `z` to the boundary of the set, when an exact value is
    /// available: primitives, and unions whose parts have disjoint interiors and
    /// do not share boundary pieces.
    pub fn boundary_distance(&self, z: Vec2) -> Option<f64> {
        self.sdf(z).map(f64::abs)
    }

    /// Whether a zero-area shape meets the half-open cell `[lo, lo + h)^2`.
    pub fn curve_meets_cell(&self, lo: Vec2, h: f64) -> bool {
        let cell = Rect::new(lo, lo + Vec2::new(h, h));
        self.curve_segments().iter().any(|&(a, b)| segment_meets_half_open_cell(a, b, &cell))
    }
}

/// Whether segment `ab` meets the half-open box `[min, max)`.
fn segment_meets_half_open_cell(a: Vec2, b: Vec2, c: &Rect) -> bool {
    let d = b - a;
    // parameter interval [lo, hi] of closed constraints, (olo, ohi) of strict ones
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let (mut olo, mut ohi) = (f64::NEG_INFINITY, f64::INFINITY);
    for (p, q, mn, mx) in [(a.x, d.x, c.min.x, c.max.x), (a.y, d.y, c.min.y, c.max.y)] {
        if q == 0.0 {
            if p < mn || p >= mx {
                return false;
            }
            continue;
        }
        let tmin = (mn - p) / q;
        let tmax = (mx - p) / q;
        if q > 0.0 {
            lo = lo.max(tmin);
            ohi = ohi.min(tmax);
        } else {
            hi = hi.min(tmin);
            olo = olo.max(tmax);
        }
    }
    let a0 = lo.max(olo);
    let a1 = hi.min(ohi);
    if lo > hi {
        return false;
    }
    if a0 < a1 {
        return true;
    }
    // degenerate: a single closed point may still satisfy strict bounds
    a0 == a1 && a0 >= lo && a0 <= hi && a0 > olo && a0 < ohi
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comb_features() {
        let c = Comb::new(&CombSequence::Geometric { ratio: 0.5 }, 6, 1.0);
        assert!((c.smallest_feature() - 2f64.powi(-8)).abs() < 1e-15);
        let rects = c.rects();
        assert_eq!(rects.len(), 7);
        for w in rects.windows(2) {
            assert!(w[1].max.x < w[0].min.x);
        }
    }

    #[test]
    fn rect_sdf_signs() {
        let r = Rect::new(Vec2::ZERO, Vec2::new(1.0, 1.0));
        assert!((r.sdf(Vec2::new(0.5, 0.5)) + 0.5).abs() < 1e-15);
        assert!((r.sdf(Vec2::new(2.0, 0.5)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_area_polygon_is_curve() {
        let s = ShapeSpec::Polygon(vec![Vec2::new(0.0, 0.0), Vec2::new(0.0, 1.0)]);
        assert!(!s.is_solid());
        assert_eq!(s.curve_segments().len(), 1);
        assert!(s.curve_meets_cell(Vec2::new(0.0, 0.5), 0.01));
        assert!(!s.curve_meets_cell(Vec2::new(-0.01, 0.5), 0.01));
    }
}
