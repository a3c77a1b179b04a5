//! Boundary polylines with a spatial index for nearest-point and inside queries.

use rstar::{PointDistance, RTree, RTreeObject, AABB};

use crate::vec2::Vec2;

#[derive(Debug, Clone)]
struct SegObj {
    a: [f64; 2],
    b: [f64; 2],
    id: u32,
}

impl RTreeObject for SegObj {
    type Envelope = AABB<[f64; 2]>;
    fn envelope(&self) -> Self::Envelope {
        AABB::from_corners(self.a, self.b)
    }
}

fn closest_param(z: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let l2 = dx * dx + dy * dy;
    if l2 == 0.0 {
        return 0.0;
    }
    (((z[0] - a[0]) * dx + (z[1] - a[1]) * dy) / l2).clamp(0.0, 1.0)
}

impl PointDistance for SegObj {
    fn distance_2(&self, z: &[f64; 2]) -> f64 {
        let t = closest_param(*z, self.a, self.b);
        let px = self.a[0] + t * (self.b[0] - self.a[0]);
        let py = self.a[1] + t * (self.b[1] - self.a[1]);
        (z[0] - px).powi(2) + (z[1] - py).powi(2)
    }
}

/// Result of a nearest-segment query.
#[derive(Debug, Clone, Copy)]
pub struct Nearest {
    pub seg: u32,
    /// Closest point on the segment.
    pub point: Vec2,
    /// Position of `point` along the segment in `[0, 1]`.
    pub param: f64,
    pub dist: f64,
}

/// Piecewise linear boundary. In solid mode the segments form closed loops
/// oriented with the set on the left, so `normals` point outward.
#[derive(Debug, Clone)]
pub struct BoundaryPolyline {
    pub vertices: Vec<Vec2>,
    pub segments: Vec<(u32, u32)>,
    pub lengths: Vec<f64>,
    pub normals: Vec<Vec2>,
    /// Segment ending where this one starts.
    pub prev: Vec<Option<u32>>,
    /// Segment starting where this one ends.
    pub next: Vec<Option<u32>>,
    /// True when the polyline bounds a region (solid mode).
    pub closed: bool,
    tree: RTree<SegObj>,
}

impl BoundaryPolyline {
    /// Build from vertices and oriented segments; adjacency is derived from shared vertices.
    pub fn new(vertices: Vec<Vec2>, segments: Vec<(u32, u32)>, closed: bool) -> Self {
        let n = segments.len();
        let mut lengths = Vec::with_capacity(n);
        let mut normals = Vec::with_capacity(n);
        for &(a, b) in &segments {
            let d = vertices[b as usize] - vertices[a as usize];
            let l = d.norm();
            lengths.push(l);
            normals.push(if l > 0.0 { d.right_perp() * (1.0 / l) } else { Vec2::ZERO });
        }
        let mut starts = vec![u32::MAX; vertices.len()];
        let mut ends = vec![u32::MAX; vertices.len()];
        for (k, &(a, b)) in segments.iter().enumerate() {
            starts[a as usize] = k as u32;
            ends[b as usize] = k as u32;
        }
        let opt = |v: u32| if v == u32::MAX { None } else { Some(v) };
        let prev = segments.iter().map(|&(a, _)| opt(ends[a as usize])).collect();
        let next = segments.iter().map(|&(_, b)| opt(starts[b as usize])).collect();
        let objs: Vec<SegObj> = segments
            .iter()
            .enumerate()
            .map(|(k, &(a, b))| SegObj {
                a: vertices[a as usize].to_array(),
                b: vertices[b as usize].to_array(),
                id: k as u32,
            })
            .collect();
        BoundaryPolyline {
            vertices,
            segments,
            lengths,
            normals,
            prev,
            next,
            closed,
            tree: RTree::bulk_load(objs),
        }
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.lengths.iter().sum()
    }

    pub fn endpoints(&self, k: usize) -> (Vec2, Vec2) {
        let (a, b) = self.segments[k];
        (self.vertices[a as usize], self.vertices[b as usize])
    }

    pub fn midpoint(&self, k: usize) -> Vec2 {
        let (a, b) = self.endpoints(k);
        (a + b) * 0.5
    }

    pub fn nearest(&self, z: Vec2) -> Option<Nearest> {
        let q = z.to_array();
        let o = self.tree.nearest_neighbor(q)?;
        let t = closest_param(q, o.a, o.b);
        let a = Vec2::new(o.a[0], o.a[1]);
        let b = Vec2::new(o.b[0], o.b[1]);
        let p = a + (b - a) * t;
        Some(Nearest { seg: o.id, point: p, param: t, dist: z.dist(p) })
    }

    /// All segments whose distance to `z` is at most `r`.
    pub fn within(&self, z: Vec2, r: f64) -> Vec<u32> {
        self.tree
            .locate_within_distance(z.to_array(), r * r)
            .map(|o| o.id)
            .collect()
    }

    /// Segments whose bounding boxes meet the given box.
    pub fn in_box(&self, lo: Vec2, hi: Vec2) -> Vec<u32> {
        self.tree
            .locate_in_envelope_intersecting(AABB::from_corners(lo.to_array(), hi.to_array()))
            .map(|o| o.id)
            .collect()
    }

    /// Outward reference direction at the nearest point: the segment normal in its
    /// interior, the sum of the two adjacent normals at a vertex.
    pub fn pseudonormal(&self, n: &Nearest) -> Vec2 {
        let k = n.seg as usize;
        let adj = if n.param <= 0.0 {
            self.prev[k]
        } else if n.param >= 1.0 {
            self.next[k]
        } else {
            None
        };
        match adj {
            Some(a) => self.normals[k] + self.normals[a as usize],
            None => self.normals[k],
        }
    }

    /// Closed-set membership for solid polylines: on the boundary counts as inside.
    pub fn inside_with(&self, z: Vec2, n: &Nearest) -> bool {
        if !self.closed {
            return n.dist == 0.0;
        }
        if n.dist == 0.0 {
            return true;
        }
        (z - n.point).dot(self.pseudonormal(n)) < 0.0
    }

    pub fn inside(&self, z: Vec2) -> bool {
        match self.nearest(z) {
            Some(n) => self.inside_with(z, &n),
            None => false,
        }
    }

    /// Signed distance, negative inside (solid) or unsigned (boundary mode).
    pub fn signed_distance(&self, z: Vec2) -> f64 {
        match self.nearest(z) {
            Some(n) if self.inside_with(z, &n) && self.closed => -n.dist,
            Some(n) => n.dist,
            None => f64::INFINITY,
        }
    }

    /// Whether the open segment `pq` crosses or touches the polyline.
    pub fn segment_hits(&self, p: Vec2, q: Vec2) -> bool {
        let lo = Vec2::new(p.x.min(q.x), p.y.min(q.y));
        let hi = Vec2::new(p.x.max(q.x), p.y.max(q.y));
        self.tree
            .locate_in_envelope_intersecting(AABB::from_corners(lo.to_array(), hi.to_array()))
            .any(|o| segments_intersect(p, q, Vec2::new(o.a[0], o.a[1]), Vec2::new(o.b[0], o.b[1])))
    }
}

/// Closed-segment intersection test.
pub fn segments_intersect(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> bool {
    let d1 = (p2 - p1).cross(q1 - p1);
    let d2 = (p2 - p1).cross(q2 - p1);
    let d3 = (q2 - q1).cross(p1 - q1);
    let d4 = (q2 - q1).cross(p2 - q1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |a: Vec2, b: Vec2, c: Vec2, d: f64| {
        d == 0.0 && c.x >= a.x.min(b.x) && c.x <= a.x.max(b.x) && c.y >= a.y.min(b.y) && c.y <= a.y.max(b.y)
    };
    on(p1, p2, q1, d1) || on(p1, p2, q2, d2) || on(q1, q2, p1, d3) || on(q1, q2, p2, d4)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> BoundaryPolyline {
        let v = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)];
        BoundaryPolyline::new(v, vec![(0, 1), (1, 2), (2, 3), (3, 0)], true)
    }

    #[test]
    fn square_inside_and_normals() {
        let p = unit_square();
        assert!(p.inside(Vec2::new(0.5, 0.5)));
        assert!(!p.inside(Vec2::new(1.5, 1.5)));
        assert!(!p.inside(Vec2::new(-0.1, -0.2)));
        assert!(p.inside(Vec2::new(0.999, 0.001)));
        assert_eq!(p.normals[0], Vec2::new(0.0, -1.0));
        assert!((p.total_length() - 4.0).abs() < 1e-15);
        let n = p.nearest(Vec2::new(0.5, 0.25)).unwrap();
        assert_eq!(n.point, Vec2::new(0.5, 0.0));
        assert_eq!(n.dist, 0.25);
    }

    #[test]
    fn segment_crossing() {
        let p = unit_square();
        assert!(p.segment_hits(Vec2::new(0.5, 0.5), Vec2::new(2.0, 0.5)));
        assert!(!p.segment_hits(Vec2::new(0.2, 0.5), Vec2::new(0.8, 0.5)));
    }
}
