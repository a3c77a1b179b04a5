//! Support measures of convex polygons, numerical local Steiner formulas, and the
//! boundary measure `Q` that turns set derivatives into measure derivatives.

use std::sync::Arc;

use crate::bundle::NormalBundle;
use crate::cylinder::harness::MONOTONE_SLACK;
use crate::cylinder::{FiberIntervalSet, SetFamily};
use crate::error::{Error, Result};
use crate::families::convex::ConvexBody;
use crate::gridgeom::shape::point_segment_distance;
use crate::gridgeom::{Rect, SetGeometry, Side};
use crate::quadrature::integrate;
use crate::region::{Combined, ProbeRegion, Region, SetOp, SharedRegion};
use crate::vec2::Vec2;

/// Subcells per axis in boundary cells of the grid quadratures.
const SUB: usize = 4;

/// Exact `Θ1` (edge lengths) and `Θ0` (turning angles) of a convex polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonMeasures {
    /// Counterclockwise vertices.
    pub polygon: Vec<Vec2>,
    /// `theta1[i]` belongs to the edge from vertex `i` to vertex `i + 1`.
    pub theta1: Vec<f64>,
    pub theta0: Vec<f64>,
    pub theta1_total: f64,
    pub theta0_total: f64,
}

impl PolygonMeasures {
    /// `μ((F + t B) \ F) = t Θ1 + t²/2 Θ0`.
    pub fn steiner_area(&self, t: f64) -> f64 {
        t * self.theta1_total + 0.5 * t * t * self.theta0_total
    }

    /// Outward unit normal of edge `i`.
    pub fn edge_normal(&self, i: usize) -> Vec2 {
        let n = self.polygon.len();
        let (a, b) = (self.polygon[i], self.polygon[(i + 1) % n]);
        (b - a).right_perp().normalized().unwrap_or(Vec2::new(1.0, 0.0))
    }

    /// Signed distance to the polygon (negative inside).
    pub fn sdf(&self, z: Vec2) -> f64 {
        let v = &self.polygon;
        let n = v.len();
        if n == 1 {
            return z.dist(v[0]);
        }
        let d = (0..n).map(|i| point_segment_distance(z, v[i], v[(i + 1) % n])).fold(f64::INFINITY, f64::min);
        let inside = n >= 3 && (0..n).all(|i| (v[(i + 1) % n] - v[i]).cross(z - v[i]) > 0.0);
        if inside {
            -d
        } else {
            d
        }
    }

    /// Inner reach at `x` on edge `e`: how far the inward normal ray keeps `e` as
    /// its nearest edge line.
    pub fn inner_reach(&self, e: usize, x: Vec2) -> f64 {
        let n = self.polygon.len();
        if n < 3 {
            return 0.0;
        }
        let ne = self.edge_normal(e);
        (0..n)
            .filter(|&j| j != e)
            .filter_map(|j| {
                let nj = self.edge_normal(j);
                let dj = (self.polygon[j] - x).dot(nj);
                let rate = 1.0 - ne.dot(nj);
                (rate > 1e-15).then(|| dj.max(0.0) / rate)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn polygon_support_measures(poly: &[Vec2]) -> Result<PolygonMeasures> {
    let body = ConvexBody::polygon(poly.to_vec())?;
    let v = body.vertices().to_vec();
    let n = v.len();
    if n == 1 {
        return Ok(PolygonMeasures {
            polygon: v,
            theta1: vec![0.0],
            theta0: vec![std::f64::consts::TAU],
            theta1_total: 0.0,
            theta0_total: std::f64::consts::TAU,
        });
    }
    let mut m = PolygonMeasures { polygon: v, theta1: Vec::new(), theta0: Vec::new(), theta1_total: 0.0, theta0_total: 0.0 };
    for i in 0..n {
        m.theta1.push(m.polygon[i].dist(m.polygon[(i + 1) % n]));
    }
    for i in 0..n {
        let (a, b) = (m.edge_normal((i + n - 1) % n), m.edge_normal(i));
        let (cr, dt) = (a.cross(b), a.dot(b));
        // antipodal normals (segment endpoints) turn by π
        let ang = if cr.abs() <= 1e-12 && dt < 0.0 { std::f64::consts::PI } else { cr.atan2(dt) };
        if ang < -1e-12 {
            return Err(Error::NonConvex);
        }
        m.theta0.push(ang.max(0.0));
    }
    m.theta1_total = m.theta1.iter().sum();
    m.theta0_total = m.theta0.iter().sum();
    Ok(m)
}

pub type PointFn = Arc<dyn Fn(Vec2) -> f64 + Send + Sync>;

/// Integrand of the Steiner check.
#[derive(Clone)]
pub enum TestFunction {
    Indicator(SharedRegion),
    Smooth(PointFn),
}

impl TestFunction {
    pub fn zero() -> Self {
        TestFunction::Smooth(Arc::new(|_| 0.0))
    }
}

/// The set the Steiner check runs on.
#[derive(Clone)]
pub enum SteinerSet {
    /// Exact path; `h` is the spacing of the grid quadrature on the left side.
    Polygon { measures: PolygonMeasures, h: f64 },
    /// First-order path through the sampled bundle.
    Grid(Arc<NormalBundle>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sides {
    Outer,
    TwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Full,
    FirstOrder,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteinerReport {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
    pub lhs_outer: f64,
    pub lhs_inner: f64,
    pub rhs_outer: f64,
    pub rhs_inner: f64,
    /// Declared bound on the neglected higher-order terms.
    pub budget: f64,
}

fn rel_err(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else {
        d / b.abs().max(1e-300)
    }
}

/// Membership runs of `{s in [0, len] : x + s u in R}`.
fn ray_runs<R: Region + ?Sized>(r: &R, x: Vec2, u: Vec2, len: f64, h: f64) -> Vec<(f64, f64)> {
    let at = |s: f64| x + u * s;
    let mut runs = Vec::new();
    let mut pos = 0.0;
    let (mut inside, mut safe) = r.probe(at(0.0));
    let mut start = inside.then_some(0.0);
    while pos < len {
        let next = (pos + safe.max(0.25 * h)).min(len);
        let (now, rad) = r.probe(at(next));
        if now != inside {
            let (mut lo, mut hi) = (pos, next);
            for _ in 0..64 {
                if hi - lo <= 1e-15 * (1.0 + hi) {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                if r.contains(at(mid)) == inside {
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
        safe = rad;
        pos = next;
    }
    if let Some(s0) = start {
        runs.push((s0, len));
    }
    runs
}

/// `∫_0^len f(x + s u) s^power ds`.
fn ray_integral(f: &TestFunction, x: Vec2, u: Vec2, len: f64, power: i32, h: f64) -> f64 {
    if len <= 0.0 {
        return 0.0;
    }
    match f {
        TestFunction::Indicator(r) => ray_runs(r, x, u, len, h)
            .into_iter()
            .map(|(a, b)| (b.powi(power + 1) - a.powi(power + 1)) / (power + 1) as f64)
            .sum(),
        TestFunction::Smooth(g) => {
            let n = ((4.0 * len / h).ceil() as usize).max(16);
            let ds = len / n as f64;
            (0..n)
                .map(|k| {
                    let s = (k as f64 + 0.5) * ds;
                    g(x + u * s) * s.powi(power)
                })
                .sum::<f64>()
                * ds
        }
    }
}

fn integrate_fn<R: Region + ?Sized>(f: &TestFunction, region: &R, window: Rect, h: f64) -> f64 {
    match f {
        TestFunction::Indicator(ind) => {
            integrate(&Combined::new(SetOp::Intersection, ind.clone(), region), |_| 1.0, window, h, SUB)
        }
        TestFunction::Smooth(g) => integrate(region, |z| g(z), window, h, SUB),
    }
}

/// Grid quadrature of `∫ f` off the set against the local Steiner right side.
pub fn steiner_check(set: &SteinerSet, f: &TestFunction, t_max: f64, sides: Sides, order: Order) -> Result<SteinerReport> {
    match set {
        SteinerSet::Polygon { measures, h } => Ok(polygon_check(measures, *h, f, t_max, sides, order)),
        SteinerSet::Grid(nb) => {
            if order == Order::Full {
                return Err(Error::UnsupportedSet("grid sets only carry the first-order term".into()));
            }
            Ok(grid_check(nb, f, t_max, sides))
        }
    }
}

fn polygon_check(m: &PolygonMeasures, h: f64, f: &TestFunction, t_max: f64, sides: Sides, order: Order) -> SteinerReport {
    let v = &m.polygon;
    let n = v.len();
    let window = v.iter().fold(Rect::empty(), |r, &p| r.union(Rect::new(p, p))).inflate(t_max + 2.0 * h);
    let poly = m.clone();
    let outside = ProbeRegion::new(
        move |z| {
            let d = poly.sdf(z);
            (d > 0.0, d.abs())
        },
        Some(window),
    );
    let lhs_outer = integrate_fn(f, &outside, window, h);

    let mut rhs_outer = 0.0;
    let mut rhs_inner = 0.0;
    if n >= 2 {
        for i in 0..n {
            let (a, b) = (v[i], v[(i + 1) % n]);
            let len = a.dist(b);
            let k = ((len / h).ceil() as usize).max(1);
            let dx = len / k as f64;
            let nrm = m.edge_normal(i);
            for j in 0..k {
                let x = a + (b - a) * ((j as f64 + 0.5) / k as f64);
                rhs_outer += ray_integral(f, x, nrm, t_max, 0, h) * dx;
                if sides == Sides::TwoSided {
                    let r = m.inner_reach(i, x).min(t_max);
                    rhs_inner += ray_integral(f, x, -nrm, r, 0, h) * dx;
                }
            }
        }
    }
    if order == Order::Full {
        for i in 0..n {
            let theta = m.theta0[i];
            let n0 = if n == 1 { Vec2::new(1.0, 0.0) } else { m.edge_normal((i + n - 1) % n) };
            let k = ((theta * t_max / h).ceil() as usize).max(1);
            let da = theta / k as f64;
            for j in 0..k {
                let (s, c) = ((j as f64 + 0.5) * da).sin_cos();
                let u = Vec2::new(c * n0.x - s * n0.y, s * n0.x + c * n0.y);
                rhs_outer += ray_integral(f, v[i], u, t_max, 1, h) * da;
            }
        }
    }

    let lhs_inner = if sides == Sides::TwoSided {
        let poly = m.clone();
        let inside = ProbeRegion::new(
            move |z| {
                let d = poly.sdf(z);
                (d < 0.0, d.abs())
            },
            Some(window),
        );
        integrate_fn(f, &inside, window, h)
    } else {
        0.0
    };
    let budget = match order {
        Order::Full => 0.0,
        Order::FirstOrder => t_max * t_max * m.theta0_total,
    };
    let (lhs, rhs) = (lhs_outer + lhs_inner, rhs_outer + rhs_inner);
    SteinerReport { lhs, rhs, rel_err: rel_err(lhs, rhs), lhs_outer, lhs_inner, rhs_outer, rhs_inner, budget }
}

fn grid_check(nb: &Arc<NormalBundle>, f: &TestFunction, t_max: f64, sides: Sides) -> SteinerReport {
    let geom = nb.geometry().clone();
    let h = geom.h();
    let window = geom.grid.bbox();
    let g = geom.clone();
    let outside = ProbeRegion::new(
        move |z| {
            let (i, d) = g.probe(z);
            (!i && d > 0.0, d)
        },
        Some(window),
    );
    let lhs_outer = integrate_fn(f, &outside, window, h);
    let lhs_inner = if sides == Sides::TwoSided && geom.is_solid() {
        let g = geom.clone();
        let inside = ProbeRegion::new(
            move |z| {
                let (i, d) = g.probe(z);
                (i && d > 0.0, d)
            },
            Some(window),
        );
        integrate_fn(f, &inside, window, h)
    } else {
        0.0
    };
    let (mut rhs_outer, mut rhs_inner) = (0.0, 0.0);
    for s in &nb.samples {
        let v = s.weight * ray_integral(f, s.x, s.ray_dir(), s.reach().cap(t_max), 0, h);
        match s.side {
            Side::Outer => rhs_outer += v,
            Side::Inner if sides == Sides::TwoSided => rhs_inner += v,
            Side::Inner => {}
        }
    }
    let (lhs, rhs) = (lhs_outer + lhs_inner, rhs_outer + rhs_inner);
    SteinerReport {
        lhs,
        rhs,
        rel_err: rel_err(lhs, rhs),
        lhs_outer,
        lhs_inner,
        rhs_outer,
        rhs_inner,
        budget: t_max * t_max * nb.total_weight,
    }
}

/// A density `f` of `P` with boundary approximations `f̄₊` (outside) and `f̄₋` (inside).
#[derive(Clone)]
pub struct DensitySpec {
    pub name: String,
    pub f: PointFn,
    pub f_plus: PointFn,
    pub f_minus: PointFn,
    /// Declared bound on `f̄₊` and `f̄₋`.
    pub bound: f64,
}

impl std::fmt::Debug for DensitySpec {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fm.debug_struct("DensitySpec").field("name", &self.name).field("bound", &self.bound).finish()
    }
}

impl DensitySpec {
    /// Density whose boundary functions are its own trace.
    pub fn custom(name: &str, f: PointFn, bound: f64) -> Self {
        DensitySpec { name: name.into(), f_plus: f.clone(), f_minus: f.clone(), f, bound }
    }

    /// Centered isotropic Gaussian with standard deviation `sigma`.
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!("gaussian sigma must be positive, got {sigma}")));
        }
        let c = 1.0 / (std::f64::consts::TAU * sigma * sigma);
        let f: PointFn = Arc::new(move |z: Vec2| c * (-0.5 * z.norm2() / (sigma * sigma)).exp());
        Ok(DensitySpec::custom(&format!("gaussian({sigma})"), f, c))
    }

    /// Lebesgue measure.
    pub fn uniform() -> Self {
        DensitySpec::custom("uniform", Arc::new(|_| 1.0), 1.0)
    }

    /// Piecewise constant on cells `origin + [i h, (i+1) h) x [j h, (j+1) h)`, zero outside.
    pub fn table(origin: Vec2, h: f64, nx: usize, ny: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != nx * ny || !(h > 0.0) {
            return Err(Error::InvalidArgument(format!("density table needs {} values, got {}", nx * ny, values.len())));
        }
        if values.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument("density table values must be finite and nonnegative".into()));
        }
        let bound = values.iter().copied().fold(0.0, f64::max);
        let f: PointFn = Arc::new(move |z: Vec2| {
            let i = ((z.x - origin.x) / h).floor();
            let j = ((z.y - origin.y) / h).floor();
            if i < 0.0 || j < 0.0 || i >= nx as f64 || j >= ny as f64 {
                0.0
            } else {
                values[j as usize * nx + i as usize]
            }
        });
        Ok(DensitySpec::custom("table", f, bound))
    }

    pub fn with_boundary(mut self, f_plus: PointFn, f_minus: PointFn, bound: f64) -> Self {
        self.f_plus = f_plus;
        self.f_minus = f_minus;
        self.bound = bound;
        self
    }
}

/// `Q(B)`: fiber lengths weighted by `f̄₊` on `t >= 0` and `f̄₋` on `t < 0`.
pub fn q_measure(b: &FiberIntervalSet, ds: &DensitySpec) -> f64 {
    let mut acc = 0.0;
    for (s, f) in b.bundle().samples.iter().zip(b.fibers()) {
        let (mut pos, mut neg) = (0.0, 0.0);
        for &(a, c) in f {
            pos += c.max(0.0) - a.max(0.0);
            neg += c.min(0.0) - a.min(0.0);
        }
        if pos > 0.0 {
            acc += s.weight * pos * (ds.f_plus)(s.x);
        }
        if neg > 0.0 {
            acc += s.weight * neg * (ds.f_minus)(s.x);
        }
    }
    acc
}

/// Approximation residuals of the boundary densities on the `eps` shells outside
/// and inside the set.
pub fn density_residuals(geom: &Arc<SetGeometry>, ds: &DensitySpec, eps: f64) -> (f64, f64) {
    let window = geom.grid.bbox();
    let h = geom.h();
    let shell = |want_inside: bool| {
        let g = geom.clone();
        let g2 = geom.clone();
        let fb = if want_inside { ds.f_minus.clone() } else { ds.f_plus.clone() };
        let f = ds.f.clone();
        let region = ProbeRegion::new(
            move |z| match g.nearest(z) {
                Some(n) => {
                    let inside = g.is_solid() && g.boundary.inside_with(z, &n);
                    if inside != want_inside {
                        (false, n.dist)
                    } else {
                        (n.dist > 0.0 && n.dist <= eps, n.dist.min((n.dist - eps).abs()))
                    }
                }
                None => (false, f64::INFINITY),
            },
            Some(window),
        );
        let integrand = move |z: Vec2| match g2.nearest(z) {
            Some(n) => (f(z) - fb(n.point)).abs(),
            None => 0.0,
        };
        integrate(&region, integrand, window, h, SUB) / eps
    };
    let outer = shell(false);
    let inner = if geom.is_solid() { shell(true) } else { 0.0 };
    (outer, inner)
}

/// Options of [`measure_derivative_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureOptions {
    /// Relative tolerance on `|P(A(ε))/ε - Q(B)|` at the last ε.
    pub rel_tol: f64,
    /// Also compare `(P(A⁺) - P(A⁻))/ε` with `Q(B⁺) - Q(B⁻)`.
    pub signed: bool,
    /// Also run the variant restricted to fibers with `min(r₊, r₋) > c`.
    pub restrict: Option<f64>,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        MeasureOptions { rel_tol: 0.02, signed: false, restrict: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignedSplit {
    pub q_plus: f64,
    pub q_minus: f64,
    /// `(P(A⁺(ε)) - P(A⁻(ε)))/ε`.
    pub ratios: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedPart {
    pub c: f64,
    /// `Q(B ∩ R_c)`.
    pub q: f64,
    /// `P(A(ε, c))/ε`.
    pub ratios: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureDerivativeReport {
    pub epsilons: Vec<f64>,
    /// `P(A(ε))/ε`.
    pub ratios: Vec<f64>,
    pub q_b: f64,
    pub errors: Vec<f64>,
    /// Outer and inner density residuals per ε.
    pub residuals: Vec<(f64, f64)>,
    pub signed: Option<SignedSplit>,
    pub restricted: Option<RestrictedPart>,
    pub converged: bool,
}

impl MeasureDerivativeReport {
    pub fn final_rel_err(&self) -> f64 {
        self.errors.last().map_or(f64::NAN, |e| e / self.q_b.abs().max(1e-300))
    }
}

fn residuals_decrease(r: &[f64]) -> bool {
    let first = r[0];
    if r.iter().all(|&x| x <= 1e-12) {
        return true;
    }
    let slack = MONOTONE_SLACK * first;
    r.windows(2).all(|w| w[1] <= w[0] + slack) && r[r.len() - 1] < first
}

/// Compare `P(A(ε))/ε` with `Q(B)` along the ε schedule.
pub fn measure_derivative_check(
    family: &dyn SetFamily,
    b: &FiberIntervalSet,
    ds: &DensitySpec,
    eps: &[f64],
    opts: MeasureOptions,
) -> Result<MeasureDerivativeReport> {
    crate::cylinder::harness::check_schedule(eps)?;
    let nb = b.bundle().clone();
    let geom = nb.geometry().clone();
    let h = geom.h();
    let window = geom.grid.bbox();
    let over = nb.samples.iter().map(|s| (ds.f_plus)(s.x).max((ds.f_minus)(s.x))).fold(0.0, f64::max);
    if over > ds.bound * (1.0 + 1e-9) {
        return Err(Error::InvalidArgument(format!(
            "boundary density reaches {over}, above the declared bound {}",
            ds.bound
        )));
    }
    let q_b = q_measure(b, ds);
    let f = ds.f.clone();
    let mass = |r: &dyn Region| integrate(r, |z| f(z), window, h, SUB);

    let mut ratios = Vec::new();
    let mut residuals = Vec::new();
    let mut signed_ratios = Vec::new();
    let mut restricted_ratios = Vec::new();
    let rc = opts.restrict.map(|c| {
        let nb = nb.clone();
        let g = geom.clone();
        ProbeRegion::new(
            move |z| {
                let keep = g.nearest(z).is_some_and(|n| {
                    let inside = g.is_solid() && g.boundary.inside_with(z, &n);
                    nb.fiber_of(z, &n, inside).is_some_and(|k| {
                        let s = &nb.samples[k as usize];
                        s.r_plus.min(s.r_minus).exceeds(c)
                    })
                });
                (keep, 0.0)
            },
            Some(window),
        )
    });
    for &e in eps {
        let a = family.a_region(e)?;
        ratios.push(mass(&*a) / e);
        residuals.push(density_residuals(&geom, ds, e));
        if opts.signed {
            let plus = Combined::new(SetOp::Difference, a.clone(), geom.clone());
            let minus = Combined::new(SetOp::Intersection, a.clone(), geom.clone());
            signed_ratios.push((mass(&plus) - mass(&minus)) / e);
        }
        if let Some(rc) = &rc {
            restricted_ratios.push(mass(&Combined::new(SetOp::Intersection, a.clone(), rc)) / e);
        }
    }
    let totals: Vec<f64> = residuals.iter().map(|(a, b)| a + b).collect();
    if !residuals_decrease(&totals) {
        return Err(Error::DensityConditionFails(totals));
    }
    let errors: Vec<f64> = ratios.iter().map(|r| (r - q_b).abs()).collect();
    let converged = errors.last().is_some_and(|&e| e <= opts.rel_tol * q_b.abs().max(1e-300));
    let signed = opts.signed.then(|| {
        let mut q_plus = 0.0;
        let mut q_minus = 0.0;
        for (s, f) in nb.samples.iter().zip(b.fibers()) {
            for &(a, c) in f {
                q_plus += s.weight * (c.max(0.0) - a.max(0.0)) * (ds.f_plus)(s.x);
                q_minus += s.weight * (c.min(0.0) - a.min(0.0)) * (ds.f_minus)(s.x);
            }
        }
        SignedSplit { q_plus, q_minus, ratios: signed_ratios }
    });
    let restricted = match opts.restrict {
        Some(c) => {
            let sub = Arc::new(nb.restrict(c)?);
            let q = q_measure(&b.restrict_to(&sub)?, ds);
            Some(RestrictedPart { c, q, ratios: restricted_ratios })
        }
        None => None,
    };
    Ok(MeasureDerivativeReport { epsilons: eps.to_vec(), ratios, q_b, errors, residuals, signed, restricted, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::sample_bundle;
    use crate::families::FamilySpec;
    use crate::gridgeom::ShapeSpec;

    fn square() -> Vec<Vec2> {
        vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)]
    }

    fn shell(m: &PolygonMeasures, t: f64) -> TestFunction {
        let m = m.clone();
        TestFunction::Indicator(Arc::new(ProbeRegion::new(
            move |z| {
                let d = m.sdf(z);
                (d > 0.0 && d <= t, d.abs().min((d - t).abs()))
            },
            None,
        )))
    }

    #[test]
    fn square_and_triangle_measures() {
        let m = polygon_support_measures(&square()).unwrap();
        assert!((m.theta1_total - 4.0).abs() < 1e-12);
        assert!((m.theta0_total - std::f64::consts::TAU).abs() < 1e-9);
        let s3 = 3f64.sqrt() / 2.0;
        let tri = polygon_support_measures(&[Vec2::new(0.0, 0.0), Vec2::new(0.5, s3), Vec2::new(1.0, 0.0)]).unwrap();
        assert!((tri.theta1_total - 3.0).abs() < 1e-12);
        for &a in &tri.theta0 {
            assert!((a - std::f64::consts::TAU / 3.0).abs() < 1e-12);
        }
        let seg = polygon_support_measures(&[Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0)]).unwrap();
        assert!((seg.theta1_total - 4.0).abs() < 1e-12 && (seg.theta0_total - std::f64::consts::TAU).abs() < 1e-12);
        let l = [Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0), Vec2::new(1.0, 0.2), Vec2::new(1.0, 1.0)];
        assert!(matches!(polygon_support_measures(&l), Err(Error::NonConvex)));
    }

    #[test]
    fn polygon_rhs_reproduces_closed_form() {
        let m = polygon_support_measures(&square()).unwrap();
        let set = SteinerSet::Polygon { measures: m.clone(), h: 1.0 / 128.0 };
        let r = steiner_check(&set, &shell(&m, 0.1), 0.2, Sides::Outer, Order::Full).unwrap();
        assert!((r.rhs - m.steiner_area(0.1)).abs() < 1e-9, "{r:?}");
        assert!(r.rel_err < 0.01, "{r:?}");
        let z = steiner_check(&set, &TestFunction::zero(), 0.2, Sides::Outer, Order::Full).unwrap();
        assert_eq!((z.lhs, z.rhs, z.rel_err), (0.0, 0.0, 0.0));
    }

    #[test]
    fn inner_reach_of_square() {
        let m = polygon_support_measures(&square()).unwrap();
        assert!((m.inner_reach(0, Vec2::new(0.3, 0.0)) - 0.3).abs() < 1e-12);
        assert!((m.inner_reach(0, Vec2::new(0.5, 0.0)) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn grid_sets_reject_full_order() {
        let g = Arc::new(SetGeometry::from_shape(&ShapeSpec::Rect(Rect::new(Vec2::ZERO, Vec2::new(1.0, 1.0))), 1.0 / 64.0, 0.25).unwrap());
        let nb = Arc::new(sample_bundle(g).unwrap());
        let r = steiner_check(&SteinerSet::Grid(nb), &TestFunction::zero(), 0.1, Sides::Outer, Order::Full);
        assert!(matches!(r, Err(Error::UnsupportedSet(_))));
    }

    #[test]
    fn uniform_q_is_m_and_constant_family_has_zero_derivative() {
        let g = Arc::new(SetGeometry::from_shape(&ShapeSpec::Disk { center: Vec2::ZERO, radius: 1.0 }, 1.0 / 64.0, 0.5).unwrap());
        let nb = Arc::new(sample_bundle(g.clone()).unwrap());
        let slab = FiberIntervalSet::slab(nb.clone(), 0.0, 1.0);
        assert_eq!(q_measure(&slab, &DensitySpec::uniform()), slab.m_measure());
        let zero = DensitySpec::uniform().with_boundary(Arc::new(|_| 1.0), Arc::new(|_| 0.0), 1.0);
        assert_eq!(q_measure(&FiberIntervalSet::slab(nb.clone(), -1.0, 0.0), &zero), 0.0);
        let empty = FiberIntervalSet::empty(nb.clone(), 1.0);
        let r = measure_derivative_check(
            &FamilySpec::constant(g),
            &empty,
            &DensitySpec::gaussian(1.0).unwrap(),
            &[0.125, 0.0625],
            MeasureOptions::default(),
        )
        .unwrap();
        assert_eq!(r.ratios, vec![0.0, 0.0]);
        assert_eq!(r.q_b, 0.0);
    }
}
