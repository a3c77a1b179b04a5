//! Convergence tests on the cylinder: differentiability, r-differentiability,
//! essential boundedness and the derivative algebra.

use std::sync::Arc;

use crate::bundle::NormalBundle;
use crate::cylinder::fiber::{sym_diff_measure, FiberIntervalSet};
use crate::cylinder::magnify::magnify_set;
use crate::error::{Error, Result};
use crate::gridgeom::{Rect, SetGeometry};
use crate::quadrature::counted_area;
use crate::region::{Combined, ProbeRegion, Region, SetOp, SharedRegion};
use crate::vec2::Vec2;

/// Anything that yields the difference sets `A(eps) = F(eps) △ F`.
pub trait SetFamily: Send + Sync {
    fn a_region(&self, eps: f64) -> Result<SharedRegion>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Differentiable,
    RDifferentiableOnly,
    NotDifferentiable,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Differentiable => "differentiable",
            Verdict::RDifferentiableOnly => "r-differentiable-only",
            Verdict::NotDifferentiable => "not-differentiable",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestMode {
    Full,
    /// Restrict the bundle to samples with `min(r_plus, r_minus) > c`.
    Restricted(f64),
}

/// Factor in `tol_conv = TOL_FACTOR * h * weight`.
pub const TOL_FACTOR: f64 = 10.0;
pub const FLOOR_NC: f64 = 0.25;
/// Minimum number of ε values and minimum ratio `eps_max / eps_min`.
pub const MIN_POINTS: usize = 4;
pub const MIN_SPAN: f64 = 8.0;
/// Non-differentiability is read off the values with `eps <= NC_RANGE * eps_min`.
pub const NC_RANGE: f64 = 4.0;
/// Allowed increase between consecutive values, relative to `tol_conv`.
pub const MONOTONE_SLACK: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub epsilons: Vec<f64>,
    pub values: Vec<f64>,
    pub excess: Vec<f64>,
    pub verdict: Verdict,
    pub c: Option<f64>,
    pub tol_conv: f64,
    pub floor_nc: f64,
    /// Total weight of the bundle the test ran on.
    pub weight: f64,
}

impl ConvergenceReport {
    pub fn final_value(&self) -> f64 {
        *self.values.last().unwrap_or(&f64::NAN)
    }
}

/// Verdict of a sym-diff sequence over descending `eps`.
pub fn decide(eps: &[f64], values: &[f64], tol_conv: f64, floor_nc: f64) -> Verdict {
    let n = values.len();
    if n < MIN_POINTS || eps.len() != n || eps[0] / eps[n - 1] < MIN_SPAN {
        return Verdict::Inconclusive;
    }
    let slack = MONOTONE_SLACK * tol_conv;
    let tail = &values[n - 3..];
    if tail.windows(2).all(|w| w[1] <= w[0] + slack) && values[n - 1] < tol_conv {
        return Verdict::Differentiable;
    }
    let eps_min = eps[n - 1];
    if eps.iter().zip(values).filter(|(e, _)| **e <= NC_RANGE * eps_min).all(|(_, v)| *v >= floor_nc) {
        return Verdict::NotDifferentiable;
    }
    Verdict::Inconclusive
}

pub fn check_schedule(eps: &[f64]) -> Result<()> {
    if eps.is_empty() || eps.iter().any(|&e| !(e > 0.0)) || eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("ε schedule must be positive and strictly decreasing".into()));
    }
    Ok(())
}

/// The collar `{z : d(z, ∂F) <= r}`.
pub fn collar(geom: &Arc<SetGeometry>, r: f64) -> impl Region {
    let g = geom.clone();
    ProbeRegion::new(
        move |z| {
            let d = g.boundary_distance(z);
            (d <= r, (d - r).abs())
        },
        Some(geom.grid.bbox()),
    )
}

fn window_of(a: &SharedRegion, geom: &SetGeometry) -> Rect {
    let bb = geom.grid.bbox();
    match a.bounds() {
        Some(w) => Rect::new(
            Vec2::new(w.min.x.max(bb.min.x), w.min.y.max(bb.min.y)),
            Vec2::new(w.max.x.min(bb.max.x), w.max.y.min(bb.max.y)),
        ),
        None => bb,
    }
}

/// `(1/eps) μ(A(eps) \ (∂F)_{eps T})` for one ε, by cell counting at the grid spacing.
pub fn excess_mass(family: &dyn SetFamily, geom: &Arc<SetGeometry>, t_max: f64, eps: f64) -> Result<f64> {
    Ok(excess_of(family.a_region(eps)?, geom, t_max, eps))
}

fn excess_of(a: SharedRegion, geom: &Arc<SetGeometry>, t_max: f64, eps: f64) -> f64 {
    let window = window_of(&a, geom);
    let outside = Combined::new(SetOp::Difference, a, collar(geom, eps * t_max));
    counted_area(&outside, window, geom.h()) / eps
}

pub fn essential_boundedness(
    family: &dyn SetFamily,
    geom: &Arc<SetGeometry>,
    t_max: f64,
    eps: &[f64],
) -> Result<Vec<f64>> {
    check_schedule(eps)?;
    eps.iter().map(|&e| excess_mass(family, geom, t_max, e)).collect()
}

/// For each `delta`, the smallest candidate `T` whose excess stays below `delta`
/// at every ε. Diagnostic only.
pub fn weak_boundedness(
    family: &dyn SetFamily,
    geom: &Arc<SetGeometry>,
    eps: &[f64],
    deltas: &[f64],
    t_candidates: &[f64],
) -> Result<Vec<Option<f64>>> {
    let mut ts = t_candidates.to_vec();
    ts.sort_by(f64::total_cmp);
    let worst: Vec<f64> = ts
        .iter()
        .map(|&t| Ok(essential_boundedness(family, geom, t, eps)?.into_iter().fold(0.0, f64::max)))
        .collect::<Result<_>>()?;
    Ok(deltas
        .iter()
        .map(|&d| ts.iter().zip(&worst).find(|(_, w)| **w < d).map(|(t, _)| *t))
        .collect())
}

/// Sym-diff sequence of `τ_ε(A(ε))` against `b` and its verdict.
pub fn differentiability_test(
    family: &dyn SetFamily,
    nb: &Arc<NormalBundle>,
    b: &FiberIntervalSet,
    eps: &[f64],
    t_max: f64,
    mode: TestMode,
) -> Result<ConvergenceReport> {
    check_schedule(eps)?;
    let (bundle, cand, c) = match mode {
        TestMode::Full => (nb.clone(), b.clone(), None),
        TestMode::Restricted(c) => {
            if !(c > 0.0) {
                return Err(Error::InvalidArgument("restriction level must be positive".into()));
            }
            let rb = Arc::new(nb.restrict(c)?);
            let cand = b.restrict_to(&rb)?;
            (rb, cand, Some(c))
        }
    };
    let geom = nb.geometry().clone();
    let mut values = Vec::with_capacity(eps.len());
    let mut excess = Vec::with_capacity(eps.len());
    for &e in eps {
        let a = family.a_region(e)?;
        let img = magnify_set(&bundle, &*a, e, t_max);
        values.push(sym_diff_measure(&img, &cand)?);
        excess.push(excess_of(a, &geom, t_max, e));
    }
    let weight = bundle.total_weight;
    let tol_conv = TOL_FACTOR * bundle.h() * weight;
    let verdict = decide(eps, &values, tol_conv, FLOOR_NC);
    Ok(ConvergenceReport { epsilons: eps.to_vec(), values, excess, verdict, c, tol_conv, floor_nc: FLOOR_NC, weight })
}

/// Full and restricted tests together; the combined verdict is
/// `RDifferentiableOnly` when only the restricted test converges.
pub fn r_differentiability_test(
    family: &dyn SetFamily,
    nb: &Arc<NormalBundle>,
    b: &FiberIntervalSet,
    eps: &[f64],
    t_max: f64,
    c: f64,
) -> Result<(ConvergenceReport, ConvergenceReport, Verdict)> {
    let full = differentiability_test(family, nb, b, eps, t_max, TestMode::Full)?;
    let restricted = differentiability_test(family, nb, b, eps, t_max, TestMode::Restricted(c))?;
    let verdict = match (full.verdict, restricted.verdict) {
        (Verdict::Differentiable, Verdict::Differentiable) => Verdict::Differentiable,
        (_, Verdict::Differentiable) => Verdict::RDifferentiableOnly,
        (_, v) => v,
    };
    Ok((full, restricted, verdict))
}

/// Pointwise set operation on two families.
pub struct CompositeFamily<'a> {
    pub op: SetOp,
    pub a: &'a dyn SetFamily,
    pub b: &'a dyn SetFamily,
}

impl SetFamily for CompositeFamily<'_> {
    fn a_region(&self, eps: f64) -> Result<SharedRegion> {
        Ok(Arc::new(Combined::new(self.op, self.a.a_region(eps)?, self.b.a_region(eps)?)))
    }
}

/// `eps -> A(c eps^p)`.
pub struct ReparamFamily<'a> {
    pub inner: &'a dyn SetFamily,
    pub scale: f64,
    pub power: f64,
}

impl SetFamily for ReparamFamily<'_> {
    fn a_region(&self, eps: f64) -> Result<SharedRegion> {
        self.inner.a_region(self.scale * eps.powf(self.power))
    }
}

impl<F: SetFamily + ?Sized> SetFamily for Arc<F> {
    fn a_region(&self, eps: f64) -> Result<SharedRegion> {
        (**self).a_region(eps)
    }
}

#[derive(Debug, Clone)]
pub struct AlgebraReport {
    pub union: ConvergenceReport,
    pub intersection: ConvergenceReport,
    pub difference: ConvergenceReport,
    /// Masses of the combined candidates `B1 ∪ B2`, `B1 ∩ B2`, `B1 \ B2`.
    pub candidate_mass: [f64; 3],
}

impl AlgebraReport {
    pub fn all_differentiable(&self) -> bool {
        [&self.union, &self.intersection, &self.difference].iter().all(|r| r.verdict == Verdict::Differentiable)
    }
}

/// Tests `A1 ∪ A2`, `A1 ∩ A2`, `A1 \ A2` against the fiberwise combined candidates.
pub fn derivative_algebra_check(
    a1: &dyn SetFamily,
    b1: &FiberIntervalSet,
    a2: &dyn SetFamily,
    b2: &FiberIntervalSet,
    eps: &[f64],
    t_max: f64,
) -> Result<AlgebraReport> {
    let nb = b1.bundle().clone();
    let run = |op: SetOp| -> Result<(ConvergenceReport, f64)> {
        let cand = b1.combine(b2, op)?;
        let fam = CompositeFamily { op, a: a1, b: a2 };
        Ok((differentiability_test(&fam, &nb, &cand, eps, t_max, TestMode::Full)?, cand.m_measure()))
    };
    let (union, mu) = run(SetOp::Union)?;
    let (intersection, mi) = run(SetOp::Intersection)?;
    let (difference, md) = run(SetOp::Difference)?;
    Ok(AlgebraReport { union, intersection, difference, candidate_mass: [mu, mi, md] })
}

/// Candidate derivative of the reparameterized family `A(c eps^p)`: `c B` if `p = 1`,
/// empty if `p > 1`.
pub fn reparam_candidate(b: &FiberIntervalSet, scale: f64, power: f64) -> Result<FiberIntervalSet> {
    if power == 1.0 {
        Ok(b.scale(scale))
    } else if power > 1.0 {
        Ok(FiberIntervalSet::empty(b.bundle().clone(), b.bound))
    } else {
        Err(Error::InvalidArgument("reparameterization must satisfy f(0) = 0 with finite f'(0)".into()))
    }
}

/// Test `A(c eps^p)` against the reparameterized candidate.
pub fn reparam_check(
    family: &dyn SetFamily,
    b: &FiberIntervalSet,
    scale: f64,
    power: f64,
    eps: &[f64],
    t_max: f64,
) -> Result<(ConvergenceReport, FiberIntervalSet)> {
    let cand = reparam_candidate(b, scale, power)?;
    let fam = ReparamFamily { inner: family, scale, power };
    let t = if power == 1.0 { t_max * scale } else { t_max };
    let rep = differentiability_test(&fam, b.bundle(), &cand, eps, t, TestMode::Full)?;
    Ok((rep, cand))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_rules() {
        let eps = [0.125, 0.0625, 0.03125, 0.015625];
        assert_eq!(decide(&eps, &[0.0; 4], 0.1, FLOOR_NC), Verdict::Differentiable);
        assert_eq!(decide(&eps, &[0.6, 0.7, 0.65, 0.66], 0.1, FLOOR_NC), Verdict::NotDifferentiable);
        assert_eq!(decide(&eps, &[0.6, 0.3, 0.2, 0.15], 0.1, FLOOR_NC), Verdict::Inconclusive);
        assert_eq!(decide(&eps[..3], &[0.0; 3], 0.1, FLOOR_NC), Verdict::Inconclusive);
        assert_eq!(decide(&[0.1, 0.09, 0.08, 0.07], &[0.0; 4], 0.1, FLOOR_NC), Verdict::Inconclusive);
    }
}
