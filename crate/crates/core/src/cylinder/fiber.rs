//! Subsets of the normal cylinder stored fiberwise as sorted disjoint half-open
//! t-intervals.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::bundle::{BundleSample, NormalBundle};
use crate::error::{Error, Result};
use crate::gridgeom::Side;
use crate::region::SetOp;

pub type Interval = (f64, f64);

/// Sort, drop empty intervals and merge overlapping or touching ones.
pub fn normalize(mut v: Vec<Interval>) -> Vec<Interval> {
    v.retain(|&(a, b)| b > a);
    v.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out: Vec<Interval> = Vec::with_capacity(v.len());
    for (a, b) in v {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

/// Boolean combination of two normalized interval lists.
pub fn combine(a: &[Interval], b: &[Interval], op: SetOp) -> Vec<Interval> {
    let mut pts: Vec<f64> = a.iter().chain(b).flat_map(|&(x, y)| [x, y]).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let (mut ia, mut ib) = (0, 0);
    let mut out: Vec<Interval> = Vec::new();
    for w in pts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        while ia < a.len() && a[ia].1 <= mid {
            ia += 1;
        }
        while ib < b.len() && b[ib].1 <= mid {
            ib += 1;
        }
        let in_a = ia < a.len() && a[ia].0 <= mid;
        let in_b = ib < b.len() && b[ib].0 <= mid;
        if op.apply(in_a, in_b) {
            match out.last_mut() {
                Some(last) if last.1 == w[0] => last.1 = w[1],
                _ => out.push((w[0], w[1])),
            }
        }
    }
    out
}

pub fn total_length(v: &[Interval]) -> f64 {
    v.iter().map(|&(a, b)| b - a).fold(0.0, |s, x| s + x)
}

/// A subset of `Σ_T` over a sampled bundle.
#[derive(Debug, Clone)]
pub struct FiberIntervalSet {
    bundle: Arc<NormalBundle>,
    fibers: Vec<Vec<Interval>>,
    pub bound: f64,
}

impl FiberIntervalSet {
    pub fn empty(bundle: Arc<NormalBundle>, bound: f64) -> Self {
        let fibers = vec![Vec::new(); bundle.len()];
        FiberIntervalSet { bundle, fibers, bound }
    }

    /// Build fiber by fiber; intervals are clipped to the sample's side and to `|t| <= bound`.
    pub fn from_fn<F>(bundle: Arc<NormalBundle>, bound: f64, f: F) -> Self
    where
        F: Fn(usize, &BundleSample) -> Vec<Interval>,
    {
        let fibers = bundle
            .samples
            .iter()
            .enumerate()
            .map(|(k, s)| clip(normalize(f(k, s)), s.side, bound))
            .collect();
        FiberIntervalSet { bundle, fibers, bound }
    }

    /// Fibers given directly; normalized and clipped.
    pub fn from_fibers(bundle: Arc<NormalBundle>, bound: f64, fibers: Vec<Vec<Interval>>) -> Result<Self> {
        if fibers.len() != bundle.len() {
            return Err(Error::Format(format!("{} fibers for {} samples", fibers.len(), bundle.len())));
        }
        let fibers = fibers
            .into_iter()
            .zip(&bundle.samples)
            .map(|(v, s)| clip(normalize(v), s.side, bound))
            .collect();
        Ok(FiberIntervalSet { bundle, fibers, bound })
    }

    /// `{t0 <= t < t1}` on every fiber (each side keeps its part).
    pub fn slab(bundle: Arc<NormalBundle>, t0: f64, t1: f64) -> Self {
        let bound = t0.abs().max(t1.abs());
        FiberIntervalSet::from_fn(bundle, bound, |_, _| vec![(t0, t1)])
    }

    pub fn bundle(&self) -> &Arc<NormalBundle> {
        &self.bundle
    }

    pub fn fiber(&self, k: usize) -> &[Interval] {
        &self.fibers[k]
    }

    pub fn fibers(&self) -> &[Vec<Interval>] {
        &self.fibers
    }

    pub fn is_empty(&self) -> bool {
        self.fibers.iter().all(Vec::is_empty)
    }

    fn check_same(&self, o: &FiberIntervalSet) -> Result<()> {
        if self.bundle.id() != o.bundle.id() {
            return Err(Error::BundleMismatch(self.bundle.id() as usize, o.bundle.id() as usize));
        }
        Ok(())
    }

    pub fn combine(&self, o: &FiberIntervalSet, op: SetOp) -> Result<FiberIntervalSet> {
        self.check_same(o)?;
        let fibers = self.fibers.iter().zip(&o.fibers).map(|(a, b)| combine(a, b, op)).collect();
        Ok(FiberIntervalSet { bundle: self.bundle.clone(), fibers, bound: self.bound.max(o.bound) })
    }

    pub fn union(&self, o: &FiberIntervalSet) -> Result<FiberIntervalSet> {
        self.combine(o, SetOp::Union)
    }

    pub fn intersection(&self, o: &FiberIntervalSet) -> Result<FiberIntervalSet> {
        self.combine(o, SetOp::Intersection)
    }

    pub fn difference(&self, o: &FiberIntervalSet) -> Result<FiberIntervalSet> {
        self.combine(o, SetOp::Difference)
    }

    pub fn sym_diff(&self, o: &FiberIntervalSet) -> Result<FiberIntervalSet> {
        self.combine(o, SetOp::SymDiff)
    }

    /// `M`-mass: weight times total interval length, summed in sample order.
    pub fn m_measure(&self) -> f64 {
        self.bundle.samples.iter().zip(&self.fibers).map(|(s, f)| s.weight * total_length(f)).fold(0.0, |a, x| a + x)
    }

    /// Mass of the part with `t > 0` and with `t < 0`.
    pub fn signed_parts(&self) -> (f64, f64) {
        let mut pos = 0.0;
        let mut neg = 0.0;
        for (s, f) in self.bundle.samples.iter().zip(&self.fibers) {
            for &(a, b) in f {
                pos += s.weight * (b.max(0.0) - a.max(0.0));
                neg += s.weight * (b.min(0.0) - a.min(0.0));
            }
        }
        (pos, neg)
    }

    /// The same set seen on a sub-bundle obtained by restriction or subsetting.
    pub fn restrict_to(&self, sub: &Arc<NormalBundle>) -> Result<FiberIntervalSet> {
        let (root, map) = sub.parent().ok_or(Error::BundleMismatch(self.bundle.id() as usize, sub.id() as usize))?;
        let fibers = match self.bundle.parent() {
            None if root == self.bundle.id() => map.iter().map(|&k| self.fibers[k as usize].clone()).collect(),
            _ => return Err(Error::BundleMismatch(self.bundle.id() as usize, sub.id() as usize)),
        };
        Ok(FiberIntervalSet { bundle: sub.clone(), fibers, bound: self.bound })
    }

    /// Image under `t -> c t` with `c > 0`.
    pub fn scale(&self, c: f64) -> FiberIntervalSet {
        let fibers = self.fibers.iter().map(|f| f.iter().map(|&(a, b)| (c * a, c * b)).collect()).collect();
        FiberIntervalSet { bundle: self.bundle.clone(), fibers, bound: self.bound * c }
    }

    /// CSV dump: `sample_index,t0,t1`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sample_index,t0,t1\n");
        for (k, f) in self.fibers.iter().enumerate() {
            for &(a, b) in f {
                let _ = writeln!(out, "{k},{a},{b}");
            }
        }
        out
    }
}

fn clip(v: Vec<Interval>, side: Side, bound: f64) -> Vec<Interval> {
    let (lo, hi) = match side {
        Side::Outer => (0.0, bound),
        Side::Inner => (-bound, 0.0),
    };
    v.into_iter()
        .map(|(a, b)| (a.max(lo), b.min(hi)))
        .filter(|&(a, b)| b > a)
        .collect()
}

/// `M(P △ Q)`.
pub fn sym_diff_measure(p: &FiberIntervalSet, q: &FiberIntervalSet) -> Result<f64> {
    p.check_same(q)?;
    Ok(p.bundle
        .samples
        .iter()
        .zip(p.fibers.iter().zip(&q.fibers))
        .map(|(s, (a, b))| s.weight * total_length(&combine(a, b, SetOp::SymDiff)))
        .fold(0.0, |a, x| a + x))
}

pub fn m_measure(f: &FiberIntervalSet) -> f64 {
    f.m_measure()
}
