//! The comb: a solid set whose boundary accumulates teeth at the wall `{0} x [0, 1]`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::families::split::BoundarySegments;
use crate::families::{FamilyKind, FamilySpec};
use crate::gridgeom::{Comb, CombSequence, Rect, SetGeometry, ShapeSpec};
use crate::vec2::Vec2;

/// Smallest represented feature, in cells.
pub const MIN_FEATURE_CELLS: f64 = 4.0;

#[derive(Debug, Clone)]
pub struct CombInstance {
    pub comb: Comb,
    /// Teeth dropped because they fall below the grid resolution.
    pub merged_teeth: usize,
    /// `F1`: teeth and tail block.
    pub f1: ShapeSpec,
    /// `F2 = [-1, 0] x [0, height]`.
    pub f2: Rect,
    /// `F = F1 ∪ F2`.
    pub shape: ShapeSpec,
    pub geom: Arc<SetGeometry>,
    /// `F(eps) = F1 ∪ [-1, eps] x [0, height]`, so `A(eps) = (0, eps] x [0, height] \ F1`.
    pub family: FamilySpec,
}

impl CombInstance {
    /// Boundary segment lists of `F`, `F1`, `F2` for the collar checks.
    pub fn boundaries(&self) -> (BoundarySegments, BoundarySegments, BoundarySegments) {
        let mut f = BoundarySegments::rect(Rect::new(self.f2.min, Vec2::new(self.comb.tail_width(), self.f2.max.y)));
        let mut f1 = BoundarySegments::default();
        for r in self.comb.rects() {
            f1.extend(&BoundarySegments::rect(r));
        }
        for r in self.comb.rects().iter().take(self.comb.teeth) {
            f.extend(&BoundarySegments::rect(*r));
        }
        (f, f1, BoundarySegments::rect(self.f2))
    }
}

/// Build the comb with `teeth` teeth of the sequence (height 1) on an `h` grid.
pub fn comb_instance(seq: &CombSequence, teeth: usize, h: f64, margin: f64) -> Result<CombInstance> {
    let mut k = teeth;
    while k >= 3 && Comb::new(seq, k, 1.0).smallest_feature() < MIN_FEATURE_CELLS * h {
        k -= 1;
    }
    if k < 3 {
        return Err(Error::ResolutionTooCoarse(format!(
            "fewer than 3 teeth of the comb are at least {MIN_FEATURE_CELLS} cells wide at h = {h}"
        )));
    }
    let comb = Comb::new(seq, k, 1.0);
    let values = comb.a.clone();
    if values.len() < k + 2 || values.windows(2).any(|w| !(w[1] < w[0]) || w[1] <= 0.0) {
        return Err(Error::InvalidArgument("comb sequence must be positive and strictly decreasing".into()));
    }
    let f2 = Rect::new(Vec2::new(-1.0, 0.0), Vec2::new(0.0, 1.0));
    let mut parts = vec![ShapeSpec::Rect(Rect::new(f2.min, Vec2::new(comb.tail_width(), 1.0)))];
    parts.extend(comb.rects().into_iter().take(k).map(ShapeSpec::Rect));
    let shape = ShapeSpec::Union(parts);
    let geom = Arc::new(SetGeometry::from_shape(&shape, h, margin)?);
    let family = FamilySpec { kind: FamilyKind::Comb { comb: comb.clone(), f2 }, base: geom.clone() };
    Ok(CombInstance { comb: comb.clone(), merged_teeth: teeth - k, f1: ShapeSpec::Comb(comb), f2, shape, geom, family })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::Region;

    #[test]
    fn difference_set_is_the_strip_minus_teeth() {
        let c = comb_instance(&CombSequence::Geometric { ratio: 0.5 }, 4, 1.0 / 256.0, 0.25).unwrap();
        assert_eq!(c.merged_teeth, 0);
        let a = c.family.a_region(c.comb.b(2)).unwrap();
        // slot between tooth 3 and tooth 2
        assert!(a.contains(Vec2::new(0.15, 0.5)));
        // inside tooth 3 = [0.09375, 0.125]
        assert!(!a.contains(Vec2::new(0.11, 0.5)));
        assert!(!a.contains(Vec2::new(0.2, 0.5)));
        assert!(!a.contains(Vec2::new(-0.1, 0.5)));
        assert!(c.family.a_region(0.0).unwrap().safe_radius(Vec2::ZERO) > 0.0);
    }

    #[test]
    fn unresolved_teeth_are_merged() {
        let c = comb_instance(&CombSequence::Geometric { ratio: 0.5 }, 12, 1.0 / 256.0, 0.25).unwrap();
        assert!(c.merged_teeth > 0);
        assert!(c.comb.smallest_feature() >= MIN_FEATURE_CELLS / 256.0);
        assert!(matches!(
            comb_instance(&CombSequence::Geometric { ratio: 0.5 }, 6, 1.0 / 16.0, 0.25),
            Err(Error::ResolutionTooCoarse(_))
        ));
    }
}
