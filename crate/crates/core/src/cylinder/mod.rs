//! The normal cylinder: fiber interval sets, the magnification map and the
//! convergence harness.

pub mod fiber;
pub mod harness;
pub mod magnify;

pub use fiber::{m_measure, sym_diff_measure, FiberIntervalSet, Interval};
pub use harness::{
    decide, derivative_algebra_check, differentiability_test, essential_boundedness, excess_mass,
    r_differentiability_test, reparam_candidate, reparam_check, weak_boundedness, AlgebraReport, CompositeFamily,
    ConvergenceReport, ReparamFamily, SetFamily, TestMode, Verdict,
};
pub use magnify::{magnify_point, magnify_set, Magnified};
