//! Experiment runner: configuration files, the registry and report artifacts.
//!
//! Exit codes of the `setderiv` binary:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | every check matched its expectation |
//! | 1 | a check failed (or was inconclusive under `--strict`) |
//! | 2 | command-line usage error |
//! | 3 | `ConfigParse` |
//! | 4 | `UnknownExperiment` |
//! | 5 | `Io` |
//! | 10..=25 | module errors, see [`exit_code`] |

pub mod config;
pub mod experiments;
pub mod report;

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Distinct nonzero exit code per error variant.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::ConfigParse(_) => 3,
        Error::UnknownExperiment(_) => 4,
        Error::Io(_) => 5,
        Error::EmptySet => 10,
        Error::ModeViolation(_) => 11,
        Error::MarginTooSmall { .. } => 12,
        Error::OnSet => 13,
        Error::OutOfDomain => 14,
        Error::EmptyBundle => 15,
        Error::InvalidDirection => 16,
        Error::BundleMismatch(..) => 17,
        Error::ConditionBViolated { .. } => 18,
        Error::ResolutionTooCoarse(_) => 19,
        Error::NormalDecompositionFails(_) => 20,
        Error::NonConvex => 21,
        Error::UnsupportedSet(_) => 22,
        Error::DensityConditionFails(_) => 23,
        Error::InvalidArgument(_) => 24,
        Error::Format(_) => 25,
    }
}
