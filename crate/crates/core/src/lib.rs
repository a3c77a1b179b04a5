//! Set-valued derivatives at the boundary of compact planar sets.

pub mod bundle;
pub mod cli;
pub mod cylinder;
pub mod error;
pub mod families;
pub mod gridgeom;
pub mod quadrature;
pub mod region;
pub mod steiner;
pub mod vec2;

pub use error::{Error, Result};
pub use vec2::Vec2;
