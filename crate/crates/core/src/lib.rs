//! Numerical gluing construction of higher-dimensional Riemann minimal
//! hypersurfaces: catenoidal necks glued to planar ends.

pub mod assembly;
pub mod battery;
pub mod cli;
pub mod cylinder;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod matcher;
pub mod neck;
pub mod ode;
pub mod planar;
pub mod quadrature;
pub mod spectral;

pub use error::{GluerError, Result};
