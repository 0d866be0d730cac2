pub mod extension;
pub mod green;
pub mod grid;
pub mod jacobi;
pub mod operator;
pub mod poisson;

pub use extension::extend_e_eps;
pub use green::{mode_injectivity_check, GreenOperator};
pub use grid::{derivative_sups, weighted_norm, CylinderField, CylinderGrid, WeightedNormSpec};
pub use jacobi::{jacobi_field, JacobiFieldKind};
pub use operator::{apply_delta0, apply_l, interior_sup};
pub use poisson::{poisson_extension, shifted_poisson_extension};
