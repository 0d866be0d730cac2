pub mod bipolar;
pub mod harmonic;
pub mod laplace;
pub mod model;
pub mod nonlinear;
pub mod solve;

pub use bipolar::{PlanarField, PlanarGrid};
pub use harmonic::{exterior_extension, interior_extension};
pub use laplace::{apply_laplacian, laplace_right_inverse, LaplaceSolver};
pub use nonlinear::{cartesian_derivatives, planar_weighted_norm, xi_nonlinearity};
pub use model::{hat_extension, model_function, EndParameters, ExteriorExtension};
pub use solve::{extend_e_bar, planar_discrepancy, solve_planar, PlanarConfig, PlanarContext, PlanarDiscrepancy, PlanarSolution};
