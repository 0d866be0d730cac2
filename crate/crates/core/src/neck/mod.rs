pub mod graph;
pub mod solve;

pub use graph::{boundary_graph, ring_heights, AnnulusGrid, NeckBoundaryGraph};
pub use solve::{rescale_boundary_data, solve_neck, NeckConfig, NeckContext, NeckIterate, NeckSolution};
