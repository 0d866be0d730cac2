pub mod baseline2d;
pub mod fd;
pub mod frame;
pub mod graph;
pub mod normal_graph;
pub mod profile;

pub use baseline2d::{riemann_2d_baseline, Riemann2DProfile};
pub use frame::{catenoid_frame, AmbientPoint, Frame};
pub use profile::{build_profile, Catenoid, CatenoidProfile, Dimension, ScaleParameters};
