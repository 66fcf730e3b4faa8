//! Containers, tagged triangulations, and measures of density-represented drops.

mod builder;
mod density;
mod domain;
mod mesh;

pub use builder::build_mesh;
pub use density::{relative_perimeter, volume, DensityField};
pub use domain::{ContainerKind, DomainSpec, Obstacle, Point, Truncation};
pub use mesh::{EdgeTag, Mesh, MeshEdge};

pub(crate) use density::check_len;
pub(crate) use mesh::point_segment_distance;
