//! Star bodies, their gauges, sphere fields and lattice rotations.

mod body;
mod field;
mod mesh;
mod rotation;

pub use body::{body_from_density, BodyFamily, Polygon, StarBody, MEMBERSHIP_TOL};
pub use field::{
    homogeneous_extension, positive_decomposition, HomogeneousExtension, PositiveParts,
    Smoothness, SphereField,
};
pub use mesh::DirectionMesh;
pub use rotation::Rotation;

/// Euclidean norm of a short vector.
#[inline]
pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
