//! Discrete measures on the unit sphere built from radially projected lattice
//! points, and the numerical machinery to measure how fast they converge.
//!
//! A positive density `m` on `S^{n-1}` determines the star body `D` whose
//! boundary is `r = m(θ)^{1/n}`. Counting the nonzero integer points of `ρD`
//! with weight `F(N) = f(N/|N|)` and rescaling by `n/ρ^n` approximates
//! `∫ f(θ) m(θ) dθ`. The modules here build the bodies ([`geometry`]), count
//! the points ([`lattice`]), evaluate the target integrals ([`quadrature`]),
//! fit residual decay ([`analysis`]), measure Fourier decay of boundary and
//! shell measures ([`fourier`]), and drive experiments end to end
//! ([`reporting`]).

pub mod analysis;
mod error;
pub mod exec;
pub mod fourier;
pub mod geometry;
pub mod lattice;
pub mod quadrature;
pub mod reporting;
pub mod sum;

pub use error::{Error, Result};
pub use geometry::{body_from_density, BodyFamily, Rotation, SphereField, StarBody};
pub use lattice::{weighted_count, CountRequest, CountResult};
