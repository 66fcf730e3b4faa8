//! Spectral drops: Laplace eigenvalue minimization on subdomains of a container
//! with Dirichlet conditions on the free boundary and Neumann (or Robin)
//! conditions on the container wall.
//!
//! Numerical routines are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64` or `f32`.

// `!(x > 0)` style checks also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod optimize;
pub mod pde;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type DomainSpec64 = geometry::DomainSpec<f64>;
pub type Mesh64 = geometry::Mesh<f64>;
pub type DensityField64 = geometry::DensityField<f64>;

pub type DomainSpec32 = geometry::DomainSpec<f32>;
pub type Mesh32 = geometry::Mesh<f32>;
pub type DensityField32 = geometry::DensityField<f32>;
pub type ScalarField64 = pde::ScalarField<f64>;
pub type AssembledSystem64 = pde::AssembledSystem<f64>;
pub type SpectralResult64 = pde::SpectralResult<f64>;
pub type OptimizerConfig64 = optimize::OptimizerConfig<f64>;
pub type OptimizationResult64 = optimize::OptimizationResult<f64>;

pub type ScalarField32 = pde::ScalarField<f32>;
pub type AssembledSystem32 = pde::AssembledSystem<f32>;
pub type SpectralResult32 = pde::SpectralResult<f32>;
pub type OptimizerConfig32 = optimize::OptimizerConfig<f32>;
pub type OptimizationResult32 = optimize::OptimizationResult<f32>;
