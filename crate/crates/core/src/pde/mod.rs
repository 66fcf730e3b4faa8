//! Mixed boundary value problems on density-represented drops.
//!
//! The Dirichlet condition outside the drop is imposed by the mass penalty
//! `M * integral of (1 - chi) u^2`; truncation vertices are eliminated.

mod assemble;
mod eigen;
mod field;
mod poisson;

pub use assemble::{assemble, penalty_operator, AssembledSystem, PenalizedOperator};
pub use eigen::{solve_eigs, solve_eigs_with, EigenOptions, SpectralResult};
pub use field::ScalarField;
pub use poisson::{energy_function, proximal, solve_poisson};

