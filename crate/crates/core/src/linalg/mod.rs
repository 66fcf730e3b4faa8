//! Sparse and small dense linear algebra used by the finite element solvers.

mod cholesky;
mod dense;
mod sparse;

pub use cholesky::{reverse_cuthill_mckee, EnvelopeCholesky};
pub use dense::symmetric_eigen;
pub use sparse::CsrMatrix;
