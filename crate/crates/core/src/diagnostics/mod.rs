//! Numerical checks of energy bounds, co-area and rearrangement inequalities,
//! and convergence of drop sequences.

mod bounds;
mod gamma;
mod levels;
mod rearrange;

pub use bounds::{bounds_report, fit_exponent, BoundCheck, BoundsReport, EXPONENT_TOL, SCALES};
pub use gamma::{
    gamma_distance, support_of, weak_gamma_limit, SequenceDiagnostic, SequenceOptions,
    SequenceTerm,
};
pub use levels::{coarea_lower_bound, level_length, DistributionFunction};
pub use rearrange::symmetrize_sector;
