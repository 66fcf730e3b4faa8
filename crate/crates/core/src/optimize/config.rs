use crate::analytic::bessel_j0_first_zero;
use crate::error::{Error, Result};
use crate::geometry::DensityField;
use crate::scalar::Scalar;

/// What the optimizer minimizes.
#[derive(Clone, Debug, PartialEq)]
pub enum Objective<T> {
    /// `lambda_1` subject to `|Omega| = c`.
    Volume(T),
    /// `lambda_1 + Lambda |Omega|`.
    Penalty(T),
}

/// Starting drop.
#[derive(Clone, Debug, PartialEq)]
pub enum Init<T> {
    /// Cells nearest to the wall point closest to the truncation center.
    BallAtBoundary,
    /// Seeded random cells.
    Random,
    User(DensityField<T>),
}

/// Mesh size and Robin coefficient used by an optimization run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshParams<T> {
    pub h: T,
    pub robin_k: T,
}

impl<T: Scalar> MeshParams<T> {
    pub fn new(h: T) -> Self {
        MeshParams {
            h,
            robin_k: T::zero(),
        }
    }
}

/// Settings of the thresholding scheme.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig<T> {
    pub objective: Objective<T>,
    /// Penalty coefficients, ascending; one stage per entry.
    pub m_schedule: Vec<T>,
    /// Cap on the total number of iterations over all stages.
    pub max_outer_iters: usize,
    /// Cap on the iterations spent at one penalty coefficient.
    pub max_stage_iters: usize,
    pub stop_tol_lambda: T,
    /// Symmetric-difference area below which the drop counts as unchanged.
    pub stop_tol_volume: T,
    pub seed: u64,
    pub init: Init<T>,
    pub eigen_tol: T,
    /// Keep every iterate in the result.
    pub keep_iterates: bool,
}

/// Squared length scale of the optimal drop: the volume itself, or for the
/// penalized problem the volume of the optimal half-disc on a flat wall.
pub fn drop_scale<T: Scalar>(objective: &Objective<T>) -> T {
    match objective {
        Objective::Volume(c) => *c,
        Objective::Penalty(lp) => {
            let j = T::of(bessel_j0_first_zero());
            let pi = T::of(std::f64::consts::PI);
            let r2 = (T::of(2.0) * j * j / (*lp * pi)).sqrt();
            pi * r2 / T::of(2.0)
        }
    }
}

/// `{1e2, 1e4, 1e6} / scale`.
pub fn default_schedule<T: Scalar>(scale: T) -> Vec<T> {
    [1e2, 1e4, 1e6].iter().map(|m| T::of(*m) / scale).collect()
}

impl<T: Scalar> OptimizerConfig<T> {
    fn with_objective(objective: Objective<T>) -> Self {
        let scale = drop_scale(&objective);
        OptimizerConfig {
            m_schedule: default_schedule(scale),
            max_outer_iters: 150,
            max_stage_iters: 50,
            stop_tol_lambda: T::of(1e-4),
            stop_tol_volume: T::of(1e-3) * scale,
            seed: 0,
            init: Init::BallAtBoundary,
            eigen_tol: T::of(1e-8),
            keep_iterates: false,
            objective,
        }
    }

    /// Volume-constrained problem with default settings.
    pub fn volume(c: T) -> Self {
        Self::with_objective(Objective::Volume(c))
    }

    /// Penalized problem with default settings.
    pub fn penalty(lambda_pen: T) -> Self {
        Self::with_objective(Objective::Penalty(lambda_pen))
    }

    pub fn validate(&self) -> Result<()> {
        match self.objective {
            Objective::Volume(c) if !(c > T::zero()) => {
                return Err(Error::validation("target volume must be positive"))
            }
            Objective::Penalty(l) if !(l > T::zero()) => {
                return Err(Error::validation("volume penalty must be positive"))
            }
            _ => {}
        }
        if self.m_schedule.is_empty() {
            return Err(Error::validation("penalty schedule is empty"));
        }
        if self.m_schedule.iter().any(|m| !(*m > T::zero()) || !m.is_finite()) {
            return Err(Error::validation("penalty schedule entries must be positive"));
        }
        if self.m_schedule.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::validation("penalty schedule must be ascending"));
        }
        if self.max_outer_iters == 0 || self.max_stage_iters == 0 {
            return Err(Error::validation("iteration caps must be positive"));
        }
        if !(self.stop_tol_lambda >= T::zero()) || !(self.stop_tol_volume >= T::zero()) {
            return Err(Error::validation("stopping tolerances must be nonnegative"));
        }
        if !(self.eigen_tol > T::zero()) {
            return Err(Error::validation("eigensolver tolerance must be positive"));
        }
        Ok(())
    }
}
