//! Eigenvalue minimization over drops of fixed or penalized volume.

mod config;
mod drift;
mod driver;
mod projection;
mod report;
mod sweep;

pub use config::{default_schedule, drop_scale, Init, MeshParams, Objective, OptimizerConfig};
pub use driver::{
    ball_density, minimize_lambda1, nearest_wall_point, optimize_on, penalized_minimize,
    truncation_mass, OptimizationResult, OptimizerTrace, TraceRecord,
};
pub use projection::{penalized_projection, threshold_projection, top_cells};
pub use drift::{
    drift_experiment, drift_point, parabola_point, sort_by_distance, wall_point, DriftSample,
};
pub use report::{optimality_report, OptimalityReport};
pub use sweep::{strip_sweep_point, strip_window, volume_grid, SweepRow};
