//! Volume sweep on the strip, compared with the half-disc and rectangle
//! candidates.

use super::config::{Init, MeshParams, OptimizerConfig};
use super::driver::{minimize_lambda1, OptimizationResult};
use crate::analytic;
use crate::error::{Error, Result};
use crate::geometry::{build_mesh, volume, DensityField, DomainSpec, EdgeTag, Truncation};
use crate::scalar::Scalar;

/// Optimum at one volume of the strip sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow<T> {
    pub c: T,
    pub lambda: T,
    pub lambda_rect: f64,
    pub lambda_half_disc: f64,
    /// Analytic candidate with the smaller eigenvalue.
    pub branch: &'static str,
    /// Shape class of the computed optimum: `rectangle` when it reaches both
    /// walls, `half_disc` otherwise.
    pub numeric_branch: &'static str,
    /// Starting drop of the better run: `half_disc` or `rectangle`.
    pub start: &'static str,
    pub converged: bool,
    pub truncation_warning: bool,
}

/// Truncation box used for volume `c` on the strip of width `w`: long enough
/// for a full-width rectangle of area `c` plus a margin of one width per side.
pub fn strip_window<T: Scalar>(width: T, c: T) -> Truncation<T> {
    let half = c / (T::of(2.0) * width) + width;
    Truncation::Box {
        min: [-half, T::zero()],
        max: [half, width],
    }
}

fn touches<T: Scalar>(res: &OptimizationResult<T>, y: T) -> bool {
    let mesh = res.mesh();
    let tol = mesh.h() * T::of(1e-6);
    mesh.boundary_edges().any(|e| {
        e.tag == Some(EdgeTag::NeumannPhysical)
            && res.chi.values()[e.cells[0]] > T::zero()
            && e.v.iter().all(|v| (mesh.vertices()[*v][1] - y).abs() <= tol)
    })
}

/// Minimizes `lambda_1` at volume `c` on the strip from two starting drops,
/// a half-disc on the lower wall and a centered full-width rectangle, and
/// keeps the better optimum.
pub fn strip_sweep_point<T: Scalar>(
    width: T,
    c: T,
    params: &MeshParams<T>,
    base: &OptimizerConfig<T>,
) -> Result<SweepRow<T>> {
    if !(width > T::zero()) || !(c > T::zero()) {
        return Err(Error::validation("strip width and volume must be positive"));
    }
    let spec = DomainSpec::strip(width, strip_window(width, c))?;
    let mesh = build_mesh(&spec, params.h)?;
    let half_len = c / (T::of(2.0) * width);
    let values: Vec<T> = (0..mesh.num_cells())
        .map(|cell| {
            let p = mesh.centroid(cell);
            if p[0].abs() < half_len {
                T::one()
            } else {
                T::zero()
            }
        })
        .collect();
    let rect = DensityField::new(values)?;
    let mut runs = Vec::with_capacity(2);
    let mut cfg = base.clone();
    cfg.objective = super::config::Objective::Volume(c);
    cfg.init = Init::BallAtBoundary;
    runs.push(("half_disc", minimize_lambda1(&spec, &cfg, params)?));
    // the structured strip mesh lets whole cells fill the rectangle exactly
    if (volume(&rect, &mesh)? - c).abs() <= c * T::of(1e-9) {
        cfg.init = Init::User(rect);
        runs.push(("rectangle", minimize_lambda1(&spec, &cfg, params)?));
    }
    let (name, best) = runs
        .into_iter()
        .reduce(|a, b| if b.1.lambda1 < a.1.lambda1 { b } else { a })
        .expect("at least one run");
    let reference = analytic::strip_with_width(width.to_f64_lossy(), c.to_f64_lossy())?;
    Ok(SweepRow {
        c,
        lambda: best.lambda1,
        lambda_rect: reference.rectangle.lambda,
        lambda_half_disc: reference.half_disc.lambda,
        branch: reference.winner_name(),
        numeric_branch: if touches(&best, T::zero()) && touches(&best, width) {
            "rectangle"
        } else {
            "half_disc"
        },
        start: name,
        converged: best.converged,
        truncation_warning: best.truncation_warning,
    })
}

/// `n` evenly spaced volumes from `lo` to `hi` inclusive.
pub fn volume_grid<T: Scalar>(lo: T, hi: T, step: T) -> Result<Vec<T>> {
    if !(lo > T::zero()) || !(hi >= lo) || !(step > T::zero()) {
        return Err(Error::validation("volume grid needs 0 < lo <= hi and a positive step"));
    }
    let n = ((hi - lo) / step + T::of(1e-9)).floor().to_f64_lossy() as usize;
    Ok((0..=n).map(|i| lo + step * T::of_usize(i)).collect())
}
