//! Thresholding fixed point: solve for `u_1`, project onto a superlevel set of
//! `u_1^2`, repeat while the penalty coefficient climbs its schedule.

use log::{debug, info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{drop_scale, Init, MeshParams, Objective, OptimizerConfig};
use super::projection::{penalized_projection, threshold_projection, top_cells};
use crate::error::{Error, Result};
use crate::geometry::{
    build_mesh, relative_perimeter, volume, DensityField, DomainSpec, EdgeTag, Mesh, Point,
};
use crate::pde::{assemble, solve_eigs_with, AssembledSystem, EigenOptions, SpectralResult};
use crate::scalar::Scalar;

/// One iteration of the scheme.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord<T> {
    pub iter: usize,
    pub stage: usize,
    pub lambda1: T,
    pub volume: T,
    pub perimeter: T,
    /// Area of the symmetric difference with the previous iterate.
    pub sym_diff: T,
    pub m: T,
    /// `lambda1`, plus `Lambda * volume` for the penalized problem.
    pub objective: T,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OptimizerTrace<T> {
    pub records: Vec<TraceRecord<T>>,
}

impl<T: Scalar> OptimizerTrace<T> {
    /// Iterations where the objective rose at a fixed penalty coefficient.
    pub fn increases(&self) -> Vec<usize> {
        self.records
            .windows(2)
            .filter(|w| w[0].stage == w[1].stage && w[1].objective > w[0].objective)
            .map(|w| w[1].iter)
            .collect()
    }
}

/// Outcome of an optimization run.
#[derive(Clone, Debug)]
pub struct OptimizationResult<T> {
    /// Best iterate at the final penalty coefficient.
    pub chi: DensityField<T>,
    pub lambda1: T,
    pub objective: T,
    pub spectral: SpectralResult<T>,
    pub trace: OptimizerTrace<T>,
    pub system: AssembledSystem<T>,
    /// Drop area within `2h` of truncation edges.
    pub truncation_mass: T,
    pub truncation_warning: bool,
    /// `true` when the final stage met both stopping tolerances.
    pub converged: bool,
    /// Every iterate, when requested.
    pub iterates: Vec<DensityField<T>>,
}

impl<T: Scalar> OptimizationResult<T> {
    pub fn mesh(&self) -> &Mesh<T> {
        self.system.mesh()
    }
}

/// Drop mass above which truncation is considered to influence the result.
const TRUNCATION_MASS_LIMIT: f64 = 1e-3;

/// Area of `chi` in cells whose centroid is within `2h` of a truncation edge.
pub fn truncation_mass<T: Scalar>(chi: &DensityField<T>, mesh: &Mesh<T>) -> T {
    let artificial: Vec<[Point<T>; 2]> = mesh
        .boundary_edges()
        .filter(|e| e.tag == Some(EdgeTag::ArtificialTruncation))
        .map(|e| [mesh.vertices()[e.v[0]], mesh.vertices()[e.v[1]]])
        .collect();
    let reach = T::of(2.0) * mesh.h();
    let mut mass = T::zero();
    for (c, v) in chi.values().iter().enumerate() {
        if *v == T::zero() {
            continue;
        }
        let p = mesh.centroid(c);
        if artificial
            .iter()
            .any(|s| crate::geometry::point_segment_distance(p, s[0], s[1]) < reach)
        {
            mass += *v * mesh.signed_area(c);
        }
    }
    mass
}

/// Point of the container wall closest to `target`.
pub fn nearest_wall_point<T: Scalar>(mesh: &Mesh<T>, target: Point<T>) -> Option<Point<T>> {
    let mut best: Option<(T, Point<T>)> = None;
    for e in mesh.boundary_edges() {
        if e.tag != Some(EdgeTag::NeumannPhysical) {
            continue;
        }
        let a = mesh.vertices()[e.v[0]];
        let b = mesh.vertices()[e.v[1]];
        let d = [b[0] - a[0], b[1] - a[1]];
        let len2 = d[0] * d[0] + d[1] * d[1];
        let t = (((target[0] - a[0]) * d[0] + (target[1] - a[1]) * d[1]) / len2)
            .max(T::zero())
            .min(T::one());
        let q = [a[0] + t * d[0], a[1] + t * d[1]];
        let dist = (q[0] - target[0]).powi(2) + (q[1] - target[1]).powi(2);
        if best.is_none_or(|(bd, _)| dist < bd) {
            best = Some((dist, q));
        }
    }
    best.map(|(_, q)| q)
}

/// Cells ordered by centroid distance to `center`, filled up to volume `c`.
pub fn ball_density<T: Scalar>(mesh: &Mesh<T>, center: Point<T>, c: T) -> Result<DensityField<T>> {
    let values: Vec<T> = (0..mesh.num_cells())
        .map(|cell| {
            let p = mesh.centroid(cell);
            -((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2))
        })
        .collect();
    top_cells(&values, mesh, c)
}

fn area_centroid<T: Scalar>(mesh: &Mesh<T>) -> Point<T> {
    let mut s = [T::zero(); 2];
    for c in 0..mesh.num_cells() {
        let a = mesh.signed_area(c);
        let p = mesh.centroid(c);
        s[0] += a * p[0];
        s[1] += a * p[1];
    }
    let total = mesh.total_area();
    [s[0] / total, s[1] / total]
}

fn initial_density<T: Scalar>(
    spec: Option<&DomainSpec<T>>,
    mesh: &Mesh<T>,
    cfg: &OptimizerConfig<T>,
) -> Result<DensityField<T>> {
    let c0 = match cfg.objective {
        Objective::Volume(c) => c,
        Objective::Penalty(_) => drop_scale(&cfg.objective).min(mesh.total_area() * T::of(0.5)),
    };
    match &cfg.init {
        Init::BallAtBoundary => {
            let center = spec
                .and_then(|s| s.truncation.center())
                .unwrap_or_else(|| area_centroid(mesh));
            let foot = nearest_wall_point(mesh, center).unwrap_or(center);
            ball_density(mesh, foot, c0)
        }
        Init::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let values: Vec<T> = (0..mesh.num_cells())
                .map(|_| T::of(rng.gen_range(0.0..1.0)))
                .collect();
            top_cells(&values, mesh, c0)
        }
        Init::User(chi) => {
            crate::geometry::check_len(chi, mesh)?;
            if !chi.is_binary() {
                return Err(Error::validation("initial density must be binary"));
            }
            if let Objective::Volume(c) = cfg.objective {
                let max_cell = (0..mesh.num_cells())
                    .map(|k| mesh.signed_area(k))
                    .fold(T::zero(), T::max);
                if (volume(chi, mesh)? - c).abs() > max_cell {
                    return Err(Error::validation(
                        "initial density volume differs from the target by more than one cell",
                    ));
                }
            }
            Ok(chi.clone())
        }
    }
}

/// Minimizes `lambda_1` at fixed volume on the meshed container.
pub fn minimize_lambda1<T: Scalar>(
    spec: &DomainSpec<T>,
    cfg: &OptimizerConfig<T>,
    params: &MeshParams<T>,
) -> Result<OptimizationResult<T>> {
    if !matches!(cfg.objective, Objective::Volume(_)) {
        return Err(Error::validation("minimize_lambda1 needs a volume objective"));
    }
    let mesh = build_mesh(spec, params.h)?;
    let system = assemble(&mesh, params.robin_k)?;
    optimize_on(&system, Some(spec), cfg)
}

/// Minimizes `lambda_1 + Lambda |Omega|` on the meshed container.
pub fn penalized_minimize<T: Scalar>(
    spec: &DomainSpec<T>,
    cfg: &OptimizerConfig<T>,
    params: &MeshParams<T>,
) -> Result<OptimizationResult<T>> {
    if !matches!(cfg.objective, Objective::Penalty(_)) {
        return Err(Error::validation("penalized_minimize needs a penalty objective"));
    }
    let mesh = build_mesh(spec, params.h)?;
    let system = assemble(&mesh, params.robin_k)?;
    optimize_on(&system, Some(spec), cfg)
}

/// Runs the scheme on an assembled system. `spec` only locates the default
/// starting drop.
pub fn optimize_on<T: Scalar>(
    system: &AssembledSystem<T>,
    spec: Option<&DomainSpec<T>>,
    cfg: &OptimizerConfig<T>,
) -> Result<OptimizationResult<T>> {
    cfg.validate()?;
    let mesh = system.mesh();
    if let Objective::Volume(c) = cfg.objective {
        if !(c < mesh.total_area()) {
            return Err(Error::validation(format!(
                "target volume {c} is not below the truncated container area {}",
                mesh.total_area()
            )));
        }
    }
    let mut chi = initial_density(spec, mesh, cfg)?;
    let mut prev: Option<DensityField<T>> = None;
    let mut trace = OptimizerTrace::default();
    let mut iterates = Vec::new();
    let mut best: Option<(T, DensityField<T>, SpectralResult<T>)> = None;
    let mut warm: Option<SpectralResult<T>> = None;
    let mut converged = false;
    let mut iter = 0usize;
    let last_stage = cfg.m_schedule.len() - 1;
    let eig_opts = EigenOptions {
        tol: cfg.eigen_tol,
        seed: cfg.seed,
        ..EigenOptions::new(1)
    };

    'stages: for (stage, &m) in cfg.m_schedule.iter().enumerate() {
        let mut last_lambda: Option<T> = None;
        for _ in 0..cfg.max_stage_iters {
            if iter >= cfg.max_outer_iters {
                break 'stages;
            }
            iter += 1;
            let start = warm.as_ref().map(|r| r.eigenfunctions.as_slice());
            let res = solve_eigs_with(system, &chi, m, &eig_opts, start)?;
            let lambda = res.lambda1();
            let vol = volume(&chi, mesh)?;
            let objective = match cfg.objective {
                Objective::Volume(_) => lambda,
                Objective::Penalty(lp) => lambda + lp * vol,
            };
            let sym_diff = match &prev {
                Some(p) => chi.symmetric_difference(p, mesh)?,
                None => T::zero(),
            };
            trace.records.push(TraceRecord {
                iter,
                stage,
                lambda1: lambda,
                volume: vol,
                perimeter: relative_perimeter(&chi, mesh)?,
                sym_diff,
                m,
                objective,
            });
            debug!("iter {iter} stage {stage} M {m} lambda1 {lambda} volume {vol} sym_diff {sym_diff}");
            if cfg.keep_iterates {
                iterates.push(chi.clone());
            }
            if let Some(l) = last_lambda {
                if objective > l {
                    debug!("objective increased at iteration {iter}");
                }
            }
            if stage == last_stage && best.as_ref().is_none_or(|(b, _, _)| objective < *b) {
                best = Some((objective, chi.clone(), res.clone()));
            }

            let u = &res.eigenfunctions[0];
            let next = match cfg.objective {
                Objective::Volume(c) => threshold_projection(u, mesh, c)?,
                Objective::Penalty(lp) => penalized_projection(u, mesh, m, lp)?,
            };
            if !(volume(&next, mesh)? > T::zero()) {
                warn!("projection emptied the drop at iteration {iter}; stopping");
                break 'stages;
            }
            let change = next.symmetric_difference(&chi, mesh)?;
            let lambda_steady = last_lambda
                .is_some_and(|l| (objective - l).abs() <= cfg.stop_tol_lambda * l.abs());
            // period-two oscillation between two drops
            let cycling = prev
                .as_ref()
                .is_some_and(|o| next.symmetric_difference(o, mesh).is_ok_and(|d| d <= cfg.stop_tol_volume));
            let steady = change <= cfg.stop_tol_volume && (lambda_steady || change == T::zero());
            last_lambda = Some(objective);
            warm = Some(res);
            prev = Some(chi.clone());
            if steady || cycling {
                if stage == last_stage {
                    converged = true;
                }
                break;
            }
            chi = next;
        }
    }

    let (objective, chi, spectral) = match best {
        Some(b) => b,
        None => {
            // the final stage was never reached; evaluate the current drop there
            let m = *cfg.m_schedule.last().expect("schedule is nonempty");
            let res = solve_eigs_with(system, &chi, m, &eig_opts, None)?;
            let vol = volume(&chi, mesh)?;
            let obj = match cfg.objective {
                Objective::Volume(_) => res.lambda1(),
                Objective::Penalty(lp) => res.lambda1() + lp * vol,
            };
            (obj, chi, res)
        }
    };
    let mass = truncation_mass(&chi, mesh);
    let truncation_warning = mass >= T::of(TRUNCATION_MASS_LIMIT);
    if truncation_warning {
        warn!("drop mass {mass} lies within 2h of the truncation boundary; enlarge the truncation");
    }
    let inc = trace.increases();
    if !inc.is_empty() {
        info!("objective increased at iterations {inc:?}");
    }
    Ok(OptimizationResult {
        lambda1: spectral.lambda1(),
        chi,
        objective,
        spectral,
        trace,
        system: system.clone(),
        truncation_mass: mass,
        truncation_warning,
        converged,
        iterates,
    })
}
