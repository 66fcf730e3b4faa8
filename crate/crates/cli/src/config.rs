use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use spectral_drop::geometry::{ContainerKind, DomainSpec, Truncation};
use spectral_drop::optimize::{default_schedule, drop_scale, Objective, OptimizerConfig};

use crate::error::Invalid;

/// Config keys, their defaults, and the commands that read them.
pub const CONFIG_HELP: &str = "\
CONFIG FILE (JSON; unknown keys are rejected)

  command        optional; must match the command on the command line
  output_dir     artifact directory                     [default: \"out\"]
  domain         container and truncation (solve, optimize, drift, diagnose, export)
    container    {\"kind\": \"strip\", \"width\": w} | {\"kind\": \"half_plane\"}
                 | {\"kind\": \"sector\", \"alpha\": a} | {\"kind\": \"polygon\", \"vertices\": [[x,y],..]}
                 | {\"kind\": \"exterior_convex\", \"obstacle\": {\"shape\": \"parabola\", \"a\": a, \"b\": b, \"c\": c}}
                 | {\"kind\": \"exterior_convex\", \"obstacle\": {\"shape\": \"polygon\", \"vertices\": [..]}}
                 | {\"kind\": \"convex_epigraph\", \"profile\": [[x,y],..]}
    truncation   {\"type\": \"box\", \"min\": [x,y], \"max\": [x,y]} | {\"type\": \"disc\", \"center\": [x,y], \"radius\": r}
                 | {\"type\": \"none\"}                      [default: none]
  mesh.h         target edge length                     (required)
  solver
    k            eigenpairs computed by solve           [default: 1]
    tol          relative eigen residual tolerance      [default: 1e-8]
    m            penalty coefficient of solve/diagnose  [default: 1e6 / h^2]
    robin_k      Robin coefficient, >= 0                [default: 0]
    seed         start vectors and random init          [default: 0]
  drop           drop of solve/diagnose and the user init of optimize  [default: whole mesh]
    shapes       union of {\"shape\": \"rectangle\", \"min\": [x,y], \"max\": [x,y]}
                 and {\"shape\": \"disc\", \"center\": [x,y], \"radius\": r}; a cell belongs
                 to the drop when its centroid lies in one of them
    file, array  cell array of a grid file written earlier; replaces shapes
  optimizer      (optimize; base settings of sweep and drift)
    volume       target volume c    | exactly one of the two for optimize
    penalty      volume penalty Lambda |
    m_schedule   ascending penalties [default: {1e2, 1e4, 1e6} / s, s = c or the
                 half-disc volume at Lambda]
    max_outer_iters                                     [default: 150]
    max_stage_iters                                     [default: 50]
    stop_tol_lambda  relative eigenvalue change         [default: 1e-4]
    stop_tol_volume  symmetric-difference area          [default: 1e-3 * s]
    eigen_tol                                           [default: 1e-8]
    init         \"ball_at_boundary\" | \"random\" | \"drop\"   [default: ball_at_boundary]
  sweep          strip width and volume grid
    width                                               [default: 1]
    c_min, c_max, c_step                                [default: 0.5, 4, 0.125]
  drift          localized optima along the obstacle wall
    radius       ball radius R                          (required)
    positions    wall arclengths                        (required)
    volume       drop volume                            [default: 1]
  diagnose
    coarea_levels                                       [default: 40]
    load_p       exponent p of the load norm, number or \"inf\"  [default: \"inf\"]
    sequence     optional perforation sequence: {\"hole_center\": [x,y], \"radii\": [r1,..]};
                 the drop minus discs of the given radii, ending with the drop itself
  export
    input        grid file whose arrays are re-emitted as CSV tables  [default: none]

ENVIRONMENT
  SPECTRAL_DROP_LOG  error | warn | info | debug        [default: warn]

EXIT STATUS
  0 success, 2 invalid config or input, 3 solver failure, 1 other errors";

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub command: Option<String>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub domain: Option<DomainConfig>,
    #[serde(default)]
    pub mesh: Option<MeshConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub drop: Option<DropConfig>,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub drift: Option<DriftConfig>,
    #[serde(default)]
    pub diagnose: DiagnoseConfig,
    #[serde(default)]
    pub export: ExportConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub container: ContainerKind<f64>,
    #[serde(default = "no_truncation")]
    pub truncation: Truncation<f64>,
}

fn no_truncation() -> Truncation<f64> {
    Truncation::None
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub h: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "one")]
    pub k: usize,
    #[serde(default = "eigen_tol")]
    pub tol: f64,
    #[serde(default)]
    pub m: Option<f64>,
    #[serde(default)]
    pub robin_k: f64,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> usize {
    1
}

fn eigen_tol() -> f64 {
    1e-8
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            k: 1,
            tol: eigen_tol(),
            m: None,
            robin_k: 0.0,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum DropShape {
    Rectangle { min: [f64; 2], max: [f64; 2] },
    Disc { center: [f64; 2], radius: f64 },
}

impl DropShape {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        match self {
            DropShape::Rectangle { min, max } => {
                p[0] >= min[0] && p[0] <= max[0] && p[1] >= min[1] && p[1] <= max[1]
            }
            DropShape::Disc { center, radius } => {
                (p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2) <= radius * radius
            }
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DropConfig {
    #[serde(default)]
    pub shapes: Vec<DropShape>,
    #[serde(default)]
    pub file: Option<PathBuf>,
    #[serde(default)]
    pub array: Option<String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitChoice {
    #[default]
    BallAtBoundary,
    Random,
    Drop,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    #[serde(default)]
    pub volume: Option<f64>,
    #[serde(default)]
    pub penalty: Option<f64>,
    #[serde(default)]
    pub m_schedule: Option<Vec<f64>>,
    #[serde(default)]
    pub max_outer_iters: Option<usize>,
    #[serde(default)]
    pub max_stage_iters: Option<usize>,
    #[serde(default)]
    pub stop_tol_lambda: Option<f64>,
    #[serde(default)]
    pub stop_tol_volume: Option<f64>,
    #[serde(default)]
    pub eigen_tol: Option<f64>,
    #[serde(default)]
    pub init: InitChoice,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "unit")]
    pub width: f64,
    #[serde(default = "c_min")]
    pub c_min: f64,
    #[serde(default = "c_max")]
    pub c_max: f64,
    #[serde(default = "c_step")]
    pub c_step: f64,
}

fn unit() -> f64 {
    1.0
}

fn c_min() -> f64 {
    0.5
}

fn c_max() -> f64 {
    4.0
}

fn c_step() -> f64 {
    0.125
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftConfig {
    pub radius: f64,
    pub positions: Vec<f64>,
    #[serde(default = "unit")]
    pub volume: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Exponent {
    Number(f64),
    Named(String),
}

impl Exponent {
    pub fn value(&self) -> Result<f64, Invalid> {
        match self {
            Exponent::Number(p) if *p >= 1.0 => Ok(*p),
            Exponent::Named(s) if s == "inf" => Ok(f64::INFINITY),
            _ => Err(Invalid::new("diagnose.load_p must be a number >= 1 or \"inf\"")),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceConfig {
    pub hole_center: [f64; 2],
    pub radii: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseConfig {
    #[serde(default = "levels")]
    pub coarea_levels: usize,
    #[serde(default = "inf")]
    pub load_p: Exponent,
    #[serde(default)]
    pub sequence: Option<SequenceConfig>,
}

fn levels() -> usize {
    40
}

fn inf() -> Exponent {
    Exponent::Named("inf".into())
}

impl Default for DiagnoseConfig {
    fn default() -> Self {
        DiagnoseConfig {
            coarea_levels: levels(),
            load_p: inf(),
            sequence: None,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportConfig {
    #[serde(default)]
    pub input: Option<PathBuf>,
}

fn positive(v: f64, what: &str) -> Result<(), Invalid> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Invalid::new(format!("{what} must be positive, got {v}")))
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, Invalid> {
        serde_json::from_str(text).map_err(|e| Invalid::new(format!("config: {e}")))
    }

    pub fn domain_spec(&self) -> Result<DomainSpec<f64>, Invalid> {
        let d = self
            .domain
            .as_ref()
            .ok_or_else(|| Invalid::new("config needs a domain section"))?;
        DomainSpec::new(d.container.clone(), d.truncation.clone()).map_err(Invalid::from)
    }

    pub fn h(&self) -> Result<f64, Invalid> {
        let m = self
            .mesh
            .as_ref()
            .ok_or_else(|| Invalid::new("config needs mesh.h"))?;
        positive(m.h, "mesh.h")?;
        Ok(m.h)
    }

    /// Penalty used by single solves: `solver.m` or `1e6 / h^2`.
    pub fn penalty_m(&self) -> Result<f64, Invalid> {
        let h = self.h()?;
        let m = self.solver.m.unwrap_or(1e6 / (h * h));
        positive(m, "solver.m")?;
        Ok(m)
    }

    pub fn check_solver(&self) -> Result<(), Invalid> {
        if self.solver.k == 0 {
            return Err(Invalid::new("solver.k must be at least 1"));
        }
        positive(self.solver.tol, "solver.tol")?;
        if !(self.solver.robin_k >= 0.0) || !self.solver.robin_k.is_finite() {
            return Err(Invalid::new("solver.robin_k must be nonnegative"));
        }
        Ok(())
    }

    /// Optimizer settings for `objective`, with the section's overrides.
    pub fn optimizer_for(&self, objective: Objective<f64>) -> Result<OptimizerConfig<f64>, Invalid> {
        let o = &self.optimizer;
        let mut cfg = match objective {
            Objective::Volume(c) => OptimizerConfig::volume(c),
            Objective::Penalty(l) => OptimizerConfig::penalty(l),
        };
        let scale = drop_scale(&cfg.objective);
        cfg.m_schedule = o.m_schedule.clone().unwrap_or_else(|| default_schedule(scale));
        if let Some(v) = o.max_outer_iters {
            cfg.max_outer_iters = v;
        }
        if let Some(v) = o.max_stage_iters {
            cfg.max_stage_iters = v;
        }
        if let Some(v) = o.stop_tol_lambda {
            cfg.stop_tol_lambda = v;
        }
        if let Some(v) = o.stop_tol_volume {
            cfg.stop_tol_volume = v;
        }
        if let Some(v) = o.eigen_tol {
            cfg.eigen_tol = v;
        }
        cfg.seed = self.solver.seed;
        cfg.validate().map_err(Invalid::from)?;
        Ok(cfg)
    }

    /// Objective of the `optimize` command.
    pub fn objective(&self) -> Result<Objective<f64>, Invalid> {
        match (self.optimizer.volume, self.optimizer.penalty) {
            (Some(c), None) => {
                positive(c, "optimizer.volume")?;
                Ok(Objective::Volume(c))
            }
            (None, Some(l)) => {
                positive(l, "optimizer.penalty")?;
                Ok(Objective::Penalty(l))
            }
            _ => Err(Invalid::new(
                "optimizer needs exactly one of volume and penalty",
            )),
        }
    }

    pub fn sweep_config(&self) -> Result<SweepConfig, Invalid> {
        let s = self.sweep.clone().unwrap_or(SweepConfig {
            width: unit(),
            c_min: c_min(),
            c_max: c_max(),
            c_step: c_step(),
        });
        positive(s.width, "sweep.width")?;
        positive(s.c_min, "sweep.c_min")?;
        positive(s.c_step, "sweep.c_step")?;
        if !(s.c_max >= s.c_min) {
            return Err(Invalid::new("sweep.c_max must not be below sweep.c_min"));
        }
        Ok(s)
    }

    pub fn drift_config(&self) -> Result<DriftConfig, Invalid> {
        let d = self
            .drift
            .clone()
            .ok_or_else(|| Invalid::new("drift needs a drift section"))?;
        positive(d.radius, "drift.radius")?;
        positive(d.volume, "drift.volume")?;
        if d.positions.is_empty() || d.positions.iter().any(|p| !p.is_finite()) {
            return Err(Invalid::new("drift.positions must be a nonempty list of numbers"));
        }
        Ok(d)
    }

    pub fn check_diagnose(&self) -> Result<(), Invalid> {
        if self.diagnose.coarea_levels < 10 {
            return Err(Invalid::new("diagnose.coarea_levels must be at least 10"));
        }
        self.diagnose.load_p.value()?;
        if let Some(seq) = &self.diagnose.sequence {
            if seq.radii.len() < 2 {
                return Err(Invalid::new("diagnose.sequence needs at least two radii"));
            }
            for r in &seq.radii {
                positive(*r, "diagnose.sequence radius")?;
            }
        }
        Ok(())
    }

    pub fn check_drop(&self) -> Result<(), Invalid> {
        if let Some(d) = &self.drop {
            if d.file.is_some() && !d.shapes.is_empty() {
                return Err(Invalid::new("drop takes either shapes or a file"));
            }
            if d.array.is_some() && d.file.is_none() {
                return Err(Invalid::new("drop.array needs drop.file"));
            }
            for s in &d.shapes {
                match s {
                    DropShape::Rectangle { min, max } => {
                        if !(max[0] > min[0] && max[1] > min[1]) {
                            return Err(Invalid::new("drop rectangle must have positive area"));
                        }
                    }
                    DropShape::Disc { radius, .. } => positive(*radius, "drop disc radius")?,
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::parse(r#"{"mesh": {"h": 0.1}, "bogus": 1}"#).is_err());
        assert!(RunConfig::parse(r#"{"mesh": {"h": 0.1, "size": 2}}"#).is_err());
        let nested = r#"{"domain": {"container": {"kind": "strip", "width": 1, "height": 2},
            "truncation": {"type": "none"}}}"#;
        assert!(RunConfig::parse(nested).is_err());
    }

    #[test]
    fn defaults_fill_in() {
        let cfg = RunConfig::parse(r#"{"mesh": {"h": 0.125}}"#).unwrap();
        assert_eq!(cfg.solver.k, 1);
        assert_eq!(cfg.penalty_m().unwrap(), 1e6 * 64.0);
        assert_eq!(cfg.diagnose.load_p.value().unwrap(), f64::INFINITY);
        assert_eq!(cfg.sweep_config().unwrap().c_step, 0.125);
    }

    #[test]
    fn objective_needs_exactly_one() {
        let cfg = RunConfig::parse(r#"{"optimizer": {"volume": 1, "penalty": 2}}"#).unwrap();
        assert!(cfg.objective().is_err());
        let cfg = RunConfig::parse(r#"{"optimizer": {"penalty": 2}}"#).unwrap();
        assert_eq!(cfg.objective().unwrap(), Objective::Penalty(2.0));
    }

    #[test]
    fn negative_h_is_invalid() {
        let cfg = RunConfig::parse(r#"{"mesh": {"h": -0.1}}"#).unwrap();
        assert!(cfg.h().is_err());
    }
}
