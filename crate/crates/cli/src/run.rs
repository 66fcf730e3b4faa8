use std::fs;

use anyhow::{Context, Result};
use log::{info, warn};
use rayon::prelude::*;
use spectral_drop::analytic;
use spectral_drop::diagnostics::{
    bounds_report, coarea_lower_bound, symmetrize_sector, weak_gamma_limit, SequenceOptions,
};
use spectral_drop::geometry::{build_mesh, ContainerKind, DensityField, DomainSpec, Mesh};
use spectral_drop::io::GridFile;
use spectral_drop::optimize::{
    drift_point, optimality_report, optimize_on, sort_by_distance, strip_sweep_point,
    volume_grid, Init, MeshParams, Objective,
};
use spectral_drop::pde::{assemble, energy_function, solve_eigs_with, EigenOptions, ScalarField};

use crate::config::{InitChoice, RunConfig};
use crate::error::Invalid;
use crate::output::{Artifacts, Cell, Table};

/// Subcommands of the tool.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Solve,
    Optimize,
    Sweep,
    Drift,
    Diagnose,
    Export,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Optimize => "optimize",
            Command::Sweep => "sweep",
            Command::Drift => "drift",
            Command::Diagnose => "diagnose",
            Command::Export => "export",
        }
    }
}

/// Inputs of a run that passed validation.
pub struct Prepared {
    pub command: Command,
    pub cfg: RunConfig,
    spec: Option<DomainSpec<f64>>,
    mesh: Option<Mesh<f64>>,
    chi: Option<DensityField<f64>>,
}

/// Checks the config for `command` and builds the mesh and drop, so that
/// every validation failure happens before anything is written.
pub fn prepare(command: Command, cfg: RunConfig) -> Result<Prepared> {
    if let Some(c) = &cfg.command {
        if c != command.as_str() {
            return Err(Invalid::new(format!(
                "config is for command {c}, not {}",
                command.as_str()
            ))
            .into());
        }
    }
    cfg.check_solver()?;
    cfg.check_drop()?;
    let needs_domain = command != Command::Sweep;
    let (spec, mesh) = if needs_domain {
        let spec = cfg.domain_spec()?;
        let h = cfg.h()?;
        let mesh = build_mesh(&spec, h).map_err(Invalid::from)?;
        (Some(spec), Some(mesh))
    } else {
        cfg.h()?;
        (None, None)
    };
    match command {
        Command::Solve | Command::Diagnose => {
            cfg.penalty_m()?;
        }
        Command::Optimize => {
            let obj = cfg.objective()?;
            cfg.optimizer_for(obj)?;
            if cfg.optimizer.init == InitChoice::Drop && cfg.drop.is_none() {
                return Err(Invalid::new("optimizer.init = drop needs a drop section").into());
            }
        }
        Command::Sweep => {
            let s = cfg.sweep_config()?;
            volume_grid(s.c_min, s.c_max, s.c_step).map_err(Invalid::from)?;
            cfg.optimizer_for(Objective::Volume(s.c_min))?;
        }
        Command::Drift => {
            let d = cfg.drift_config()?;
            cfg.optimizer_for(Objective::Volume(d.volume))?;
        }
        Command::Export => {
            if let Some(p) = &cfg.export.input {
                read_grid(p)?;
            }
        }
    }
    if command == Command::Diagnose {
        cfg.check_diagnose()?;
    }
    let chi = match (&mesh, command) {
        (Some(m), Command::Solve | Command::Diagnose) => Some(drop_density(&cfg, m)?),
        (Some(m), Command::Optimize) if cfg.optimizer.init == InitChoice::Drop => {
            Some(drop_density(&cfg, m)?)
        }
        _ => None,
    };
    Ok(Prepared {
        command,
        cfg,
        spec,
        mesh,
        chi,
    })
}

fn read_grid(path: &std::path::Path) -> Result<GridFile> {
    let text = fs::read_to_string(path)
        .map_err(|e| Invalid::new(format!("reading {}: {e}", path.display())))?;
    Ok(GridFile::parse_vtk(&text).map_err(Invalid::from)?)
}

fn drop_density(cfg: &RunConfig, mesh: &Mesh<f64>) -> Result<DensityField<f64>> {
    let Some(d) = &cfg.drop else {
        return Ok(DensityField::ones(mesh.num_cells()));
    };
    if let Some(path) = &d.file {
        let grid = read_grid(path)?;
        let name = d.array.as_deref().unwrap_or("chi");
        let arr = grid
            .cell_array(name)
            .ok_or_else(|| Invalid::new(format!("{} has no cell array {name}", path.display())))?;
        if arr.values.len() != mesh.num_cells() {
            return Err(Invalid::new(format!(
                "cell array {name} has {} values, the mesh has {} cells",
                arr.values.len(),
                mesh.num_cells()
            ))
            .into());
        }
        return Ok(DensityField::new(arr.values.clone()).map_err(Invalid::from)?);
    }
    if d.shapes.is_empty() {
        return Ok(DensityField::ones(mesh.num_cells()));
    }
    let chi = DensityField::from_indicator(
        (0..mesh.num_cells()).map(|c| d.shapes.iter().any(|s| s.contains(mesh.centroid(c)))),
    );
    if chi.values().iter().all(|v| *v == 0.0) {
        return Err(Invalid::new("drop shapes contain no cell centroid").into());
    }
    Ok(chi)
}

fn edge_table(mesh: &Mesh<f64>) -> Table {
    let mut t = Table::new(&["edge", "v0", "v1", "x0", "y0", "x1", "y1", "tag"]);
    let pts = mesh.vertices();
    for (i, v0, v1, tag) in mesh.edge_tag_rows() {
        t.push(vec![
            i.into(),
            v0.into(),
            v1.into(),
            pts[v0][0].into(),
            pts[v0][1].into(),
            pts[v1][0].into(),
            pts[v1][1].into(),
            tag.as_str().into(),
        ]);
    }
    t
}

fn eigen_options(cfg: &RunConfig, k: usize) -> EigenOptions<f64> {
    EigenOptions {
        tol: cfg.solver.tol,
        seed: cfg.solver.seed,
        ..EigenOptions::new(k)
    }
}

/// Executes a prepared run; returns its artifacts.
pub fn execute(p: &Prepared, pool: &rayon::ThreadPool) -> Result<Artifacts> {
    match p.command {
        Command::Solve => solve(p),
        Command::Optimize => optimize(p),
        Command::Sweep => pool.install(|| sweep(p)),
        Command::Drift => pool.install(|| drift(p)),
        Command::Diagnose => diagnose(p),
        Command::Export => export(p),
    }
}

fn parts(p: &Prepared) -> (&DomainSpec<f64>, &Mesh<f64>) {
    (
        p.spec.as_ref().expect("prepared with a domain"),
        p.mesh.as_ref().expect("prepared with a mesh"),
    )
}

fn solve(p: &Prepared) -> Result<Artifacts> {
    let (_, mesh) = parts(p);
    let cfg = &p.cfg;
    let chi = p.chi.as_ref().expect("solve has a drop");
    let system = assemble(mesh, cfg.solver.robin_k)?;
    let m = cfg.penalty_m()?;
    info!("solving for {} eigenpairs on {} cells", cfg.solver.k, mesh.num_cells());
    let res = solve_eigs_with(&system, chi, m, &eigen_options(cfg, cfg.solver.k), None)?;
    let mut table = Table::new(&["k", "lambda", "residual", "h", "M"]);
    for (i, (l, r)) in res.eigenvalues.iter().zip(&res.residuals).enumerate() {
        table.push(vec![(i + 1).into(), (*l).into(), (*r).into(), mesh.h().into(), m.into()]);
    }
    let mut grid = GridFile::from_mesh(mesh, "eigenfunctions");
    grid.add_cell_data("chi", chi.values().to_vec())?;
    for (i, u) in res.eigenfunctions.iter().enumerate() {
        grid.add_point_data(&format!("u{}", i + 1), u.values().to_vec())?;
    }
    let mut out = Artifacts::default();
    out.table("eigenvalues.csv", &table);
    out.add("fields.vtk", grid.to_vtk());
    out.table("edge_tags.csv", &edge_table(mesh));
    Ok(out)
}

fn optimize(p: &Prepared) -> Result<Artifacts> {
    let (spec, mesh) = parts(p);
    let cfg = &p.cfg;
    let objective = cfg.objective()?;
    let lambda_pen = match objective {
        Objective::Penalty(l) => Some(l),
        Objective::Volume(_) => None,
    };
    let mut ocfg = cfg.optimizer_for(objective)?;
    ocfg.init = match cfg.optimizer.init {
        InitChoice::BallAtBoundary => Init::BallAtBoundary,
        InitChoice::Random => Init::Random,
        InitChoice::Drop => Init::User(p.chi.clone().expect("drop prepared")),
    };
    let system = assemble(mesh, cfg.solver.robin_k)?;
    let res = optimize_on(&system, Some(spec), &ocfg)?;
    if res.truncation_warning {
        warn!(
            "drop mass {:e} lies within 2h of the truncation boundary",
            res.truncation_mass
        );
    }
    let increases = res.trace.increases();
    if !increases.is_empty() {
        warn!("objective rose at iterations {increases:?}");
    }
    let mut trace = Table::new(&["iter", "lambda1", "volume", "perimeter", "sym_diff", "M"]);
    for r in &res.trace.records {
        trace.push(vec![
            r.iter.into(),
            r.lambda1.into(),
            r.volume.into(),
            r.perimeter.into(),
            r.sym_diff.into(),
            r.m.into(),
        ]);
    }
    let report = optimality_report(&res.chi, &res.spectral, mesh, lambda_pen)?;
    let mut rep = Table::new(&["metric", "value"]);
    let mut row = |name: &str, v: Cell| rep.push(vec![name.into(), v]);
    row("lambda1", res.lambda1.into());
    row("objective", res.objective.into());
    row("volume", report.volume.into());
    row("perimeter", report.perimeter.into());
    row("gradient_cv", report.gradient_cv.into());
    row("gradient_mean", report.gradient_mean.into());
    row("gradient_samples", report.gradient_samples.into());
    row("touches_wall", report.touches_wall.into());
    for (i, a) in report.contact_angles.iter().enumerate() {
        row(&format!("contact_angle_{i}"), (*a).into());
    }
    if let (Some(b), Some(s)) = (report.perimeter_bound, report.perimeter_slack) {
        row("perimeter_bound", b.into());
        row("perimeter_slack", s.into());
    }
    row("converged", res.converged.into());
    row("truncation_mass", res.truncation_mass.into());
    row("truncation_warning", res.truncation_warning.into());
    let mut grid = GridFile::from_mesh(mesh, "optimal drop");
    grid.add_cell_data("chi", res.chi.values().to_vec())?;
    grid.add_point_data("u1", res.spectral.eigenfunctions[0].values().to_vec())?;
    let mut out = Artifacts::default();
    out.table("trace.csv", &trace);
    out.table("report.csv", &rep);
    out.add("drop.vtk", grid.to_vtk());
    Ok(out)
}

fn sweep(p: &Prepared) -> Result<Artifacts> {
    let cfg = &p.cfg;
    let s = cfg.sweep_config()?;
    let grid = volume_grid(s.c_min, s.c_max, s.c_step)?;
    let params = MeshParams {
        h: cfg.h()?,
        robin_k: cfg.solver.robin_k,
    };
    info!("sweeping {} volumes", grid.len());
    let rows = grid
        .par_iter()
        .map(|c| {
            let base = cfg.optimizer_for(Objective::Volume(*c))?;
            Ok(strip_sweep_point(s.width, *c, &params, &base)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&[
        "c",
        "lambda_numeric",
        "lambda_rect",
        "lambda_hd",
        "branch",
        "numeric_branch",
        "start",
        "converged",
        "truncation_warning",
    ]);
    let mut refs = Table::new(&["c", "lambda_rect", "lambda_hd", "branch", "regime", "crossover"]);
    for r in &rows {
        table.push(vec![
            r.c.into(),
            r.lambda.into(),
            r.lambda_rect.into(),
            r.lambda_half_disc.into(),
            r.branch.into(),
            r.numeric_branch.into(),
            r.start.into(),
            r.converged.into(),
            r.truncation_warning.into(),
        ]);
        let a = analytic::strip_with_width(s.width, r.c)?;
        refs.push(vec![
            r.c.into(),
            a.rectangle.lambda.into(),
            a.half_disc.lambda.into(),
            a.winner_name().into(),
            a.regime.as_str().into(),
            a.crossover.into(),
        ]);
    }
    let mut out = Artifacts::default();
    out.table("sweep.csv", &table);
    out.table("reference.csv", &refs);
    Ok(out)
}

fn drift(p: &Prepared) -> Result<Artifacts> {
    let (spec, _) = parts(p);
    let cfg = &p.cfg;
    let d = cfg.drift_config()?;
    let ocfg = cfg.optimizer_for(Objective::Volume(d.volume))?;
    let params = MeshParams {
        h: cfg.h()?,
        robin_k: cfg.solver.robin_k,
    };
    let mut samples = d
        .positions
        .par_iter()
        .map(|s| Ok(drift_point(spec, d.radius, *s, &ocfg, &params)?))
        .collect::<Result<Vec<_>>>()?;
    sort_by_distance(&mut samples);
    let mut table = Table::new(&[
        "position",
        "x",
        "y",
        "distance",
        "lambda1",
        "volume",
        "converged",
        "truncation_warning",
    ]);
    for s in &samples {
        table.push(vec![
            s.position.into(),
            s.point[0].into(),
            s.point[1].into(),
            s.point[0].hypot(s.point[1]).into(),
            s.lambda1.into(),
            s.volume.into(),
            s.converged.into(),
            s.truncation_warning.into(),
        ]);
    }
    let mut out = Artifacts::default();
    out.table("drift.csv", &table);
    Ok(out)
}

fn check_row(t: &mut Table, name: &str, lhs: f64, rhs: f64, slack: f64, pass: bool) {
    t.push(vec![name.into(), lhs.into(), rhs.into(), slack.into(), pass.into()]);
}

fn diagnose(p: &Prepared) -> Result<Artifacts> {
    let (spec, mesh) = parts(p);
    let cfg = &p.cfg;
    let chi = p.chi.as_ref().expect("diagnose has a drop");
    let m = cfg.penalty_m()?;
    let system = assemble(mesh, cfg.solver.robin_k)?;
    let load_p = cfg.diagnose.load_p.value()?;
    let one = ScalarField::constant(mesh.num_vertices(), 1.0);
    let bounds = bounds_report(chi, &system, m, Some((&one, load_p)))?;
    let mut checks = Table::new(&["name", "lhs", "rhs", "slack", "pass"]);
    for c in &bounds.checks {
        check_row(&mut checks, &c.name, c.lhs, c.rhs, c.slack, c.pass);
    }

    // first eigenfunction, sign fixed so that it is mostly positive
    let eig = solve_eigs_with(&system, chi, m, &eigen_options(cfg, 1), None)?;
    let u1 = &eig.eigenfunctions[0];
    let sign = if u1.values().iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let u = ScalarField::new(u1.values().iter().map(|v| (sign * v).max(0.0)).collect())?;
    let dirichlet = system.stiffness().quad_form(u.values());
    let coarea = coarea_lower_bound(&u, mesh, cfg.diagnose.coarea_levels)?;
    let rhs = dirichlet * 1.05;
    check_row(&mut checks, "coarea_vs_dirichlet", coarea, rhs, rhs - coarea, coarea <= rhs);

    if matches!(spec.kind, ContainerKind::Sector { .. } | ContainerKind::HalfPlane) {
        let v = symmetrize_sector(&u, mesh, spec)?;
        let (l2u, l2v) = (
            system.mass().quad_form(u.values()),
            system.mass().quad_form(v.values()),
        );
        let tol = 0.01 * l2u;
        let dev = (l2v - l2u).abs();
        check_row(&mut checks, "rearrangement_l2", l2v, l2u, tol - dev, dev <= tol);
        let dv = system.stiffness().quad_form(v.values());
        check_row(&mut checks, "rearrangement_dirichlet", dv, rhs, rhs - dv, dv <= rhs);
    }

    let (w, e1) = energy_function(&system, chi, m)?;
    let eps = 1e-6 * w.max_abs();
    let mut touches = vec![false; mesh.num_vertices()];
    for (c, t) in mesh.triangles().iter().enumerate() {
        if chi.values()[c] > 0.0 {
            t.iter().for_each(|v| touches[*v] = true);
        }
    }
    let stray = w
        .values()
        .iter()
        .zip(&touches)
        .filter(|(wv, inside)| **wv > eps && !**inside)
        .count();
    check_row(&mut checks, "support_in_drop", stray as f64, 0.0, -(stray as f64), stray == 0);

    let mut out = Artifacts::default();
    if let Some(seq) = &cfg.diagnose.sequence {
        let hole = |r: f64| {
            DensityField::from_indicator((0..mesh.num_cells()).map(|c| {
                let q = mesh.centroid(c);
                let d = (q[0] - seq.hole_center[0]).hypot(q[1] - seq.hole_center[1]);
                chi.values()[c] > 0.0 && d > r
            }))
        };
        let mut terms: Vec<DensityField<f64>> = seq.radii.iter().map(|r| hole(*r)).collect();
        terms.push(chi.clone());
        let opts = SequenceOptions {
            eigen_tol: cfg.solver.tol,
            ..SequenceOptions::new(cfg.solver.k)
        };
        let d = weak_gamma_limit(&terms, &system, m, &opts)?;
        let mut header = vec!["n".to_string(), "gamma_distance".into(), "volume".into()];
        header.extend((1..=cfg.solver.k).map(|k| format!("lambda_{k}")));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let mut table = Table::new(&header);
        for t in &d.terms {
            let mut row: Vec<Cell> = vec![t.n.into(), t.gamma_distance.into(), t.volume.into()];
            row.extend(t.eigenvalues.iter().map(|l| Cell::from(*l)));
            table.push(row);
        }
        out.table("sequence.csv", &table);
        for k in 0..cfg.solver.k {
            let lim = d.limit_eigenvalues[k];
            let tail = lim + d.lambda_gap[k];
            check_row(
                &mut checks,
                &format!("lambda_{}_continuity", k + 1),
                lim,
                lim,
                0.0,
                d.continuity[k],
            );
            check_row(
                &mut checks,
                &format!("lambda_{}_semicontinuity", k + 1),
                lim,
                tail,
                d.lambda_gap[k],
                d.lambda_semicontinuity[k],
            );
        }
        check_row(
            &mut checks,
            "volume_semicontinuity",
            d.limit_volume,
            d.limit_volume + d.volume_gap,
            d.volume_gap,
            d.volume_semicontinuity,
        );
    }

    let mut summary = String::new();
    summary.push_str(&format!("lambda1 {}\n", bounds.lambda1));
    summary.push_str(&format!("volume {}\n", bounds.volume));
    summary.push_str(&format!("dirichlet_energy {e1}\n"));
    let text = checks.render();
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let verdict = if cols[4] == "true" { "PASS" } else { "FAIL" };
        summary.push_str(&format!("{verdict} {} (slack {})\n", cols[0], cols[3]));
    }
    out.table("checks.csv", &checks);
    out.add("summary.txt", summary);
    Ok(out)
}

fn export(p: &Prepared) -> Result<Artifacts> {
    let (_, mesh) = parts(p);
    let mut out = Artifacts::default();
    out.add("mesh.vtk", GridFile::from_mesh(mesh, "mesh").to_vtk());
    out.table("edge_tags.csv", &edge_table(mesh));
    if let Some(path) = &p.cfg.export.input {
        let grid = read_grid(path).context("export input")?;
        if !grid.cell_data.is_empty() {
            let mut header = vec!["cell".to_string()];
            header.extend(grid.cell_data.iter().map(|a| a.name.clone()));
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            let mut t = Table::new(&header);
            for c in 0..grid.triangles.len() {
                let mut row: Vec<Cell> = vec![c.into()];
                row.extend(grid.cell_data.iter().map(|a| Cell::from(a.values[c])));
                t.push(row);
            }
            out.table("cell_data.csv", &t);
        }
        if !grid.point_data.is_empty() {
            let mut header = vec!["vertex".to_string(), "x".into(), "y".into()];
            header.extend(grid.point_data.iter().map(|a| a.name.clone()));
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            let mut t = Table::new(&header);
            for (v, q) in grid.points.iter().enumerate() {
                let mut row: Vec<Cell> = vec![v.into(), q[0].into(), q[1].into()];
                row.extend(grid.point_data.iter().map(|a| Cell::from(a.values[v])));
                t.push(row);
            }
            out.table("point_data.csv", &t);
        }
        out.add("fields.vtk", grid.to_vtk());
    }
    Ok(out)
}
