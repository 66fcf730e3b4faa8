//! First-order optimality checks on a computed drop.

use crate::error::{Error, Result};
use crate::geometry::{relative_perimeter, volume, DensityField, EdgeTag, Mesh, Point};
use crate::linalg::symmetric_eigen;
use crate::pde::SpectralResult;
use crate::scalar::Scalar;

/// Free-boundary and contact diagnostics of a drop.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimalityReport<T> {
    /// Coefficient of variation of `|grad u_1|` along the free boundary.
    pub gradient_cv: T,
    pub gradient_mean: T,
    pub gradient_samples: usize,
    /// Angle inside the drop between the wall and the free boundary, degrees.
    pub contact_angles: Vec<T>,
    /// The drop has a cell on the physical wall.
    pub touches_wall: bool,
    pub perimeter: T,
    pub volume: T,
    pub lambda1: T,
    /// `Lambda^{-1/2} lambda_1 |Omega|^{1/2}`, when a volume penalty is given.
    pub perimeter_bound: Option<T>,
    /// `perimeter_bound - perimeter`.
    pub perimeter_slack: Option<T>,
}

/// Radius of the patch averaged around each free-boundary sample, in units of `h`.
const PATCH: f64 = 3.0;
/// Radius of the window fitted around each contact point, in units of `h`.
const CONTACT_WINDOW: f64 = 12.0;

fn dist2<T: Scalar>(a: Point<T>, b: Point<T>) -> T {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Interior edges separating a drop cell from an empty one.
fn free_boundary_edges<T: Scalar>(chi: &DensityField<T>, mesh: &Mesh<T>) -> Vec<usize> {
    let v = chi.values();
    mesh.edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| !e.boundary && (v[e.cells[0]] > T::zero()) != (v[e.cells[1]] > T::zero()))
        .map(|(i, _)| i)
        .collect()
}

fn midpoint<T: Scalar>(mesh: &Mesh<T>, v: [usize; 2]) -> Point<T> {
    let a = mesh.vertices()[v[0]];
    let b = mesh.vertices()[v[1]];
    [(a[0] + b[0]) * T::of(0.5), (a[1] + b[1]) * T::of(0.5)]
}

/// Area-weighted mean of `|grad u|` over drop cells near each free-boundary
/// edge midpoint.
fn gradient_samples<T: Scalar>(
    chi: &DensityField<T>,
    mesh: &Mesh<T>,
    grads: &[Point<T>],
    edges: &[usize],
) -> Vec<T> {
    let r2 = (T::of(PATCH) * mesh.h()).powi(2);
    let inside: Vec<usize> = (0..mesh.num_cells())
        .filter(|c| chi.values()[*c] > T::zero())
        .collect();
    let centroids: Vec<Point<T>> = inside.iter().map(|c| mesh.centroid(*c)).collect();
    let mut out = Vec::with_capacity(edges.len());
    for &e in edges {
        let p = midpoint(mesh, mesh.edges()[e].v);
        let mut num = T::zero();
        let mut den = T::zero();
        for (k, &c) in inside.iter().enumerate() {
            if dist2(centroids[k], p) <= r2 {
                let a = mesh.signed_area(c);
                let g = grads[c];
                num += a * (g[0] * g[0] + g[1] * g[1]).sqrt();
                den += a;
            }
        }
        if den > T::zero() {
            out.push(num / den);
        }
    }
    out
}

/// Least-squares fit of `s = a + b t + c t^2`; returns `b`.
fn quadratic_slope<T: Scalar>(pts: &[(T, T)]) -> Option<T> {
    if pts.len() < 4 {
        return None;
    }
    let mut ata = [T::zero(); 9];
    let mut atb = [T::zero(); 3];
    for &(t, s) in pts {
        let row = [T::one(), t, t * t];
        for i in 0..3 {
            for j in 0..3 {
                ata[3 * i + j] += row[i] * row[j];
            }
            atb[i] += row[i] * s;
        }
    }
    // solve through the symmetric eigendecomposition, dropping null directions
    let (vals, vecs) = symmetric_eigen(&ata, 3);
    let top = vals.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let mut coef = [T::zero(); 3];
    for k in 0..3 {
        if vals[k].abs() <= top * T::of(1e-12) {
            return None;
        }
        let q: Vec<T> = (0..3).map(|i| vecs[i * 3 + k]).collect();
        let proj = (0..3).fold(T::zero(), |acc, i| acc + q[i] * atb[i]) / vals[k];
        for i in 0..3 {
            coef[i] += proj * q[i];
        }
    }
    Some(coef[1])
}

/// Contact angles where the free boundary meets a physical wall.
fn contact_angles<T: Scalar>(chi: &DensityField<T>, mesh: &Mesh<T>, edges: &[usize]) -> Vec<T> {
    let v = chi.values();
    let on_wall = mesh.tagged_vertices(EdgeTag::NeumannPhysical);
    let mut fb_vertices: Vec<usize> = edges.iter().flat_map(|e| mesh.edges()[*e].v).collect();
    fb_vertices.sort_unstable();
    fb_vertices.dedup();

    let h = mesh.h();
    let window = T::of(CONTACT_WINDOW) * h;
    let mut contacts: Vec<Point<T>> = Vec::new();
    let mut angles = Vec::new();
    for &q in fb_vertices.iter().filter(|q| on_wall[**q]) {
        let qp = mesh.vertices()[q];
        // one angle per contact region
        if contacts
            .iter()
            .any(|c| dist2(*c, qp) < (T::of(6.0) * h).powi(2))
        {
            continue;
        }
        // wall direction leading into the drop
        let mut tangent: Option<Point<T>> = None;
        let mut ambiguous = false;
        for e in mesh.boundary_edges() {
            if e.tag != Some(EdgeTag::NeumannPhysical) || !e.v.contains(&q) {
                continue;
            }
            if v[e.cells[0]] > T::zero() {
                let other = if e.v[0] == q { e.v[1] } else { e.v[0] };
                let op = mesh.vertices()[other];
                let d = [op[0] - qp[0], op[1] - qp[1]];
                let n = (d[0] * d[0] + d[1] * d[1]).sqrt();
                if tangent.is_some() {
                    ambiguous = true;
                }
                tangent = Some([d[0] / n, d[1] / n]);
            }
        }
        let t = match tangent {
            Some(t) if !ambiguous => t,
            _ => continue,
        };
        // inward normal: rotate the tangent toward the drop side
        let mut normal = [-t[1], t[0]];
        let cell_side = fb_vertices
            .iter()
            .map(|w| mesh.vertices()[*w])
            .filter(|p| dist2(*p, qp) <= window * window)
            .fold(T::zero(), |acc, p| {
                acc + (p[0] - qp[0]) * normal[0] + (p[1] - qp[1]) * normal[1]
            });
        if cell_side < T::zero() {
            normal = [-normal[0], -normal[1]];
        }
        let pts: Vec<(T, T)> = fb_vertices
            .iter()
            .map(|w| mesh.vertices()[*w])
            .filter(|p| dist2(*p, qp) <= window * window)
            .map(|p| {
                let d = [p[0] - qp[0], p[1] - qp[1]];
                (d[0] * normal[0] + d[1] * normal[1], d[0] * t[0] + d[1] * t[1])
            })
            .collect();
        if let Some(b) = quadratic_slope(&pts) {
            // boundary direction (b, 1) in (tangent, normal) coordinates
            let deg = T::of(180.0) / T::of(std::f64::consts::PI);
            angles.push(T::of(90.0) - b.atan() * deg);
            contacts.push(qp);
        }
    }
    angles
}

/// Checks the first-order conditions of an optimal drop: constant normal
/// derivative on the free boundary, orthogonal contact with the wall, wall
/// contact, and the perimeter bound of penalized optima.
pub fn optimality_report<T: Scalar>(
    chi: &DensityField<T>,
    spectral: &SpectralResult<T>,
    mesh: &Mesh<T>,
    lambda_pen: Option<T>,
) -> Result<OptimalityReport<T>> {
    crate::geometry::check_len(chi, mesh)?;
    if !chi.is_binary() {
        return Err(Error::validation("optimality report needs a binary density"));
    }
    let u = spectral
        .eigenfunctions
        .first()
        .ok_or_else(|| Error::validation("spectral result has no eigenfunction"))?;
    if u.len() != mesh.num_vertices() {
        return Err(Error::validation("eigenfunction does not match the mesh"));
    }
    if let Some(l) = lambda_pen {
        if !(l > T::zero()) {
            return Err(Error::validation("volume penalty must be positive"));
        }
    }
    let edges = free_boundary_edges(chi, mesh);
    let grads = u.cell_gradients(mesh);
    let samples = gradient_samples(chi, mesh, &grads, &edges);
    let (mean, cv) = if samples.is_empty() {
        (T::zero(), T::nan())
    } else {
        let n = T::of_usize(samples.len());
        let mean = samples.iter().fold(T::zero(), |a, s| a + *s) / n;
        let var = samples.iter().fold(T::zero(), |a, s| a + (*s - mean).powi(2)) / n;
        (mean, var.sqrt() / mean)
    };
    let touches_wall = mesh.boundary_edges().any(|e| {
        e.tag == Some(EdgeTag::NeumannPhysical) && chi.values()[e.cells[0]] > T::zero()
    });
    let perimeter = relative_perimeter(chi, mesh)?;
    let vol = volume(chi, mesh)?;
    let lambda1 = spectral.lambda1();
    let perimeter_bound = lambda_pen.map(|l| lambda1 * vol.sqrt() / l.sqrt());
    Ok(OptimalityReport {
        gradient_cv: cv,
        gradient_mean: mean,
        gradient_samples: samples.len(),
        contact_angles: contact_angles(chi, mesh, &edges),
        touches_wall,
        perimeter,
        volume: vol,
        lambda1,
        perimeter_bound,
        perimeter_slack: perimeter_bound.map(|b| b - perimeter),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, DomainSpec, Truncation};
    use crate::pde::{assemble, solve_eigs};

    #[test]
    fn slope_of_exact_quadratic() {
        let pts: Vec<(f64, f64)> = (0..10)
            .map(|i| {
                let t = i as f64 * 0.1;
                (t, 0.3 - 0.7 * t + 2.0 * t * t)
            })
            .collect();
        assert!((quadratic_slope(&pts).unwrap() + 0.7).abs() < 1e-10);
        assert!(quadratic_slope(&pts[..3]).is_none());
    }

    #[test]
    fn rejects_fractional_density() {
        let spec = DomainSpec::half_plane(Truncation::Box {
            min: [-1.0, 0.0],
            max: [1.0, 1.0],
        })
        .unwrap();
        let mesh = build_mesh(&spec, 0.25f64).unwrap();
        let sys = assemble(&mesh, 0.0).unwrap();
        let chi = DensityField::ones(mesh.num_cells());
        let res = solve_eigs(&sys, &chi, 1e4, 1, 1e-8).unwrap();
        let half = chi.blend(&DensityField::zeros(mesh.num_cells()), 0.5).unwrap();
        assert!(optimality_report(&half, &res, &mesh, None).is_err());
        let rep = optimality_report(&chi, &res, &mesh, Some(1.0)).unwrap();
        assert!(rep.touches_wall);
        assert_eq!(rep.gradient_samples, 0);
        assert!(rep.perimeter_slack.is_some());
    }
}
