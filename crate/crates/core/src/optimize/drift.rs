//! Localized optima along the wall of an unbounded container.

use super::config::{MeshParams, OptimizerConfig};
use super::driver::minimize_lambda1;
use crate::error::{Error, Result};
use crate::geometry::{ContainerKind, DomainSpec, Obstacle, Point, Truncation};
use crate::scalar::Scalar;

/// One localized optimum.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftSample<T> {
    /// Signed arclength of the wall point.
    pub position: T,
    pub point: Point<T>,
    pub lambda1: T,
    pub volume: T,
    pub converged: bool,
    pub truncation_warning: bool,
}

/// Arclength of `y = a x^2 + b x + c` from its vertex to abscissa `x`.
fn parabola_arclength<T: Scalar>(a: T, b: T, x: T) -> T {
    let xv = -b / (T::of(2.0) * a);
    let u = T::of(2.0) * a * (x - xv);
    (u * (T::one() + u * u).sqrt() + u.asinh()) / (T::of(4.0) * a)
}

/// Point at signed arclength `s` from the vertex of `y = a x^2 + b x + c`.
pub fn parabola_point<T: Scalar>(a: T, b: T, c: T, s: T) -> Point<T> {
    let xv = -b / (T::of(2.0) * a);
    // |s| bounds |x - xv| from above
    let (mut lo, mut hi) = if s >= T::zero() {
        (xv, xv + s)
    } else {
        (xv + s, xv)
    };
    for _ in 0..200 {
        let mid = (lo + hi) * T::of(0.5);
        if mid == lo || mid == hi {
            break;
        }
        if parabola_arclength(a, b, mid) < s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = (lo + hi) * T::of(0.5);
    [x, a * x * x + b * x + c]
}

/// Wall point at signed arclength `s`.
pub fn wall_point<T: Scalar>(spec: &DomainSpec<T>, s: T) -> Result<Point<T>> {
    match &spec.kind {
        ContainerKind::HalfPlane => Ok([s, T::zero()]),
        ContainerKind::ExteriorConvex {
            obstacle: Obstacle::Parabola { a, b, c },
        } => Ok(parabola_point(*a, *b, *c, s)),
        _ => Err(Error::validation(
            "drift positions need a half-plane or a parabola obstacle",
        )),
    }
}

fn in_container<T: Scalar>(spec: &DomainSpec<T>, p: Point<T>) -> bool {
    match &spec.kind {
        ContainerKind::HalfPlane => p[1] > T::zero(),
        ContainerKind::ExteriorConvex {
            obstacle: Obstacle::Parabola { a, b, c },
        } => p[1] < *a * p[0] * p[0] + *b * p[0] + *c,
        _ => false,
    }
}

fn in_truncation<T: Scalar>(trunc: &Truncation<T>, p: Point<T>, tol: T) -> bool {
    match trunc {
        Truncation::None => false,
        Truncation::Box { min, max } => {
            p[0] >= min[0] - tol && p[0] <= max[0] + tol && p[1] >= min[1] - tol && p[1] <= max[1] + tol
        }
        Truncation::Disc { center, radius } => {
            ((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2)).sqrt() <= *radius + tol
        }
    }
}

/// Checks that `B_R(x) ∩ D` lies in the truncation region, sampling its
/// circular arcs and the wall inside the ball.
fn local_region_fits<T: Scalar>(spec: &DomainSpec<T>, s: T, x: Point<T>, r: T) -> Result<bool> {
    let tol = T::of(1e-9) * r;
    let n = 1440;
    let tau = T::of(std::f64::consts::TAU);
    for i in 0..n {
        let t = tau * T::of_usize(i) / T::of_usize(n);
        let p = [x[0] + r * t.cos(), x[1] + r * t.sin()];
        if in_container(spec, p) && !in_truncation(&spec.truncation, p, tol) {
            return Ok(false);
        }
    }
    // the wall inside the ball is no longer than the ball's circumference
    let reach = tau * r;
    for i in 0..=n {
        let q = wall_point(spec, s - reach + T::of(2.0) * reach * T::of_usize(i) / T::of_usize(n))?;
        let inside = (q[0] - x[0]).powi(2) + (q[1] - x[1]).powi(2) <= r * r;
        if inside && !in_truncation(&spec.truncation, q, tol) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Solves the constrained problem on `B_R(x) ∩ D` for the wall point `x` at
/// arclength `s`. The initial drop is centered at `x`.
pub fn drift_point<T: Scalar>(
    spec: &DomainSpec<T>,
    radius: T,
    s: T,
    cfg: &OptimizerConfig<T>,
    params: &MeshParams<T>,
) -> Result<DriftSample<T>> {
    spec.validate()?;
    if !(radius > T::zero()) {
        return Err(Error::validation("drift radius must be positive"));
    }
    let point = wall_point(spec, s)?;
    if !local_region_fits(spec, s, point, radius)? {
        return Err(Error::validation(format!(
            "B_R({}, {}) with R = {radius} leaves the truncation region",
            point[0], point[1]
        )));
    }
    let local = DomainSpec::new(
        spec.kind.clone(),
        Truncation::Disc {
            center: point,
            radius,
        },
    )?;
    let res = minimize_lambda1(&local, cfg, params)?;
    Ok(DriftSample {
        position: s,
        point,
        lambda1: res.lambda1,
        volume: crate::geometry::volume(&res.chi, res.mesh())?,
        converged: res.converged,
        truncation_warning: res.truncation_warning,
    })
}

/// Orders samples by the distance of their wall point to the origin.
pub fn sort_by_distance<T: Scalar>(samples: &mut [DriftSample<T>]) {
    let norm = |p: &Point<T>| p[0] * p[0] + p[1] * p[1];
    samples.sort_by(|a, b| {
        norm(&a.point)
            .partial_cmp(&norm(&b.point))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
}

/// Localized optima at every position, sorted by `|x_n|`.
pub fn drift_experiment<T: Scalar>(
    spec: &DomainSpec<T>,
    radius: T,
    positions: &[T],
    cfg: &OptimizerConfig<T>,
    params: &MeshParams<T>,
) -> Result<Vec<DriftSample<T>>> {
    if positions.is_empty() {
        return Err(Error::validation("no drift positions given"));
    }
    let mut out = positions
        .iter()
        .map(|s| drift_point(spec, radius, *s, cfg, params))
        .collect::<Result<Vec<_>>>()?;
    sort_by_distance(&mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arclength_matches_quadrature() {
        let (a, b, c) = (0.5f64, 0.3, -1.0);
        for s in [-3.0, -0.4, 0.0, 0.7, 5.0] {
            let p = parabola_point(a, b, c, s);
            assert!((p[1] - (a * p[0] * p[0] + b * p[0] + c)).abs() < 1e-12);
            // trapezoid integral of sqrt(1 + y'^2) from the vertex
            let xv = -b / (2.0 * a);
            let n = 20000;
            let dx = (p[0] - xv) / n as f64;
            let f = |x: f64| (1.0 + (2.0 * a * x + b).powi(2)).sqrt();
            let mut acc = 0.5 * (f(xv) + f(p[0]));
            for i in 1..n {
                acc += f(xv + i as f64 * dx);
            }
            assert!((acc * dx - s).abs() < 1e-6, "s = {s}");
        }
    }

    #[test]
    fn ball_must_fit_the_truncation() {
        let spec = DomainSpec::half_plane(Truncation::Box {
            min: [-2.0, 0.0],
            max: [2.0, 2.0],
        })
        .unwrap();
        let cfg = OptimizerConfig::volume(0.2f64);
        let err = drift_point(&spec, 1.0, 1.5, &cfg, &MeshParams::new(0.1)).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        assert!(local_region_fits(&spec, 0.5, [0.5, 0.0], 1.0).unwrap());
        assert!(!local_region_fits(&spec, 0.5, [0.5, 0.0], 2.5).unwrap());
    }

    #[test]
    fn unsupported_container() {
        let spec = DomainSpec::strip(
            1.0f64,
            Truncation::Box {
                min: [-2.0, 0.0],
                max: [2.0, 1.0],
            },
        )
        .unwrap();
        assert!(wall_point(&spec, 0.0).is_err());
    }
}
