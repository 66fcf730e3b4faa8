//! Symbolic description of containers and their truncation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A point in the plane.
pub type Point<T> = [T; 2];

/// Convex obstacle removed from the plane; the container is its exterior.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum Obstacle<T> {
    /// Closed convex polygon, counterclockwise.
    Polygon { vertices: Vec<Point<T>> },
    /// The epigraph `{y >= a x^2 + b x + c}` with `a > 0`.
    Parabola { a: T, b: T, c: T },
}

/// The unbounded or bounded open set that hosts the drop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ContainerKind<T> {
    /// `R x (0, width)`.
    Strip { width: T },
    /// `{y > 0}`.
    HalfPlane,
    /// `{(r cos t, r sin t) : r > 0, |t| < alpha}` with apex at the origin.
    Sector { alpha: T },
    /// Bounded simple polygon, counterclockwise.
    Polygon { vertices: Vec<Point<T>> },
    /// Complement of a closed convex obstacle.
    ExteriorConvex { obstacle: Obstacle<T> },
    /// Epigraph of the piecewise-linear convex function through `profile`,
    /// extended linearly beyond the end samples.
    ConvexEpigraph { profile: Vec<Point<T>> },
}

/// Clipping region applied to the container before meshing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Truncation<T> {
    /// Bounded containers only.
    None,
    /// Axis-aligned box `[min.0, max.0] x [min.1, max.1]`.
    Box { min: Point<T>, max: Point<T> },
    /// Closed disc.
    Disc { center: Point<T>, radius: T },
}

impl<T: Scalar> Truncation<T> {
    pub fn bounding_box(&self) -> Option<(Point<T>, Point<T>)> {
        match self {
            Truncation::None => None,
            Truncation::Box { min, max } => Some((*min, *max)),
            Truncation::Disc { center, radius } => Some((
                [center[0] - *radius, center[1] - *radius],
                [center[0] + *radius, center[1] + *radius],
            )),
        }
    }

    /// Center of the truncation region, if any.
    pub fn center(&self) -> Option<Point<T>> {
        let half = T::of(0.5);
        match self {
            Truncation::None => None,
            Truncation::Box { min, max } => {
                Some([(min[0] + max[0]) * half, (min[1] + max[1]) * half])
            }
            Truncation::Disc { center, .. } => Some(*center),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Truncation::None => Ok(()),
            Truncation::Box { min, max } => {
                if !(max[0] > min[0] && max[1] > min[1]) {
                    return Err(Error::validation("truncation box must have positive area"));
                }
                Ok(())
            }
            Truncation::Disc { radius, .. } => {
                if !(*radius > T::zero()) {
                    return Err(Error::validation("truncation disc radius must be positive"));
                }
                Ok(())
            }
        }
    }
}

/// Container plus truncation data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec<T> {
    pub kind: ContainerKind<T>,
    pub truncation: Truncation<T>,
}

impl<T: Scalar> DomainSpec<T> {
    pub fn new(kind: ContainerKind<T>, truncation: Truncation<T>) -> Result<Self> {
        let spec = DomainSpec { kind, truncation };
        spec.validate()?;
        Ok(spec)
    }

    pub fn strip(width: T, truncation: Truncation<T>) -> Result<Self> {
        Self::new(ContainerKind::Strip { width }, truncation)
    }

    pub fn half_plane(truncation: Truncation<T>) -> Result<Self> {
        Self::new(ContainerKind::HalfPlane, truncation)
    }

    pub fn sector(alpha: T, truncation: Truncation<T>) -> Result<Self> {
        Self::new(ContainerKind::Sector { alpha }, truncation)
    }

    pub fn polygon(vertices: Vec<Point<T>>, truncation: Truncation<T>) -> Result<Self> {
        Self::new(ContainerKind::Polygon { vertices }, truncation)
    }

    /// Checks every invariant of the container and its truncation.
    pub fn validate(&self) -> Result<()> {
        self.truncation.validate()?;
        let bounded = matches!(self.kind, ContainerKind::Polygon { .. });
        if !bounded && matches!(self.truncation, Truncation::None) {
            return Err(Error::validation(
                "unbounded containers require a truncation region",
            ));
        }
        match &self.kind {
            ContainerKind::Strip { width } => {
                if !(*width > T::zero()) {
                    return Err(Error::validation("strip width must be positive"));
                }
            }
            ContainerKind::HalfPlane => {}
            ContainerKind::Sector { alpha } => {
                let half_pi = T::of(std::f64::consts::FRAC_PI_2);
                if !(*alpha > T::zero() && *alpha <= half_pi * (T::one() + T::epsilon())) {
                    return Err(Error::validation("sector angle must lie in (0, pi/2]"));
                }
            }
            ContainerKind::Polygon { vertices } => validate_simple_ccw(vertices)?,
            ContainerKind::ExteriorConvex { obstacle } => match obstacle {
                Obstacle::Polygon { vertices } => {
                    validate_simple_ccw(vertices)?;
                    if !is_convex_ccw(vertices) {
                        return Err(Error::validation("obstacle polygon must be convex"));
                    }
                }
                Obstacle::Parabola { a, .. } => {
                    if !(*a > T::zero()) {
                        return Err(Error::validation(
                            "parabola obstacle needs a positive leading coefficient",
                        ));
                    }
                }
            },
            ContainerKind::ConvexEpigraph { profile } => validate_convex_profile(profile)?,
        }
        Ok(())
    }
}

pub(crate) fn signed_area<T: Scalar>(poly: &[Point<T>]) -> T {
    let n = poly.len();
    let mut s = T::zero();
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        s += p[0] * q[1] - q[0] * p[1];
    }
    s * T::of(0.5)
}

fn segments_cross<T: Scalar>(a: Point<T>, b: Point<T>, c: Point<T>, d: Point<T>) -> bool {
    let orient = |p: Point<T>, q: Point<T>, r: Point<T>| {
        (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    };
    let d1 = orient(a, b, c);
    let d2 = orient(a, b, d);
    let d3 = orient(c, d, a);
    let d4 = orient(c, d, b);
    ((d1 > T::zero() && d2 < T::zero()) || (d1 < T::zero() && d2 > T::zero()))
        && ((d3 > T::zero() && d4 < T::zero()) || (d3 < T::zero() && d4 > T::zero()))
}

fn validate_simple_ccw<T: Scalar>(vertices: &[Point<T>]) -> Result<()> {
    let n = vertices.len();
    if n < 3 {
        return Err(Error::validation("polygon needs at least three vertices"));
    }
    if !(signed_area(vertices) > T::zero()) {
        return Err(Error::validation("polygon must be counterclockwise"));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            // adjacent edges share a vertex
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_cross(
                vertices[i],
                vertices[(i + 1) % n],
                vertices[j],
                vertices[(j + 1) % n],
            ) {
                return Err(Error::validation("polygon is not simple"));
            }
        }
    }
    Ok(())
}

pub(crate) fn is_convex_ccw<T: Scalar>(vertices: &[Point<T>]) -> bool {
    let n = vertices.len();
    (0..n).all(|i| {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let c = vertices[(i + 2) % n];
        (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]) >= T::zero()
    })
}

fn validate_convex_profile<T: Scalar>(profile: &[Point<T>]) -> Result<()> {
    if profile.len() < 2 {
        return Err(Error::validation("convex profile needs at least two samples"));
    }
    if profile.windows(2).any(|w| !(w[1][0] > w[0][0])) {
        return Err(Error::validation(
            "convex profile abscissae must be strictly increasing",
        ));
    }
    let slopes: Vec<T> = profile
        .windows(2)
        .map(|w| (w[1][1] - w[0][1]) / (w[1][0] - w[0][0]))
        .collect();
    let tol = T::of(1e-12);
    for w in slopes.windows(2) {
        if w[1] - w[0] < -tol * (T::one() + w[0].abs()) {
            return Err(Error::validation("profile is not convex"));
        }
    }
    Ok(())
}
