//! Structured meshing of truncated containers.
//!
//! A regular grid covering the bounding box of the truncated container is
//! split into triangles (alternating diagonals) and clipped successively by
//! every constraint describing the region. Before each clip, vertices close to
//! the constraint's zero set are moved onto it so that clipping never creates
//! slivers much thinner than the grid spacing. Cut points are projected onto
//! the exact boundary, so curved boundaries are interpolated.

use std::collections::HashMap;

use super::domain::{is_convex_ccw, ContainerKind, DomainSpec, Obstacle, Point, Truncation};
use super::mesh::{point_segment_distance, EdgeTag, Mesh};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Fraction of the grid spacing below which vertices are snapped onto a boundary.
const SNAP_FRACTION: f64 = 0.15;

/// Grid spacing relative to `h` when the region needs clipping; keeps the
/// longest edge (a snapped diagonal) below `1.5 h`.
const CLIPPED_SPACING: f64 = 1.0 / 1.2;

#[derive(Clone, Debug)]
pub(crate) enum Shape<T> {
    /// Inside when `normal . p - offset <= 0`; `normal` has unit length.
    HalfPlane { normal: Point<T>, offset: T },
    Disc { center: Point<T>, radius: T },
    /// Inside when `y <= a x^2 + b x + c`.
    BelowParabola { a: T, b: T, c: T },
    /// Inside (or outside, when `inside == false`) a simple polygon.
    Polygon { vertices: Vec<Point<T>>, inside: bool },
}

#[derive(Clone, Debug)]
pub(crate) struct Constraint<T> {
    pub shape: Shape<T>,
    pub tag: EdgeTag,
}

fn point_in_polygon<T: Scalar>(p: Point<T>, poly: &[Point<T>]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn nearest_on_segment<T: Scalar>(p: Point<T>, a: Point<T>, b: Point<T>) -> Point<T> {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > T::zero() {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2)
            .max(T::zero())
            .min(T::one())
    } else {
        T::zero()
    };
    [a[0] + t * d[0], a[1] + t * d[1]]
}

impl<T: Scalar> Shape<T> {
    fn half_plane(normal: Point<T>, through: Point<T>) -> Self {
        let len = (normal[0] * normal[0] + normal[1] * normal[1]).sqrt();
        let n = [normal[0] / len, normal[1] / len];
        Shape::HalfPlane {
            normal: n,
            offset: n[0] * through[0] + n[1] * through[1],
        }
    }

    /// Approximate signed distance, negative inside.
    pub fn phi(&self, p: Point<T>) -> T {
        match self {
            Shape::HalfPlane { normal, offset } => normal[0] * p[0] + normal[1] * p[1] - *offset,
            Shape::Disc { center, radius } => {
                ((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2)).sqrt() - *radius
            }
            Shape::BelowParabola { a, b, c } => {
                let f = *a * p[0] * p[0] + *b * p[0] + *c;
                let df = T::of(2.0) * *a * p[0] + *b;
                (p[1] - f) / (T::one() + df * df).sqrt()
            }
            Shape::Polygon { vertices, inside } => {
                let n = vertices.len();
                let d = (0..n)
                    .map(|i| point_segment_distance(p, vertices[i], vertices[(i + 1) % n]))
                    .fold(T::infinity(), T::min);
                let signed = if point_in_polygon(p, vertices) { -d } else { d };
                if *inside {
                    signed
                } else {
                    -signed
                }
            }
        }
    }

    /// Nearest point of the zero set.
    pub fn project(&self, p: Point<T>) -> Point<T> {
        match self {
            Shape::HalfPlane { normal, .. } => {
                let f = self.phi(p);
                [p[0] - f * normal[0], p[1] - f * normal[1]]
            }
            Shape::Disc { center, radius } => {
                let d = [p[0] - center[0], p[1] - center[1]];
                let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
                if r > T::zero() {
                    [center[0] + *radius * d[0] / r, center[1] + *radius * d[1] / r]
                } else {
                    [center[0] + *radius, center[1]]
                }
            }
            Shape::BelowParabola { a, b, c } => {
                // Newton on the foot-point condition (t - px) + (f(t) - py) f'(t) = 0
                let two = T::of(2.0);
                let mut t = p[0];
                for _ in 0..50 {
                    let f = *a * t * t + *b * t + *c;
                    let df = two * *a * t + *b;
                    let g = (t - p[0]) + (f - p[1]) * df;
                    let dg = T::one() + df * df + (f - p[1]) * two * *a;
                    let step = if dg > T::zero() { g / dg } else { g };
                    t -= step;
                    if step.abs() <= T::epsilon() * (T::one() + t.abs()) {
                        break;
                    }
                }
                [t, *a * t * t + *b * t + *c]
            }
            Shape::Polygon { vertices, .. } => {
                let n = vertices.len();
                let mut best = vertices[0];
                let mut best_d = T::infinity();
                for i in 0..n {
                    let q = nearest_on_segment(p, vertices[i], vertices[(i + 1) % n]);
                    let d = (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2);
                    if d < best_d {
                        best_d = d;
                        best = q;
                    }
                }
                best
            }
        }
    }

    /// Axis-aligned half-plane as `(axis, sign, offset)` meaning
    /// `sign * p[axis] <= offset` up to rounding.
    fn axis_aligned(&self) -> Option<(usize, T, T)> {
        if let Shape::HalfPlane { normal, offset } = self {
            let tol = T::of(1e-12);
            if normal[1].abs() < tol {
                return Some((0, normal[0].signum(), *offset));
            }
            if normal[0].abs() < tol {
                return Some((1, normal[1].signum(), *offset));
            }
        }
        None
    }
}

/// Constraints whose intersection is the truncated container.
pub(crate) fn region_constraints<T: Scalar>(spec: &DomainSpec<T>) -> Vec<Constraint<T>> {
    let neumann = EdgeTag::NeumannPhysical;
    let mut out = Vec::new();
    let mut push = |shape: Shape<T>, tag: EdgeTag| out.push(Constraint { shape, tag });
    let zero = T::zero();
    let one = T::one();
    match &spec.kind {
        ContainerKind::Strip { width } => {
            push(Shape::half_plane([zero, -one], [zero, zero]), neumann);
            push(Shape::half_plane([zero, one], [zero, *width]), neumann);
        }
        ContainerKind::HalfPlane => push(Shape::half_plane([zero, -one], [zero, zero]), neumann),
        ContainerKind::Sector { alpha } => {
            let (s, c) = alpha.sin_cos();
            // upper ray at angle alpha, lower ray at -alpha
            push(Shape::half_plane([-s, c], [zero, zero]), neumann);
            push(Shape::half_plane([-s, -c], [zero, zero]), neumann);
        }
        ContainerKind::Polygon { vertices } => {
            if is_convex_ccw(vertices) {
                let n = vertices.len();
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    // outward normal of a counterclockwise edge
                    push(Shape::half_plane([b[1] - a[1], a[0] - b[0]], a), neumann);
                }
            } else {
                push(
                    Shape::Polygon {
                        vertices: vertices.clone(),
                        inside: true,
                    },
                    neumann,
                );
            }
        }
        ContainerKind::ExteriorConvex { obstacle } => match obstacle {
            Obstacle::Parabola { a, b, c } => push(
                Shape::BelowParabola {
                    a: *a,
                    b: *b,
                    c: *c,
                },
                neumann,
            ),
            Obstacle::Polygon { vertices } => push(
                Shape::Polygon {
                    vertices: vertices.clone(),
                    inside: false,
                },
                neumann,
            ),
        },
        ContainerKind::ConvexEpigraph { profile } => {
            for w in profile.windows(2) {
                let slope = (w[1][1] - w[0][1]) / (w[1][0] - w[0][0]);
                push(Shape::half_plane([slope, -one], w[0]), neumann);
            }
        }
    }
    let artificial = EdgeTag::ArtificialTruncation;
    match &spec.truncation {
        Truncation::None => {}
        Truncation::Box { min, max } => {
            push(Shape::half_plane([-one, zero], *min), artificial);
            push(Shape::half_plane([one, zero], *max), artificial);
            push(Shape::half_plane([zero, -one], *min), artificial);
            push(Shape::half_plane([zero, one], *max), artificial);
        }
        Truncation::Disc { center, radius } => push(
            Shape::Disc {
                center: *center,
                radius: *radius,
            },
            artificial,
        ),
    }
    out
}

fn region_bbox<T: Scalar>(
    spec: &DomainSpec<T>,
    constraints: &[Constraint<T>],
) -> Result<(Point<T>, Point<T>)> {
    let inf = T::infinity();
    let (mut lo, mut hi) = spec
        .truncation
        .bounding_box()
        .unwrap_or(([-inf, -inf], [inf, inf]));
    let mut clamp_to = |plo: Point<T>, phi: Point<T>| {
        for k in 0..2 {
            lo[k] = lo[k].max(plo[k]);
            hi[k] = hi[k].min(phi[k]);
        }
    };
    match &spec.kind {
        ContainerKind::Polygon { vertices } => {
            let mut plo = [inf, inf];
            let mut phi = [-inf, -inf];
            for v in vertices {
                for k in 0..2 {
                    plo[k] = plo[k].min(v[k]);
                    phi[k] = phi[k].max(v[k]);
                }
            }
            clamp_to(plo, phi);
        }
        ContainerKind::Sector { .. } => clamp_to([T::zero(), -inf], [inf, inf]),
        _ => {}
    }
    for c in constraints {
        if let Some((axis, sign, offset)) = c.shape.axis_aligned() {
            if sign > T::zero() {
                hi[axis] = hi[axis].min(offset);
            } else {
                lo[axis] = lo[axis].max(-offset);
            }
        }
    }
    if !(lo[0].is_finite() && lo[1].is_finite() && hi[0].is_finite() && hi[1].is_finite()) {
        return Err(Error::geometry("truncated container is unbounded"));
    }
    if !(hi[0] > lo[0] && hi[1] > lo[1]) {
        return Err(Error::geometry(
            "truncation does not intersect the container with positive area",
        ));
    }
    Ok((lo, hi))
}

struct Workspace<T> {
    pos: Vec<Point<T>>,
    on: Vec<Vec<u32>>,
    tris: Vec<[usize; 3]>,
}

fn tri_area<T: Scalar>(p: Point<T>, q: Point<T>, r: Point<T>) -> T {
    ((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])) * T::of(0.5)
}

impl<T: Scalar> Workspace<T> {
    fn grid(lo: Point<T>, hi: Point<T>, spacing: T) -> Self {
        let nx = ((hi[0] - lo[0]) / spacing).ceil().to_usize().unwrap_or(1).max(1);
        let ny = ((hi[1] - lo[1]) / spacing).ceil().to_usize().unwrap_or(1).max(1);
        let coord = |a: T, b: T, i: usize, n: usize| {
            if i == n {
                b
            } else {
                a + (b - a) * T::of_usize(i) / T::of_usize(n)
            }
        };
        let mut pos = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                pos.push([coord(lo[0], hi[0], i, nx), coord(lo[1], hi[1], j, ny)]);
            }
        }
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut tris = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let (v00, v10, v11, v01) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                if (i + j) % 2 == 0 {
                    tris.push([v00, v10, v11]);
                    tris.push([v00, v11, v01]);
                } else {
                    tris.push([v00, v10, v01]);
                    tris.push([v10, v11, v01]);
                }
            }
        }
        let on = vec![Vec::new(); pos.len()];
        Workspace { pos, on, tris }
    }

    fn mark(&mut self, v: usize, k: u32) {
        if !self.on[v].contains(&k) {
            self.on[v].push(k);
        }
    }

    fn snap(&mut self, k: u32, shape: &Shape<T>, radius: T, min_area: T) {
        let mut incident = vec![Vec::new(); self.pos.len()];
        for (c, t) in self.tris.iter().enumerate() {
            for &v in t {
                incident[v].push(c);
            }
        }
        for v in 0..self.pos.len() {
            if incident[v].is_empty() || !self.on[v].is_empty() {
                continue;
            }
            let f = shape.phi(self.pos[v]);
            if f.abs() >= radius || f == T::zero() {
                continue;
            }
            let old = self.pos[v];
            let new = shape.project(old);
            self.pos[v] = new;
            let ok = incident[v].iter().all(|&c| {
                let [a, b, d] = self.tris[c];
                tri_area(self.pos[a], self.pos[b], self.pos[d]) > min_area
            });
            if ok {
                self.mark(v, k);
            } else {
                self.pos[v] = old;
            }
        }
    }

    fn clip(&mut self, k: u32, shape: &Shape<T>, eps: T, min_area: T) {
        let phi: Vec<T> = self.pos.iter().map(|&p| shape.phi(p)).collect();
        for v in 0..self.pos.len() {
            if phi[v].abs() <= eps {
                self.mark(v, k);
            }
        }
        let side = |v: usize| -> i8 {
            if phi[v] < -eps {
                -1
            } else if phi[v] > eps {
                1
            } else {
                0
            }
        };
        let mut cuts: HashMap<(usize, usize), usize> = HashMap::new();
        let mut out = Vec::with_capacity(self.tris.len());
        let tris = std::mem::take(&mut self.tris);
        for tri in tris {
            let s = [side(tri[0]), side(tri[1]), side(tri[2])];
            if s.iter().all(|&x| x <= 0) {
                out.push(tri);
                continue;
            }
            if s.iter().all(|&x| x >= 0) {
                continue;
            }
            let mut poly: Vec<usize> = Vec::with_capacity(4);
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                let (sa, sb) = (s[e], s[(e + 1) % 3]);
                if sa <= 0 {
                    poly.push(a);
                }
                if sa * sb < 0 {
                    let key = if a < b { (a, b) } else { (b, a) };
                    let idx = match cuts.get(&key) {
                        Some(&i) => i,
                        None => {
                            let t = phi[a] / (phi[a] - phi[b]);
                            let pa = self.pos[a];
                            let pb = self.pos[b];
                            let p = [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])];
                            let p = shape.project(p);
                            self.pos.push(p);
                            self.on.push(vec![k]);
                            let i = self.pos.len() - 1;
                            cuts.insert(key, i);
                            i
                        }
                    };
                    poly.push(idx);
                }
            }
            let mut push = |a: usize, b: usize, c: usize| {
                if tri_area(self.pos[a], self.pos[b], self.pos[c]) > min_area {
                    out.push([a, b, c]);
                }
            };
            match poly.len() {
                3 => push(poly[0], poly[1], poly[2]),
                4 => {
                    let d02 = dist2(self.pos[poly[0]], self.pos[poly[2]]);
                    let d13 = dist2(self.pos[poly[1]], self.pos[poly[3]]);
                    if d02 <= d13 {
                        push(poly[0], poly[1], poly[2]);
                        push(poly[0], poly[2], poly[3]);
                    } else {
                        push(poly[0], poly[1], poly[3]);
                        push(poly[1], poly[2], poly[3]);
                    }
                }
                _ => {}
            }
        }
        self.tris = out;
    }
}

fn dist2<T: Scalar>(p: Point<T>, q: Point<T>) -> T {
    (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)
}

/// Builds a deterministic tagged triangulation of the truncated container.
///
/// Edges on the container boundary are tagged [`EdgeTag::NeumannPhysical`];
/// edges produced by the truncation are [`EdgeTag::ArtificialTruncation`].
/// When a boundary edge lies on both, the physical tag wins.
pub fn build_mesh<T: Scalar>(spec: &DomainSpec<T>, h: T) -> Result<Mesh<T>> {
    if !(h > T::zero()) {
        return Err(Error::validation("mesh size h must be positive"));
    }
    spec.validate()?;
    let constraints = region_constraints(spec);
    let (lo, hi) = region_bbox(spec, &constraints)?;
    let aligned = constraints.iter().all(|c| c.shape.axis_aligned().is_some());
    let spacing = if aligned { h } else { h * T::of(CLIPPED_SPACING) };
    let mut ws = Workspace::grid(lo, hi, spacing);

    let eps = T::of(1e-10) * spacing;
    let min_area = T::of(1e-10) * spacing * spacing;
    for (k, c) in constraints.iter().enumerate() {
        let k = k as u32;
        if c.shape.axis_aligned().is_none() {
            ws.snap(k, &c.shape, T::of(SNAP_FRACTION) * spacing, min_area);
        }
        ws.clip(k, &c.shape, eps, min_area);
        if ws.tris.is_empty() {
            return Err(Error::geometry(
                "truncation does not intersect the container with positive area",
            ));
        }
    }
    // Corner points created by a later clip may lie on an earlier boundary.
    for (k, c) in constraints.iter().enumerate() {
        for v in 0..ws.pos.len() {
            if c.shape.phi(ws.pos[v]).abs() <= T::of(1e-8) * spacing {
                ws.mark(v, k as u32);
            }
        }
    }

    // compact
    let mut remap = vec![usize::MAX; ws.pos.len()];
    let mut vertices = Vec::new();
    let mut on = Vec::new();
    for t in &ws.tris {
        for &v in t {
            if remap[v] == usize::MAX {
                remap[v] = vertices.len();
                vertices.push(ws.pos[v]);
                on.push(ws.on[v].clone());
            }
        }
    }
    let triangles: Vec<[usize; 3]> = ws
        .tris
        .iter()
        .map(|t| [remap[t[0]], remap[t[1]], remap[t[2]]])
        .collect();

    let mut count: HashMap<(usize, usize), usize> = HashMap::new();
    for t in &triangles {
        for e in 0..3 {
            let (a, b) = (t[e], t[(e + 1) % 3]);
            *count.entry(if a < b { (a, b) } else { (b, a) }).or_insert(0) += 1;
        }
    }
    let mut boundary: Vec<(usize, usize)> = count
        .into_iter()
        .filter(|&(_, n)| n == 1)
        .map(|(k, _)| k)
        .collect();
    boundary.sort_unstable();
    let tags: Vec<([usize; 2], EdgeTag)> = boundary
        .into_iter()
        .map(|(a, b)| {
            let common: Vec<u32> = on[a].iter().copied().filter(|k| on[b].contains(k)).collect();
            let pick = |tag: EdgeTag| common.iter().any(|&k| constraints[k as usize].tag == tag);
            let tag = if pick(EdgeTag::NeumannPhysical) {
                EdgeTag::NeumannPhysical
            } else if pick(EdgeTag::ArtificialTruncation) {
                EdgeTag::ArtificialTruncation
            } else {
                let half = T::of(0.5);
                let m = [
                    (vertices[a][0] + vertices[b][0]) * half,
                    (vertices[a][1] + vertices[b][1]) * half,
                ];
                constraints
                    .iter()
                    .map(|c| (c.shape.phi(m).abs(), c.tag))
                    .fold((T::infinity(), EdgeTag::ArtificialTruncation), |acc, x| {
                        if x.0 < acc.0 {
                            x
                        } else {
                            acc
                        }
                    })
                    .1
            };
            ([a, b], tag)
        })
        .collect();
    let mesh = Mesh::from_parts(vertices, triangles, &tags, h)?;
    mesh.check_invariants()?;
    Ok(mesh)
}
