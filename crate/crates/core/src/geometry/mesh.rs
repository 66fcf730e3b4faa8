use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::domain::Point;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Boundary condition class of a boundary edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeTag {
    /// Lies on the container boundary (Neumann or Robin condition).
    NeumannPhysical,
    /// Produced by clipping an unbounded container (homogeneous Dirichlet).
    ArtificialTruncation,
}

impl EdgeTag {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeTag::NeumannPhysical => "neumann_physical",
            EdgeTag::ArtificialTruncation => "artificial_truncation",
        }
    }
}

/// Unique mesh edge with its incident cells.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshEdge {
    /// Endpoints, smaller index first.
    pub v: [usize; 2],
    pub cells: [usize; 2],
    /// `true` when only `cells[0]` is incident.
    pub boundary: bool,
    pub tag: Option<EdgeTag>,
}

impl MeshEdge {
    pub fn neighbor(&self, cell: usize) -> Option<usize> {
        if self.boundary {
            None
        } else if self.cells[0] == cell {
            Some(self.cells[1])
        } else {
            Some(self.cells[0])
        }
    }
}

/// Conforming triangulation with tagged boundary edges.
///
/// Immutable after construction; every triangle is counterclockwise.
#[derive(Clone, Debug)]
pub struct Mesh<T> {
    vertices: Vec<Point<T>>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<MeshEdge>,
    h: T,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl<T: Scalar> Mesh<T> {
    /// Builds a mesh from raw parts. `boundary_tags` must tag every edge that
    /// belongs to exactly one triangle, and nothing else.
    pub fn from_parts(
        vertices: Vec<Point<T>>,
        triangles: Vec<[usize; 3]>,
        boundary_tags: &[([usize; 2], EdgeTag)],
        h: T,
    ) -> Result<Self> {
        if !(h > T::zero()) {
            return Err(Error::validation("mesh size h must be positive"));
        }
        if triangles.is_empty() {
            return Err(Error::geometry("mesh has no triangles"));
        }
        let nv = vertices.len();
        let mut map: HashMap<(usize, usize), usize> = HashMap::with_capacity(triangles.len() * 2);
        let mut edges: Vec<MeshEdge> = Vec::with_capacity(triangles.len() * 2);
        for (c, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(Error::geometry(format!("triangle {c} references a missing vertex")));
            }
            for k in 0..3 {
                let key = edge_key(tri[k], tri[(k + 1) % 3]);
                match map.get(&key) {
                    None => {
                        map.insert(key, edges.len());
                        edges.push(MeshEdge {
                            v: [key.0, key.1],
                            cells: [c, c],
                            boundary: true,
                            tag: None,
                        });
                    }
                    Some(&e) => {
                        let edge = &mut edges[e];
                        if !edge.boundary {
                            return Err(Error::geometry(format!(
                                "edge ({}, {}) shared by more than two triangles",
                                key.0, key.1
                            )));
                        }
                        edge.cells[1] = c;
                        edge.boundary = false;
                    }
                }
            }
        }
        for (e, tag) in boundary_tags {
            let key = edge_key(e[0], e[1]);
            let idx = map.get(&key).ok_or_else(|| {
                Error::geometry(format!("tagged edge ({}, {}) is not a mesh edge", key.0, key.1))
            })?;
            let edge = &mut edges[*idx];
            if !edge.boundary {
                return Err(Error::geometry(format!(
                    "tagged edge ({}, {}) is interior",
                    key.0, key.1
                )));
            }
            if edge.tag.is_some() {
                return Err(Error::geometry(format!("edge ({}, {}) tagged twice", key.0, key.1)));
            }
            edge.tag = Some(*tag);
        }
        if let Some(e) = edges.iter().find(|e| e.boundary && e.tag.is_none()) {
            return Err(Error::geometry(format!(
                "boundary edge ({}, {}) has no tag",
                e.v[0], e.v[1]
            )));
        }
        let mesh = Mesh {
            vertices,
            triangles,
            edges,
            h,
        };
        let min_area = T::of(1e-14) * h * h;
        for c in 0..mesh.triangles.len() {
            if !(mesh.signed_area(c) > min_area) {
                return Err(Error::geometry(format!("triangle {c} is degenerate or inverted")));
            }
        }
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Point<T>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[MeshEdge] {
        &self.edges
    }

    /// Target edge length the mesh was built for.
    pub fn h(&self) -> T {
        self.h
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.triangles.len()
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = &MeshEdge> {
        self.edges.iter().filter(|e| e.boundary)
    }

    pub fn signed_area(&self, cell: usize) -> T {
        let [a, b, c] = self.triangles[cell];
        let (p, q, r) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        ((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])) * T::of(0.5)
    }

    pub fn cell_areas(&self) -> Vec<T> {
        (0..self.num_cells()).map(|c| self.signed_area(c)).collect()
    }

    pub fn total_area(&self) -> T {
        self.cell_areas().into_iter().sum()
    }

    pub fn centroid(&self, cell: usize) -> Point<T> {
        let [a, b, c] = self.triangles[cell];
        let third = T::one() / T::of(3.0);
        [
            (self.vertices[a][0] + self.vertices[b][0] + self.vertices[c][0]) * third,
            (self.vertices[a][1] + self.vertices[b][1] + self.vertices[c][1]) * third,
        ]
    }

    pub fn edge_length(&self, e: &MeshEdge) -> T {
        let p = self.vertices[e.v[0]];
        let q = self.vertices[e.v[1]];
        ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt()
    }

    pub fn max_edge_length(&self) -> T {
        self.edges
            .iter()
            .map(|e| self.edge_length(e))
            .fold(T::zero(), T::max)
    }

    /// Vertices lying on an edge with the given tag.
    pub fn tagged_vertices(&self, tag: EdgeTag) -> Vec<bool> {
        let mut on = vec![false; self.num_vertices()];
        for e in self.boundary_edges().filter(|e| e.tag == Some(tag)) {
            on[e.v[0]] = true;
            on[e.v[1]] = true;
        }
        on
    }

    /// Copy of the mesh with all coordinates (and `h`) multiplied by `s`.
    pub fn scaled(&self, s: T) -> Result<Self> {
        if !(s > T::zero()) {
            return Err(Error::validation("scale factor must be positive"));
        }
        let mut out = self.clone();
        for p in &mut out.vertices {
            p[0] *= s;
            p[1] *= s;
        }
        out.h *= s;
        Ok(out)
    }

    /// Checks the structural invariants: closed boundary loops, positive
    /// areas and `max edge <= 1.5 h`.
    pub fn check_invariants(&self) -> Result<()> {
        let mut degree = vec![0usize; self.num_vertices()];
        for e in self.boundary_edges() {
            degree[e.v[0]] += 1;
            degree[e.v[1]] += 1;
        }
        if degree.iter().any(|d| d % 2 == 1) {
            return Err(Error::geometry("boundary edges do not form closed loops"));
        }
        let limit = self.h * T::of(1.5);
        if self.max_edge_length() > limit {
            return Err(Error::geometry(format!(
                "max edge length {} exceeds 1.5 h = {}",
                self.max_edge_length(),
                limit
            )));
        }
        Ok(())
    }

    /// Edge-tag table rows `(edge, v0, v1, tag)` for the boundary.
    pub fn edge_tag_rows(&self) -> Vec<(usize, usize, usize, EdgeTag)> {
        self.boundary_edges()
            .enumerate()
            .map(|(i, e)| (i, e.v[0], e.v[1], e.tag.expect("boundary edges are tagged")))
            .collect()
    }

    /// For each vertex, the incident cells.
    pub fn vertex_cells(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_vertices()];
        for (c, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                out[v].push(c);
            }
        }
        out
    }

    /// Cells adjacent to each cell through an edge.
    pub fn cell_neighbors(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_cells()];
        for e in self.edges.iter().filter(|e| !e.boundary) {
            out[e.cells[0]].push(e.cells[1]);
            out[e.cells[1]].push(e.cells[0]);
        }
        out
    }
}

/// Distance from `p` to the segment `[a, b]`.
pub(crate) fn point_segment_distance<T: Scalar>(p: Point<T>, a: Point<T>, b: Point<T>) -> T {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > T::zero() {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2)
            .max(T::zero())
            .min(T::one())
    } else {
        T::zero()
    };
    let q = [a[0] + t * d[0], a[1] + t * d[1]];
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_triangles() -> (Vec<Point<f64>>, Vec<[usize; 3]>) {
        (
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![[0, 1, 2], [0, 2, 3]],
        )
    }

    fn all_neumann() -> Vec<([usize; 2], EdgeTag)> {
        vec![
            ([0, 1], EdgeTag::NeumannPhysical),
            ([1, 2], EdgeTag::NeumannPhysical),
            ([2, 3], EdgeTag::NeumannPhysical),
            ([3, 0], EdgeTag::NeumannPhysical),
        ]
    }

    #[test]
    fn unit_square_topology() {
        let (v, t) = two_triangles();
        let mesh = Mesh::from_parts(v, t, &all_neumann(), 1.0).unwrap();
        assert_eq!(mesh.edges().len(), 5);
        assert_eq!(mesh.boundary_edges().count(), 4);
        assert!((mesh.total_area() - 1.0).abs() < 1e-15);
        mesh.check_invariants().unwrap();
    }

    #[test]
    fn missing_tag_is_rejected() {
        let (v, t) = two_triangles();
        let mut tags = all_neumann();
        tags.pop();
        assert!(Mesh::from_parts(v, t, &tags, 1.0).is_err());
    }

    #[test]
    fn double_tag_is_rejected() {
        let (v, t) = two_triangles();
        let mut tags = all_neumann();
        tags.push(([1, 0], EdgeTag::ArtificialTruncation));
        assert!(Mesh::from_parts(v, t, &tags, 1.0).is_err());
    }

    #[test]
    fn inverted_triangle_is_rejected() {
        let (v, _) = two_triangles();
        let t = vec![[0, 2, 1], [0, 2, 3]];
        assert!(Mesh::from_parts(v, t, &all_neumann(), 1.0).is_err());
    }

    #[test]
    fn scaling_scales_area_quadratically() {
        let (v, t) = two_triangles();
        let mesh = Mesh::from_parts(v, t, &all_neumann(), 1.0).unwrap();
        let big = mesh.scaled(3.0).unwrap();
        assert!((big.total_area() - 9.0).abs() < 1e-12);
        assert_eq!(big.h(), 3.0);
    }
}
