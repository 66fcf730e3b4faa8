use crate::error::{Error, Result};
use crate::geometry::{check_len, DensityField, EdgeTag, Mesh};
use crate::linalg::{CsrMatrix, EnvelopeCholesky};
use crate::scalar::Scalar;

/// Linear finite element operators on a mesh.
///
/// Vertices on truncation edges are constrained to zero and excluded from
/// every solve.
#[derive(Clone, Debug)]
pub struct AssembledSystem<T> {
    mesh: Mesh<T>,
    stiffness: CsrMatrix<T>,
    mass: CsrMatrix<T>,
    robin: CsrMatrix<T>,
    robin_k: T,
    constrained: Vec<bool>,
    free: Vec<usize>,
}

/// Gradients of the three barycentric functions times `2 * area`.
pub(crate) fn shape_gradients<T: Scalar>(mesh: &Mesh<T>, c: usize) -> ([T; 3], [T; 3]) {
    let t = mesh.triangles()[c];
    let p = [
        mesh.vertices()[t[0]],
        mesh.vertices()[t[1]],
        mesh.vertices()[t[2]],
    ];
    let mut b = [T::zero(); 3];
    let mut g = [T::zero(); 3];
    for i in 0..3 {
        let j = (i + 1) % 3;
        let k = (i + 2) % 3;
        b[i] = p[j][1] - p[k][1];
        g[i] = p[k][0] - p[j][0];
    }
    (b, g)
}

fn add_local_mass<T: Scalar>(m: &mut CsrMatrix<T>, t: [usize; 3], weight: T) {
    let off = weight / T::of(12.0);
    let diag = off * T::of(2.0);
    for i in 0..3 {
        for j in 0..3 {
            m.add(t[i], t[j], if i == j { diag } else { off });
        }
    }
}

impl<T: Scalar> AssembledSystem<T> {
    pub fn mesh(&self) -> &Mesh<T> {
        &self.mesh
    }

    pub fn stiffness(&self) -> &CsrMatrix<T> {
        &self.stiffness
    }

    pub fn mass(&self) -> &CsrMatrix<T> {
        &self.mass
    }

    /// Boundary operator already multiplied by the Robin coefficient.
    pub fn robin(&self) -> &CsrMatrix<T> {
        &self.robin
    }

    pub fn robin_k(&self) -> T {
        self.robin_k
    }

    /// `true` for vertices eliminated by the truncation condition.
    pub fn constrained(&self) -> &[bool] {
        &self.constrained
    }

    /// Indices of the unconstrained vertices, increasing.
    pub fn free_dofs(&self) -> &[usize] {
        &self.free
    }

    pub fn num_dofs(&self) -> usize {
        self.mesh.num_vertices()
    }

    /// `stiffness + robin + penalty(chi, m)` on all vertices.
    pub fn operator(&self, chi: &DensityField<T>, m: T) -> Result<CsrMatrix<T>> {
        let p = penalty_operator(chi, m, self)?;
        self.stiffness
            .add_scaled(&self.robin, T::one())?
            .add_scaled(&p, T::one())
    }

    /// Factored operator restricted to the free vertices.
    pub fn penalized(&self, chi: &DensityField<T>, m: T) -> Result<PenalizedOperator<T>> {
        let full = self.operator(chi, m)?;
        let a = full.principal_submatrix(&self.free);
        let b = self.mass.principal_submatrix(&self.free);
        Ok(PenalizedOperator {
            a,
            b,
            free: self.free.clone(),
            n: self.num_dofs(),
            m,
        })
    }

    /// Scatters a vector on the free vertices to all vertices.
    pub fn expand(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.num_dofs()];
        for (k, &v) in self.free.iter().enumerate() {
            out[v] = x[k];
        }
        out
    }

    /// Gathers the free-vertex entries.
    pub fn restrict(&self, x: &[T]) -> Vec<T> {
        self.free.iter().map(|&v| x[v]).collect()
    }
}

/// `stiffness + robin + penalty` and `mass` on the free vertices.
#[derive(Clone, Debug)]
pub struct PenalizedOperator<T> {
    pub(crate) a: CsrMatrix<T>,
    pub(crate) b: CsrMatrix<T>,
    pub(crate) free: Vec<usize>,
    pub(crate) n: usize,
    pub(crate) m: T,
}

impl<T: Scalar> PenalizedOperator<T> {
    pub fn a(&self) -> &CsrMatrix<T> {
        &self.a
    }

    pub fn b(&self) -> &CsrMatrix<T> {
        &self.b
    }

    pub fn penalty_m(&self) -> T {
        self.m
    }

    pub fn factor(&self) -> Result<EnvelopeCholesky<T>> {
        EnvelopeCholesky::factor(&self.a)
    }

    pub(crate) fn expand(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.n];
        for (k, &v) in self.free.iter().enumerate() {
            out[v] = x[k];
        }
        out
    }

    pub(crate) fn restrict(&self, x: &[T]) -> Vec<T> {
        self.free.iter().map(|&v| x[v]).collect()
    }
}

/// Assembles stiffness, mass and Robin operators with linear elements.
pub fn assemble<T: Scalar>(mesh: &Mesh<T>, robin_k: T) -> Result<AssembledSystem<T>> {
    if !(robin_k >= T::zero()) || !robin_k.is_finite() {
        return Err(Error::validation("robin coefficient must be finite and nonnegative"));
    }
    let nv = mesh.num_vertices();
    let mut rows: Vec<Vec<usize>> = (0..nv).map(|v| vec![v]).collect();
    for t in mesh.triangles() {
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    rows[t[i]].push(t[j]);
                }
            }
        }
    }
    let mut stiffness = CsrMatrix::with_pattern(&rows);
    let mut mass = stiffness.zeros_like();
    let mut robin = stiffness.zeros_like();

    let min_area = T::of(1e-14) * mesh.h() * mesh.h();
    let quarter = T::of(0.25);
    for (c, &t) in mesh.triangles().iter().enumerate() {
        let area = mesh.signed_area(c);
        if !(area >= min_area) {
            return Err(Error::geometry(format!("degenerate triangle {c}")));
        }
        let (b, g) = shape_gradients(mesh, c);
        for i in 0..3 {
            for j in 0..3 {
                stiffness.add(t[i], t[j], (b[i] * b[j] + g[i] * g[j]) * quarter / area);
            }
        }
        add_local_mass(&mut mass, t, area);
    }

    let mut constrained = vec![false; nv];
    for e in mesh.boundary_edges() {
        match e.tag {
            Some(EdgeTag::NeumannPhysical) if robin_k > T::zero() => {
                let w = robin_k * mesh.edge_length(e) / T::of(6.0);
                let [a, b] = e.v;
                robin.add(a, a, w + w);
                robin.add(b, b, w + w);
                robin.add(a, b, w);
                robin.add(b, a, w);
            }
            Some(EdgeTag::ArtificialTruncation) => {
                constrained[e.v[0]] = true;
                constrained[e.v[1]] = true;
            }
            _ => {}
        }
    }
    let free = (0..nv).filter(|&v| !constrained[v]).collect::<Vec<_>>();
    if free.is_empty() {
        return Err(Error::geometry("every vertex lies on the truncation boundary"));
    }
    Ok(AssembledSystem {
        mesh: mesh.clone(),
        stiffness,
        mass,
        robin,
        robin_k,
        constrained,
        free,
    })
}

/// `M * integral of (1 - chi) u v`, assembled cell by cell.
pub fn penalty_operator<T: Scalar>(
    chi: &DensityField<T>,
    m: T,
    system: &AssembledSystem<T>,
) -> Result<CsrMatrix<T>> {
    if !(m > T::zero()) || !m.is_finite() {
        return Err(Error::validation("penalty coefficient M must be positive"));
    }
    let mesh = &system.mesh;
    check_len(chi, mesh)?;
    let mut p = system.mass.zeros_like();
    for (c, &t) in mesh.triangles().iter().enumerate() {
        let w = T::one() - chi.values()[c];
        if w > T::zero() {
            add_local_mass(&mut p, t, m * w * mesh.signed_area(c));
        }
    }
    Ok(p)
}
