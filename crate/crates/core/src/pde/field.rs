use crate::error::{Error, Result};
use crate::geometry::{Mesh, Point};
use crate::linalg::CsrMatrix;
use crate::scalar::Scalar;

/// One value per mesh vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField<T> {
    values: Vec<T>,
}

impl<T: Scalar> ScalarField<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("scalar field has non-finite values"));
        }
        Ok(ScalarField { values })
    }

    pub(crate) fn from_vec(values: Vec<T>) -> Self {
        ScalarField { values }
    }

    pub fn zeros(n: usize) -> Self {
        ScalarField {
            values: vec![T::zero(); n],
        }
    }

    pub fn constant(n: usize, c: T) -> Self {
        ScalarField { values: vec![c; n] }
    }

    /// Samples `f` at every vertex.
    pub fn from_fn(mesh: &Mesh<T>, f: impl Fn(Point<T>) -> T) -> Self {
        ScalarField {
            values: mesh.vertices().iter().map(|&p| f(p)).collect(),
        }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, a: T) -> Self {
        ScalarField {
            values: self.values.iter().map(|v| *v * a).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        ScalarField {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| *a + *b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(-T::one()))
    }

    /// `sqrt(u^T mass u)`.
    pub fn l2_norm(&self, mass: &CsrMatrix<T>) -> T {
        mass.quad_form(&self.values).max(T::zero()).sqrt()
    }

    /// Average of `u^2` over each cell (exact for linear `u`).
    pub fn cell_mean_squares(&self, mesh: &Mesh<T>) -> Vec<T> {
        let sixth = T::of(1.0 / 6.0);
        mesh.triangles()
            .iter()
            .map(|t| {
                let a = self.values[t[0]];
                let b = self.values[t[1]];
                let c = self.values[t[2]];
                (a * a + b * b + c * c + a * b + b * c + c * a) * sixth
            })
            .collect()
    }

    /// Cell-wise constant gradient.
    pub fn cell_gradients(&self, mesh: &Mesh<T>) -> Vec<Point<T>> {
        let half = T::of(0.5);
        (0..mesh.num_cells())
            .map(|c| {
                let (b, g) = super::assemble::shape_gradients(mesh, c);
                let t = mesh.triangles()[c];
                let two_area = mesh.signed_area(c) / half;
                let mut grad = [T::zero(); 2];
                for i in 0..3 {
                    grad[0] += b[i] * self.values[t[i]];
                    grad[1] += g[i] * self.values[t[i]];
                }
                [grad[0] / two_area, grad[1] / two_area]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::EdgeTag;

    #[test]
    fn gradient_of_linear_function() {
        let mesh = Mesh::from_parts(
            vec![[0.0f64, 0.0], [2.0, 0.0], [0.0, 1.0]],
            vec![[0, 1, 2]],
            &[
                ([0, 1], EdgeTag::NeumannPhysical),
                ([1, 2], EdgeTag::NeumannPhysical),
                ([0, 2], EdgeTag::NeumannPhysical),
            ],
            2.0,
        )
        .unwrap();
        let u = ScalarField::from_fn(&mesh, |p| 3.0 * p[0] - 2.0 * p[1] + 1.0);
        let g = u.cell_gradients(&mesh)[0];
        assert!((g[0] - 3.0).abs() < 1e-14 && (g[1] + 2.0).abs() < 1e-14);
        let c = ScalarField::constant(3, 2.0);
        assert!((c.cell_mean_squares(&mesh)[0] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_nan() {
        assert!(ScalarField::new(vec![0.0, f64::NAN]).is_err());
    }
}
