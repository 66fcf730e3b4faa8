use super::mesh::{EdgeTag, Mesh};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Per-cell density in `[0, 1]` representing a drop.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityField<T> {
    values: Vec<T>,
}

impl<T: Scalar> DensityField<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if let Some(i) = values
            .iter()
            .position(|v| !(*v >= T::zero() && *v <= T::one()))
        {
            return Err(Error::validation(format!(
                "density value {} at cell {i} outside [0, 1]",
                values[i]
            )));
        }
        Ok(DensityField { values })
    }

    pub fn ones(n: usize) -> Self {
        DensityField {
            values: vec![T::one(); n],
        }
    }

    pub fn zeros(n: usize) -> Self {
        DensityField {
            values: vec![T::zero(); n],
        }
    }

    /// Binary field from a cell predicate.
    pub fn from_indicator(mask: impl IntoIterator<Item = bool>) -> Self {
        DensityField {
            values: mask
                .into_iter()
                .map(|b| if b { T::one() } else { T::zero() })
                .collect(),
        }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_binary(&self) -> bool {
        self.values
            .iter()
            .all(|v| *v == T::zero() || *v == T::one())
    }

    /// `true` for cells with value one.
    pub fn mask(&self) -> Vec<bool> {
        self.values.iter().map(|v| *v == T::one()).collect()
    }

    /// Area of the cells where the two binary fields differ.
    pub fn symmetric_difference(&self, other: &Self, mesh: &Mesh<T>) -> Result<T> {
        check_len(self, mesh)?;
        check_len(other, mesh)?;
        let mut s = T::zero();
        for (c, (a, b)) in self.values.iter().zip(&other.values).enumerate() {
            s += (*a - *b).abs() * mesh.signed_area(c);
        }
        Ok(s)
    }

    /// Pointwise convex combination `a self + (1 - a) other`.
    pub fn blend(&self, other: &Self, a: T) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::validation("density fields differ in length"));
        }
        Self::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| (a * *x + (T::one() - a) * *y).max(T::zero()).min(T::one()))
                .collect(),
        )
    }
}

pub(crate) fn check_len<T: Scalar>(chi: &DensityField<T>, mesh: &Mesh<T>) -> Result<()> {
    if chi.len() != mesh.num_cells() {
        return Err(Error::validation(format!(
            "density has {} values but mesh has {} cells",
            chi.len(),
            mesh.num_cells()
        )));
    }
    Ok(())
}

/// `sum chi * cell_area`.
pub fn volume<T: Scalar>(chi: &DensityField<T>, mesh: &Mesh<T>) -> Result<T> {
    check_len(chi, mesh)?;
    Ok(chi
        .values
        .iter()
        .enumerate()
        .map(|(c, v)| *v * mesh.signed_area(c))
        .sum())
}

/// Length of the interface between `chi = 1` and `chi = 0` cells, plus the
/// truncation edges of `chi = 1` cells. Container boundary edges never count.
pub fn relative_perimeter<T: Scalar>(chi: &DensityField<T>, mesh: &Mesh<T>) -> Result<T> {
    check_len(chi, mesh)?;
    if !chi.is_binary() {
        return Err(Error::validation("relative perimeter needs a binary density"));
    }
    let v = &chi.values;
    let mut p = T::zero();
    for e in mesh.edges() {
        let counts = if e.boundary {
            e.tag == Some(EdgeTag::ArtificialTruncation) && v[e.cells[0]] == T::one()
        } else {
            v[e.cells[0]] != v[e.cells[1]]
        };
        if counts {
            p += mesh.edge_length(e);
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, DomainSpec, Truncation};

    fn unit_square() -> Mesh<f64> {
        let sq = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        build_mesh(&DomainSpec::polygon(sq, Truncation::None).unwrap(), 0.125).unwrap()
    }

    #[test]
    fn volume_basic() {
        let mesh = unit_square();
        let n = mesh.num_cells();
        assert!((volume(&DensityField::ones(n), &mesh).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(volume(&DensityField::zeros(n), &mesh).unwrap(), 0.0);
        let half = DensityField::from_indicator((0..n).map(|c| c < n / 2));
        assert!((volume(&half, &mesh).unwrap() - 0.5).abs() < 1e-14);
        assert!(volume(&DensityField::<f64>::ones(n + 1), &mesh).is_err());
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(DensityField::new(vec![0.0, 1.2]).is_err());
        assert!(DensityField::new(vec![0.0, f64::NAN]).is_err());
        assert!(DensityField::new(vec![0.0, 0.3]).is_ok());
    }

    #[test]
    fn unit_square_in_strip() {
        let spec = DomainSpec::strip(
            1.0f64,
            Truncation::Box {
                min: [-2.0, 0.0],
                max: [3.0, 1.0],
            },
        )
        .unwrap();
        let mesh = build_mesh(&spec, 0.1).unwrap();
        let chi = DensityField::from_indicator((0..mesh.num_cells()).map(|c| {
            let p = mesh.centroid(c);
            p[0] > 0.0 && p[0] < 1.0
        }));
        let p = relative_perimeter(&chi, &mesh).unwrap();
        assert!((p - 2.0).abs() < 1e-12, "perimeter {p}");
    }

    #[test]
    fn full_polygon_has_zero_perimeter() {
        let mesh = unit_square();
        let chi = DensityField::ones(mesh.num_cells());
        assert_eq!(relative_perimeter(&chi, &mesh).unwrap(), 0.0);
        let relaxed = DensityField::new(vec![0.5; mesh.num_cells()]).unwrap();
        assert!(relative_perimeter(&relaxed, &mesh).is_err());
    }

    #[test]
    fn symmetric_difference_of_halves() {
        let mesh = unit_square();
        let n = mesh.num_cells();
        let a = DensityField::from_indicator((0..n).map(|c| mesh.centroid(c)[0] < 0.5));
        let b = DensityField::from_indicator((0..n).map(|c| mesh.centroid(c)[0] >= 0.5));
        assert!((a.symmetric_difference(&b, &mesh).unwrap() - 1.0).abs() < 1e-13);
    }
}
