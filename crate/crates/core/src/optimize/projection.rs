use crate::error::{Error, Result};
use crate::geometry::{DensityField, Mesh};
use crate::pde::ScalarField;
use crate::scalar::Scalar;

/// Cell order by decreasing value, ties by increasing index.
fn ranked<T: Scalar>(values: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .partial_cmp(&values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
}

/// Binary density of the cells with the largest values whose total area is
/// the largest prefix not exceeding `c`.
pub fn top_cells<T: Scalar>(values: &[T], mesh: &Mesh<T>, c: T) -> Result<DensityField<T>> {
    if !(c > T::zero()) {
        return Err(Error::validation("target volume must be positive"));
    }
    if values.len() != mesh.num_cells() {
        return Err(Error::validation("cell values do not match the mesh"));
    }
    let total = mesh.total_area();
    let slack = T::one() + T::of(1e-12);
    if c > total * slack {
        return Err(Error::validation(format!(
            "target volume {c} exceeds the meshed area {total}"
        )));
    }
    let limit = c * slack;
    let mut mask = vec![false; values.len()];
    let mut acc = T::zero();
    for cell in ranked(values) {
        let a = mesh.signed_area(cell);
        if acc + a > limit {
            break;
        }
        acc += a;
        mask[cell] = true;
    }
    Ok(DensityField::from_indicator(mask))
}

/// Volume-constrained projection: the cells with largest mean of `u^2`.
pub fn threshold_projection<T: Scalar>(
    u: &ScalarField<T>,
    mesh: &Mesh<T>,
    c: T,
) -> Result<DensityField<T>> {
    if u.len() != mesh.num_vertices() {
        return Err(Error::validation("field does not match the mesh"));
    }
    top_cells(&u.cell_mean_squares(mesh), mesh, c)
}

/// Penalized projection: a cell belongs to the drop iff `M * mean(u^2) >= lambda_pen`.
pub fn penalized_projection<T: Scalar>(
    u: &ScalarField<T>,
    mesh: &Mesh<T>,
    m: T,
    lambda_pen: T,
) -> Result<DensityField<T>> {
    if u.len() != mesh.num_vertices() {
        return Err(Error::validation("field does not match the mesh"));
    }
    Ok(DensityField::from_indicator(
        u.cell_mean_squares(mesh)
            .into_iter()
            .map(|v| m * v >= lambda_pen),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, volume, DomainSpec, Truncation};

    fn square() -> Mesh<f64> {
        let sq = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        build_mesh(&DomainSpec::polygon(sq, Truncation::None).unwrap(), 0.25).unwrap()
    }

    #[test]
    fn picks_top_cells() {
        let mesh = square();
        let n = mesh.num_cells();
        let values: Vec<f64> = (0..n).map(|c| ((c * 7919) % n) as f64).collect();
        let cell = mesh.signed_area(0);
        let chi = top_cells(&values, &mesh, 5.0 * cell).unwrap();
        let mut expected: Vec<usize> = (0..n).collect();
        expected.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap());
        for (rank, &c) in expected.iter().enumerate() {
            assert_eq!(chi.values()[c] == 1.0, rank < 5);
        }
    }

    #[test]
    fn ties_resolved_by_index() {
        let mesh = square();
        let u = ScalarField::constant(mesh.num_vertices(), 1.0);
        let cell = mesh.signed_area(0);
        let chi = threshold_projection(&u, &mesh, 6.0 * cell).unwrap();
        for c in 0..mesh.num_cells() {
            assert_eq!(chi.values()[c] == 1.0, c < 6);
        }
        // a partial cell is never added
        let chi = threshold_projection(&u, &mesh, 6.5 * cell).unwrap();
        assert!((volume(&chi, &mesh).unwrap() - 6.0 * cell).abs() < 1e-15);
    }

    #[test]
    fn full_and_invalid_volumes() {
        let mesh = square();
        let u = ScalarField::from_fn(&mesh, |p| p[0]);
        let chi = threshold_projection(&u, &mesh, 1.0).unwrap();
        assert!(chi.values().iter().all(|v| *v == 1.0));
        assert!(threshold_projection(&u, &mesh, 0.0).is_err());
        assert!(threshold_projection(&u, &mesh, 1.5).is_err());
    }

    #[test]
    fn penalized_rule() {
        let mesh = square();
        let u = ScalarField::from_fn(&mesh, |p| p[0]);
        let chi = penalized_projection(&u, &mesh, 10.0, 5.0).unwrap();
        let means = u.cell_mean_squares(&mesh);
        for (c, m) in means.iter().enumerate() {
            assert_eq!(chi.values()[c] == 1.0, 10.0 * m >= 5.0);
        }
    }
}
