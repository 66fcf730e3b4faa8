use super::levels::DistributionFunction;
use crate::error::{Error, Result};
use crate::geometry::{ContainerKind, DomainSpec, Mesh};
use crate::pde::ScalarField;
use crate::scalar::Scalar;

/// Radially decreasing rearrangement about the apex of a sector or the origin
/// of a half-plane: `{u~ > t}` is the part of the container inside the ball
/// about the apex with the same measure as `{u > t}`.
///
/// Ball measures are taken from the mesh itself, so truncation and boundary
/// fitting affect both distributions alike.
pub fn symmetrize_sector<T: Scalar>(
    u: &ScalarField<T>,
    mesh: &Mesh<T>,
    spec: &DomainSpec<T>,
) -> Result<ScalarField<T>> {
    if !matches!(
        spec.kind,
        ContainerKind::Sector { .. } | ContainerKind::HalfPlane
    ) {
        return Err(Error::validation(
            "rearrangement needs a sector or half-plane container",
        ));
    }
    if u.len() != mesh.num_vertices() {
        return Err(Error::validation("field does not match the mesh"));
    }
    if u.values().iter().any(|v| *v < T::zero()) {
        return Err(Error::validation("rearrangement needs a nonnegative field"));
    }
    let radius: Vec<T> = mesh
        .vertices()
        .iter()
        .map(|p| (p[0] * p[0] + p[1] * p[1]).sqrt())
        .collect();
    let neg_r = ScalarField::new(radius.iter().map(|r| -*r).collect())?;
    let balls = DistributionFunction::new(&neg_r, mesh)?;
    let dist = DistributionFunction::new(u, mesh)?;
    let values = radius
        .iter()
        .map(|r| dist.level_for_area(balls.measure(-*r)).max(T::zero()))
        .collect();
    ScalarField::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, Truncation};

    #[test]
    fn radial_field_is_fixed() {
        let spec = DomainSpec::half_plane(Truncation::Box {
            min: [-1.0, 0.0],
            max: [1.0, 1.0],
        })
        .unwrap();
        let mesh = build_mesh(&spec, 0.05f64).unwrap();
        let u = ScalarField::from_fn(&mesh, |p| (0.8 - (p[0] * p[0] + p[1] * p[1]).sqrt()).max(0.0));
        let v = symmetrize_sector(&u, &mesh, &spec).unwrap();
        let err = u.sub(&v).max_abs();
        assert!(err < 2e-2, "{err}");
    }

    #[test]
    fn rejects_strip() {
        let spec = DomainSpec::strip(
            1.0f64,
            Truncation::Box {
                min: [0.0, 0.0],
                max: [1.0, 1.0],
            },
        )
        .unwrap();
        let mesh = build_mesh(&spec, 0.25).unwrap();
        let u = ScalarField::constant(mesh.num_vertices(), 1.0);
        assert!(symmetrize_sector(&u, &mesh, &spec).is_err());
    }
}
