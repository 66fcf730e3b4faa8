use super::assemble::{AssembledSystem, PenalizedOperator};
use super::field::ScalarField;
use crate::error::{Error, Result};
use crate::geometry::{volume, DensityField};
use crate::linalg::{CsrMatrix, EnvelopeCholesky};
use crate::scalar::{axpy, norm2, Scalar};

fn residual_tol<T: Scalar>() -> T {
    T::of(1e-10).max(T::epsilon() * T::of(1e3))
}

/// Solves `a x = rhs` with one step of iterative refinement when needed.
fn solve_checked<T: Scalar>(a: &CsrMatrix<T>, rhs: &[T]) -> Result<Vec<T>> {
    let rn = norm2(rhs);
    if rn == T::zero() {
        return Ok(vec![T::zero(); rhs.len()]);
    }
    let chol = EnvelopeCholesky::factor(a).map_err(|e| match e {
        Error::Solver { best_residual, .. } => {
            Error::solver("penalized operator is singular", best_residual)
        }
        other => other,
    })?;
    let mut x = chol.solve(rhs);
    let mut res = 0.0;
    for _ in 0..3 {
        let mut r = rhs.to_vec();
        axpy(-T::one(), &a.mul_vec(&x), &mut r);
        let rel = norm2(&r) / rn;
        res = rel.to_f64_lossy();
        if rel <= residual_tol() {
            return Ok(x);
        }
        let dx = chol.solve(&r);
        axpy(T::one(), &dx, &mut x);
    }
    Err(Error::solver("linear solve did not reach tolerance", res))
}

fn require_volume<T: Scalar>(system: &AssembledSystem<T>, chi: &DensityField<T>) -> Result<()> {
    if !(volume(chi, system.mesh())? > T::zero()) {
        return Err(Error::validation("density has zero volume"));
    }
    Ok(())
}

pub(crate) fn poisson_of<T: Scalar>(
    op: &PenalizedOperator<T>,
    mass: &CsrMatrix<T>,
    f: &ScalarField<T>,
) -> Result<ScalarField<T>> {
    let rhs = op.restrict(&mass.mul_vec(f.values()));
    let u = solve_checked(&op.a, &rhs)?;
    Ok(ScalarField::from_vec(op.expand(&u)))
}

/// Minimizer of `1/2 <A u, u> - <mass f, u>` with
/// `A = stiffness + robin + penalty(chi, m)`.
pub fn solve_poisson<T: Scalar>(
    system: &AssembledSystem<T>,
    chi: &DensityField<T>,
    m: T,
    f: &ScalarField<T>,
) -> Result<ScalarField<T>> {
    require_volume(system, chi)?;
    if f.len() != system.num_dofs() {
        return Err(Error::validation("right-hand side length differs from vertex count"));
    }
    let op = system.penalized(chi, m)?;
    poisson_of(&op, system.mass(), f)
}

/// Energy function `w` (Poisson solution with unit load) and the Dirichlet
/// energy `E1 = -1/2 integral of w`.
pub fn energy_function<T: Scalar>(
    system: &AssembledSystem<T>,
    chi: &DensityField<T>,
    m: T,
) -> Result<(ScalarField<T>, T)> {
    let one = ScalarField::constant(system.num_dofs(), T::one());
    let w = solve_poisson(system, chi, m, &one)?;
    let e1 = dirichlet_energy(system, &w);
    Ok((w, e1))
}

pub(crate) fn dirichlet_energy<T: Scalar>(system: &AssembledSystem<T>, w: &ScalarField<T>) -> T {
    let ones = vec![T::one(); system.num_dofs()];
    -T::of(0.5) * system.mass().bilinear(&ones, w.values())
}

/// Minimizer of `<A v, v> + m <mass (u - v), u - v>`.
pub fn proximal<T: Scalar>(
    system: &AssembledSystem<T>,
    chi: &DensityField<T>,
    penalty_m: T,
    m: T,
    u: &ScalarField<T>,
) -> Result<ScalarField<T>> {
    if !(m > T::zero()) {
        return Err(Error::validation("proximal parameter m must be positive"));
    }
    if u.len() != system.num_dofs() {
        return Err(Error::validation("field length differs from vertex count"));
    }
    let op = system.penalized(chi, penalty_m)?;
    let a = op.a.add_scaled(&op.b, m)?;
    let mu: Vec<T> = u.values().iter().map(|v| *v * m).collect();
    let rhs = op.restrict(&system.mass().mul_vec(&mu));
    let v = solve_checked(&a, &rhs)?;
    Ok(ScalarField::from_vec(op.expand(&v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, DomainSpec, Mesh, Truncation};
    use crate::pde::assemble;

    fn strip_mesh(h: f64) -> Mesh<f64> {
        let spec = DomainSpec::strip(
            1.0,
            Truncation::Box {
                min: [0.0, 0.0],
                max: [3.0, 1.0],
            },
        )
        .unwrap();
        build_mesh(&spec, h).unwrap()
    }

    #[test]
    fn one_dimensional_profile() {
        // chi fills the truncated strip, so w -> x (3 - x) / 2
        let mesh = strip_mesh(0.125);
        let sys = assemble(&mesh, 0.0).unwrap();
        let chi = DensityField::ones(mesh.num_cells());
        let (w, e1) = energy_function(&sys, &chi, 1.0).unwrap();
        for (p, v) in mesh.vertices().iter().zip(w.values()) {
            let exact = p[0] * (3.0 - p[0]) / 2.0;
            assert!((v - exact).abs() < 2e-3, "{p:?} {v} {exact}");
        }
        assert!((e1 + 27.0 / 24.0).abs() < 0.01);
    }

    #[test]
    fn zero_load_and_linearity() {
        let mesh = strip_mesh(0.25);
        let sys = assemble(&mesh, 0.0).unwrap();
        let n = mesh.num_cells();
        let chi = DensityField::from_indicator((0..n).map(|c| mesh.centroid(c)[0] < 2.0));
        let zero = ScalarField::zeros(mesh.num_vertices());
        let u0 = solve_poisson(&sys, &chi, 1e3, &zero).unwrap();
        assert_eq!(u0.max_abs(), 0.0);
        let f1 = ScalarField::from_fn(&mesh, |p| p[0]);
        let f2 = ScalarField::from_fn(&mesh, |p| p[1] * p[1]);
        let a = solve_poisson(&sys, &chi, 1e3, &f1).unwrap();
        let b = solve_poisson(&sys, &chi, 1e3, &f2).unwrap();
        let ab = solve_poisson(&sys, &chi, 1e3, &f1.add(&f2)).unwrap();
        assert!(ab.sub(&a.add(&b)).max_abs() < 1e-10 * ab.max_abs());
    }

    #[test]
    fn proximal_is_linear() {
        let mesh = strip_mesh(0.25);
        let sys = assemble(&mesh, 0.0).unwrap();
        let chi = DensityField::ones(mesh.num_cells());
        let u = ScalarField::from_fn(&mesh, |p| p[0] * (3.0 - p[0]));
        let a = proximal(&sys, &chi, 1.0, 10.0, &u).unwrap();
        let b = proximal(&sys, &chi, 1.0, 10.0, &u.scaled(2.5)).unwrap();
        assert!(b.sub(&a.scaled(2.5)).max_abs() < 1e-12);
        assert!(proximal(&sys, &chi, 1.0, 0.0, &u).is_err());
    }
}
