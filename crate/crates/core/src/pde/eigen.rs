//! Smallest eigenpairs of `A u = lambda B u` by shift-invert subspace iteration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::assemble::{AssembledSystem, PenalizedOperator};
use super::field::ScalarField;
use crate::error::{Error, Result};
use crate::geometry::{volume, DensityField};
use crate::linalg::{symmetric_eigen, EnvelopeCholesky};
use crate::scalar::{axpy, dot, norm2, Scalar};

/// Eigensolver settings.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenOptions<T> {
    /// Number of wanted pairs.
    pub k: usize,
    /// Bound on `||A u - lambda B u|| / ||B u||` for every wanted pair.
    pub tol: T,
    pub max_iter: usize,
    /// Seed of the random start block.
    pub seed: u64,
    /// Extra block vectors beyond `k`; more speeds up convergence.
    pub guard: usize,
}

impl<T: Scalar> EigenOptions<T> {
    pub fn new(k: usize) -> Self {
        EigenOptions {
            k,
            tol: T::of(1e-8),
            max_iter: 500,
            seed: 0,
            guard: 6,
        }
    }
}

/// Eigenpairs of the penalized operator on one density.
#[derive(Clone, Debug)]
pub struct SpectralResult<T> {
    /// Ascending.
    pub eigenvalues: Vec<T>,
    /// Mass-orthonormal, zero on constrained vertices.
    pub eigenfunctions: Vec<ScalarField<T>>,
    pub residuals: Vec<T>,
    pub penalty_m: T,
    pub iterations: usize,
}

impl<T: Scalar> SpectralResult<T> {
    pub fn lambda1(&self) -> T {
        self.eigenvalues[0]
    }
}

/// `K` smallest eigenpairs of `(stiffness + robin + penalty) u = lambda mass u`.
pub fn solve_eigs<T: Scalar>(
    system: &AssembledSystem<T>,
    chi: &DensityField<T>,
    m: T,
    k: usize,
    tol: T,
) -> Result<SpectralResult<T>> {
    let opts = EigenOptions {
        tol,
        ..EigenOptions::new(k)
    };
    solve_eigs_with(system, chi, m, &opts, None)
}

/// As [`solve_eigs`] with full options and optional start vectors.
pub fn solve_eigs_with<T: Scalar>(
    system: &AssembledSystem<T>,
    chi: &DensityField<T>,
    m: T,
    opts: &EigenOptions<T>,
    start: Option<&[ScalarField<T>]>,
) -> Result<SpectralResult<T>> {
    if !(volume(chi, system.mesh())? > T::zero()) {
        return Err(Error::validation("density has zero volume"));
    }
    let op = system.penalized(chi, m)?;
    eigs_of(&op, opts, start)
}

fn random_vector<T: Scalar>(rng: &mut ChaCha8Rng, n: usize) -> Vec<T> {
    (0..n).map(|_| T::of(rng.gen_range(-1.0..1.0))).collect()
}

/// B-orthonormalizes `cols` in place (classical Gram-Schmidt applied twice);
/// returns the matching `B * cols`.
fn b_orthonormalize<T: Scalar>(
    cols: &mut [Vec<T>],
    op: &PenalizedOperator<T>,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<T>> {
    let n = op.b.dim();
    let mut bq: Vec<Vec<T>> = Vec::with_capacity(cols.len());
    for j in 0..cols.len() {
        for attempt in 0..4 {
            let before = op.b.quad_form(&cols[j]).max(T::zero()).sqrt();
            for _ in 0..2 {
                for (i, bqi) in bq.iter().enumerate() {
                    let r = dot(bqi, &cols[j]);
                    let (head, tail) = cols.split_at_mut(j);
                    axpy(-r, &head[i], &mut tail[0]);
                }
            }
            let bv = op.b.mul_vec(&cols[j]);
            let nrm = dot(&bv, &cols[j]).max(T::zero()).sqrt();
            if nrm > T::of(1e-10) * before && nrm > T::zero() || attempt == 3 {
                let inv = T::one() / nrm;
                cols[j].iter_mut().for_each(|x| *x *= inv);
                bq.push(bv.into_iter().map(|x| x * inv).collect());
                break;
            }
            cols[j] = random_vector(rng, n);
        }
    }
    bq
}

pub(crate) fn eigs_of<T: Scalar>(
    op: &PenalizedOperator<T>,
    opts: &EigenOptions<T>,
    start: Option<&[ScalarField<T>]>,
) -> Result<SpectralResult<T>> {
    let n = op.a.dim();
    if opts.k == 0 {
        return Err(Error::validation("number of eigenpairs must be at least one"));
    }
    if opts.k > n {
        return Err(Error::validation(format!(
            "requested {} eigenpairs but only {n} free vertices",
            opts.k
        )));
    }
    let p = (opts.k + opts.guard).min(n);

    // shift so that A - sigma B is positive definite
    let trace_ratio = op.a.diagonal().iter().copied().sum::<T>()
        / op.b.diagonal().iter().copied().sum::<T>();
    let mut chol = EnvelopeCholesky::factor(&op.a);
    let mut scale = T::of(1e-4);
    for _ in 0..6 {
        if chol.is_ok() {
            break;
        }
        chol = EnvelopeCholesky::factor(&op.a.add_scaled(&op.b, scale * trace_ratio)?);
        scale *= T::of(10.0);
    }
    let chol = chol?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<Vec<T>> = (0..p).map(|_| random_vector(&mut rng, n)).collect();
    if let Some(s) = start {
        for (col, f) in x.iter_mut().zip(s) {
            *col = op.restrict(f.values());
        }
    }

    let mut best = f64::INFINITY;
    let mut theta = Vec::new();
    let mut residuals = Vec::new();
    for iter in 1..=opts.max_iter {
        let mut y: Vec<Vec<T>> = x.iter().map(|c| chol.solve(&op.b.mul_vec(c))).collect();
        b_orthonormalize(&mut y, op, &mut rng);
        let ay: Vec<Vec<T>> = y.iter().map(|c| op.a.mul_vec(c)).collect();
        let mut h = vec![T::zero(); p * p];
        for i in 0..p {
            for j in i..p {
                let v = dot(&y[i], &ay[j]);
                h[i * p + j] = v;
                h[j * p + i] = v;
            }
        }
        let (vals, s) = symmetric_eigen(&h, p);
        let mut newx = vec![vec![T::zero(); n]; p];
        let mut ax = vec![vec![T::zero(); n]; p];
        for j in 0..p {
            for i in 0..p {
                let sij = s[i * p + j];
                axpy(sij, &y[i], &mut newx[j]);
                axpy(sij, &ay[i], &mut ax[j]);
            }
        }
        residuals.clear();
        for j in 0..opts.k {
            let bx = op.b.mul_vec(&newx[j]);
            let mut r = ax[j].clone();
            axpy(-vals[j], &bx, &mut r);
            residuals.push(norm2(&r) / norm2(&bx));
        }
        x = newx;
        theta = vals;
        let worst = residuals.iter().fold(T::zero(), |m, r| m.max(*r));
        best = best.min(worst.to_f64_lossy());
        if worst <= opts.tol {
            let eigenfunctions = x[..opts.k]
                .iter()
                .map(|c| {
                    // fix the sign: largest entry positive
                    let big = c.iter().fold(T::zero(), |m, v| if v.abs() > m.abs() { *v } else { m });
                    let sgn = if big < T::zero() { -T::one() } else { T::one() };
                    ScalarField::from_vec(op.expand(&c.iter().map(|v| *v * sgn).collect::<Vec<_>>()))
                })
                .collect();
            return Ok(SpectralResult {
                eigenvalues: theta[..opts.k].to_vec(),
                eigenfunctions,
                residuals,
                penalty_m: op.m,
                iterations: iter,
            });
        }
    }
    let _ = theta;
    Err(Error::solver(
        format!("eigensolver did not converge in {} iterations", opts.max_iter),
        best,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, DomainSpec, Truncation};
    use crate::pde::assemble;
    use std::f64::consts::PI;

    fn unit_square(h: f64) -> AssembledSystem<f64> {
        let sq = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let mesh = build_mesh(&DomainSpec::polygon(sq, Truncation::None).unwrap(), h).unwrap();
        assemble(&mesh, 0.0).unwrap()
    }

    #[test]
    fn neumann_square_spectrum() {
        // chi = 1 everywhere: pure Neumann, eigenvalues 0, pi^2, pi^2, 2 pi^2
        let sys = unit_square(1.0 / 16.0);
        let chi = DensityField::ones(sys.mesh().num_cells());
        let res = solve_eigs(&sys, &chi, 1.0, 4, 1e-8).unwrap();
        assert!(res.eigenvalues[0].abs() < 1e-8);
        assert!((res.eigenvalues[1] / (PI * PI) - 1.0).abs() < 0.01);
        assert!((res.eigenvalues[2] / (PI * PI) - 1.0).abs() < 0.01);
        assert!((res.eigenvalues[3] / (2.0 * PI * PI) - 1.0).abs() < 0.02);
        for r in &res.residuals {
            assert!(*r <= 1e-8);
        }
    }

    #[test]
    fn mass_orthonormal_and_deterministic() {
        let sys = unit_square(0.1);
        let n = sys.mesh().num_cells();
        let chi = DensityField::from_indicator((0..n).map(|c| sys.mesh().centroid(c)[0] < 0.6));
        let a = solve_eigs(&sys, &chi, 1e4, 3, 1e-9).unwrap();
        let b = solve_eigs(&sys, &chi, 1e4, 3, 1e-9).unwrap();
        assert_eq!(a.eigenvalues, b.eigenvalues);
        for i in 0..3 {
            for j in 0..3 {
                let g = sys
                    .mass()
                    .bilinear(a.eigenfunctions[i].values(), a.eigenfunctions[j].values());
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-8);
            }
        }
        assert!(a.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn zero_volume_rejected() {
        let sys = unit_square(0.25);
        let chi = DensityField::zeros(sys.mesh().num_cells());
        assert!(matches!(
            solve_eigs(&sys, &chi, 1.0, 1, 1e-8),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn iteration_cap_reports_best_residual() {
        let sys = unit_square(0.1);
        let chi = DensityField::ones(sys.mesh().num_cells());
        let opts = EigenOptions {
            max_iter: 1,
            tol: 1e-300,
            ..EigenOptions::new(2)
        };
        match solve_eigs_with(&sys, &chi, 1.0, &opts, None) {
            Err(Error::Solver { best_residual, .. }) => assert!(best_residual.is_finite()),
            other => panic!("expected solver error, got {other:?}"),
        }
    }

    #[test]
    fn works_in_single_precision() {
        let sq: Vec<[f32; 2]> = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let mesh = build_mesh(&DomainSpec::polygon(sq, Truncation::None).unwrap(), 0.125f32).unwrap();
        let sys = assemble(&mesh, 0.0f32).unwrap();
        let chi = DensityField::ones(mesh.num_cells());
        let res = solve_eigs(&sys, &chi, 1.0f32, 2, 1e-3).unwrap();
        assert!((res.eigenvalues[1] / (std::f32::consts::PI.powi(2)) - 1.0).abs() < 0.03);
    }
}
