use crate::error::{Error, Result};
use crate::geometry::{volume, DensityField};
use crate::pde::{assemble, energy_function, solve_eigs, solve_poisson, AssembledSystem, ScalarField};
use crate::scalar::Scalar;

/// One inequality or fitted exponent with its slack.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundCheck<T> {
    pub name: String,
    pub lhs: T,
    pub rhs: T,
    /// Positive when the check holds with room to spare.
    pub slack: T,
    pub pass: bool,
}

impl<T: Scalar> BoundCheck<T> {
    fn le(name: &str, lhs: T, rhs: T) -> Self {
        BoundCheck {
            name: name.to_string(),
            lhs,
            rhs,
            slack: rhs - lhs,
            pass: lhs <= rhs,
        }
    }

    /// `|lhs - rhs| <= tol * |rhs|`.
    fn near(name: &str, lhs: T, rhs: T, tol: T) -> Self {
        let slack = tol * rhs.abs() - (lhs - rhs).abs();
        BoundCheck {
            name: name.to_string(),
            lhs,
            rhs,
            slack,
            pass: slack >= T::zero(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundsReport<T> {
    pub checks: Vec<BoundCheck<T>>,
    pub lambda1: T,
    pub volume: T,
    /// `(|Omega|, 1 / lambda_1)` over the scale family.
    pub scale_samples: Vec<(T, T)>,
    /// `(|Omega|, ||u_f||_inf / ||f||_p)` over the scale family.
    pub load_samples: Vec<(T, T)>,
}

impl<T: Scalar> BoundsReport<T> {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Scales of the family used for the exponent fits.
pub const SCALES: [f64; 3] = [0.5, 1.0, 2.0];
/// Relative tolerance of the fitted exponents.
pub const EXPONENT_TOL: f64 = 0.05;

/// Least-squares slope of `log y` against `log x`.
pub fn fit_exponent<T: Scalar>(samples: &[(T, T)]) -> Result<T> {
    if samples.len() < 2 || samples.iter().any(|(x, y)| !(*x > T::zero()) || !(*y > T::zero())) {
        return Err(Error::validation("exponent fit needs two or more positive samples"));
    }
    let n = T::of_usize(samples.len());
    let (sx, sy) = samples
        .iter()
        .fold((T::zero(), T::zero()), |(a, b), (x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (mut num, mut den) = (T::zero(), T::zero());
    for (x, y) in samples {
        let dx = x.ln() - mx;
        num += dx * (y.ln() - my);
        den += dx * dx;
    }
    if den == T::zero() {
        return Err(Error::validation("exponent fit needs distinct abscissae"));
    }
    Ok(num / den)
}

fn lp_norm<T: Scalar>(f: &ScalarField<T>, system: &AssembledSystem<T>, p: f64) -> T {
    if p.is_infinite() {
        return f.max_abs();
    }
    let mesh = system.mesh();
    let pp = T::of(p);
    let third = T::of(1.0 / 3.0);
    let mut acc = T::zero();
    for (c, t) in mesh.triangles().iter().enumerate() {
        let mean: T = t.iter().fold(T::zero(), |a, v| a + f.values()[*v].abs().powf(pp)) * third;
        acc += mean * mesh.signed_area(c);
    }
    acc.powf(T::one() / pp)
}

/// Energy-function bounds `<K w, w> <= 4 |Omega| / lambda_1` and
/// `<B w, w> <= 4 |Omega| / lambda_1^2`, plus exponent fits over the scaled
/// copies `s * mesh`, `s` in [`SCALES`], with the penalty scaled by `s^-2`:
/// `1 / lambda_1` against `|Omega|` has exponent 1 in the plane, and with a
/// load `f` the ratio `||u_f||_inf / ||f||_p` has exponent `1 - 1/p`.
pub fn bounds_report<T: Scalar>(
    chi: &DensityField<T>,
    system: &AssembledSystem<T>,
    m: T,
    load: Option<(&ScalarField<T>, f64)>,
) -> Result<BoundsReport<T>> {
    let mesh = system.mesh();
    let vol = volume(chi, mesh)?;
    if !(vol > T::zero()) {
        return Err(Error::validation("bounds need a nonempty drop"));
    }
    if let Some((f, p)) = load {
        if f.len() != mesh.num_vertices() {
            return Err(Error::validation("load does not match the mesh"));
        }
        if !(p >= 1.0) {
            return Err(Error::validation("load exponent p must be at least 1"));
        }
    }
    let lambda1 = solve_eigs(system, chi, m, 1, T::of(1e-9))?.lambda1();
    let (w, _) = energy_function(system, chi, m)?;
    let four = T::of(4.0);
    let mut checks = vec![
        BoundCheck::le(
            "energy_gradient",
            system.stiffness().quad_form(w.values()),
            four * vol / lambda1,
        ),
        BoundCheck::le(
            "energy_l2",
            system.mass().quad_form(w.values()),
            four * vol / (lambda1 * lambda1),
        ),
    ];

    let mut scale_samples = Vec::with_capacity(SCALES.len());
    let mut load_samples = Vec::new();
    for s in SCALES {
        let s = T::of(s);
        let scaled = assemble(&mesh.scaled(s)?, system.robin_k() / s)?;
        let ms = m / (s * s);
        let l = solve_eigs(&scaled, chi, ms, 1, T::of(1e-9))?.lambda1();
        let v = volume(chi, scaled.mesh())?;
        scale_samples.push((v, T::one() / l));
        if let Some((f, p)) = load {
            let u = solve_poisson(&scaled, chi, ms, f)?;
            load_samples.push((v, u.max_abs() / lp_norm(f, &scaled, p)));
        }
    }
    let tol = T::of(EXPONENT_TOL);
    checks.push(BoundCheck::near(
        "eigenvalue_volume_exponent",
        fit_exponent(&scale_samples)?,
        T::one(),
        tol,
    ));
    if let Some((_, p)) = load {
        let expected = T::one() - if p.is_infinite() { T::zero() } else { T::of(1.0 / p) };
        checks.push(BoundCheck::near(
            "load_volume_exponent",
            fit_exponent(&load_samples)?,
            expected,
            tol,
        ));
    }
    Ok(BoundsReport {
        checks,
        lambda1,
        volume: vol,
        scale_samples,
        load_samples,
    })
}
