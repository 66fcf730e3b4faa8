use crate::error::{Error, Result};
use crate::geometry::{volume, DensityField};
use crate::pde::{energy_function, solve_eigs, AssembledSystem, ScalarField};
use crate::scalar::Scalar;

/// `||w_A - w_B||_{L^2}` between the energy functions of two drops.
pub fn gamma_distance<T: Scalar>(
    chi_a: &DensityField<T>,
    chi_b: &DensityField<T>,
    system: &AssembledSystem<T>,
    m: T,
) -> Result<T> {
    let (wa, _) = energy_function(system, chi_a, m)?;
    let (wb, _) = energy_function(system, chi_b, m)?;
    Ok(wa.sub(&wb).l2_norm(system.mass()))
}

/// Support of an energy function: cells whose mean value exceeds `eps`.
pub fn support_of<T: Scalar>(w: &ScalarField<T>, system: &AssembledSystem<T>, eps: T) -> DensityField<T> {
    let third = T::of(1.0 / 3.0);
    let v = w.values();
    DensityField::from_indicator(
        system
            .mesh()
            .triangles()
            .iter()
            .map(|t| (v[t[0]] + v[t[1]] + v[t[2]]) * third > eps),
    )
}

/// Tolerances of the sequence verdicts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SequenceOptions<T> {
    /// Number of eigenvalues tracked per term.
    pub k: usize,
    /// Support threshold relative to `||w||_inf`. Under a stiff penalty `w`
    /// on the free boundary is of order `||w||_inf / sqrt(M)`, so the
    /// threshold sits well above that and below the first interior layer.
    pub eps_rel: T,
    /// Absolute slack of the volume verdict.
    pub volume_tol: T,
    /// Relative slack of the eigenvalue verdicts.
    pub lambda_tol: T,
    pub eigen_tol: T,
}

impl<T: Scalar> SequenceOptions<T> {
    pub fn new(k: usize) -> Self {
        SequenceOptions {
            k,
            eps_rel: T::of(1e-3),
            volume_tol: T::zero(),
            lambda_tol: T::of(1e-8),
            eigen_tol: T::of(1e-9),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SequenceTerm<T> {
    pub n: usize,
    pub gamma_distance: T,
    pub eigenvalues: Vec<T>,
    pub volume: T,
}

/// Terms of a sequence of drops compared with its limit.
///
/// The limit is represented by the last term: its energy function `w_limit`
/// and the support `chi_limit = {w_limit > eps_w}`. The limit spectrum is
/// that of the last term; `chi_limit` only measures the limit volume. The lower limits of the
/// sequence are estimated over the tail, the second half of the terms before
/// the last.
#[derive(Clone, Debug)]
pub struct SequenceDiagnostic<T> {
    pub terms: Vec<SequenceTerm<T>>,
    pub w_limit: ScalarField<T>,
    pub chi_limit: DensityField<T>,
    pub eps_w: T,
    pub limit_volume: T,
    pub limit_eigenvalues: Vec<T>,
    /// `|lambda_k(chi_n) - lambda_k(limit)|` is nonincreasing in `n`, per `k`.
    pub continuity: Vec<bool>,
    /// `lambda_k(limit) <= min over the tail of lambda_k(chi_n)`, per `k`.
    pub lambda_semicontinuity: Vec<bool>,
    /// `min over the tail - lambda_k(limit)`, per `k`.
    pub lambda_gap: Vec<T>,
    /// `|limit| <= min over the tail of |chi_n|`.
    pub volume_semicontinuity: bool,
    /// `min over the tail of |chi_n| - |limit|`.
    pub volume_gap: T,
}

/// Energy functions, spectra and semicontinuity verdicts of a sequence.
pub fn weak_gamma_limit<T: Scalar>(
    seq: &[DensityField<T>],
    system: &AssembledSystem<T>,
    m: T,
    opts: &SequenceOptions<T>,
) -> Result<SequenceDiagnostic<T>> {
    if seq.len() < 3 {
        return Err(Error::validation("sequence needs at least three terms"));
    }
    if opts.k == 0 {
        return Err(Error::validation("track at least one eigenvalue"));
    }
    let mesh = system.mesh();
    for chi in seq {
        crate::geometry::check_len(chi, mesh)?;
    }
    let last = seq.len() - 1;
    let (w_limit, _) = energy_function(system, &seq[last], m)?;
    let eps_w = opts.eps_rel * w_limit.max_abs();
    let chi_limit = support_of(&w_limit, system, eps_w);
    let limit_volume = volume(&chi_limit, mesh)?;

    let mut terms = Vec::with_capacity(seq.len());
    for (n, chi) in seq.iter().enumerate() {
        let (w, _) = energy_function(system, chi, m)?;
        let eig = solve_eigs(system, chi, m, opts.k, opts.eigen_tol)?;
        terms.push(SequenceTerm {
            n,
            gamma_distance: w.sub(&w_limit).l2_norm(system.mass()),
            eigenvalues: eig.eigenvalues,
            volume: volume(chi, mesh)?,
        });
    }

    let limit_eigenvalues = terms[last].eigenvalues.clone();
    let tail = &terms[last / 2..last];
    let mut continuity = Vec::with_capacity(opts.k);
    let mut lambda_semicontinuity = Vec::with_capacity(opts.k);
    let mut lambda_gap = Vec::with_capacity(opts.k);
    for k in 0..opts.k {
        let lim = limit_eigenvalues[k];
        let slack = opts.lambda_tol * lim.abs();
        let dev: Vec<T> = terms.iter().map(|t| (t.eigenvalues[k] - lim).abs()).collect();
        continuity.push(dev.windows(2).all(|w| w[1] <= w[0] + slack));
        let tail_min = tail
            .iter()
            .map(|t| t.eigenvalues[k])
            .fold(T::infinity(), T::min);
        lambda_semicontinuity.push(lim <= tail_min + slack);
        lambda_gap.push(tail_min - lim);
    }
    let tail_vol = tail.iter().map(|t| t.volume).fold(T::infinity(), T::min);
    Ok(SequenceDiagnostic {
        terms,
        w_limit,
        chi_limit,
        eps_w,
        limit_volume,
        limit_eigenvalues,
        continuity,
        lambda_semicontinuity,
        lambda_gap,
        volume_semicontinuity: limit_volume <= tail_vol + opts.volume_tol,
        volume_gap: tail_vol - limit_volume,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, DomainSpec, Truncation};
    use crate::pde::assemble;

    fn setup() -> (AssembledSystem<f64>, DensityField<f64>, f64) {
        let spec = DomainSpec::half_plane(Truncation::Box {
            min: [-1.5, 0.0],
            max: [1.5, 1.5],
        })
        .unwrap();
        let h = 1.0 / 16.0;
        let mesh = build_mesh(&spec, h).unwrap();
        let chi = DensityField::from_indicator((0..mesh.num_cells()).map(|c| {
            let p = mesh.centroid(c);
            p[0] * p[0] + p[1] * p[1] < 0.64
        }));
        (assemble(&mesh, 0.0).unwrap(), chi, 1e6 / (h * h))
    }

    #[test]
    fn distance_to_itself_vanishes() {
        let (sys, chi, m) = setup();
        assert!(gamma_distance(&chi, &chi, &sys, m).unwrap() <= 1e-10);
    }

    #[test]
    fn constant_sequence_limit_is_the_drop() {
        let (sys, chi, m) = setup();
        let mesh = sys.mesh();
        let seq = vec![chi.clone(), chi.clone(), chi.clone()];
        let d = weak_gamma_limit(&seq, &sys, m, &SequenceOptions::new(2)).unwrap();
        // vertices all of whose cells lie in the drop
        let mut outside = vec![false; mesh.num_vertices()];
        for (c, t) in mesh.triangles().iter().enumerate() {
            if chi.values()[c] == 0.0 {
                t.iter().for_each(|v| outside[*v] = true);
            }
        }
        for (c, t) in mesh.triangles().iter().enumerate() {
            let (inside, kept) = (chi.values()[c] > 0.0, d.chi_limit.values()[c] > 0.0);
            assert!(!kept || inside, "cell {c} outside the drop");
            if inside && t.iter().any(|v| !outside[*v]) {
                assert!(kept, "cell {c} dropped");
            }
        }
        assert!(d.volume_semicontinuity);
        assert!(d.continuity.iter().all(|b| *b));
        assert!(d.lambda_semicontinuity.iter().all(|b| *b), "{:?}", d.lambda_gap);
        assert!(d.terms.iter().all(|t| t.gamma_distance == 0.0));
    }

    #[test]
    fn short_sequence_rejected() {
        let (sys, chi, m) = setup();
        let seq = vec![chi.clone(), chi];
        assert!(weak_gamma_limit(&seq, &sys, m, &SequenceOptions::new(1)).is_err());
    }
}
