//! Superlevel-set measures and level-line lengths of piecewise linear fields.

use crate::error::{Error, Result};
use crate::geometry::Mesh;
use crate::pde::ScalarField;
use crate::scalar::Scalar;

/// Exact distribution function `t -> |{u > t}|` of a P1 field.
///
/// Between consecutive vertex values the measure is a quadratic in `t`; the
/// quadratics are stored per interval in a local variable to keep nearly
/// flat triangles from spoiling the sums.
#[derive(Clone, Debug)]
pub struct DistributionFunction<T> {
    breaks: Vec<T>,
    /// `mu(breaks[j] + s) = c0 + c1 s + c2 s^2` on interval `j`.
    coeffs: Vec<[T; 3]>,
    total: T,
}

fn sorted3<T: Scalar>(mut v: [T; 3]) -> [T; 3] {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    v
}

impl<T: Scalar> DistributionFunction<T> {
    pub fn new(u: &ScalarField<T>, mesh: &Mesh<T>) -> Result<Self> {
        if u.len() != mesh.num_vertices() {
            return Err(Error::validation("field does not match the mesh"));
        }
        let vals = u.values();
        let mut breaks: Vec<T> = vals.to_vec();
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        breaks.dedup();
        let nb = breaks.len();
        let idx = |t: T| -> usize {
            breaks
                .binary_search_by(|b| b.partial_cmp(&t).unwrap_or(std::cmp::Ordering::Equal))
                .expect("vertex value is a breakpoint")
        };
        let mut coeffs = vec![[T::zero(); 3]; nb];
        // constants on [breaks[0], a) accumulate through a difference array
        let mut const_delta = vec![T::zero(); nb + 1];
        let mut total = T::zero();
        for (cell, tri) in mesh.triangles().iter().enumerate() {
            let area = mesh.signed_area(cell);
            total += area;
            let [a, b, c] = sorted3([vals[tri[0]], vals[tri[1]], vals[tri[2]]]);
            let (ia, ib, ic) = (idx(a), idx(b), idx(c));
            const_delta[0] += area;
            const_delta[ia] -= area;
            // A - A (t - a)^2 / ((b - a)(c - a)) on [a, b)
            if ib > ia {
                let d = (b - a) * (c - a);
                for j in ia..ib {
                    let o = breaks[j] - a;
                    coeffs[j][0] += area - area * o * o / d;
                    coeffs[j][1] -= T::of(2.0) * area * o / d;
                    coeffs[j][2] -= area / d;
                }
            }
            // A (c - t)^2 / ((c - a)(c - b)) on [b, c)
            if ic > ib {
                let d = (c - a) * (c - b);
                for j in ib..ic {
                    let o = c - breaks[j];
                    coeffs[j][0] += area * o * o / d;
                    coeffs[j][1] -= T::of(2.0) * area * o / d;
                    coeffs[j][2] += area / d;
                }
            }
        }
        let mut run = T::zero();
        for j in 0..nb {
            run += const_delta[j];
            coeffs[j][0] += run;
        }
        Ok(DistributionFunction {
            breaks,
            coeffs,
            total,
        })
    }

    /// Smallest and largest vertex values.
    pub fn range(&self) -> (T, T) {
        (self.breaks[0], self.breaks[self.breaks.len() - 1])
    }

    /// Area of the meshed domain.
    pub fn total(&self) -> T {
        self.total
    }

    fn eval_on(&self, j: usize, t: T) -> T {
        let s = t - self.breaks[j];
        let c = self.coeffs[j];
        (c[0] + s * (c[1] + s * c[2])).max(T::zero()).min(self.total)
    }

    /// `|{u > t}|`.
    pub fn measure(&self, t: T) -> T {
        let (lo, hi) = self.range();
        if t < lo {
            return self.total;
        }
        if t >= hi {
            return T::zero();
        }
        let j = self.breaks.partition_point(|b| *b <= t) - 1;
        self.eval_on(j, t)
    }

    /// Level `t` with `|{u > t}| = area`, clamped to the value range.
    pub fn level_for_area(&self, area: T) -> T {
        let (lo, hi) = self.range();
        if area >= self.measure(lo) {
            return lo;
        }
        if area <= T::zero() {
            return hi;
        }
        // first breakpoint whose measure drops to `area` or below
        let k = self.breaks.partition_point(|b| self.measure(*b) > area);
        let (mut a, mut b) = (self.breaks[k - 1], self.breaks[k]);
        let j = k - 1;
        for _ in 0..100 {
            let mid = (a + b) * T::of(0.5);
            if mid <= a || mid >= b {
                break;
            }
            if self.eval_on(j, mid) > area {
                a = mid;
            } else {
                b = mid;
            }
        }
        (a + b) * T::of(0.5)
    }
}

/// Length of the level line `{u = t}` by linear interpolation along edges.
pub fn level_length<T: Scalar>(u: &ScalarField<T>, mesh: &Mesh<T>, t: T) -> T {
    let vals = u.values();
    let pts = mesh.vertices();
    let mut len = T::zero();
    for tri in mesh.triangles() {
        let mut cut = [[T::zero(); 2]; 2];
        let mut n = 0;
        for k in 0..3 {
            let (p, q) = (tri[k], tri[(k + 1) % 3]);
            let (up, uq) = (vals[p], vals[q]);
            if (up > t) != (uq > t) {
                let s = (t - up) / (uq - up);
                if n < 2 {
                    cut[n] = [
                        pts[p][0] + s * (pts[q][0] - pts[p][0]),
                        pts[p][1] + s * (pts[q][1] - pts[p][1]),
                    ];
                }
                n += 1;
            }
        }
        if n == 2 {
            len += ((cut[0][0] - cut[1][0]).powi(2) + (cut[0][1] - cut[1][1]).powi(2)).sqrt();
        }
    }
    len
}

/// Levels `0 = t_0 < ... ` at `nlevels` quantiles of the positive vertex values.
fn quantile_levels<T: Scalar>(u: &ScalarField<T>, nlevels: usize) -> Vec<T> {
    let mut pos: Vec<T> = u.values().iter().copied().filter(|v| *v > T::zero()).collect();
    pos.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mut levels = vec![T::zero()];
    if pos.is_empty() {
        return levels;
    }
    let last = pos.len() - 1;
    for i in 1..=nlevels {
        levels.push(pos[i * last / nlevels]);
    }
    levels.dedup();
    levels
}

/// Co-area lower bound `sum |f'(t)|^{-1} H^1({u = t})^2 dt` for the Dirichlet
/// integral, with `f(t) = |{u > t}|`, over `nlevels` quantile slabs. Each slab
/// contributes `L(t_mid)^2 dt^2 / |df|`.
pub fn coarea_lower_bound<T: Scalar>(u: &ScalarField<T>, mesh: &Mesh<T>, nlevels: usize) -> Result<T> {
    if nlevels < 10 {
        return Err(Error::validation("co-area bound needs at least 10 levels"));
    }
    if u.len() != mesh.num_vertices() {
        return Err(Error::validation("field does not match the mesh"));
    }
    if u.values().iter().any(|v| *v < T::zero()) {
        return Err(Error::validation("co-area bound needs a nonnegative field"));
    }
    let levels = quantile_levels(u, nlevels);
    let lo = u.values().iter().copied().fold(T::infinity(), T::min);
    if levels.len() < 2 || lo == u.max_abs() {
        return Err(Error::validation("field is constant; its level sets are degenerate"));
    }
    let dist = DistributionFunction::new(u, mesh)?;
    let mut sum = T::zero();
    for w in levels.windows(2) {
        let dt = w[1] - w[0];
        let df = dist.measure(w[0]) - dist.measure(w[1]);
        if !(df > T::zero()) {
            continue;
        }
        let l = level_length(u, mesh, (w[0] + w[1]) * T::of(0.5));
        sum += l * l * dt * dt / df;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, DomainSpec, Truncation};

    fn square(h: f64) -> Mesh<f64> {
        let sq = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        build_mesh(&DomainSpec::polygon(sq, Truncation::None).unwrap(), h).unwrap()
    }

    #[test]
    fn linear_field_distribution() {
        let mesh = square(0.125);
        let u = ScalarField::from_fn(&mesh, |p| p[0]);
        let d = DistributionFunction::new(&u, &mesh).unwrap();
        for t in [-0.5, 0.0, 0.13, 0.5, 0.77, 1.0, 2.0] {
            let expected: f64 = (1.0f64 - t).clamp(0.0, 1.0);
            assert!((d.measure(t) - expected).abs() < 1e-12, "t = {t}");
            if t > 0.0 && t < 1.0 {
                assert!((level_length(&u, &mesh, t) - 1.0).abs() < 1e-12);
            }
        }
        assert!((d.level_for_area(0.3) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn quadratic_field_matches_brute_force() {
        let mesh = square(0.1);
        let u = ScalarField::from_fn(&mesh, |p| (p[0] - 0.3).powi(2) + 0.5 * p[1] * p[1]);
        let d = DistributionFunction::new(&u, &mesh).unwrap();
        // per-cell exact area of {u > t} by fine subsampling of each triangle
        let brute = |t: f64| -> f64 {
            let n = 60;
            let mut acc = 0.0;
            for (c, tri) in mesh.triangles().iter().enumerate() {
                let v: Vec<f64> = tri.iter().map(|i| u.values()[*i]).collect();
                let mut hits = 0usize;
                let mut all = 0usize;
                for i in 0..n {
                    for j in 0..(n - i) {
                        let (l1, l2) = ((i as f64 + 1.0 / 3.0) / n as f64, (j as f64 + 1.0 / 3.0) / n as f64);
                        let val = v[0] * (1.0 - l1 - l2) + v[1] * l1 + v[2] * l2;
                        all += 1;
                        if val > t {
                            hits += 1;
                        }
                    }
                }
                acc += mesh.signed_area(c) * hits as f64 / all as f64;
            }
            acc
        };
        for t in [0.05, 0.2, 0.4] {
            assert!((d.measure(t) - brute(t)).abs() < 2e-3, "t = {t}");
        }
    }

    #[test]
    fn level_inverse_roundtrip() {
        let mesh = square(0.1);
        let u = ScalarField::from_fn(&mesh, |p| (p[0] * 3.0).sin() + p[1]);
        let d = DistributionFunction::new(&u, &mesh).unwrap();
        for a in [0.05, 0.3, 0.6, 0.95] {
            let t = d.level_for_area(a);
            assert!((d.measure(t) - a).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_field_rejected() {
        let mesh = square(0.25);
        let u = ScalarField::constant(mesh.num_vertices(), 0.0);
        assert!(coarea_lower_bound(&u, &mesh, 20).is_err());
        let u = ScalarField::constant(mesh.num_vertices(), 2.0);
        assert!(coarea_lower_bound(&u, &mesh, 20).is_err());
        let u = ScalarField::from_fn(&mesh, |p| p[0]);
        assert!(coarea_lower_bound(&u, &mesh, 5).is_err());
    }
}
