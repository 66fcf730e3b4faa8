//! Envelope (profile) Cholesky factorization under reverse Cuthill-McKee ordering.

use std::collections::VecDeque;

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Reverse Cuthill-McKee permutation: `perm[new] = old`.
pub fn reverse_cuthill_mckee(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    let bfs_levels = |start: usize, visited: &[bool]| -> (usize, usize) {
        // returns (eccentricity, a last-level vertex of minimum degree)
        let mut level = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        level[start] = 0;
        queue.push_back(start);
        let mut last = start;
        while let Some(v) = queue.pop_front() {
            let better = level[v] > level[last] || (level[v] == level[last] && degree[v] < degree[last]);
            if better {
                last = v;
            }
            for &w in &adj[v] {
                if !visited[w] && level[w] == usize::MAX {
                    level[w] = level[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        (level[last], last)
    };

    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (degree[v], v));
    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        // pseudo-peripheral start
        let mut start = seed;
        let (mut ecc, mut far) = bfs_levels(start, &visited);
        for _ in 0..8 {
            let (e2, f2) = bfs_levels(far, &visited);
            if e2 <= ecc {
                break;
            }
            start = far;
            ecc = e2;
            far = f2;
        }
        let mut queue = VecDeque::new();
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Cholesky factor `P A P^T = L L^T` stored row-wise over each row's envelope.
#[derive(Clone, Debug)]
pub struct EnvelopeCholesky<T> {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<T>,
}

impl<T: Scalar> EnvelopeCholesky<T> {
    /// Factors a symmetric positive definite matrix. Returns a solver error
    /// when a pivot is not safely positive.
    pub fn factor(a: &CsrMatrix<T>) -> Result<Self> {
        let perm = reverse_cuthill_mckee(&a.adjacency());
        Self::factor_with(a, perm)
    }

    pub fn factor_with(a: &CsrMatrix<T>, perm: Vec<usize>) -> Result<Self> {
        let n = a.dim();
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first = vec![0; n];
        for i in 0..n {
            let (cols, _) = a.row(perm[i]);
            first[i] = cols.iter().map(|&j| inv[j]).filter(|&j| j <= i).min().unwrap_or(i);
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + (i - first[i] + 1));
        }
        let mut data = vec![T::zero(); start[n]];
        for i in 0..n {
            let (cols, vals) = a.row(perm[i]);
            for (&j, &v) in cols.iter().zip(vals) {
                let jj = inv[j];
                if jj <= i {
                    data[start[i] + jj - first[i]] = v;
                }
            }
        }
        let tiny = T::epsilon() * T::of(64.0);
        for i in 0..n {
            let fi = first[i];
            let row_i = start[i];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let mut s = data[row_i + j - fi];
                let li = &data[row_i + k0 - fi..row_i + j - fi];
                let lj = &data[start[j] + k0 - fj..start[j] + j - fj];
                for (x, y) in li.iter().zip(lj) {
                    s -= *x * *y;
                }
                let djj = data[start[j + 1] - 1];
                data[row_i + j - fi] = s / djj;
            }
            let diag = data[row_i + i - fi];
            let mut d = diag;
            for x in &data[row_i..row_i + i - fi] {
                d -= *x * *x;
            }
            if !(d > tiny * diag.abs()) || !d.is_finite() {
                return Err(Error::solver(
                    "matrix is not positive definite",
                    d.to_f64_lossy(),
                ));
            }
            data[row_i + i - fi] = d.sqrt();
        }
        Ok(EnvelopeCholesky {
            perm,
            first,
            start,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Number of stored factor entries.
    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        let mut y: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let mut s = y[i];
            for (l, v) in row[..i - fi].iter().zip(&y[fi..i]) {
                s -= *l * *v;
            }
            y[i] = s / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let xi = y[i] / row[i - fi];
            y[i] = xi;
            for (l, v) in row[..i - fi].iter().zip(&mut y[fi..i]) {
                *v -= *l * xi;
            }
        }
        let mut x = vec![T::zero(); n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid_laplacian(nx: usize, ny: usize, shift: f64) -> CsrMatrix<f64> {
        let id = |i: usize, j: usize| j * nx + i;
        let n = nx * ny;
        let mut rows = vec![Vec::new(); n];
        for j in 0..ny {
            for i in 0..nx {
                let v = id(i, j);
                rows[v].push(v);
                if i + 1 < nx {
                    rows[v].push(id(i + 1, j));
                    rows[id(i + 1, j)].push(v);
                }
                if j + 1 < ny {
                    rows[v].push(id(i, j + 1));
                    rows[id(i, j + 1)].push(v);
                }
            }
        }
        let mut a = CsrMatrix::with_pattern(&rows);
        for v in 0..n {
            a.add(v, v, 4.0 + shift);
            for &w in &rows[v] {
                if w != v {
                    a.add(v, w, -1.0);
                }
            }
        }
        a
    }

    #[test]
    fn rcm_is_permutation() {
        let a = grid_laplacian(7, 5, 0.0);
        let mut p = reverse_cuthill_mckee(&a.adjacency());
        p.sort_unstable();
        assert_eq!(p, (0..35).collect::<Vec<_>>());
    }

    #[test]
    fn rcm_limits_envelope() {
        let a = grid_laplacian(40, 10, 0.1);
        let f = EnvelopeCholesky::factor(&a).unwrap();
        // bandwidth of the short side, not the long one
        assert!(f.envelope_size() < 400 * 16, "{}", f.envelope_size());
    }

    #[test]
    fn indefinite_rejected() {
        let a = grid_laplacian(4, 4, -3.0);
        assert!(matches!(EnvelopeCholesky::factor(&a), Err(Error::Solver { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn solves_random_systems(nx in 1usize..12, ny in 1usize..12, seed in any::<u64>()) {
            let a = grid_laplacian(nx, ny, 0.05);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..nx * ny).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b = a.mul_vec(&x);
            let f = EnvelopeCholesky::factor(&a).unwrap();
            let y = f.solve(&b);
            for (u, v) in x.iter().zip(&y) {
                prop_assert!((u - v).abs() < 1e-9);
            }
        }
    }
}
