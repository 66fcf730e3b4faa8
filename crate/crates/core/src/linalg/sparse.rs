use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Compressed sparse row matrix with sorted column indices.
///
/// Symmetric operators store both triangles.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    /// Zero matrix with the sparsity pattern given by `rows` (column lists,
    /// need not be sorted or unique).
    pub fn with_pattern(rows: &[Vec<usize>]) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col = Vec::new();
        row_ptr.push(0);
        for r in rows {
            let mut cols = r.clone();
            cols.sort_unstable();
            cols.dedup();
            col.extend(cols);
            row_ptr.push(col.len());
        }
        let val = vec![T::zero(); col.len()];
        CsrMatrix {
            n,
            row_ptr,
            col,
            val,
        }
    }

    /// Zero matrix sharing the pattern of `self`.
    pub fn zeros_like(&self) -> Self {
        CsrMatrix {
            n: self.n,
            row_ptr: self.row_ptr.clone(),
            col: self.col.clone(),
            val: vec![T::zero(); self.val.len()],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col[r.clone()], &self.val[r])
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let start = self.row_ptr[i];
        self.col[start..self.row_ptr[i + 1]]
            .binary_search(&j)
            .ok()
            .map(|k| start + k)
    }

    /// Adds `v` to entry `(i, j)`; panics if the entry is outside the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        let k = self
            .position(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside sparsity pattern"));
        self.val[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.position(i, j).map_or(T::zero(), |k| self.val[k])
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `y = self * x`.
    pub fn mul_vec_into(&self, x: &[T], y: &mut [T]) {
        for i in 0..self.n {
            let mut s = T::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.val[k] * x[self.col[k]];
            }
            y[i] = s;
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `x^T self y`.
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        let mut s = T::zero();
        for i in 0..self.n {
            let mut r = T::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                r += self.val[k] * y[self.col[k]];
            }
            s += x[i] * r;
        }
        s
    }

    pub fn quad_form(&self, x: &[T]) -> T {
        self.bilinear(x, x)
    }

    pub fn sum_all(&self) -> T {
        self.val.iter().copied().sum()
    }

    pub fn scaled(&self, a: T) -> Self {
        let mut m = self.clone();
        for v in &mut m.val {
            *v *= a;
        }
        m
    }

    /// `self + a * other`; both must share the same pattern.
    pub fn add_scaled(&self, other: &Self, a: T) -> Result<Self> {
        if self.row_ptr != other.row_ptr || self.col != other.col {
            return Err(Error::validation("sparse operators have different patterns"));
        }
        let mut m = self.clone();
        for (v, w) in m.val.iter_mut().zip(&other.val) {
            *v += a * *w;
        }
        Ok(m)
    }

    /// Largest `|a_ij - a_ji|` relative to the largest `|a_ij|`.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        let mut scale = T::zero();
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col[k];
                scale = scale.max(self.val[k].abs());
                worst = worst.max((self.val[k] - self.get(j, i)).abs());
            }
        }
        if scale > T::zero() {
            worst / scale
        } else {
            T::zero()
        }
    }

    pub fn max_abs(&self) -> T {
        self.val.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Principal submatrix on `keep` (indices into `0..n`, increasing).
    pub fn principal_submatrix(&self, keep: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut row_ptr = Vec::with_capacity(keep.len() + 1);
        let mut col = Vec::new();
        let mut val = Vec::new();
        row_ptr.push(0);
        for &i in keep {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = map[self.col[k]];
                if j != usize::MAX {
                    col.push(j);
                    val.push(self.val[k]);
                }
            }
            row_ptr.push(col.len());
        }
        CsrMatrix {
            n: keep.len(),
            row_ptr,
            col,
            val,
        }
    }

    /// Adjacency lists of the off-diagonal pattern.
    pub(crate) fn adjacency(&self) -> Vec<Vec<usize>> {
        (0..self.n)
            .map(|i| {
                self.col[self.row_ptr[i]..self.row_ptr[i + 1]]
                    .iter()
                    .copied()
                    .filter(|&j| j != i)
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> CsrMatrix<f64> {
        let rows: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                let mut r = vec![i];
                if i > 0 {
                    r.push(i - 1);
                }
                if i + 1 < n {
                    r.push(i + 1);
                }
                r
            })
            .collect();
        let mut a = CsrMatrix::with_pattern(&rows);
        for i in 0..n {
            a.add(i, i, 2.0);
            if i + 1 < n {
                a.add(i, i + 1, -1.0);
                a.add(i + 1, i, -1.0);
            }
        }
        a
    }

    #[test]
    fn matvec_and_forms() {
        let a = tridiag(4);
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(a.mul_vec(&x), vec![0.0, 0.0, 0.0, 5.0]);
        assert_eq!(a.quad_form(&x), 20.0);
        assert_eq!(a.asymmetry(), 0.0);
        assert_eq!(a.sum_all(), 2.0);
    }

    #[test]
    fn submatrix_keeps_entries() {
        let a = tridiag(5);
        let s = a.principal_submatrix(&[1, 2, 4]);
        assert_eq!(s.dim(), 3);
        assert_eq!(s.get(0, 1), -1.0);
        assert_eq!(s.get(1, 2), 0.0);
        assert_eq!(s.get(2, 2), 2.0);
    }

    #[test]
    fn add_scaled_requires_same_pattern() {
        let a = tridiag(3);
        let b = a.add_scaled(&a, 2.0).unwrap();
        assert_eq!(b.get(0, 0), 6.0);
        assert!(a.add_scaled(&tridiag(4), 1.0).is_err());
    }
}
