use std::borrow::Cow;
use std::sync::Arc;

use crate::matfun::DenseMatrix;
use crate::scalar::Scalar;

/// Structure tag used to pick specialised evaluation paths.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Structure {
    General,
    Diagonal,
}

/// A linear map `x -> Mx` on `T^n`.
pub trait LinearOperator<T: Scalar>: Send + Sync {
    fn dim(&self) -> usize;

    /// Writes `M x` into `y`. Both slices have length `dim()`.
    fn apply(&self, x: &[T], y: &mut [T]);

    fn structure(&self) -> Structure {
        Structure::General
    }

    /// Diagonal entries when `structure()` is `Diagonal`.
    fn diagonal(&self) -> Option<Cow<'_, [T]>> {
        None
    }

    /// Approximate floating point operations per `apply`.
    fn cost_hint(&self) -> f64 {
        let n = self.dim() as f64;
        2.0 * n * n
    }

    fn apply_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.dim()];
        self.apply(x, &mut y);
        y
    }

    /// Materialises the operator column by column.
    fn to_dense(&self) -> DenseMatrix<T> {
        let n = self.dim();
        let mut out = DenseMatrix::zeros(n, n);
        let mut e = vec![T::zero(); n];
        let mut col = vec![T::zero(); n];
        for j in 0..n {
            e[j] = T::one();
            self.apply(&e, &mut col);
            for i in 0..n {
                out[(i, j)] = col[i];
            }
            e[j] = T::zero();
        }
        out
    }
}

impl<T: Scalar> LinearOperator<T> for DenseMatrix<T> {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        let xv = ndarray::ArrayView1::from(x);
        let mut yv = ndarray::ArrayViewMut1::from(y);
        ndarray::linalg::general_mat_vec_mul(T::one(), &self.view(), &xv, T::zero(), &mut yv);
    }

    fn to_dense(&self) -> DenseMatrix<T> {
        self.clone()
    }
}

/// `diag(d)`.
#[derive(Clone, Debug)]
pub struct DiagonalOperator<T> {
    diag: Vec<T>,
}

impl<T: Scalar> DiagonalOperator<T> {
    pub fn new(diag: Vec<T>) -> Self {
        Self { diag }
    }

    pub fn entries(&self) -> &[T] {
        &self.diag
    }
}

impl<T: Scalar> LinearOperator<T> for DiagonalOperator<T> {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        for ((yi, xi), di) in y.iter_mut().zip(x).zip(&self.diag) {
            *yi = *di * *xi;
        }
    }

    fn structure(&self) -> Structure {
        Structure::Diagonal
    }

    fn diagonal(&self) -> Option<Cow<'_, [T]>> {
        Some(Cow::Borrowed(&self.diag))
    }

    fn cost_hint(&self) -> f64 {
        self.diag.len() as f64
    }
}

/// Compressed sparse row matrix.
#[derive(Clone, Debug)]
pub struct CsrMatrix<T> {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, T)]) -> Self {
        let mut sorted: Vec<(usize, usize, T)> = triplets.to_vec();
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<T> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            assert!(r < n && c < n, "triplet ({r}, {c}) outside {n}x{n}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            indices.push(c);
            values.push(v);
            indptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..n {
            indptr[r + 1] += indptr[r];
        }
        Self { n, indptr, indices, values }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|r| self.values[self.indptr[r]..self.indptr[r + 1]].iter().map(|v| v.modulus()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl<T: Scalar> LinearOperator<T> for CsrMatrix<T> {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = T::zero();
            for idx in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[idx] * x[self.indices[idx]];
            }
            *yr = acc;
        }
    }

    fn cost_hint(&self) -> f64 {
        2.0 * self.nnz() as f64
    }
}

/// `factor * inner`, used to form `M = hA` without copying `A`.
#[derive(Clone)]
pub struct ScaledOperator<T: Scalar> {
    inner: Arc<dyn LinearOperator<T>>,
    factor: f64,
}

impl<T: Scalar> ScaledOperator<T> {
    pub fn new(inner: Arc<dyn LinearOperator<T>>, factor: f64) -> Self {
        Self { inner, factor }
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }
}

impl<T: Scalar> LinearOperator<T> for ScaledOperator<T> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        self.inner.apply(x, y);
        for v in y.iter_mut() {
            *v = v.scale(self.factor);
        }
    }

    fn structure(&self) -> Structure {
        self.inner.structure()
    }

    fn diagonal(&self) -> Option<Cow<'_, [T]>> {
        let d = self.inner.diagonal()?;
        Some(Cow::Owned(d.iter().map(|v| v.scale(self.factor)).collect()))
    }

    fn cost_hint(&self) -> f64 {
        self.inner.cost_hint() + self.dim() as f64
    }
}
