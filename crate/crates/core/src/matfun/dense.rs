use std::ops::{Index, IndexMut};

use ndarray::{Array2, ArrayView2, Axis};

use super::MatfunError;
use crate::scalar::Scalar;

/// Small dense square-or-rectangular matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    data: Array2<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { data: Array2::zeros((rows, cols)) }
    }

    pub fn identity(n: usize) -> Self {
        Self { data: Array2::eye(n) }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut((usize, usize)) -> T) -> Self {
        Self { data: Array2::from_shape_fn((rows, cols), f) }
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |(i, j)| if i == j { diag[i] } else { T::zero() })
    }

    /// Builds from nested rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self, MatfunError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(MatfunError::DimensionMismatch { expected: c, found: bad.len() });
        }
        Ok(Self::from_fn(r, c, |(i, j)| rows[i][j]))
    }

    pub fn from_array(data: Array2<T>) -> Self {
        Self { data }
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn as_array(&self) -> &Array2<T> {
        &self.data
    }

    pub fn view(&self) -> ArrayView2<'_, T> {
        self.data.view()
    }

    pub fn into_array(self) -> Array2<T> {
        self.data
    }

    pub fn matmul(&self, other: &Self) -> Self {
        Self { data: self.data.dot(&other.data) }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let x = ndarray::ArrayView1::from(x);
        self.data.dot(&x).to_vec()
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self { data: self.data.mapv(|v| v * factor) }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { data: &self.data + &other.data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { data: &self.data - &other.data }
    }

    /// `self += alpha * other`
    pub fn add_scaled(&mut self, alpha: T, other: &Self) {
        self.data.scaled_add(alpha, &other.data);
    }

    pub fn add_identity(&mut self, alpha: T) {
        for d in self.data.diag_mut() {
            *d += alpha;
        }
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        self.data
            .axis_iter(Axis(1))
            .map(|col| col.iter().map(|v| v.modulus()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.data
            .axis_iter(Axis(0))
            .map(|row| row.iter().map(|v| v.modulus()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|v| v.modulus_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        self.data.column(j).to_vec()
    }

    pub fn transpose_conj(&self) -> Self {
        Self { data: self.data.t().mapv(|v| v.conj()) }
    }

    pub(crate) fn ensure_square(&self) -> Result<usize, MatfunError> {
        if !self.is_square() {
            return Err(MatfunError::NotSquare { rows: self.rows(), cols: self.cols() });
        }
        if !self.is_finite() {
            return Err(MatfunError::NonFinite);
        }
        Ok(self.rows())
    }

    /// Solves `self * X = rhs` by LU with partial pivoting.
    pub fn solve(&self, rhs: &Self) -> Result<Self, MatfunError> {
        let n = self.ensure_square()?;
        if rhs.rows() != n {
            return Err(MatfunError::DimensionMismatch { expected: n, found: rhs.rows() });
        }
        let mut a = self.data.clone();
        let mut b = rhs.data.clone();
        for k in 0..n {
            let (piv, pmax) = (k..n)
                .map(|i| (i, a[[i, k]].modulus()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax == 0.0 {
                return Err(MatfunError::Singular);
            }
            if piv != k {
                for j in 0..n {
                    a.swap([k, j], [piv, j]);
                }
                for j in 0..b.ncols() {
                    b.swap([k, j], [piv, j]);
                }
            }
            let pivot = a[[k, k]];
            for i in k + 1..n {
                let l = a[[i, k]] / pivot;
                if l == T::zero() {
                    continue;
                }
                a[[i, k]] = l;
                for j in k + 1..n {
                    let akj = a[[k, j]];
                    a[[i, j]] -= l * akj;
                }
                for j in 0..b.ncols() {
                    let bkj = b[[k, j]];
                    b[[i, j]] -= l * bkj;
                }
            }
        }
        for j in 0..b.ncols() {
            for i in (0..n).rev() {
                let mut acc = b[[i, j]];
                for k in i + 1..n {
                    acc -= a[[i, k]] * b[[k, j]];
                }
                b[[i, j]] = acc / a[[i, i]];
            }
        }
        Ok(Self { data: b })
    }
}

impl DenseMatrix<f64> {
    pub fn to_complex(&self) -> DenseMatrix<num_complex::Complex64> {
        DenseMatrix { data: self.data.mapv(|v| num_complex::Complex64::new(v, 0.0)) }
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[[i, j]]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[[i, j]]
    }
}
