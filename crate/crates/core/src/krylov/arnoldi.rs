use super::{KrylovError, LinearOperator};
use crate::matfun::DenseMatrix;
use crate::scalar::{axpy, dot, norm2, Scalar};

/// Relative size of the new direction below which the subspace is treated as invariant.
const BREAKDOWN_RATIO: f64 = 1e-12;

/// Output of [`arnoldi_iom`].
#[derive(Clone, Debug)]
pub struct ArnoldiResult<T> {
    /// `m` basis vectors of unit norm.
    pub basis: Vec<Vec<T>>,
    /// `m x m` upper Hessenberg projection, banded under incomplete orthogonalization.
    pub hessenberg: DenseMatrix<T>,
    /// `h_{m+1,m}`; zero after a happy breakdown.
    pub h_next: f64,
    /// `v_{m+1}`, absent after a happy breakdown.
    pub next: Option<Vec<T>>,
    /// Norm of the seed.
    pub beta: f64,
    /// The basis spans an invariant subspace.
    pub exact: bool,
}

/// Incrementally extendable Arnoldi process with incomplete orthogonalization.
pub(crate) struct ArnoldiProcess<T> {
    pub basis: Vec<Vec<T>>,
    /// Column `j` holds the nonzero entries `h_{i,j}` for `i = lo_j ..= j+1`.
    columns: Vec<(usize, Vec<T>)>,
    pub beta: f64,
    pub exact: bool,
    iom: usize,
    pub applications: usize,
    scratch: Vec<T>,
}

impl<T: Scalar> ArnoldiProcess<T> {
    pub fn new(seed: &[T], iom: usize) -> Result<Self, KrylovError> {
        let beta = norm2(seed);
        if !beta.is_finite() {
            return Err(KrylovError::NumericalBreakdown("seed vector is not finite".into()));
        }
        if beta == 0.0 {
            return Err(KrylovError::DegenerateSeed);
        }
        let v0: Vec<T> = seed.iter().map(|x| x.scale(1.0 / beta)).collect();
        Ok(Self {
            basis: vec![v0],
            columns: Vec::new(),
            beta,
            exact: false,
            iom: iom.max(1),
            applications: 0,
            scratch: vec![T::zero(); seed.len()],
        })
    }

    /// Number of completed Arnoldi steps `m`; `basis` then holds `m + 1` vectors
    /// unless the process broke down.
    pub fn steps(&self) -> usize {
        self.columns.len()
    }

    /// Runs until `steps() == target` or breakdown.
    pub fn extend(&mut self, op: &dyn LinearOperator<T>, target: usize) -> Result<(), KrylovError> {
        while !self.exact && self.columns.len() < target {
            let j = self.columns.len();
            let mut w = std::mem::take(&mut self.scratch);
            w.resize(op.dim(), T::zero());
            op.apply(&self.basis[j], &mut w);
            self.applications += 1;
            let w_norm = norm2(&w);
            if !w_norm.is_finite() {
                return Err(KrylovError::NumericalBreakdown(format!("non-finite operator output at Arnoldi step {j}")));
            }
            // The last vector the space can hold is orthogonalized fully so that
            // exhausting the space is recognised as an invariant subspace.
            let lo = if j + 1 >= w.len() { 0 } else { (j + 1).saturating_sub(self.iom) };
            let mut col = Vec::with_capacity(j + 2 - lo);
            for i in lo..=j {
                let hij = dot(&self.basis[i], &w);
                axpy(-hij, &self.basis[i], &mut w);
                col.push(hij);
            }
            let h = norm2(&w);
            if h <= BREAKDOWN_RATIO * w_norm || h == 0.0 {
                col.push(T::zero());
                self.columns.push((lo, col));
                self.exact = true;
                self.scratch = w;
                break;
            }
            col.push(T::from_f64(h));
            self.columns.push((lo, col));
            let inv = 1.0 / h;
            let next: Vec<T> = w.iter().map(|x| x.scale(inv)).collect();
            self.scratch = w;
            self.basis.push(next);
        }
        Ok(())
    }

    /// `H_m` as a dense `m x m` matrix (leading block when `m < steps()`).
    pub fn hessenberg(&self, m: usize) -> DenseMatrix<T> {
        let mut h = DenseMatrix::zeros(m, m);
        for (j, (lo, col)) in self.columns.iter().take(m).enumerate() {
            for (offset, value) in col.iter().enumerate() {
                let i = lo + offset;
                if i < m {
                    h[(i, j)] = *value;
                }
            }
        }
        h
    }

    /// `h_{m+1,m}` for the leading `m` steps.
    pub fn h_next(&self, m: usize) -> f64 {
        let (_, col) = &self.columns[m - 1];
        col.last().map_or(0.0, |v| v.modulus())
    }

    /// Whether the leading `m` steps span an invariant subspace.
    pub fn exact_at(&self, m: usize) -> bool {
        self.exact && m == self.columns.len()
    }

    /// `V_m y`.
    pub fn combine(&self, y: &[T], out: &mut [T]) {
        out.iter_mut().for_each(|v| *v = T::zero());
        for (vi, &yi) in self.basis.iter().zip(y) {
            axpy(yi, vi, out);
        }
    }
}

/// Arnoldi process orthogonalizing each new vector against the previous
/// `iom_length` basis vectors only.
pub fn arnoldi_iom<T: Scalar>(
    op: &dyn LinearOperator<T>,
    seed: &[T],
    max_dim: usize,
    iom_length: usize,
) -> Result<ArnoldiResult<T>, KrylovError> {
    let n = op.dim();
    if seed.len() != n {
        return Err(KrylovError::DimensionMismatch { expected: n, found: seed.len() });
    }
    if max_dim == 0 || max_dim > n {
        return Err(KrylovError::InvalidTask(format!("max_dim {max_dim} outside 1..={n}")));
    }
    let mut proc = ArnoldiProcess::new(seed, iom_length)?;
    proc.extend(op, max_dim)?;
    let m = proc.steps();
    let exact = proc.exact;
    let h_next = if exact { 0.0 } else { proc.h_next(m) };
    let hessenberg = proc.hessenberg(m);
    let mut basis = proc.basis;
    let next = if exact { None } else { basis.pop() };
    Ok(ArnoldiResult { basis, hessenberg, h_next, next, beta: proc.beta, exact })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::max_modulus;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_dense<T: Scalar>(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix<T> {
        DenseMatrix::from_fn(n, n, |_| T::from_parts(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn random_vec<T: Scalar>(rng: &mut ChaCha8Rng, n: usize) -> Vec<T> {
        (0..n).map(|_| T::from_parts(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
    }

    /// `‖M V_m − V_m H_m − h v_{m+1} e_mᵀ‖` and `‖M V_m‖`, both in the max-column 2-norm.
    fn relation_residual<T: Scalar>(op: &DenseMatrix<T>, res: &ArnoldiResult<T>) -> (f64, f64) {
        let m = res.basis.len();
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for j in 0..m {
            let mut r = op.apply_vec(&res.basis[j]);
            scale = scale.max(norm2(&r));
            for i in 0..m {
                axpy(-res.hessenberg[(i, j)], &res.basis[i], &mut r);
            }
            if j == m - 1 {
                if let Some(next) = &res.next {
                    axpy(T::from_f64(-res.h_next), next, &mut r);
                }
            }
            worst = worst.max(norm2(&r));
        }
        (worst, scale)
    }

    #[test]
    fn scaled_identity_breaks_down_immediately() {
        let op = DenseMatrix::<f64>::identity(5).scaled(2.0);
        let res = arnoldi_iom(&op, &[1.0, -2.0, 0.5, 0.0, 3.0], 4, 2).unwrap();
        assert!(res.exact);
        assert_eq!(res.basis.len(), 1);
        assert_eq!(res.hessenberg.rows(), 1);
        assert!((res.hessenberg[(0, 0)] - 2.0).abs() < 1e-15);
        assert!(res.next.is_none());
    }

    #[test]
    fn zero_seed_is_rejected() {
        let op = DenseMatrix::<f64>::identity(3);
        assert!(matches!(arnoldi_iom(&op, &[0.0; 3], 2, 2), Err(KrylovError::DegenerateSeed)));
    }

    #[test]
    fn full_orthogonalization_gives_orthonormal_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let op: DenseMatrix<f64> = random_dense(&mut rng, 30);
        let seed = random_vec(&mut rng, 30);
        let res = arnoldi_iom(&op, &seed, 20, 30).unwrap();
        // Oracle: classical Gram-Schmidt of the Krylov sequence with reorthogonalization.
        let mut oracle: Vec<Vec<f64>> = Vec::new();
        let mut v = seed.clone();
        for _ in 0..20 {
            for _ in 0..2 {
                for q in &oracle {
                    let c = dot(q, &v);
                    axpy(-c, q, &mut v);
                }
            }
            let nv = norm2(&v);
            v.iter_mut().for_each(|x| *x /= nv);
            oracle.push(v.clone());
            v = op.apply_vec(&v);
        }
        for i in 0..20 {
            for j in 0..20 {
                let g = dot(&res.basis[i], &res.basis[j]);
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((g - expected).abs() < 1e-12, "gram ({i},{j}) = {g}");
            }
            // Same subspace up to sign.
            let overlap = dot(&res.basis[i], &oracle[i]).abs();
            assert!((overlap - 1.0).abs() < 1e-8, "basis {i} overlap {overlap}");
        }
        let (resid, scale) = relation_residual(&op, &res);
        assert!(resid <= 1e-12 * scale);
    }

    #[test]
    fn incomplete_orthogonalization_keeps_relation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let op: DenseMatrix<f64> = random_dense(&mut rng, 30);
        let seed = random_vec(&mut rng, 30);
        let res = arnoldi_iom(&op, &seed, 25, 2).unwrap();
        for (j, v) in res.basis.iter().enumerate() {
            assert!((norm2(v) - 1.0).abs() < 1e-14, "basis {j} not unit");
        }
        // Banded: h_ij = 0 for i < j - 1.
        for j in 0..25usize {
            for i in 0..j.saturating_sub(1) {
                assert_eq!(res.hessenberg[(i, j)], 0.0);
            }
        }
        let (resid, scale) = relation_residual(&op, &res);
        let op_norm = op.norm_fro();
        assert!(resid <= 1e-10 * op_norm, "resid {resid} scale {scale}");
    }

    #[test]
    fn complex_relation_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let op: DenseMatrix<Complex64> = random_dense(&mut rng, 12);
        let seed: Vec<Complex64> = random_vec(&mut rng, 12);
        let res = arnoldi_iom(&op, &seed, 10, 10).unwrap();
        let (resid, scale) = relation_residual(&op, &res);
        assert!(resid <= 1e-12 * scale);
        assert!(max_modulus(&res.basis[3]) <= 1.0);
    }
}
