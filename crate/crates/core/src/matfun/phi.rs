//! φ-functions of dense matrices and scalars.
//!
//! `φ_0 = exp` and `φ_k(z) = ∫_0^1 e^{(1-θ)z} θ^{k-1}/(k-1)! dθ` for `k ≥ 1`.
//!
//! The stack `[φ_0(A), …, φ_q(A)]` is the top block row of `exp(B)` where
//! `B` is the `(q+1)n` block matrix with `A` in the corner and identity blocks
//! on the first superdiagonal. Only that block row is non-trivial, so it is
//! computed directly: a Taylor expansion at `A / 2^s`, then `s` block-row
//! squarings, which in terms of the φ-functions read
//!
//! `φ_k(2X) = 2^{-k} [φ_0(X) φ_k(X) + Σ_{j=1}^{k} φ_j(X) / (k-j)!]`.
//!
//! No division by `A` occurs, so singular and tiny arguments are safe.

use super::{DenseMatrix, MatfunError};
use crate::scalar::Scalar;

/// Largest φ order supported by [`phi_stack`].
pub const MAX_PHI_ORDER: usize = 8;

/// Scaling threshold on the 1-norm of the base-case argument.
const BASE_NORM: f64 = 1.0;
/// Taylor degree used at the base case; `1/21!` is below unit roundoff.
const TAYLOR_DEGREE: usize = 20;

/// `[φ_0(A), …, φ_q(A)]` with `matrices[k] = φ_k(A)`.
#[derive(Clone, Debug)]
pub struct PhiStack<T> {
    pub matrices: Vec<DenseMatrix<T>>,
}

impl<T: Scalar> PhiStack<T> {
    pub fn order(&self) -> usize {
        self.matrices.len() - 1
    }

    pub fn get(&self, k: usize) -> &DenseMatrix<T> {
        &self.matrices[k]
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn scaling_exponent(norm: f64) -> i32 {
    if norm > BASE_NORM {
        (norm / BASE_NORM).log2().ceil() as i32
    } else {
        0
    }
}

/// Computes `φ_0(A) … φ_q(A)`, `0 ≤ q ≤ 8`.
pub fn phi_stack<T: Scalar>(a: &DenseMatrix<T>, q: usize) -> Result<PhiStack<T>, MatfunError> {
    if q > MAX_PHI_ORDER {
        return Err(MatfunError::OrderOutOfRange { q, max: MAX_PHI_ORDER });
    }
    let n = a.ensure_square()?;
    let s = scaling_exponent(a.norm_one());
    let x = a.scaled(T::from_f64(2f64.powi(-s)));

    // φ_q(X) = Σ_i X^i / (i+q)!  (Horner)
    let mut top = DenseMatrix::identity(n).scaled(T::from_f64(1.0 / factorial(TAYLOR_DEGREE + q)));
    for i in (0..TAYLOR_DEGREE).rev() {
        top = x.matmul(&top);
        top.add_identity(T::from_f64(1.0 / factorial(i + q)));
    }
    let mut phis = vec![DenseMatrix::zeros(n, n); q + 1];
    phis[q] = top;
    // φ_k(X) = X φ_{k+1}(X) + I/k!, well conditioned for ‖X‖ ≤ 1.
    for k in (0..q).rev() {
        let mut next = x.matmul(&phis[k + 1]);
        next.add_identity(T::from_f64(1.0 / factorial(k)));
        phis[k] = next;
    }

    for _ in 0..s {
        let mut doubled = Vec::with_capacity(q + 1);
        for k in 0..=q {
            let mut acc = phis[0].matmul(&phis[k]);
            for j in 1..=k {
                acc.add_scaled(T::from_f64(1.0 / factorial(k - j)), &phis[j]);
            }
            doubled.push(acc.scaled(T::from_f64(2f64.powi(-(k as i32)))));
        }
        phis = doubled;
    }
    Ok(PhiStack { matrices: phis })
}

/// Scalar counterpart of [`phi_stack`]: `[φ_0(z), …, φ_q(z)]`.
pub fn phi_scalars<T: Scalar>(z: T, q: usize) -> Vec<T> {
    let s = scaling_exponent(z.modulus());
    let x = z.scale(2f64.powi(-s));
    let mut phis = vec![T::zero(); q + 1];
    let mut top = T::from_f64(1.0 / factorial(TAYLOR_DEGREE + q));
    for i in (0..TAYLOR_DEGREE).rev() {
        top = x * top + T::from_f64(1.0 / factorial(i + q));
    }
    phis[q] = top;
    for k in (0..q).rev() {
        phis[k] = x * phis[k + 1] + T::from_f64(1.0 / factorial(k));
    }
    let mut doubled = vec![T::zero(); q + 1];
    for _ in 0..s {
        for k in 0..=q {
            let mut acc = phis[0] * phis[k];
            for j in 1..=k {
                acc += phis[j].scale(1.0 / factorial(k - j));
            }
            doubled[k] = acc.scale(2f64.powi(-(k as i32)));
        }
        std::mem::swap(&mut phis, &mut doubled);
    }
    phis
}

/// `Σ_{k=0}^{q} φ_k(ρA) ρ^k v_k` evaluated through a dense φ stack.
pub fn phi_combination_dense<T: Scalar>(
    a: &DenseMatrix<T>,
    vectors: &[Vec<T>],
    rho: f64,
) -> Result<Vec<T>, MatfunError> {
    let n = a.ensure_square()?;
    if vectors.is_empty() {
        return Err(MatfunError::EmptyVectorSet);
    }
    if let Some(bad) = vectors.iter().find(|v| v.len() != n) {
        return Err(MatfunError::DimensionMismatch { expected: n, found: bad.len() });
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(MatfunError::InvalidScaling(rho));
    }
    let q = vectors.len() - 1;
    let stack = phi_stack(&a.scaled(T::from_f64(rho)), q)?;
    Ok(combine_with_stack(&stack, vectors, rho))
}

pub(crate) fn combine_with_stack<T: Scalar>(stack: &PhiStack<T>, vectors: &[Vec<T>], rho: f64) -> Vec<T> {
    let n = vectors[0].len();
    let mut out = vec![T::zero(); n];
    for (k, v) in vectors.iter().enumerate() {
        if v.iter().all(|x| *x == T::zero()) {
            continue;
        }
        let w = stack.get(k).matvec(v);
        let factor = rho.powi(k as i32);
        for (o, wi) in out.iter_mut().zip(w) {
            *o += wi.scale(factor);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// φ_k(z) by composite Gauss–Legendre quadrature of the defining integral.
    fn phi_quadrature(k: usize, z: f64) -> f64 {
        if k == 0 {
            return z.exp();
        }
        let nodes = [-0.906_179_845_938_664, -0.538_469_310_105_683, 0.0, 0.538_469_310_105_683, 0.906_179_845_938_664];
        let weights = [0.236_926_885_056_189, 0.478_628_670_499_366, 0.568_888_888_888_889, 0.478_628_670_499_366, 0.236_926_885_056_189];
        let panels = (10.0 * z.abs()).max(200.0) as usize;
        let width = 1.0 / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * width;
            for (x, w) in nodes.iter().zip(&weights) {
                let theta = mid + 0.5 * width * x;
                total += 0.5 * width * w * ((1.0 - theta) * z).exp() * theta.powi(k as i32 - 1) / factorial(k - 1);
            }
        }
        total
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize, norm: f64) -> DenseMatrix<f64> {
        let m = DenseMatrix::from_fn(n, n, |_| rng.gen_range(-1.0..1.0));
        let scale = norm / m.norm_one();
        m.scaled(scale)
    }

    #[test]
    fn zero_matrix_gives_inverse_factorials() {
        let stack = phi_stack(&DenseMatrix::<f64>::zeros(2, 2), 3).unwrap();
        for (k, expected) in [1.0, 1.0, 0.5, 1.0 / 6.0].into_iter().enumerate() {
            let diff = stack.get(k).sub(&DenseMatrix::identity(2).scaled(expected));
            assert!(diff.norm_fro() < 1e-16, "k = {k}");
        }
    }

    #[test]
    fn scalar_values_match_quadrature() {
        let one = phi_stack(&DenseMatrix::from_diagonal(&[1.0]), 1).unwrap();
        assert!((one.get(1)[(0, 0)] - (std::f64::consts::E - 1.0)).abs() < 1e-15);
        assert!((one.get(1)[(0, 0)] - phi_quadrature(1, 1.0)).abs() < 1e-13);

        let two = phi_stack(&DenseMatrix::from_diagonal(&[-2.0]), 2).unwrap();
        let closed = ((-2f64).exp() - 1.0 + 2.0) / 4.0;
        assert!((two.get(2)[(0, 0)] - closed).abs() < 1e-15);
        assert!((two.get(2)[(0, 0)] - phi_quadrature(2, -2.0)).abs() < 1e-13);
        assert!((closed - 0.283_833_8).abs() < 1e-7);
    }

    #[test]
    fn scalars_match_quadrature_across_magnitudes() {
        for z in [-700.0, -45.0, -3.3, -1e-9, 0.0, 1e-7, 0.4, 2.5, 9.0] {
            let phis = phi_scalars(z, 5);
            for (k, value) in phis.iter().enumerate() {
                let oracle = phi_quadrature(k, z);
                assert!((value - oracle).abs() <= 1e-12 * oracle.abs().max(1e-300) + 1e-300,
                    "k={k} z={z} got {value} want {oracle}");
            }
        }
    }

    #[test]
    fn complex_scalars_match_dense_stack() {
        let z = Complex64::new(-3.0, 17.0);
        let s = phi_scalars(z, 4);
        let m = phi_stack(&DenseMatrix::from_diagonal(&[z]), 4).unwrap();
        for k in 0..=4 {
            assert!((s[k] - m.get(k)[(0, 0)]).norm() < 1e-14 * s[k].norm().max(1.0));
        }
    }

    #[test]
    fn order_out_of_range() {
        let a = DenseMatrix::<f64>::identity(2);
        assert!(matches!(phi_stack(&a, 9), Err(MatfunError::OrderOutOfRange { q: 9, .. })));
    }

    #[test]
    fn phi0_agrees_with_expm() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for norm in [0.1, 3.0, 40.0] {
            let a = random_matrix(&mut rng, 7, norm);
            let stack = phi_stack(&a, 2).unwrap();
            let e = super::super::expm(&a).unwrap();
            let probe: Vec<f64> = (0..7).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x = stack.get(0).matvec(&probe);
            let y = e.matvec(&probe);
            let scale = crate::scalar::norm2(&y).max(1.0);
            let diff: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
            assert!(crate::scalar::norm2(&diff) < 1e-12 * scale * norm.max(1.0));
        }
    }

    #[test]
    fn combination_with_only_v0_is_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_matrix(&mut rng, 5, 2.0);
        let v0: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let out = phi_combination_dense(&a, &[v0.clone(), vec![0.0; 5], vec![0.0; 5]], 1.0).unwrap();
        let expected = super::super::expm(&a).unwrap().matvec(&v0);
        for (x, y) in out.iter().zip(&expected) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn combination_at_zero_matrix() {
        let v1 = vec![1.0, 2.0, -3.0];
        let v2 = vec![4.0, 0.0, 2.0];
        let out = phi_combination_dense(&DenseMatrix::zeros(3, 3), &[vec![0.0; 3], v1, v2], 1.0).unwrap();
        assert_eq!(out, vec![3.0, 2.0, -2.0]);
    }

    #[test]
    fn combination_matches_series_oracle() {
        // Independent oracle: truncated series Σ_k ρ^k Σ_i (ρA)^i v_k / (i+k)!
        // with repeated matrix-vector products only.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 8;
        let a = random_matrix(&mut rng, n, 1.0);
        let rho: f64 = 0.5;
        let vectors: Vec<Vec<f64>> =
            (0..4).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let mut oracle = vec![0.0; n];
        for (k, v) in vectors.iter().enumerate() {
            let mut term = v.clone();
            for i in 0..40 {
                let coef = rho.powi(k as i32) / factorial(i + k);
                for (o, t) in oracle.iter_mut().zip(&term) {
                    *o += coef * t;
                }
                term = a.matvec(&term).iter().map(|x| x * rho).collect();
            }
        }
        let out = phi_combination_dense(&a, &vectors, rho).unwrap();
        let err: Vec<f64> = out.iter().zip(&oracle).map(|(x, y)| x - y).collect();
        assert!(crate::scalar::norm2(&err) <= 1e-13 * crate::scalar::norm2(&oracle));
    }

    #[test]
    fn combination_errors() {
        let a = DenseMatrix::<f64>::identity(3);
        assert!(matches!(
            phi_combination_dense(&a, &[vec![0.0; 3], vec![0.0; 2]], 0.5),
            Err(MatfunError::DimensionMismatch { expected: 3, found: 2 })
        ));
        assert!(phi_combination_dense(&a, &[vec![0.0; 3]], 1.5).is_err());
    }

    fn matrix_strategy() -> impl Strategy<Value = (DenseMatrix<f64>, usize)> {
        (2usize..7, 0usize..6, any::<u64>(), 0.0f64..60.0).prop_map(|(n, q, seed, norm)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (random_matrix(&mut rng, n, norm), q)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn recurrence_holds((a, q) in matrix_strategy()) {
            let stack = phi_stack(&a, q).unwrap();
            let n = a.rows();
            for k in 0..q {
                let mut r = a.matmul(stack.get(k + 1));
                r.add_scaled(-1.0, stack.get(k));
                r.add_identity(1.0 / factorial(k));
                let bound = 1e-12 * a.norm_one().max(1.0) * stack.get(k).norm_one().max(1.0);
                prop_assert!(r.norm_one() <= bound, "k={} n={} resid={}", k, n, r.norm_one());
            }
        }

        #[test]
        fn combination_is_linear((a, q) in matrix_strategy(), seed in any::<u64>()) {
            let q = q.max(1);
            let n = a.rows();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let vectors: Vec<Vec<f64>> =
                (0..=q).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            let k = rng.gen_range(0..=q);
            let mut doubled = vectors.clone();
            doubled[k].iter_mut().for_each(|x| *x *= 2.0);
            let mut single = vec![vec![0.0; n]; q + 1];
            single[k] = vectors[k].clone();
            let base = phi_combination_dense(&a, &vectors, 0.7).unwrap();
            let twice = phi_combination_dense(&a, &doubled, 0.7).unwrap();
            let term = phi_combination_dense(&a, &single, 0.7).unwrap();
            let diff: Vec<f64> = twice.iter().zip(&base).zip(&term).map(|((t, b), s)| t - b - s).collect();
            let scale = crate::scalar::norm2(&twice).max(crate::scalar::norm2(&term)).max(1e-300);
            prop_assert!(crate::scalar::norm2(&diff) <= 1e-13 * scale);
        }
    }
}
