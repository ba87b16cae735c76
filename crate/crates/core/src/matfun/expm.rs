//! Matrix exponential by scaling and squaring with diagonal Padé approximants.
//!
//! Degree selection and thresholds follow Higham (2005): the smallest degree
//! in {3, 5, 7, 9, 13} whose backward-error bound `theta_m` covers the 1-norm,
//! otherwise degree 13 after scaling by `2^-s`.

use super::{DenseMatrix, MatfunError};
use crate::scalar::Scalar;

const THETA: [(usize, f64); 5] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068),
    (13, 5.371_920_351_148_152),
];

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// `exp(A)` for a square matrix with finite entries.
pub fn expm<T: Scalar>(a: &DenseMatrix<T>) -> Result<DenseMatrix<T>, MatfunError> {
    let n = a.ensure_square()?;
    if n == 0 {
        return Ok(DenseMatrix::zeros(0, 0));
    }
    if n == 1 {
        return Ok(DenseMatrix::from_fn(1, 1, |_| a[(0, 0)].exp()));
    }
    let norm = a.norm_one();
    for &(degree, theta) in &THETA[..4] {
        if norm <= theta {
            let coeffs: &[f64] = match degree {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            return pade_low(a, coeffs);
        }
    }
    let theta13 = THETA[4].1;
    let s = if norm > theta13 { (norm / theta13).log2().ceil() as i32 } else { 0 };
    let scaled = a.scaled(T::from_f64(2f64.powi(-s)));
    let mut r = pade13(&scaled)?;
    for _ in 0..s {
        r = r.matmul(&r);
    }
    Ok(r)
}

fn pade_low<T: Scalar>(a: &DenseMatrix<T>, b: &[f64]) -> Result<DenseMatrix<T>, MatfunError> {
    let n = a.rows();
    let a2 = a.matmul(a);
    // powers A^0, A^2, A^4, ...
    let mut powers = vec![DenseMatrix::identity(n), a2.clone()];
    let degree = b.len() - 1;
    while 2 * (powers.len() - 1) < degree {
        let next = powers.last().unwrap().matmul(&a2);
        powers.push(next);
    }
    let mut u_inner = DenseMatrix::zeros(n, n);
    let mut v = DenseMatrix::zeros(n, n);
    for (k, &coef) in b.iter().enumerate() {
        let p = &powers[k / 2];
        if k % 2 == 1 {
            u_inner.add_scaled(T::from_f64(coef), p);
        } else {
            v.add_scaled(T::from_f64(coef), p);
        }
    }
    let u = a.matmul(&u_inner);
    finish(&u, &v)
}

fn pade13<T: Scalar>(a: &DenseMatrix<T>) -> Result<DenseMatrix<T>, MatfunError> {
    let n = a.rows();
    let b = PADE13.map(T::from_f64);
    let ident = DenseMatrix::identity(n);
    let a2 = a.matmul(a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);

    let mut inner = a6.scaled(b[13]);
    inner.add_scaled(b[11], &a4);
    inner.add_scaled(b[9], &a2);
    let mut u = a6.matmul(&inner);
    u.add_scaled(b[7], &a6);
    u.add_scaled(b[5], &a4);
    u.add_scaled(b[3], &a2);
    u.add_scaled(b[1], &ident);
    let u = a.matmul(&u);

    let mut inner = a6.scaled(b[12]);
    inner.add_scaled(b[10], &a4);
    inner.add_scaled(b[8], &a2);
    let mut v = a6.matmul(&inner);
    v.add_scaled(b[6], &a6);
    v.add_scaled(b[4], &a4);
    v.add_scaled(b[2], &a2);
    v.add_scaled(b[0], &ident);
    finish(&u, &v)
}

/// Solves `(V - U) R = (V + U)`.
fn finish<T: Scalar>(u: &DenseMatrix<T>, v: &DenseMatrix<T>) -> Result<DenseMatrix<T>, MatfunError> {
    let p = v.add(u);
    let q = v.sub(u);
    q.solve(&p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn max_diff<T: Scalar>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> f64 {
        a.sub(b).as_array().iter().fold(0.0, |m, v| m.max(v.modulus()))
    }

    #[test]
    fn zero_matrix_gives_identity() {
        let z = DenseMatrix::<f64>::zeros(3, 3);
        assert_eq!(expm(&z).unwrap(), DenseMatrix::identity(3));
    }

    #[test]
    fn diagonal() {
        let a = DenseMatrix::from_diagonal(&[1.0, -1.0]);
        let e = expm(&a).unwrap();
        let expected = DenseMatrix::from_diagonal(&[std::f64::consts::E, (-1f64).exp()]);
        assert!(max_diff(&e, &expected) < 1e-15);
    }

    #[test]
    fn nilpotent_series_terminates() {
        let a = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let e = expm(&a).unwrap();
        let expected = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        assert!(max_diff(&e, &expected) < 1e-15);
    }

    #[test]
    fn rotation_generator_large_norm() {
        // exp([[0, t], [-t, 0]]) is a rotation by angle t.
        let t = 80.0f64;
        let a = DenseMatrix::from_rows(&[vec![0.0, t], vec![-t, 0.0]]).unwrap();
        let e = expm(&a).unwrap();
        let expected =
            DenseMatrix::from_rows(&[vec![t.cos(), t.sin()], vec![-t.sin(), t.cos()]]).unwrap();
        assert!(max_diff(&e, &expected) < 1e-12, "{}", max_diff(&e, &expected));
    }

    #[test]
    fn complex_diagonal() {
        let d = [Complex64::new(0.0, 3.0), Complex64::new(-2.0, 0.5), Complex64::new(0.1, -40.0)];
        let e = expm(&DenseMatrix::from_diagonal(&d)).unwrap();
        let expected = DenseMatrix::from_diagonal(&d.map(|z| z.exp()));
        assert!(max_diff(&e, &expected) < 1e-13);
    }

    #[test]
    fn errors() {
        let rect = DenseMatrix::<f64>::zeros(2, 3);
        assert!(matches!(expm(&rect), Err(MatfunError::NotSquare { rows: 2, cols: 3 })));
        let mut nan = DenseMatrix::<f64>::zeros(2, 2);
        nan[(0, 1)] = f64::NAN;
        assert!(matches!(expm(&nan), Err(MatfunError::NonFinite)));
    }
}
