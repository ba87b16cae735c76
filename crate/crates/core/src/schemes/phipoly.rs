use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use super::{to_f64, Q, SchemeError};
use crate::matfun::{factorial, phi_scalars, phi_stack, DenseMatrix, MatfunError, MAX_PHI_ORDER};
use crate::scalar::Scalar;

/// One summand `coef · φ_order(scaling · z)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiTerm {
    pub order: usize,
    pub scaling: Q,
    pub coef: Q,
}

/// `z ↦ Σ coef · φ_k(c · z)` with `k ≥ 1`, `c ∈ (0, 1]`.
///
/// Terms are kept merged and sorted by `(scaling, order)`; zero coefficients
/// are dropped, so structural equality is equality of functions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PhiPolynomial {
    terms: Vec<PhiTerm>,
}

impl PhiPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Single term; fails on `order == 0`, `order > MAX_PHI_ORDER` or `scaling ∉ (0, 1]`.
    pub fn term(order: usize, scaling: Q, coef: Q) -> Result<Self, SchemeError> {
        Self::from_terms([PhiTerm { order, scaling, coef }])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = PhiTerm>) -> Result<Self, SchemeError> {
        let mut merged: BTreeMap<(Q, usize), Q> = BTreeMap::new();
        for t in terms {
            if t.order == 0 || t.order > MAX_PHI_ORDER {
                return Err(SchemeError::InvalidTerm(format!("phi order {} outside 1..={MAX_PHI_ORDER}", t.order)));
            }
            if t.scaling <= Q::zero() || t.scaling > Q::one() {
                return Err(SchemeError::InvalidTerm(format!("scaling {} outside (0, 1]", t.scaling)));
            }
            *merged.entry((t.scaling, t.order)).or_insert_with(Q::zero) += t.coef;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((scaling, order), coef)| PhiTerm { order, scaling, coef })
            .collect();
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[PhiTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_order(&self) -> usize {
        self.terms.iter().map(|t| t.order).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut all = self.terms.clone();
        all.extend(other.terms.iter().cloned());
        Self::from_terms(all).expect("terms of valid polynomials stay valid")
    }

    pub fn scale(&self, factor: Q) -> Self {
        let terms = self.terms.iter().map(|t| PhiTerm { coef: t.coef * factor, ..t.clone() });
        Self::from_terms(terms).expect("scaling preserves validity")
    }

    /// Value at `z = 0`: `Σ coef / k!`.
    pub fn value_at_zero(&self) -> Q {
        self.terms
            .iter()
            .map(|t| t.coef / Q::from_integer((1..=t.order as i128).product()))
            .fold(Q::zero(), |a, b| a + b)
    }

    pub fn eval<T: Scalar>(&self, z: T) -> T {
        let mut acc = T::zero();
        for t in &self.terms {
            let phis = phi_scalars(z.scale(to_f64(t.scaling)), t.order);
            acc += phis[t.order].scale(to_f64(t.coef));
        }
        acc
    }

    /// `Σ coef · φ_k(c Z)` for a square matrix `Z`.
    pub fn eval_matrix<T: Scalar>(&self, z: &DenseMatrix<T>) -> Result<DenseMatrix<T>, MatfunError> {
        let n = z.ensure_square()?;
        let mut out = DenseMatrix::zeros(n, n);
        let mut i = 0;
        while i < self.terms.len() {
            let c = self.terms[i].scaling;
            let group: Vec<&PhiTerm> = self.terms[i..].iter().take_while(|t| t.scaling == c).collect();
            let q = group.iter().map(|t| t.order).max().unwrap_or(0);
            let stack = phi_stack(&z.scaled(T::from_f64(to_f64(c))), q)?;
            for t in &group {
                out.add_scaled(T::from_f64(to_f64(t.coef)), stack.get(t.order));
            }
            i += group.len();
        }
        Ok(out)
    }

    /// Value at zero in floating point, `Σ coef / k!`.
    pub fn value_at_zero_f64(&self) -> f64 {
        self.terms.iter().map(|t| to_f64(t.coef) / factorial(t.order)).sum()
    }
}

impl fmt::Display for PhiPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({})·φ{}({}·z)", t.coef, t.order, t.scaling)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i128, d: i128) -> Q {
        Q::new(n, d)
    }

    #[test]
    fn merges_and_drops_zero_terms() {
        let p = PhiPolynomial::from_terms([
            PhiTerm { order: 2, scaling: q(1, 2), coef: q(1, 3) },
            PhiTerm { order: 2, scaling: q(1, 2), coef: q(-1, 3) },
            PhiTerm { order: 3, scaling: q(1, 1), coef: q(2, 1) },
        ])
        .unwrap();
        assert_eq!(p.terms().len(), 1);
        assert_eq!(p.max_order(), 3);
        assert!(p.add(&p.scale(q(-1, 1))).is_zero());
    }

    #[test]
    fn rejects_bad_terms() {
        assert!(PhiPolynomial::term(0, q(1, 2), q(1, 1)).is_err());
        assert!(PhiPolynomial::term(2, q(3, 2), q(1, 1)).is_err());
        assert!(PhiPolynomial::term(2, q(0, 1), q(1, 1)).is_err());
    }

    #[test]
    fn value_at_zero_matches_factorials() {
        // 3 φ2(z/2) + 12 φ4(z) at 0 = 3/2 + 12/24 = 2
        let p = PhiPolynomial::from_terms([
            PhiTerm { order: 2, scaling: q(1, 2), coef: q(3, 1) },
            PhiTerm { order: 4, scaling: q(1, 1), coef: q(12, 1) },
        ])
        .unwrap();
        assert_eq!(p.value_at_zero(), q(2, 1));
        assert!((p.value_at_zero_f64() - 2.0).abs() < 1e-15);
        assert!((p.eval(0.0f64) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn scalar_and_matrix_evaluation_agree() {
        // φ1(z) = (e^z − 1)/z
        let p = PhiPolynomial::term(1, q(1, 2), q(2, 1)).unwrap();
        let z = -3.0f64;
        let expected = 2.0 * ((z / 2.0).exp() - 1.0) / (z / 2.0);
        assert!((p.eval(z) - expected).abs() < 1e-14);
        let m = DenseMatrix::from_diagonal(&[z, 0.5]);
        let pm = p.eval_matrix(&m).unwrap();
        assert!((pm[(0, 0)] - expected).abs() < 1e-14);
        assert!((pm[(1, 1)] - p.eval(0.5)).abs() < 1e-14);
        assert_eq!(pm[(0, 1)], 0.0);
    }
}
