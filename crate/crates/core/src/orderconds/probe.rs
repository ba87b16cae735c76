use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::OrderCondError;
use crate::matfun::DenseMatrix;

/// Default probe dimension.
pub const PROBE_DIM: usize = 6;
/// Frobenius norm every probe matrix is scaled to; bounds the spectral radius.
pub const PROBE_NORM: f64 = 2.0;

/// Random instances of the arbitrary matrices `Z, J, K, L` and the bilinear
/// map `B` appearing in the order conditions.
///
/// Matrix entries are drawn uniformly from `[-1, 1]` and rescaled to
/// Frobenius norm 2, so the spectral radius is at most 2. `B` is a `d×d×d`
/// array with uniform entries scaled to Frobenius norm 1; `x`, `y` are unit
/// vectors used to evaluate `B(ψ x, ψ y)`.
#[derive(Clone, Debug)]
pub struct ConditionProbe {
    pub z: DenseMatrix<f64>,
    pub j: DenseMatrix<f64>,
    pub k: DenseMatrix<f64>,
    pub l: DenseMatrix<f64>,
    /// `b[(a * d + p) * d + q] = B_a(e_p, e_q)`.
    pub b: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub seed: u64,
}

fn random_matrix(rng: &mut ChaCha8Rng, d: usize) -> DenseMatrix<f64> {
    let m = DenseMatrix::from_fn(d, d, |_| rng.gen_range(-1.0..1.0));
    let f = m.norm_fro();
    m.scaled(PROBE_NORM / f)
}

fn random_unit(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

impl ConditionProbe {
    pub fn random(d: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = random_matrix(&mut rng, d);
        let j = random_matrix(&mut rng, d);
        let k = random_matrix(&mut rng, d);
        let l = random_matrix(&mut rng, d);
        let b = random_unit(&mut rng, d * d * d);
        let x = random_unit(&mut rng, d);
        let y = random_unit(&mut rng, d);
        Self { z, j, k, l, b, x, y, seed }
    }

    pub fn dim(&self) -> usize {
        self.z.rows()
    }

    /// Checks that all parts share one dimension.
    pub fn validate(&self) -> Result<usize, OrderCondError> {
        let d = self.z.rows();
        for (name, m) in [("Z", &self.z), ("J", &self.j), ("K", &self.k), ("L", &self.l)] {
            if m.rows() != d || m.cols() != d {
                return Err(OrderCondError::Probe(format!("{name} is {}x{}, expected {d}x{d}", m.rows(), m.cols())));
            }
        }
        if self.b.len() != d * d * d {
            return Err(OrderCondError::Probe(format!("B has {} entries, expected {}", self.b.len(), d * d * d)));
        }
        if self.x.len() != d || self.y.len() != d {
            return Err(OrderCondError::Probe("x and y must have the probe dimension".into()));
        }
        Ok(d)
    }

    /// `B(u, v)`.
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|a| {
                let mut acc = 0.0;
                for p in 0..d {
                    for q in 0..d {
                        acc += self.b[(a * d + p) * d + q] * u[p] * v[q];
                    }
                }
                acc
            })
            .collect()
    }
}

/// `count` probes of dimension `d` with seeds `seed, seed + 1, …`.
pub fn standard_probes(count: usize, d: usize, seed: u64) -> Vec<ConditionProbe> {
    (0..count as u64).map(|i| ConditionProbe::random(d, seed.wrapping_add(i))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probes_are_reproducible_and_normalised() {
        let a = ConditionProbe::random(6, 42);
        let b = ConditionProbe::random(6, 42);
        assert_eq!(a.z, b.z);
        assert!((a.j.norm_fro() - 2.0).abs() < 1e-14);
        assert_eq!(a.validate().unwrap(), 6);
        assert_ne!(ConditionProbe::random(6, 43).z, a.z);
    }

    #[test]
    fn mismatched_probe_rejected() {
        let mut p = ConditionProbe::random(4, 1);
        p.k = DenseMatrix::identity(3);
        assert!(matches!(p.validate(), Err(OrderCondError::Probe(_))));
    }

    #[test]
    fn bilinear_map_is_bilinear() {
        let p = ConditionProbe::random(3, 9);
        let u = [1.0, -2.0, 0.5];
        let v = [0.3, 0.1, -1.0];
        let w = p.bilinear(&u, &v);
        let u2: Vec<f64> = u.iter().map(|x| 3.0 * x).collect();
        let w2 = p.bilinear(&u2, &v);
        for (a, b) in w.iter().zip(&w2) {
            assert!((3.0 * a - b).abs() < 1e-14);
        }
    }
}
