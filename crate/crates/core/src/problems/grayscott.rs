use std::sync::Arc;

use super::{Boundary, GridSpec, ProblemError, SemilinearSystem};
use crate::krylov::LinearOperator;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrayScottParams {
    pub du: f64,
    pub dv: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Side length of the periodic square.
    pub length: f64,
}

pub const GRAY_SCOTT_PARAMS: GrayScottParams =
    GrayScottParams { du: 0.02, dv: 0.01, alpha: 0.065, beta: 0.035, length: 1.5 };

/// `blockdiag(d_u Δ_h, d_v Δ_h)` with the periodic 5-point Laplacian on a
/// `p × p` grid; node `(i, j)` of species `s` sits at `s·p² + i·p + j`.
#[derive(Clone, Debug)]
pub struct PeriodicLaplacian2d {
    p: usize,
    coefs: [f64; 2],
}

impl PeriodicLaplacian2d {
    pub fn new(p: usize, dx: f64, diffusion: [f64; 2]) -> Self {
        let inv = 1.0 / (dx * dx);
        Self { p, coefs: [diffusion[0] * inv, diffusion[1] * inv] }
    }
}

impl LinearOperator<f64> for PeriodicLaplacian2d {
    fn dim(&self) -> usize {
        2 * self.p * self.p
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let p = self.p;
        let block = p * p;
        for (s, &c) in self.coefs.iter().enumerate() {
            let xs = &x[s * block..(s + 1) * block];
            let ys = &mut y[s * block..(s + 1) * block];
            for i in 0..p {
                let up = if i == 0 { p - 1 } else { i - 1 } * p;
                let down = if i + 1 == p { 0 } else { i + 1 } * p;
                let row = i * p;
                for j in 0..p {
                    let left = if j == 0 { p - 1 } else { j - 1 };
                    let right = if j + 1 == p { 0 } else { j + 1 };
                    let sum = xs[up + j] + xs[down + j] + xs[row + left] + xs[row + right] - 4.0 * xs[row + j];
                    ys[row + j] = c * sum;
                }
            }
        }
    }

    fn cost_hint(&self) -> f64 {
        12.0 * self.dim() as f64
    }
}

/// Gray–Scott system on `[0, L)²` with `points` nodes per direction,
/// `x_i = iΔx`, `Δx = L/points`, state `(u, v)` stacked.
///
/// The Gaussian pulses are centred at `(L, L)`; distances are taken to the
/// nearest periodic image so the initial data is smooth on the torus.
pub fn grayscott2d(points: usize) -> Result<SemilinearSystem<f64>, ProblemError> {
    if points < 16 {
        return Err(ProblemError::Parameter(format!("{points} points per direction, need at least 16")));
    }
    let prm = GRAY_SCOTT_PARAMS;
    let grid = GridSpec::new(2, points, prm.length, Boundary::Periodic)?;
    let dx = prm.length / points as f64;
    let a = Arc::new(PeriodicLaplacian2d::new(points, dx, [prm.du, prm.dv]));
    let block = points * points;
    let wrap = |x: f64| {
        let l = prm.length;
        (x - l + l / 2.0).rem_euclid(l) - l / 2.0
    };
    let mut u0 = vec![0.0; 2 * block];
    for i in 0..points {
        for j in 0..points {
            let dxl = wrap(i as f64 * dx);
            let dyl = wrap(j as f64 * dx);
            u0[i * points + j] = 1.0 - (-150.0 * (dxl * dxl + dyl * dyl)).exp();
            u0[block + i * points + j] = (-150.0 * (dxl * dxl + 2.0 * dyl * dyl)).exp();
        }
    }
    let (alpha, beta) = (prm.alpha, prm.beta);
    let g = move |_t: f64, y: &[f64], out: &mut [f64]| {
        let (u, v) = y.split_at(block);
        let (gu, gv) = out.split_at_mut(block);
        for idx in 0..block {
            let uvv = u[idx] * v[idx] * v[idx];
            gu[idx] = -uvv + alpha * (1.0 - u[idx]);
            gv[idx] = uvv - (alpha + beta) * v[idx];
        }
    };
    Ok(SemilinearSystem::new("grayscott2d", grid, a, g, u0)?
        .with_parameter("du", prm.du)
        .with_parameter("dv", prm.dv)
        .with_parameter("alpha", prm.alpha)
        .with_parameter("beta", prm.beta)
        .with_parameter("L", prm.length))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::SemilinearProblem;

    #[test]
    fn parameters_echo() {
        let p = grayscott2d(16).unwrap();
        let got: Vec<f64> = ["du", "dv", "alpha", "beta"].iter().map(|k| p.parameter(k).unwrap()).collect();
        assert_eq!(got, vec![0.02, 0.01, 0.065, 0.035]);
        assert_eq!(p.dim(), 512);
        assert!(grayscott2d(8).is_err());
    }

    #[test]
    fn constants_are_in_the_kernel() {
        let p = grayscott2d(16).unwrap();
        let mut x = vec![3.0; 256];
        x.extend(vec![-1.5; 256]);
        assert!(p.linear().apply_vec(&x).iter().all(|&y| y == 0.0));
    }

    #[test]
    fn matches_assembled_stencil() {
        let n = 16;
        let op = PeriodicLaplacian2d::new(n, 0.1, [1.0, 0.5]);
        let dense = op.to_dense();
        for r in 0..op.dim() {
            let row_sum: f64 = (0..op.dim()).map(|c| dense[(r, c)]).sum();
            assert!(row_sum.abs() < 1e-10);
            let diag = if r < n * n { -400.0 } else { -200.0 };
            assert!((dense[(r, r)] - diag).abs() < 1e-10);
        }
        // Symmetric: the periodic Laplacian is self-adjoint.
        for r in 0..op.dim() {
            for c in 0..op.dim() {
                assert_eq!(dense[(r, c)], dense[(c, r)]);
            }
        }
    }

    #[test]
    fn laplacian_converges_at_second_order() {
        use std::f64::consts::PI;
        let l = 1.5;
        let mut errs = Vec::new();
        for n in [16usize, 32, 64] {
            let dx = l / n as f64;
            let op = PeriodicLaplacian2d::new(n, dx, [1.0, 1.0]);
            let w = 2.0 * PI / l;
            let f = |x: f64, y: f64| (w * x).sin() * (w * y).cos();
            let mut x = vec![0.0; 2 * n * n];
            for i in 0..n {
                for j in 0..n {
                    let v = f(i as f64 * dx, j as f64 * dx);
                    x[i * n + j] = v;
                    x[n * n + i * n + j] = v;
                }
            }
            let y = op.apply_vec(&x);
            errs.push(y.iter().zip(&x).map(|(a, b)| (a + 2.0 * w * w * b).abs()).fold(0.0, f64::max));
        }
        for e in errs.windows(2) {
            assert!((e[0] / e[1]).log2() >= 1.9);
        }
    }

    #[test]
    fn homogeneous_state_is_fixed_point() {
        let p = grayscott2d(16).unwrap();
        let mut y = vec![1.0; 256];
        y.extend(vec![0.0; 256]);
        assert!(p.eval_nonlinear(0.0, &y).iter().all(|&g| g == 0.0));
    }

    #[test]
    fn initial_data_is_periodic_pulse() {
        let p = grayscott2d(32).unwrap();
        let u = p.initial();
        assert_eq!(u[0], 0.0);
        assert_eq!(u[32 * 32], 1.0);
        // Symmetric about the corner node in x.
        assert!((u[32] - u[31 * 32]).abs() < 1e-15);
    }
}
