use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::ProblemError;

/// Power-of-two discrete Fourier transform pair.
///
/// `forward` computes `X_k = (1/n) Σ_j x_j e^{-2πi jk/n}` and `inverse` the
/// unnormalised `x_j = Σ_k X_k e^{2πi jk/n}`, so `inverse(forward(x)) = x`.
#[derive(Clone)]
pub struct Fourier {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fourier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fourier").field("n", &self.n).finish()
    }
}

impl Fourier {
    pub fn new(n: usize) -> Result<Self, ProblemError> {
        if n < 2 || !n.is_power_of_two() {
            return Err(ProblemError::Parameter(format!("FFT length {n} is not a power of two")));
        }
        let mut planner = FftPlanner::new();
        Ok(Self { n, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.fwd.process(data);
        let s = 1.0 / self.n as f64;
        data.iter_mut().for_each(|x| *x *= s);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.inv.process(data);
    }
}
