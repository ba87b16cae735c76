use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::{Boundary, Fourier, GridSpec, ProblemError, SemilinearSystem};
use crate::krylov::DiagonalOperator;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NlsParams {
    pub lambda: f64,
    /// Include `V(x) = 1/(1 + sin² x)`.
    pub potential: bool,
}

impl Default for NlsParams {
    fn default() -> Self {
        Self { lambda: 1.0, potential: true }
    }
}

/// Wavenumber of each FFT bin: `k_b = b` for `b ≤ n/2`, `b − n` otherwise,
/// covering `−n/2+1 … n/2`.
pub fn wavenumbers(n: usize) -> Vec<f64> {
    (0..n).map(|b| if b <= n / 2 { b as f64 } else { b as f64 - n as f64 })
        .collect()
}

/// `‖Ψ‖²_{L²(−π, π)} = 2π Σ |c_k|²`.
pub fn nls_mass(u: &[Complex64]) -> f64 {
    2.0 * PI * u.iter().map(|c| c.norm_sqr()).sum::<f64>()
}

/// `iΨ_t = −Ψ_xx + (V + λ|Ψ|²)Ψ` on `[−π, π]` with periodic boundary and
/// `Ψ(x, 0) = e^{sin 2x}`, in Fourier coefficients. See [`nls1d_with`].
pub fn nls1d(modes: usize) -> Result<SemilinearSystem<Complex64>, ProblemError> {
    nls1d_with(modes, NlsParams::default(), |x| Complex64::new((2.0 * x).sin().exp(), 0.0))
}

/// The state holds `c_k` with `Ψ(x) = Σ_k c_k e^{ikx}`, stored in FFT bin
/// order. Collocation points are `x_j = −π + 2πj/n`; the shift by `−π` turns
/// into the factor `(−1)^k` between `c` and the plain DFT of the samples.
pub fn nls1d_with(
    modes: usize,
    params: NlsParams,
    initial: impl Fn(f64) -> Complex64,
) -> Result<SemilinearSystem<Complex64>, ProblemError> {
    if modes < 16 || !modes.is_power_of_two() {
        return Err(ProblemError::Parameter(format!("mode count {modes} must be a power of two ≥ 16")));
    }
    let grid = GridSpec::new(1, modes, 2.0 * PI, Boundary::SpectralPeriodic)?;
    let fourier = Fourier::new(modes)?;
    let k = wavenumbers(modes);
    let a = Arc::new(DiagonalOperator::new(k.iter().map(|&k| Complex64::new(0.0, -k * k)).collect()));
    let x: Vec<f64> = (0..modes).map(|j| -PI + 2.0 * PI * j as f64 / modes as f64).collect();
    let sign: Vec<f64> = k.iter().map(|&k| if (k as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 }).collect();
    let v: Vec<f64> =
        x.iter().map(|&x| if params.potential { 1.0 / (1.0 + x.sin().powi(2)) } else { 0.0 }).collect();

    let mut u0: Vec<Complex64> = x.iter().map(|&x| initial(x)).collect();
    fourier.forward(&mut u0);
    u0.iter_mut().zip(&sign).for_each(|(c, s)| *c *= s);

    let lambda = params.lambda;
    let g = move |_t: f64, u: &[Complex64], out: &mut [Complex64]| {
        let mut psi: Vec<Complex64> = u.iter().zip(&sign).map(|(c, s)| c * s).collect();
        fourier.inverse(&mut psi);
        for (p, vj) in psi.iter_mut().zip(&v) {
            *p *= vj + lambda * p.norm_sqr();
        }
        fourier.forward(&mut psi);
        for ((o, w), s) in out.iter_mut().zip(&psi).zip(&sign) {
            *o = Complex64::new(w.im, -w.re) * s;
        }
    };
    Ok(SemilinearSystem::new("nls1d", grid, a, g, u0)?
        .with_parameter("lambda", lambda)
        .with_parameter("potential", if params.potential { 1.0 } else { 0.0 }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::Structure;
    use crate::schemes::{integrate, method_by_name, make_engine, EngineSettings, ExecutionMode, SemilinearProblem};

    #[test]
    fn operator_is_diagonal() {
        let p = nls1d(32).unwrap();
        let a = p.linear();
        assert_eq!(a.structure(), Structure::Diagonal);
        let d = a.diagonal().unwrap();
        assert_eq!(d[1], Complex64::new(0.0, -1.0));
        assert_eq!(d[16], Complex64::new(0.0, -256.0));
        assert_eq!(d[17], Complex64::new(0.0, -225.0));
        assert_eq!(wavenumbers(8), vec![0.0, 1.0, 2.0, 3.0, 4.0, -3.0, -2.0, -1.0]);
    }

    #[test]
    fn rejects_bad_mode_counts() {
        assert!(nls1d(48).is_err());
        assert!(nls1d(8).is_err());
    }

    #[test]
    fn initial_coefficients_reproduce_samples() {
        let p = nls1d(64).unwrap();
        let c = p.initial();
        for x in [-3.0f64, -0.5, 0.0, 1.25, 2.9] {
            let mut val = Complex64::new(0.0, 0.0);
            for (ck, k) in c.iter().zip(wavenumbers(64)) {
                val += ck * Complex64::from_polar(1.0, k * x);
            }
            // The interpolant of an analytic function is spectrally accurate.
            assert!((val.re - (2.0 * x).sin().exp()).abs() < 1e-10 && val.im.abs() < 1e-10, "x = {x}");
        }
    }

    #[test]
    fn free_single_mode_rotates() {
        let params = NlsParams { lambda: 0.0, potential: false };
        let p = nls1d_with(16, params, |x| Complex64::from_polar(1.0, x)).unwrap();
        let c0 = p.initial().to_vec();
        assert!((c0[1] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        let g = p.eval_nonlinear(0.0, &c0);
        assert!(g.iter().all(|x| x.norm() < 1e-15));
        let m = method_by_name("expRK4s6").unwrap();
        let e = make_engine(p.linear(), &EngineSettings::default()).unwrap();
        let t = 1.7;
        let r = integrate(&m, &p, e.as_ref(), &c0, 0.0, t, 5, ExecutionMode::Batched).unwrap();
        assert!((r.u[1] - Complex64::from_polar(1.0, -t)).norm() < 1e-13);
    }

    #[test]
    fn nonlinearity_is_cubic_in_amplitude() {
        let params = NlsParams { lambda: 1.0, potential: false };
        let p = nls1d_with(16, params, |x| Complex64::from_polar(0.5, x)).unwrap();
        let c = p.initial().to_vec();
        // |Ψ|² = 1/4 so g = −i/4 · c.
        let g = p.eval_nonlinear(0.0, &c);
        for (gi, ci) in g.iter().zip(&c) {
            assert!((gi - Complex64::new(0.0, -0.25) * ci).norm() < 1e-15);
        }
    }

    #[test]
    fn mass_is_conserved() {
        let p = nls1d(64).unwrap();
        let m = method_by_name("expRK5s10").unwrap();
        let e = make_engine(p.linear(), &EngineSettings::default()).unwrap();
        let m0 = nls_mass(p.initial());
        let r = integrate(&m, &p, e.as_ref(), p.initial(), 0.0, 3.0, 1500, ExecutionMode::Batched).unwrap();
        assert!(((nls_mass(&r.u) - m0) / m0).abs() <= 1e-6);
    }
}
