use std::sync::Arc;

use super::{Boundary, GridSpec, ProblemError, SemilinearSystem};
use crate::krylov::CsrMatrix;

/// `u_t = u_xx + 1/(1+u²) + Φ(x, t)` on `(0, 1)` with homogeneous Dirichlet
/// data, discretised by second differences on `points` interior nodes
/// `x_i = iΔx`, `Δx = 1/(points+1)`. `Φ` is chosen so that
/// `u(x, t) = x(1−x)eᵗ`; since this is quadratic in `x` the second difference
/// is exact and the semi-discrete solution is the nodal restriction of `u`.
pub fn parabolic1d(points: usize) -> Result<SemilinearSystem<f64>, ProblemError> {
    let grid = GridSpec::new(1, points, 1.0, Boundary::Dirichlet)?;
    let dx = 1.0 / (points + 1) as f64;
    let inv = 1.0 / (dx * dx);
    let mut triplets = Vec::with_capacity(3 * points);
    for i in 0..points {
        triplets.push((i, i, -2.0 * inv));
        if i > 0 {
            triplets.push((i, i - 1, inv));
        }
        if i + 1 < points {
            triplets.push((i, i + 1, inv));
        }
    }
    let a = Arc::new(CsrMatrix::from_triplets(points, &triplets));
    let x: Vec<f64> = (1..=points).map(|i| i as f64 * dx).collect();
    let xs = x.clone();
    let g = move |t: f64, u: &[f64], out: &mut [f64]| {
        let et = t.exp();
        for ((o, &ui), &xi) in out.iter_mut().zip(u).zip(&xs) {
            let w = xi * (1.0 - xi);
            let phi = w * et + 2.0 * et - 1.0 / (1.0 + w * w * et * et);
            *o = 1.0 / (1.0 + ui * ui) + phi;
        }
    };
    let exact_x = x.clone();
    let exact = move |t: f64| exact_x.iter().map(|&xi| xi * (1.0 - xi) * t.exp()).collect();
    let initial = exact(0.0);
    Ok(SemilinearSystem::new("parabolic1d", grid, a, g, initial)?.with_exact(exact).with_parameter("dx", dx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::SemilinearProblem;

    #[test]
    fn operator_norm_matches_grid() {
        let p = parabolic1d(200).unwrap();
        let dense = p.linear().to_dense();
        assert_eq!(dense.norm_inf(), 4.0 * 201.0 * 201.0);
        assert_eq!(dense.norm_inf(), 161_604.0);
    }

    #[test]
    fn exact_solution_satisfies_semi_discrete_system() {
        let p = parabolic1d(50).unwrap();
        for t in [0.0, 0.4, 1.0] {
            let u = p.exact(t).unwrap();
            let mut rhs = p.linear().apply_vec(&u);
            let g = p.eval_nonlinear(t, &u);
            rhs.iter_mut().zip(&g).for_each(|(r, gi)| *r += gi);
            // u_t = u for this solution.
            let err = rhs.iter().zip(&u).map(|(r, ui)| (r - ui).abs()).fold(0.0, f64::max);
            assert!(err < 1e-9, "t = {t}: {err}");
        }
    }

    #[test]
    fn boundary_values_vanish() {
        let u = |x: f64, t: f64| x * (1.0 - x) * f64::exp(t);
        assert_eq!(u(0.0, 0.7), 0.0);
        assert_eq!(u(1.0, 0.7), 0.0);
    }

    #[test]
    fn second_difference_converges_at_second_order() {
        let mut errs = Vec::new();
        for points in [15usize, 31, 63] {
            let p = parabolic1d(points).unwrap();
            let dx = 1.0 / (points + 1) as f64;
            let f: Vec<f64> = (1..=points).map(|i| (std::f64::consts::PI * i as f64 * dx).sin()).collect();
            let af = p.linear().apply_vec(&f);
            let pi2 = std::f64::consts::PI.powi(2);
            errs.push(af.iter().zip(&f).map(|(a, v)| (a + pi2 * v).abs()).fold(0.0, f64::max));
        }
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() >= 1.9);
        }
    }
}
