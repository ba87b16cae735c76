use super::{KrylovError, KrylovStats, PhiCombinationResult, PhiCombinationTask, Structure};
use crate::matfun::phi_scalars;
use crate::scalar::Scalar;

/// Elementwise evaluation for diagonal operators: each component is an
/// independent scalar φ-combination.
pub fn diagonal_fast_path<T: Scalar>(task: &PhiCombinationTask<'_, T>) -> Result<PhiCombinationResult<T>, KrylovError> {
    task.validate()?;
    if task.operator.structure() != Structure::Diagonal {
        return Err(KrylovError::NotDiagonal);
    }
    let diag = task.operator.diagonal().ok_or(KrylovError::NotDiagonal)?;
    let q = task.vectors.len() - 1;
    let outputs = task
        .scalings
        .iter()
        .map(|&rho| {
            let powers: Vec<f64> = (0..=q).map(|k| rho.powi(k as i32)).collect();
            diag.iter()
                .enumerate()
                .map(|(j, d)| {
                    let phis = phi_scalars(d.scale(rho), q);
                    let mut acc = T::zero();
                    for k in 0..=q {
                        let v = task.vectors[k][j];
                        if v != T::zero() {
                            acc += phis[k] * v.scale(powers[k]);
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect();
    Ok(PhiCombinationResult { outputs, stats: KrylovStats::default() })
}
