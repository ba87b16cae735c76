use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::krylov::{
    diagonal_fast_path, evaluate_combination, KrylovError, LinearOperator, PhiCombinationResult, PhiCombinationTask,
    ScaledOperator, Structure,
};
use crate::matfun::{combine_with_stack, phi_stack, DenseMatrix, PhiStack};
use crate::scalar::Scalar;

/// Evaluates `Σ_k φ_k(ρ_i hA) ρ_i^k v_k` for a fixed operator `A`.
pub trait PhiEngine<T: Scalar>: Send + Sync {
    fn name(&self) -> &'static str;

    /// Accuracy target of one evaluation.
    fn tolerance(&self) -> f64;

    fn evaluate(&self, h: f64, vectors: &[Vec<T>], scalings: &[f64]) -> Result<PhiCombinationResult<T>, KrylovError>;
}

/// Engine configuration shared by the CLI, the bindings and the tests.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EngineSettings {
    pub kind: EngineKind,
    pub tolerance: f64,
    pub initial_krylov_dim: usize,
    pub iom_length: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EngineKind {
    /// Diagonal fast path for diagonal operators, Krylov otherwise.
    Auto,
    Krylov,
    /// Dense φ stacks; only for small `n`.
    Dense,
    Diagonal,
}

impl Default for EngineSettings {
    fn default() -> Self {
        Self { kind: EngineKind::Auto, tolerance: 1e-12, initial_krylov_dim: 1, iom_length: 2 }
    }
}

/// Builds the engine selected by `settings` for operator `a`.
pub fn make_engine<T: Scalar + 'static>(
    a: Arc<dyn LinearOperator<T>>,
    settings: &EngineSettings,
) -> Result<Box<dyn PhiEngine<T>>, KrylovError> {
    Ok(match settings.kind {
        EngineKind::Auto if a.structure() == Structure::Diagonal => Box::new(DiagonalEngine::new(a)?),
        EngineKind::Auto | EngineKind::Krylov => Box::new(KrylovEngine::new(a, settings)),
        EngineKind::Dense => Box::new(DenseEngine::new(a.as_ref())),
        EngineKind::Diagonal => Box::new(DiagonalEngine::new(a)?),
    })
}

/// Adaptive Krylov evaluation on `hA`.
pub struct KrylovEngine<T: Scalar> {
    a: Arc<dyn LinearOperator<T>>,
    tolerance: f64,
    initial_krylov_dim: usize,
    iom_length: usize,
}

impl<T: Scalar> KrylovEngine<T> {
    pub fn new(a: Arc<dyn LinearOperator<T>>, settings: &EngineSettings) -> Self {
        Self {
            a,
            tolerance: settings.tolerance,
            initial_krylov_dim: settings.initial_krylov_dim,
            iom_length: settings.iom_length,
        }
    }
}

impl<T: Scalar + 'static> PhiEngine<T> for KrylovEngine<T> {
    fn name(&self) -> &'static str {
        "krylov"
    }

    fn tolerance(&self) -> f64 {
        self.tolerance
    }

    fn evaluate(&self, h: f64, vectors: &[Vec<T>], scalings: &[f64]) -> Result<PhiCombinationResult<T>, KrylovError> {
        let op = ScaledOperator::new(Arc::clone(&self.a), h);
        let task = PhiCombinationTask::new(&op, vectors, scalings)
            .with_tolerance(self.tolerance)
            .with_initial_dim(self.initial_krylov_dim)
            .with_iom(self.iom_length);
        evaluate_combination(&task)
    }
}

/// Elementwise evaluation for diagonal `A`; exact up to roundoff.
pub struct DiagonalEngine<T: Scalar> {
    a: Arc<dyn LinearOperator<T>>,
}

impl<T: Scalar> DiagonalEngine<T> {
    pub fn new(a: Arc<dyn LinearOperator<T>>) -> Result<Self, KrylovError> {
        if a.structure() != Structure::Diagonal {
            return Err(KrylovError::NotDiagonal);
        }
        Ok(Self { a })
    }
}

impl<T: Scalar + 'static> PhiEngine<T> for DiagonalEngine<T> {
    fn name(&self) -> &'static str {
        "diagonal"
    }

    fn tolerance(&self) -> f64 {
        f64::EPSILON
    }

    fn evaluate(&self, h: f64, vectors: &[Vec<T>], scalings: &[f64]) -> Result<PhiCombinationResult<T>, KrylovError> {
        let op = ScaledOperator::new(Arc::clone(&self.a), h);
        diagonal_fast_path(&PhiCombinationTask::new(&op, vectors, scalings))
    }
}

type StackKey = (u64, u64);

/// Dense φ stacks of `ρhA`, cached per `(h, ρ)`; the reference oracle for small `n`.
pub struct DenseEngine<T: Scalar> {
    a: DenseMatrix<T>,
    cache: Mutex<HashMap<StackKey, Arc<PhiStack<T>>>>,
}

/// Cache entries kept before the cache is flushed.
const DENSE_CACHE_LIMIT: usize = 64;

impl<T: Scalar> DenseEngine<T> {
    pub fn new(a: &dyn LinearOperator<T>) -> Self {
        Self { a: a.to_dense(), cache: Mutex::new(HashMap::new()) }
    }

    fn stack(&self, h: f64, rho: f64, q: usize) -> Result<Arc<PhiStack<T>>, KrylovError> {
        let key = (h.to_bits(), rho.to_bits());
        if let Some(s) = self.cache.lock().expect("dense cache poisoned").get(&key) {
            if s.order() >= q {
                return Ok(Arc::clone(s));
            }
        }
        // Orders up to 4 cover every catalog scheme; computing them at once
        // avoids recomputation when batches of different depth share (h, ρ).
        let stack = Arc::new(phi_stack(&self.a.scaled(T::from_f64(h * rho)), q.max(4))?);
        let mut cache = self.cache.lock().expect("dense cache poisoned");
        if cache.len() >= DENSE_CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(key, Arc::clone(&stack));
        Ok(stack)
    }
}

impl<T: Scalar + 'static> PhiEngine<T> for DenseEngine<T> {
    fn name(&self) -> &'static str {
        "dense"
    }

    fn tolerance(&self) -> f64 {
        1e-13
    }

    fn evaluate(&self, h: f64, vectors: &[Vec<T>], scalings: &[f64]) -> Result<PhiCombinationResult<T>, KrylovError> {
        let n = self.a.rows();
        if vectors.is_empty() {
            return Err(KrylovError::InvalidTask("no input vectors".into()));
        }
        if let Some(bad) = vectors.iter().find(|v| v.len() != n) {
            return Err(KrylovError::DimensionMismatch { expected: n, found: bad.len() });
        }
        let q = vectors.len() - 1;
        let outputs = scalings
            .iter()
            .map(|&rho| {
                if !(rho > 0.0 && rho <= 1.0) {
                    return Err(KrylovError::InvalidTask(format!("scaling {rho} outside (0, 1]")));
                }
                let stack = self.stack(h, rho, q)?;
                Ok(combine_with_stack(&stack, vectors, rho))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PhiCombinationResult { outputs, stats: Default::default() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::{CsrMatrix, DiagonalOperator};
    use crate::matfun::phi_combination_dense;

    fn heat(n: usize) -> Arc<dyn LinearOperator<f64>> {
        let dx2 = ((n + 1) as f64).powi(2);
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, -2.0 * dx2));
            if i > 0 {
                t.push((i, i - 1, dx2));
            }
            if i + 1 < n {
                t.push((i, i + 1, dx2));
            }
        }
        Arc::new(CsrMatrix::from_triplets(n, &t))
    }

    #[test]
    fn engines_agree_on_heat_operator() {
        let a = heat(40);
        let vectors: Vec<Vec<f64>> = (0..3).map(|k| (0..40).map(|i| ((i * (k + 1)) as f64).sin()).collect()).collect();
        let scalings = [0.25, 0.5, 1.0];
        let h = 0.01;
        let dense = DenseEngine::new(a.as_ref()).evaluate(h, &vectors, &scalings).unwrap();
        let krylov = KrylovEngine::new(Arc::clone(&a), &EngineSettings::default()).evaluate(h, &vectors, &scalings).unwrap();
        let oracle = a.to_dense().scaled(h);
        for (i, &rho) in scalings.iter().enumerate() {
            let exact = phi_combination_dense(&oracle, &vectors, rho).unwrap();
            let scale = crate::scalar::norm2(&exact);
            for (x, y) in [(&dense.outputs[i], &exact), (&krylov.outputs[i], &exact)] {
                let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
                assert!(crate::scalar::norm2(&diff) <= 1e-10 * scale);
            }
        }
        assert!(krylov.stats.operator_applications > 0);
    }

    #[test]
    fn dense_cache_reuses_stacks() {
        let a = heat(10);
        let e = DenseEngine::new(a.as_ref());
        let v = vec![vec![0.0; 10], vec![1.0; 10]];
        let first = e.evaluate(0.1, &v, &[0.5]).unwrap();
        let second = e.evaluate(0.1, &v, &[0.5]).unwrap();
        assert_eq!(first.outputs, second.outputs);
        assert_eq!(e.cache.lock().unwrap().len(), 1);
    }

    #[test]
    fn auto_selects_diagonal_path() {
        let a: Arc<dyn LinearOperator<f64>> = Arc::new(DiagonalOperator::new(vec![-1.0, -4.0]));
        let e = make_engine(a, &EngineSettings::default()).unwrap();
        assert_eq!(e.name(), "diagonal");
        let out = e.evaluate(1.0, &[vec![1.0, 1.0]], &[1.0]).unwrap();
        assert!((out.outputs[0][0] - (-1.0f64).exp()).abs() < 1e-15);
        assert!(make_engine(heat(5), &EngineSettings { kind: EngineKind::Diagonal, ..Default::default() }).is_err());
    }
}
