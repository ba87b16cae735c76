use std::sync::Arc;

use rayon::prelude::*;

use super::{to_f64, ExpRKMethod, PhiEngine, SchemeError, Target};
use crate::krylov::{KrylovStats, LinearOperator};
use crate::scalar::{axpy, Scalar};

/// `u'(t) = A u(t) + g(t, u(t))`.
pub trait SemilinearProblem<T: Scalar>: Send + Sync {
    fn dim(&self) -> usize;

    fn linear(&self) -> Arc<dyn LinearOperator<T>>;

    /// Writes `g(t, u)` into `out`.
    fn nonlinear(&self, t: f64, u: &[T], out: &mut [T]);
}

/// How the scalings of one batch are handed to the engine.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ExecutionMode {
    /// One engine call per batch covering all its scalings.
    #[default]
    Batched,
    /// One engine call per scaling, run on the rayon pool.
    ParallelStages,
}

/// Work counters of one or more steps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepStats {
    /// Batches executed, i.e. sequential φ-evaluations.
    pub engine_calls: usize,
    /// Calls actually issued to the engine (larger in parallel mode).
    pub engine_invocations: usize,
    pub nonlinear_evals: usize,
    pub krylov: KrylovStats,
}

impl StepStats {
    pub fn accumulate(&mut self, other: &StepStats) {
        self.engine_calls += other.engine_calls;
        self.engine_invocations += other.engine_invocations;
        self.nonlinear_evals += other.nonlinear_evals;
        self.krylov.accumulate(&other.krylov);
    }
}

/// State of one step `t_n → t_n + h`.
pub struct StepContext<'a, T: Scalar> {
    pub problem: &'a dyn SemilinearProblem<T>,
    pub t: f64,
    pub u: &'a [T],
    pub h: f64,
    pub mode: ExecutionMode,
    pub stats: StepStats,
}

impl<'a, T: Scalar> StepContext<'a, T> {
    pub fn new(problem: &'a dyn SemilinearProblem<T>, t: f64, u: &'a [T], h: f64) -> Self {
        Self { problem, t, u, h, mode: ExecutionMode::Batched, stats: StepStats::default() }
    }

    pub fn with_mode(mut self, mode: ExecutionMode) -> Self {
        self.mode = mode;
        self
    }
}

/// Advances one step by executing the method's batch plan.
pub fn step<T: Scalar + 'static>(
    method: &ExpRKMethod,
    ctx: &mut StepContext<'_, T>,
    engine: &dyn PhiEngine<T>,
) -> Result<Vec<T>, SchemeError> {
    let problem = ctx.problem;
    let n = problem.dim();
    if ctx.u.len() != n {
        return Err(SchemeError::DimensionMismatch { expected: n, found: ctx.u.len() });
    }
    if !(ctx.h > 0.0 && ctx.h.is_finite()) {
        return Err(SchemeError::InvalidStep(format!("step size {} must be positive", ctx.h)));
    }
    let (t, u, h) = (ctx.t, ctx.u, ctx.h);
    let s = method.stages();

    let mut g0 = vec![T::zero(); n];
    problem.nonlinear(t, u, &mut g0);
    ctx.stats.nonlinear_evals += 1;
    let mut f = problem.linear().apply_vec(u);
    axpy(T::one(), &g0, &mut f);

    // basis[0] = F, basis[j] = D_nj once stage j is assembled.
    let mut basis: Vec<Option<Vec<T>>> = vec![None; s + 1];
    basis[0] = Some(f);
    let mut stage_acc: Vec<Vec<T>> = vec![vec![T::zero(); n]; s + 1];
    let mut next_acc = vec![T::zero(); n];

    for (b, batch) in method.plan().iter().enumerate() {
        let q = batch.max_order();
        let mut vectors = vec![vec![T::zero(); n]; q + 1];
        for (k, v) in vectors.iter_mut().enumerate().skip(1) {
            for idx in 0..batch.basis_len() {
                let w = batch.weight(k, idx);
                if w == super::Q::from_integer(0) {
                    continue;
                }
                let src = basis[idx].as_ref().ok_or_else(|| SchemeError::Plan(format!("batch {b} needs D_{idx} early")))?;
                axpy(T::from_f64(h * to_f64(w)), src, v);
            }
        }
        let scalings: Vec<f64> = batch.scalings().iter().map(|&r| to_f64(r)).collect();
        let outputs = match ctx.mode {
            ExecutionMode::Batched => {
                let res = engine.evaluate(h, &vectors, &scalings).map_err(|source| SchemeError::Engine { batch: b, source })?;
                ctx.stats.engine_invocations += 1;
                ctx.stats.krylov.accumulate(&res.stats);
                res.outputs
            }
            ExecutionMode::ParallelStages => {
                let parts: Vec<_> = scalings.par_iter().map(|&rho| engine.evaluate(h, &vectors, &[rho])).collect();
                let mut outs = Vec::with_capacity(parts.len());
                for part in parts {
                    let mut res = part.map_err(|source| SchemeError::Engine { batch: b, source })?;
                    ctx.stats.engine_invocations += 1;
                    ctx.stats.krylov.accumulate(&res.stats);
                    outs.push(res.outputs.remove(0));
                }
                outs
            }
        };
        ctx.stats.engine_calls += 1;

        for (out, target) in outputs.iter().zip(batch.targets()) {
            let acc = match target {
                Target::Stage(i) => &mut stage_acc[*i],
                Target::Next => &mut next_acc,
            };
            axpy(T::one(), out, acc);
        }
        for i in 2..=s {
            if method.completion_batch(i) != b {
                continue;
            }
            let mut stage = u.to_vec();
            axpy(T::one(), &stage_acc[i], &mut stage);
            if stage.iter().any(|x| !x.is_finite()) {
                return Err(SchemeError::NonFinite { stage: i });
            }
            let mut d = vec![T::zero(); n];
            problem.nonlinear(t + to_f64(method.nodes()[i - 1]) * h, &stage, &mut d);
            ctx.stats.nonlinear_evals += 1;
            axpy(-T::one(), &g0, &mut d);
            basis[i] = Some(d);
        }
    }

    let mut next = u.to_vec();
    axpy(T::one(), &next_acc, &mut next);
    if next.iter().any(|x| !x.is_finite()) {
        return Err(SchemeError::NonFinite { stage: s + 1 });
    }
    Ok(next)
}

/// Endpoint and work of a constant-step integration.
#[derive(Clone, Debug)]
pub struct IntegrationResult<T> {
    pub u: Vec<T>,
    pub steps: usize,
    pub stats: StepStats,
}

/// `steps` equal steps from `t0` to `t_end`.
pub fn integrate<T: Scalar + 'static>(
    method: &ExpRKMethod,
    problem: &dyn SemilinearProblem<T>,
    engine: &dyn PhiEngine<T>,
    u0: &[T],
    t0: f64,
    t_end: f64,
    steps: usize,
    mode: ExecutionMode,
) -> Result<IntegrationResult<T>, SchemeError> {
    if steps == 0 {
        return Err(SchemeError::InvalidStep("at least one step is required".into()));
    }
    if !(t_end > t0) {
        return Err(SchemeError::InvalidStep(format!("final time {t_end} must exceed {t0}")));
    }
    let h = (t_end - t0) / steps as f64;
    let mut u = u0.to_vec();
    let mut stats = StepStats::default();
    for n in 0..steps {
        let t = t0 + n as f64 * h;
        let mut ctx = StepContext::new(problem, t, &u, h).with_mode(mode);
        let next = step(method, &mut ctx, engine).map_err(|e| SchemeError::Step { step: n, source: Box::new(e) })?;
        stats.accumulate(&ctx.stats);
        u = next;
    }
    Ok(IntegrationResult { u, steps, stats })
}
