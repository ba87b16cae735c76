//! Exponential Runge–Kutta schemes: analytic tableaux, batched evaluation
//! plans and the stepping loop that executes them through a φ-engine.

mod catalog;
mod engine;
mod method;
mod phipoly;
mod plan;
mod step;
mod tableau;

pub use catalog::{
    build_exp_rk2s2, build_exp_rk3s3, build_exp_rk4s5, build_exp_rk4s6, build_exp_rk5s10, build_exp_rk5s8,
    build_legacy, method_by_name, Rk5s10Nodes, METHOD_NAMES,
};
pub use engine::{make_engine, DenseEngine, DiagonalEngine, EngineKind, EngineSettings, KrylovEngine, PhiEngine};
pub use method::{ConditionClaim, ExpRKMethod, CONDITION_COUNT};
pub use phipoly::{PhiPolynomial, PhiTerm};
pub use plan::{check_explicit, check_plan_matches, execute_symbolically, EvaluationBatch, SymbolicExecution, Target};
pub use step::{integrate, step, ExecutionMode, IntegrationResult, SemilinearProblem, StepContext, StepStats};
pub use tableau::Tableau;

use crate::krylov::KrylovError;

/// Exact rational scalar used for nodes and coefficients.
pub type Q = num_rational::Ratio<i128>;

/// `n / d` as a [`Q`].
pub fn rational(n: i128, d: i128) -> Q {
    Q::new(n, d)
}

pub fn to_f64(x: Q) -> f64 {
    // Numerator and denominator stay far below 2^53 for every catalog method.
    *x.numer() as f64 / *x.denom() as f64
}

/// Parses `"3/10"`, `"1"` or a decimal such as `"0.3"` into a node.
pub fn parse_rational(text: &str) -> Result<Q, SchemeError> {
    let t = text.trim();
    if let Ok(q) = t.parse::<Q>() {
        return Ok(q);
    }
    let x: f64 = t.parse().map_err(|_| SchemeError::Constraint(format!("cannot parse node '{text}'")))?;
    rational_from_f64(x)
}

/// Closest small rational to `x` (continued fractions).
pub fn rational_from_f64(x: f64) -> Result<Q, SchemeError> {
    Q::approximate_float(x).ok_or_else(|| SchemeError::Constraint(format!("node {x} is not representable")))
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SchemeError {
    #[error("invalid phi term: {0}")]
    InvalidTerm(String),
    #[error("node {name} = {value} outside (0, 1]")]
    NodeOutOfRange { name: String, value: String },
    #[error("constraint violated: {0}")]
    Constraint(String),
    #[error("node equation residual {residual:e} exceeds {tolerance:e}")]
    NodeEquation { residual: f64, tolerance: f64 },
    #[error("unknown method '{0}'")]
    UnknownMethod(String),
    #[error("batch plan: {0}")]
    Plan(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid step: {0}")]
    InvalidStep(String),
    #[error("engine failure in batch {batch}: {source}")]
    Engine { batch: usize, source: KrylovError },
    #[error("step {step} failed: {source}")]
    Step { step: usize, source: Box<SchemeError> },
    #[error("non-finite stage value in stage {stage}")]
    NonFinite { stage: usize },
}
