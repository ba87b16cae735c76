//! Numerical verification of the stiff order conditions (orders up to five)
//! of explicit exponential Runge–Kutta methods.
//!
//! Each condition is multilinear in the arbitrary matrices `J, K, L` and the
//! bilinear map `B`, so it is checked on random probes: vanishing on random
//! instances implies vanishing identically with probability one.

mod check;
mod probe;

pub use check::{
    check_conditions, psi, psi_stage, verify_claims, verify_claims_with, ConditionResult, Mismatch,
    OrderConditionReport, DEFAULT_PROBE_COUNT, DEFAULT_SEED, DEFAULT_TOLERANCE,
};
pub use probe::{standard_probes, ConditionProbe, PROBE_DIM, PROBE_NORM};

use crate::matfun::MatfunError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OrderCondError {
    #[error("probe error: {0}")]
    Probe(String),
    #[error("at least {required} probes required, got {found}")]
    TooFewProbes { required: usize, found: usize },
    #[error("index out of range: {0}")]
    Index(String),
    #[error("psi_(2,2) vanishes on probe with seed {seed}; the probe cannot detect violations")]
    VacuousProbe { seed: u64 },
    #[error(transparent)]
    Matfun(#[from] MatfunError),
    #[error("method {method} does not match its claimed conditions:\n{}", format_mismatches(.mismatches))]
    ClaimMismatch { method: String, mismatches: Vec<Mismatch> },
}

fn format_mismatches(m: &[Mismatch]) -> String {
    m.iter().map(|x| format!("  {x}")).collect::<Vec<_>>().join("\n")
}
