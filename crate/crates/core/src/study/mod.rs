//! Convergence studies: run methods over a list of step counts, measure
//! max-norm errors against exact or reference solutions, fit observed orders
//! and write CSV, gnuplot and SVG output.

mod config;
mod fit;
mod plot;
mod run;

pub use config::StudyConfig;
pub use fit::{fit_order, pre_floor_segment, FLOOR_FACTOR};
pub use plot::{gnuplot_script, svg_plot};
pub use run::{run_study, write_outputs, ConvergenceReport, MethodOrder, StudyRow, StudyOutputs, CSV_HEADER};

use crate::problems::ProblemError;

#[derive(Debug, thiserror::Error)]
pub enum StudyError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("integration of {method} with N = {steps} failed: {message}")]
    Integration { method: String, steps: usize, message: String },
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl StudyError {
    /// Process exit code: 2 for configuration and name errors, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            StudyError::Config(_) | StudyError::Problem(ProblemError::UnknownProblem(_) | ProblemError::Parameter(_)) => 2,
            _ => 3,
        }
    }
}
