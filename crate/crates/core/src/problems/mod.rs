//! Benchmark semilinear systems `u' = Au + g(t, u)` with exact or reference
//! solutions.

mod fft;
mod grayscott;
mod nls;
mod parabolic;
mod reference;

pub use fft::Fourier;
pub use grayscott::{grayscott2d, GrayScottParams, PeriodicLaplacian2d, GRAY_SCOTT_PARAMS};
pub use nls::{nls1d, nls1d_with, nls_mass, wavenumbers, NlsParams};
pub use parabolic::parabolic1d;
pub use reference::{
    reference_solution, CacheEntry, CacheHeader, CacheScalar, ReferenceCache, ReferenceOptions, ReferenceSolution,
    ReferenceSource, CACHE_MAGIC,
    CACHE_VERSION,
};

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::krylov::LinearOperator;
use crate::scalar::Scalar;
use crate::schemes::SemilinearProblem;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProblemError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("unknown problem '{0}'")]
    UnknownProblem(String),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("cache: {0}")]
    Cache(String),
    #[error("reference computation failed: {0}")]
    Reference(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    Dirichlet,
    Periodic,
    SpectralPeriodic,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Dirichlet => "dirichlet",
            Boundary::Periodic => "periodic",
            Boundary::SpectralPeriodic => "spectral-periodic",
        })
    }
}

/// Spatial grid metadata.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub dimension: usize,
    pub points: usize,
    pub extent: f64,
    pub boundary: Boundary,
}

impl GridSpec {
    pub fn new(dimension: usize, points: usize, extent: f64, boundary: Boundary) -> Result<Self, ProblemError> {
        if !(1..=2).contains(&dimension) {
            return Err(ProblemError::Parameter(format!("spatial dimension {dimension} not in 1..=2")));
        }
        if points < 8 {
            return Err(ProblemError::Parameter(format!("{points} grid points, need at least 8")));
        }
        if !(extent > 0.0 && extent.is_finite()) {
            return Err(ProblemError::Parameter(format!("extent {extent} must be positive")));
        }
        Ok(Self { dimension, points, extent, boundary })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    Real,
    Complex,
}

type Nonlinearity<T> = Arc<dyn Fn(f64, &[T], &mut [T]) + Send + Sync>;
type Exact<T> = Arc<dyn Fn(f64) -> Vec<T> + Send + Sync>;

/// A concrete semilinear system with its initial state and metadata.
#[derive(Clone)]
pub struct SemilinearSystem<T: Scalar> {
    name: String,
    grid: GridSpec,
    linear: Arc<dyn LinearOperator<T>>,
    nonlinear: Nonlinearity<T>,
    initial: Vec<T>,
    exact: Option<Exact<T>>,
    parameters: Vec<(&'static str, f64)>,
}

impl<T: Scalar> SemilinearSystem<T> {
    pub fn new(
        name: impl Into<String>,
        grid: GridSpec,
        linear: Arc<dyn LinearOperator<T>>,
        nonlinear: impl Fn(f64, &[T], &mut [T]) + Send + Sync + 'static,
        initial: Vec<T>,
    ) -> Result<Self, ProblemError> {
        if initial.len() != linear.dim() {
            return Err(ProblemError::LengthMismatch(initial.len(), linear.dim()));
        }
        Ok(Self {
            name: name.into(),
            grid,
            linear,
            nonlinear: Arc::new(nonlinear),
            initial,
            exact: None,
            parameters: Vec::new(),
        })
    }

    pub fn with_exact(mut self, exact: impl Fn(f64) -> Vec<T> + Send + Sync + 'static) -> Self {
        self.exact = Some(Arc::new(exact));
        self
    }

    pub fn with_parameter(mut self, name: &'static str, value: f64) -> Self {
        self.parameters.push((name, value));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn initial(&self) -> &[T] {
        &self.initial
    }

    pub fn parameters(&self) -> &[(&'static str, f64)] {
        &self.parameters
    }

    pub fn parameter(&self, name: &str) -> Option<f64> {
        self.parameters.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn exact(&self, t: f64) -> Option<Vec<T>> {
        self.exact.as_ref().map(|f| f(t))
    }

    pub fn eval_nonlinear(&self, t: f64, u: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); u.len()];
        (self.nonlinear)(t, u, &mut out);
        out
    }

    /// Stable textual identity used for cache keys.
    pub fn fingerprint(&self) -> String {
        let mut s = format!(
            "{}|dim={}|points={}|extent={:e}|boundary={}|n={}",
            self.name,
            self.grid.dimension,
            self.grid.points,
            self.grid.extent,
            self.grid.boundary,
            self.linear.dim()
        );
        for (k, v) in &self.parameters {
            s.push_str(&format!("|{k}={v:e}"));
        }
        s
    }
}

impl<T: Scalar> SemilinearProblem<T> for SemilinearSystem<T> {
    fn dim(&self) -> usize {
        self.linear.dim()
    }

    fn linear(&self) -> Arc<dyn LinearOperator<T>> {
        Arc::clone(&self.linear)
    }

    fn nonlinear(&self, t: f64, u: &[T], out: &mut [T]) {
        (self.nonlinear)(t, u, out)
    }
}

/// A benchmark of either field.
#[derive(Clone)]
pub enum AnyProblem {
    Real(SemilinearSystem<f64>),
    Complex(SemilinearSystem<Complex64>),
}

/// Names accepted by [`problem_by_name`].
pub const PROBLEM_NAMES: [&str; 3] = ["parabolic1d", "nls1d", "grayscott2d"];

impl AnyProblem {
    pub fn field(&self) -> Field {
        match self {
            AnyProblem::Real(_) => Field::Real,
            AnyProblem::Complex(_) => Field::Complex,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            AnyProblem::Real(p) => p.name(),
            AnyProblem::Complex(p) => p.name(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            AnyProblem::Real(p) => p.dim(),
            AnyProblem::Complex(p) => p.dim(),
        }
    }

    pub fn has_exact(&self) -> bool {
        match self {
            AnyProblem::Real(p) => p.has_exact(),
            AnyProblem::Complex(p) => p.has_exact(),
        }
    }

    pub fn fingerprint(&self) -> String {
        match self {
            AnyProblem::Real(p) => p.fingerprint(),
            AnyProblem::Complex(p) => p.fingerprint(),
        }
    }
}

/// Builds a benchmark by name; `size` is the grid or mode count.
pub fn problem_by_name(name: &str, size: usize) -> Result<AnyProblem, ProblemError> {
    match name.to_ascii_lowercase().as_str() {
        "parabolic1d" => Ok(AnyProblem::Real(parabolic1d(size)?)),
        "nls1d" => Ok(AnyProblem::Complex(nls1d(size)?)),
        "grayscott2d" => Ok(AnyProblem::Real(grayscott2d(size)?)),
        _ => Err(ProblemError::UnknownProblem(name.to_string())),
    }
}

/// `max_i |a_i − b_i|`.
pub fn max_norm_error<T: Scalar>(u_num: &[T], u_ref: &[T]) -> Result<f64, ProblemError> {
    if u_num.len() != u_ref.len() {
        return Err(ProblemError::LengthMismatch(u_num.len(), u_ref.len()));
    }
    Ok(u_num.iter().zip(u_ref).map(|(&a, &b)| (a - b).modulus()).fold(0.0, f64::max))
}
