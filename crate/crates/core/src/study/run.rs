use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use super::{fit_order, gnuplot_script, svg_plot, StudyConfig, StudyError};
use crate::krylov::KrylovStats;
use crate::problems::{
    max_norm_error, problem_by_name, reference_solution, AnyProblem, CacheScalar, ReferenceCache, ReferenceOptions,
    ReferenceSource, SemilinearSystem,
};
use crate::schemes::{integrate, make_engine, method_by_name, ExecutionMode, SemilinearProblem};

pub const CSV_HEADER: &str = "method,N,error,seconds,engine_calls";

/// One `(method, N)` run.
#[derive(Clone, Debug, PartialEq)]
pub struct StudyRow {
    pub method: String,
    pub steps: usize,
    pub error: f64,
    pub seconds: f64,
    pub engine_calls: usize,
    pub nonlinear_evals: usize,
    pub krylov: KrylovStats,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodOrder {
    pub method: String,
    /// `None` when fewer than two pre-floor points exist.
    pub order: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub config: StudyConfig,
    pub rows: Vec<StudyRow>,
    pub orders: Vec<MethodOrder>,
    pub reference_source: ReferenceSource,
    pub reference_steps: usize,
    /// Difference between the reference and its half-step counterpart.
    pub reference_self_check: Option<f64>,
    pub warnings: Vec<String>,
}

impl ConvergenceReport {
    pub fn order(&self, method: &str) -> Option<f64> {
        self.orders.iter().find(|o| o.method == method).and_then(|o| o.order)
    }

    pub fn rows_for<'a>(&'a self, method: &'a str) -> impl Iterator<Item = &'a StudyRow> + 'a {
        self.rows.iter().filter(move |r| r.method == method)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{CSV_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{:e},{:.6},{}", r.method, r.steps, r.error, r.seconds, r.engine_calls);
        }
        out
    }

    pub fn summary(&self) -> String {
        let c = &self.config;
        let mut out = format!("problem {} (size {}), T = {}, tol {:e}\n", c.problem, c.size, c.t_final, c.tol);
        let _ = write!(out, "reference: {:?}", self.reference_source);
        if self.reference_steps > 0 {
            let _ = write!(out, ", {} steps", self.reference_steps);
        }
        if let Some(s) = self.reference_self_check {
            let _ = write!(out, ", self-check {s:.3e}");
        }
        out.push('\n');
        let _ = writeln!(out, "{:<12} {:>8} {:>14} {:>10} {:>12}", "method", "N", "error", "seconds", "engine_calls");
        for r in &self.rows {
            let _ = writeln!(out, "{:<12} {:>8} {:>14.6e} {:>10.3} {:>12}", r.method, r.steps, r.error, r.seconds, r.engine_calls);
        }
        for o in &self.orders {
            match o.order {
                Some(p) => {
                    let _ = writeln!(out, "fitted order {:<12} {p:.3}", o.method);
                }
                None => {
                    let _ = writeln!(out, "fitted order {:<12} n/a", o.method);
                }
            }
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }
}

/// Paths written by [`write_outputs`].
#[derive(Clone, Debug)]
pub struct StudyOutputs {
    pub csv: PathBuf,
    pub gnuplot: PathBuf,
    pub svg: PathBuf,
    pub summary: PathBuf,
}

fn run_typed<T: CacheScalar>(cfg: &StudyConfig, problem: &SemilinearSystem<T>) -> Result<ConvergenceReport, StudyError> {
    let finest = *cfg.steps.last().expect("validated");
    let mut ref_opts = ReferenceOptions::for_study(finest);
    if let Some(dir) = &cfg.cache_dir {
        ref_opts = ref_opts.with_cache(ReferenceCache::new(dir));
    }
    let reference = reference_solution(problem, cfg.t_final, &ref_opts)?;
    let engine = make_engine(problem.linear(), &cfg.engine_settings())
        .map_err(|e| StudyError::Config(format!("engine: {e}")))?;

    let jobs: Vec<(String, usize)> =
        cfg.methods.iter().flat_map(|m| cfg.steps.iter().map(move |&n| (m.clone(), n))).collect();
    let run_one = |(name, n): &(String, usize)| -> Result<StudyRow, StudyError> {
        let method = method_by_name(name).map_err(|e| StudyError::Config(e.to_string()))?;
        let start = Instant::now();
        let res = integrate(&method, problem, engine.as_ref(), problem.initial(), 0.0, cfg.t_final, *n, ExecutionMode::Batched)
            .map_err(|e| StudyError::Integration { method: name.clone(), steps: *n, message: e.to_string() })?;
        let seconds = start.elapsed().as_secs_f64();
        let error = max_norm_error(&res.u, &reference.u)?;
        if !error.is_finite() {
            return Err(StudyError::Integration { method: name.clone(), steps: *n, message: "non-finite error".into() });
        }
        debug_assert_eq!(res.stats.engine_calls, n * method.batch_count());
        Ok(StudyRow {
            method: method.name().to_string(),
            steps: *n,
            error,
            seconds,
            engine_calls: res.stats.engine_calls,
            nonlinear_evals: res.stats.nonlinear_evals,
            krylov: res.stats.krylov,
        })
    };
    let rows: Vec<StudyRow> = if cfg.parallel {
        jobs.par_iter().map(run_one).collect::<Result<_, _>>()?
    } else {
        jobs.iter().map(run_one).collect::<Result<_, _>>()?
    };

    let mut warnings = Vec::new();
    let orders = cfg
        .methods
        .iter()
        .map(|m| {
            let name = method_by_name(m).map(|x| x.name().to_string()).unwrap_or_else(|_| m.clone());
            let (steps, errors): (Vec<usize>, Vec<f64>) =
                rows.iter().filter(|r| r.method == name).map(|r| (r.steps, r.error)).unzip();
            let order = fit_order(&steps, &errors, cfg.tol);
            if order.is_none() {
                warnings.push(format!("{name}: fewer than two points above the tolerance floor, order undefined"));
                log::warn!("{name}: order undefined");
            }
            MethodOrder { method: name, order }
        })
        .collect();
    if let Some(s) = reference.self_check {
        if s >= 1e-10 {
            warnings.push(format!("reference self-check {s:.3e} exceeds 1e-10"));
        }
    }
    Ok(ConvergenceReport {
        config: cfg.clone(),
        rows,
        orders,
        reference_source: reference.source,
        reference_steps: reference.steps,
        reference_self_check: reference.self_check,
        warnings,
    })
}

/// Runs every `(method, N)` pair of `config`.
pub fn run_study(config: &StudyConfig) -> Result<ConvergenceReport, StudyError> {
    config.validate()?;
    match problem_by_name(&config.problem, config.size)? {
        AnyProblem::Real(p) => run_typed(config, &p),
        AnyProblem::Complex(p) => run_typed(config, &p),
    }
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), StudyError> {
    let io = |e: std::io::Error| StudyError::Io { path: path.display().to_string(), message: e.to_string() };
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

/// Writes `convergence.csv`, `convergence.gp`, `convergence.svg` and
/// `summary.txt` into `dir`.
pub fn write_outputs(report: &ConvergenceReport, dir: &Path) -> Result<StudyOutputs, StudyError> {
    fs::create_dir_all(dir).map_err(|e| StudyError::Io { path: dir.display().to_string(), message: e.to_string() })?;
    let out = StudyOutputs {
        csv: dir.join("convergence.csv"),
        gnuplot: dir.join("convergence.gp"),
        svg: dir.join("convergence.svg"),
        summary: dir.join("summary.txt"),
    };
    write_atomic(&out.csv, &report.to_csv())?;
    write_atomic(&out.gnuplot, &gnuplot_script(report))?;
    write_atomic(&out.svg, &svg_plot(report))?;
    write_atomic(&out.summary, &report.summary())?;
    Ok(out)
}
