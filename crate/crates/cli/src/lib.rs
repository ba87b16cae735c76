//! `exprk` command-line interface: convergence studies, order-condition
//! verification, batch accounting and reference-cache management.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use exprk_core::orderconds::{standard_probes, verify_claims_with, OrderCondError, DEFAULT_SEED};
use exprk_core::problems::{problem_by_name, reference_solution, AnyProblem, ReferenceCache, ReferenceOptions};
use exprk_core::schemes::{method_by_name, ExpRKMethod, Target, METHOD_NAMES, Q};
use exprk_core::study::{run_study, write_outputs, StudyConfig, StudyError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "exprk", version, about = "Exponential Runge-Kutta convergence and verification harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a convergence study and write CSV, gnuplot and SVG output.
    Run(RunArgs),
    /// Check each method's claimed stiff order conditions.
    Verify(VerifyArgs),
    /// Print stages, batches and φ orders per batch.
    WorkTable(WorkTableArgs),
    /// Manage the reference-solution cache.
    Cache(CacheArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML study configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in configuration: example1, example2 or example3.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long)]
    pub size: Option<usize>,
    /// Comma-separated method names.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    /// Comma-separated step counts.
    #[arg(long, value_delimiter = ',')]
    pub steps: Option<Vec<usize>>,
    #[arg(long)]
    pub tfinal: Option<f64>,
    /// φ-engine tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Initial Krylov dimension.
    #[arg(long = "krylov-dim")]
    pub krylov_dim: Option<usize>,
    /// Incomplete orthogonalisation length.
    #[arg(long)]
    pub iom: Option<usize>,
    /// Use dense φ stacks instead of Krylov.
    #[arg(long)]
    pub dense_oracle: bool,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Reference cache directory.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Run (method, N) pairs in parallel.
    #[arg(long)]
    pub parallel: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Methods to check; all catalog methods when empty.
    pub methods: Vec<String>,
    #[arg(long, default_value_t = 5)]
    pub probes: usize,
    #[arg(long, default_value_t = 6)]
    pub dim: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Scale the last update weight by 1.01 before checking (test fixture).
    #[arg(long, hide = true)]
    pub corrupt: bool,
}

#[derive(Debug, Args)]
pub struct WorkTableArgs {
    /// Methods to list; all catalog methods when empty.
    pub methods: Vec<String>,
}

#[derive(Debug, Args)]
pub struct CacheArgs {
    #[arg(long, default_value = "reference-cache")]
    pub dir: PathBuf,
    #[command(subcommand)]
    pub action: CacheAction,
}

#[derive(Debug, Subcommand)]
pub enum CacheAction {
    /// List cached references.
    List,
    /// Delete all cached references.
    Clear,
    /// Compute and store the reference for a study preset or problem.
    Build {
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        problem: Option<String>,
        #[arg(long)]
        size: Option<usize>,
        #[arg(long)]
        tfinal: Option<f64>,
        /// Finest study step count; the reference uses eight times as many.
        #[arg(long)]
        finest: Option<usize>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
    #[error(transparent)]
    Study(#[from] StudyError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
            CliError::Study(e) => e.exit_code(),
        }
    }
}

/// Runs a parsed command, writing its report to `out`; returns the exit code.
pub fn execute(cli: Cli, out: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Run(a) => cmd_run(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::WorkTable(a) => cmd_work_table(a, out),
        Command::Cache(a) => cmd_cache(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Resolves the study configuration from file or preset plus flag overrides.
pub fn study_config(a: &RunArgs) -> Result<StudyConfig, CliError> {
    let mut cfg = match (&a.config, &a.preset) {
        (Some(_), Some(_)) => return Err(CliError::Usage("--config and --preset are mutually exclusive".into())),
        (Some(path), None) => StudyConfig::from_file(path).map_err(|e| match e {
            StudyError::Io { .. } => CliError::Usage(e.to_string()),
            other => CliError::Study(other),
        })?,
        (None, Some(p)) => StudyConfig::by_preset(p).ok_or_else(|| CliError::Usage(format!("unknown preset '{p}'")))?,
        (None, None) => {
            let problem = a.problem.clone().ok_or_else(|| CliError::Usage("give --config, --preset or --problem".into()))?;
            let base = match problem.as_str() {
                "nls1d" => StudyConfig::example2(),
                "grayscott2d" => StudyConfig::example3(),
                _ => StudyConfig::example1(),
            };
            StudyConfig { problem, ..base }
        }
    };
    if let Some(v) = &a.problem {
        cfg.problem = v.clone();
    }
    if let Some(v) = a.size {
        cfg.size = v;
    }
    if let Some(v) = &a.methods {
        cfg.methods = v.clone();
    }
    if let Some(v) = &a.steps {
        cfg.steps = v.clone();
    }
    if let Some(v) = a.tfinal {
        cfg.t_final = v;
    }
    if let Some(v) = a.tol {
        cfg.tol = v;
    }
    if let Some(v) = a.krylov_dim {
        cfg.krylov_dim = v;
    }
    if let Some(v) = a.iom {
        cfg.iom = v;
    }
    if a.dense_oracle {
        cfg.dense_oracle = true;
    }
    if let Some(v) = &a.out {
        cfg.out = Some(v.clone());
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = &a.cache_dir {
        cfg.cache_dir = Some(v.clone());
    }
    if a.parallel {
        cfg.parallel = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_run(a: RunArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = study_config(&a)?;
    let report = run_study(&cfg)?;
    write!(out, "{}", report.summary()).map_err(io_err)?;
    if let Some(dir) = &cfg.out {
        let files = write_outputs(&report, dir)?;
        writeln!(out, "wrote {}", files.csv.display()).map_err(io_err)?;
        writeln!(out, "wrote {}", files.gnuplot.display()).map_err(io_err)?;
        writeln!(out, "wrote {}", files.svg.display()).map_err(io_err)?;
    }
    Ok(EXIT_OK)
}

fn resolve_methods(names: &[String]) -> Result<Vec<ExpRKMethod>, CliError> {
    let names: Vec<String> =
        if names.is_empty() { METHOD_NAMES.iter().map(|s| s.to_string()).collect() } else { names.to_vec() };
    names.iter().map(|n| method_by_name(n).map_err(|e| CliError::Usage(e.to_string()))).collect()
}

/// Copy of `m` with its last update weight scaled by 1.01.
pub fn corrupt(m: &ExpRKMethod) -> Result<ExpRKMethod, CliError> {
    m.with_scaled_entry((m.stages(), 0), Q::new(101, 100)).map_err(|e| CliError::Runtime(e.to_string()))
}

fn cmd_verify(a: VerifyArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let mut methods = resolve_methods(&a.methods)?;
    if a.corrupt {
        methods = methods.iter().map(corrupt).collect::<Result<_, _>>()?;
    }
    if a.probes < 3 || a.dim == 0 {
        return Err(CliError::Usage("need at least 3 probes of positive dimension".into()));
    }
    let probes = standard_probes(a.probes, a.dim, a.seed);
    let mut code = EXIT_OK;
    for m in &methods {
        match verify_claims_with(m, &probes, a.tol) {
            Ok(report) => {
                write!(out, "{report}").map_err(io_err)?;
                writeln!(out, "{}: all claims verified\n", m.name()).map_err(io_err)?;
            }
            Err(OrderCondError::ClaimMismatch { method, mismatches }) => {
                let report = exprk_core::orderconds::check_conditions(m, &probes, a.tol)
                    .map_err(|e| CliError::Runtime(e.to_string()))?;
                write!(out, "{report}").map_err(io_err)?;
                writeln!(out, "{method}: {} claim(s) not met", mismatches.len()).map_err(io_err)?;
                for x in &mismatches {
                    writeln!(out, "  {x}").map_err(io_err)?;
                }
                writeln!(out).map_err(io_err)?;
                code = EXIT_VERIFY;
            }
            Err(e) => return Err(CliError::Runtime(e.to_string())),
        }
    }
    Ok(code)
}

/// Stages, batches per step and φ orders used by each batch.
pub fn work_table(methods: &[ExpRKMethod]) -> String {
    let mut s = format!("{:<10} {:>6} {:>8}  {}\n", "method", "stages", "batches", "phi orders per batch [outputs]");
    for m in methods {
        let batches: Vec<String> = m
            .plan()
            .iter()
            .map(|b| {
                let orders: Vec<String> = b.orders_used().iter().map(|k| k.to_string()).collect();
                let targets: Vec<String> = b
                    .targets()
                    .iter()
                    .map(|t| match t {
                        Target::Stage(i) => format!("U{i}"),
                        Target::Next => "u+".into(),
                    })
                    .collect();
                format!("{{{}}}[{}]", orders.join(","), targets.join(","))
            })
            .collect();
        s.push_str(&format!("{:<10} {:>6} {:>8}  {}\n", m.name(), m.stages(), m.batch_count(), batches.join(" ")));
    }
    s
}

fn cmd_work_table(a: WorkTableArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let methods = resolve_methods(&a.methods)?;
    write!(out, "{}", work_table(&methods)).map_err(io_err)?;
    Ok(EXIT_OK)
}

fn cmd_cache(a: CacheArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let cache = ReferenceCache::new(&a.dir);
    let rt = |e: exprk_core::problems::ProblemError| CliError::Runtime(e.to_string());
    match a.action {
        CacheAction::List => {
            let entries = cache.list().map_err(rt)?;
            writeln!(out, "{} entries in {}", entries.len(), a.dir.display()).map_err(io_err)?;
            for e in entries {
                match e.header {
                    Ok(h) => writeln!(
                        out,
                        "{}  field={} n={} T={} steps={} self-check={:.3e} bytes={}",
                        e.path.display(),
                        if h.field_tag == 0 { "real" } else { "complex" },
                        h.n,
                        h.t_end,
                        h.steps,
                        h.self_check,
                        e.bytes
                    ),
                    Err(err) => writeln!(out, "{}  invalid: {err}", e.path.display()),
                }
                .map_err(io_err)?;
            }
        }
        CacheAction::Clear => {
            let n = cache.clear().map_err(rt)?;
            writeln!(out, "removed {n} entries").map_err(io_err)?;
        }
        CacheAction::Build { preset, problem, size, tfinal, finest } => {
            let base = match (&preset, &problem) {
                (Some(p), _) => StudyConfig::by_preset(p).ok_or_else(|| CliError::Usage(format!("unknown preset '{p}'")))?,
                (None, Some(p)) => StudyConfig { problem: p.clone(), ..StudyConfig::example1() },
                (None, None) => return Err(CliError::Usage("give --preset or --problem".into())),
            };
            let problem_name = problem.unwrap_or(base.problem.clone());
            let size = size.unwrap_or(base.size);
            let t_end = tfinal.unwrap_or(base.t_final);
            let finest = finest.unwrap_or(*base.steps.last().expect("presets have steps"));
            let p = problem_by_name(&problem_name, size).map_err(|e| CliError::Usage(e.to_string()))?;
            let opts = ReferenceOptions::for_study(finest).with_cache(cache);
            let (source, check) = match &p {
                AnyProblem::Real(s) => reference_solution(s, t_end, &opts).map(|r| (r.source, r.self_check)),
                AnyProblem::Complex(s) => reference_solution(s, t_end, &opts).map(|r| (r.source, r.self_check)),
            }
            .map_err(rt)?;
            writeln!(out, "{problem_name} size {size} T = {t_end}: {source:?}, self-check {check:?}").map_err(io_err)?;
        }
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("exprk").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flag_overrides_apply() {
        let Command::Run(a) = parse(&["run", "--preset", "example1", "--methods", "expRK4s6", "--steps", "2,4", "--tol", "1e-10"]).command
        else {
            panic!()
        };
        let c = study_config(&a).unwrap();
        assert_eq!(c.methods, vec!["expRK4s6"]);
        assert_eq!(c.steps, vec![2, 4]);
        assert_eq!(c.tol, 1e-10);
        assert_eq!(c.problem, "parabolic1d");
    }

    #[test]
    fn invalid_run_configs_are_usage_errors() {
        let Command::Run(a) = parse(&["run", "--preset", "example1", "--steps", "8,4"]).command else { panic!() };
        assert_eq!(study_config(&a).unwrap_err().exit_code(), EXIT_USAGE);
        let Command::Run(a) = parse(&["run"]).command else { panic!() };
        assert_eq!(study_config(&a).unwrap_err().exit_code(), EXIT_USAGE);
        let Command::Run(a) = parse(&["run", "--preset", "nope"]).command else { panic!() };
        assert_eq!(study_config(&a).unwrap_err().exit_code(), EXIT_USAGE);
    }

    #[test]
    fn work_table_counts() {
        let t = work_table(&resolve_methods(&[]).unwrap());
        let row = |name: &str| t.lines().find(|l| l.starts_with(&format!("{name} "))).unwrap().to_string();
        let cols = |name: &str| -> (usize, usize) {
            let r = row(name);
            let f: Vec<&str> = r.split_whitespace().collect();
            (f[1].parse().unwrap(), f[2].parse().unwrap())
        };
        assert_eq!(cols("expRK4s6"), (6, 4));
        assert_eq!(cols("expRK5s10"), (10, 5));
        assert_eq!(cols("expRK5s8"), (8, 11));
        assert_eq!(cols("expRK4s5"), (5, 6));
    }

    #[test]
    fn verify_exit_codes() {
        let mut buf = Vec::new();
        assert_eq!(execute(parse(&["verify", "expRK4s6", "expRK5s10"]), &mut buf), EXIT_OK);
        assert!(String::from_utf8(buf).unwrap().contains("all claims verified"));
        let mut buf = Vec::new();
        assert_eq!(execute(parse(&["verify", "--corrupt", "expRK4s6"]), &mut buf), EXIT_VERIFY);
        assert!(String::from_utf8(buf).unwrap().contains("condition 1"));
        assert_eq!(execute(parse(&["verify", "expRK7"]), &mut Vec::new()), EXIT_USAGE);
    }
}
