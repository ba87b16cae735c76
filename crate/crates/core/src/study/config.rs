use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::StudyError;
use crate::problems::PROBLEM_NAMES;
use crate::schemes::{method_by_name, EngineKind, EngineSettings};

/// Parameters of one convergence study; readable from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub problem: String,
    pub size: usize,
    pub methods: Vec<String>,
    pub steps: Vec<usize>,
    pub t_final: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Initial Krylov dimension.
    #[serde(default = "default_krylov_dim")]
    pub krylov_dim: usize,
    #[serde(default = "default_iom")]
    pub iom: usize,
    /// Use dense φ stacks instead of Krylov (small systems only).
    #[serde(default)]
    pub dense_oracle: bool,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    /// Reference cache directory; `None` disables caching.
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    /// Run independent `(method, N)` pairs on the thread pool.
    #[serde(default)]
    pub parallel: bool,
}

fn default_tol() -> f64 {
    1e-12
}

fn default_krylov_dim() -> usize {
    1
}

fn default_iom() -> usize {
    2
}

const HIGH_ORDER: [&str; 4] = ["expRK4s5", "expRK4s6", "expRK5s8", "expRK5s10"];

impl StudyConfig {
    fn preset(problem: &str, size: usize, steps: Vec<usize>, t_final: f64) -> Self {
        Self {
            problem: problem.into(),
            size,
            methods: HIGH_ORDER.iter().map(|s| s.to_string()).collect(),
            steps,
            t_final,
            tol: default_tol(),
            krylov_dim: default_krylov_dim(),
            iom: default_iom(),
            dense_oracle: false,
            out: None,
            seed: 0,
            cache_dir: None,
            parallel: false,
        }
    }

    /// Parabolic problem, 200 points, `T = 1`, `N = 4 … 64`.
    pub fn example1() -> Self {
        Self::preset("parabolic1d", 200, vec![4, 8, 16, 32, 64], 1.0)
    }

    /// Schrödinger problem, 64 modes, `T = 3`, `N = 64 … 1024`.
    pub fn example2() -> Self {
        Self::preset("nls1d", 64, vec![64, 128, 256, 512, 1024], 3.0)
    }

    /// Gray–Scott problem, 64² grid, `T = 2`, `N = 32 … 512`.
    pub fn example3() -> Self {
        Self::preset("grayscott2d", 64, vec![32, 64, 128, 256, 512], 2.0)
    }

    pub fn by_preset(name: &str) -> Option<Self> {
        match name {
            "example1" => Some(Self::example1()),
            "example2" => Some(Self::example2()),
            "example3" => Some(Self::example3()),
            _ => None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, StudyError> {
        toml::from_str(text).map_err(|e| StudyError::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self, StudyError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| StudyError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn engine_settings(&self) -> EngineSettings {
        EngineSettings {
            kind: if self.dense_oracle { EngineKind::Dense } else { EngineKind::Auto },
            tolerance: self.tol,
            initial_krylov_dim: self.krylov_dim,
            iom_length: self.iom,
        }
    }

    pub fn validate(&self) -> Result<(), StudyError> {
        let bad = |m: String| Err(StudyError::Config(m));
        if !PROBLEM_NAMES.iter().any(|p| p.eq_ignore_ascii_case(&self.problem)) {
            return bad(format!("unknown problem '{}' (known: {})", self.problem, PROBLEM_NAMES.join(", ")));
        }
        if self.methods.is_empty() {
            return bad("no methods given".into());
        }
        for m in &self.methods {
            method_by_name(m).map_err(|e| StudyError::Config(e.to_string()))?;
        }
        if self.steps.is_empty() || self.steps[0] == 0 {
            return bad("step counts must be non-empty and positive".into());
        }
        if self.steps.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("step counts {:?} are not strictly increasing", self.steps));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return bad(format!("final time {} must be positive", self.t_final));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return bad(format!("tolerance {} outside (0, 1)", self.tol));
        }
        if self.krylov_dim == 0 || self.iom == 0 {
            return bad("krylov_dim and iom must be positive".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for p in ["example1", "example2", "example3"] {
            StudyConfig::by_preset(p).unwrap().validate().unwrap();
        }
        assert!(StudyConfig::by_preset("example4").is_none());
    }

    #[test]
    fn toml_round_trip_and_defaults() {
        let text = r#"
            problem = "parabolic1d"
            size = 50
            methods = ["expRK4s6"]
            steps = [4, 8]
            t_final = 1.0
        "#;
        let c = StudyConfig::from_toml(text).unwrap();
        assert_eq!(c.tol, 1e-12);
        assert_eq!((c.krylov_dim, c.iom, c.dense_oracle), (1, 2, false));
        assert_eq!(StudyConfig::from_toml(&c.to_toml()).unwrap(), c);
        assert!(StudyConfig::from_toml("problem = 3").is_err());
        assert!(StudyConfig::from_toml(&format!("{text}\nbogus = 1")).is_err());
    }

    #[test]
    fn invalid_configs_rejected() {
        let base = StudyConfig::example1();
        let cases: Vec<Box<dyn Fn(&mut StudyConfig)>> = vec![
            Box::new(|c| c.steps = vec![8, 4]),
            Box::new(|c| c.steps = vec![8, 8]),
            Box::new(|c| c.steps.clear()),
            Box::new(|c| c.t_final = 0.0),
            Box::new(|c| c.methods = vec!["rk4".into()]),
            Box::new(|c| c.problem = "heat".into()),
            Box::new(|c| c.tol = 0.0),
        ];
        for f in cases {
            let mut c = base.clone();
            f(&mut c);
            let e = c.validate().unwrap_err();
            assert_eq!(e.exit_code(), 2);
        }
    }
}
