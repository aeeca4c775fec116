//! Experiment configuration and the flat `key = value` config file format.
//!
//! Keys mirror the `sweep` flag names without the leading dashes. Lists are
//! comma separated. `#` starts a comment.
//!
//! ```text
//! d = 3
//! p = 0.9
//! q = 0.7
//! budgets = 1,3,6,10,15,20
//! algorithms = mv,oracle_wmv,prior,alg1,alg2
//! stage-one = sdp
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crowdlabel::budgets::stage1_recommendation;
use crowdlabel::cluster::sdp::SdpConfig;
use crowdlabel::inference::{Algorithm, PipelineConfig, StageOneMethod};
use crowdlabel::linalg::JacobiConfig;
use crowdlabel::{ModelParams64, Seed};

/// Environment variable naming the default output directory for sweep CSVs.
pub const OUT_DIR_ENV: &str = "CROWDLABEL_OUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown key '{0}'")]
    UnknownKey(String),
    #[error("bad value for '{key}': {msg}")]
    BadValue { key: String, msg: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub d: usize,
    pub p: f64,
    pub q: f64,
    pub m: usize,
    pub n: usize,
    /// Stage-two queries per cluster (`l`) for each point of the sweep.
    pub budgets: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    pub trials: usize,
    pub alpha_c: f64,
    pub beta: f64,
    /// Stage-one tasks; defaults to 15% of `m`.
    pub r: Option<usize>,
    /// Threshold-clustering cutoff; defaults to the recommended midpoint.
    pub zeta: Option<f64>,
    pub stage_one: StageOneMethod,
    pub sdp_penalty: f64,
    pub sdp_tol: f64,
    pub sdp_max_iter: usize,
    pub jacobi_tol: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let sdp = SdpConfig::<f64>::default();
        ExperimentConfig {
            d: 3,
            p: 0.9,
            q: 0.7,
            m: 2000,
            n: 60,
            budgets: vec![1, 3, 6, 10, 15, 20],
            algorithms: Algorithm::ALL.to_vec(),
            trials: 30,
            alpha_c: 0.1,
            beta: 0.3,
            r: None,
            zeta: None,
            stage_one: StageOneMethod::Threshold,
            sdp_penalty: sdp.penalty,
            sdp_tol: sdp.tol,
            sdp_max_iter: sdp.max_iter,
            jacobi_tol: sdp.jacobi.tol,
            seed: 0,
            out: None,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse().map_err(|e: T::Err| ConfigError::BadValue { key: key.into(), msg: e.to_string() })
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse(key, s)).collect()
}

impl ExperimentConfig {
    /// Sets one field from its textual key and value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "d" => self.d = parse(key, value)?,
            "p" => self.p = parse(key, value)?,
            "q" => self.q = parse(key, value)?,
            "m" => self.m = parse(key, value)?,
            "n" => self.n = parse(key, value)?,
            "budgets" => self.budgets = parse_list(key, value)?,
            "algorithms" => self.algorithms = parse_list(key, value)?,
            "trials" => self.trials = parse(key, value)?,
            "alpha" => self.alpha_c = parse(key, value)?,
            "beta" => self.beta = parse(key, value)?,
            "r" => self.r = Some(parse(key, value)?),
            "zeta" => self.zeta = Some(parse(key, value)?),
            "stage-one" => self.stage_one = parse(key, value)?,
            "sdp-penalty" => self.sdp_penalty = parse(key, value)?,
            "sdp-tol" => self.sdp_tol = parse(key, value)?,
            "sdp-max-iter" => self.sdp_max_iter = parse(key, value)?,
            "jacobi-tol" => self.jacobi_tol = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "out" => self.out = Some(PathBuf::from(value.trim())),
            _ => return Err(ConfigError::UnknownKey(key.into())),
        }
        Ok(())
    }

    /// Applies every `key = value` line of `text` on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (key, value) in parse_pairs(text)? {
            self.set(&key, &value)?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text(&std::fs::read_to_string(path)?)?;
        Ok(cfg)
    }

    pub fn params(&self) -> Result<ModelParams64, ConfigError> {
        ModelParams64::new(self.d, self.p, self.q).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn stage_one_tasks(&self) -> usize {
        self.r.unwrap_or_else(|| (self.m * 3).div_ceil(20))
    }

    pub fn sdp(&self) -> SdpConfig<f64> {
        SdpConfig {
            penalty: self.sdp_penalty,
            tol: self.sdp_tol,
            max_iter: self.sdp_max_iter,
            jacobi: JacobiConfig { tol: self.jacobi_tol, ..JacobiConfig::default() },
        }
    }

    pub fn base_seed(&self) -> Seed {
        Seed(self.seed)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.params()?;
        let bad = |msg: &str| Err(ConfigError::Invalid(msg.into()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.budgets.is_empty() {
            return bad("budget sweep is empty");
        }
        if self.budgets.contains(&0) {
            return bad("budgets must be positive");
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms selected");
        }
        if !(self.alpha_c > 0.0 && self.alpha_c < 1.0) {
            return bad("alpha must lie in (0, 1)");
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad("beta must lie in (0, 1)");
        }
        let r = self.stage_one_tasks();
        if r == 0 || r >= self.m {
            return bad("stage-one tasks must satisfy 0 < r < m");
        }
        if self.n <= self.d {
            return bad("need more workers than types");
        }
        if let Some(z) = self.zeta {
            if !(z > 0.0 && z < 1.0) {
                return bad("zeta must lie in (0, 1)");
            }
        }
        if self.sdp_max_iter == 0 || self.sdp_tol <= 0.0 || self.sdp_penalty <= 0.0 || self.jacobi_tol <= 0.0 {
            return bad("solver settings must be positive");
        }
        Ok(())
    }

    /// Pipeline settings for stage-two budget `l`.
    pub fn pipeline(&self, l: usize) -> Result<PipelineConfig<f64>, ConfigError> {
        let params = self.params()?;
        let zeta = match self.zeta {
            Some(z) => z,
            None => {
                stage1_recommendation(&params, self.alpha_c, self.n)
                    .map_err(|e| ConfigError::Invalid(e.to_string()))?
                    .zeta
            }
        };
        Ok(PipelineConfig {
            r: self.stage_one_tasks(),
            l,
            zeta,
            stage_one: self.stage_one,
            beta: self.beta,
            sdp: self.sdp(),
        })
    }

    /// Output path: the explicit one, else `sweep.csv` under `$CROWDLABEL_OUT_DIR`,
    /// else in the working directory.
    pub fn output_path(&self) -> PathBuf {
        if let Some(p) = &self.out {
            return p.clone();
        }
        match std::env::var_os(OUT_DIR_ENV) {
            Some(dir) => PathBuf::from(dir).join("sweep.csv"),
            None => PathBuf::from("sweep.csv"),
        }
    }
}

/// Splits config text into `(key, value)` pairs, keyed by name.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax { line: idx + 1, msg: "expected key = value".into() })?;
        let k = k.trim();
        if k.is_empty() {
            return Err(ConfigError::Syntax { line: idx + 1, msg: "empty key".into() });
        }
        if out.insert(k.to_string(), v.trim().to_string()).is_some() {
            return Err(ConfigError::Syntax { line: idx + 1, msg: format!("duplicate key '{k}'") });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_overrides_defaults() {
        let mut c = ExperimentConfig::default();
        c.apply_text("# comment\nq = 0.5\nbudgets = 2, 4\nalgorithms = mv,alg1  # trailing\nstage-one = sdp\n")
            .unwrap();
        assert_eq!(c.q, 0.5);
        assert_eq!(c.budgets, vec![2, 4]);
        assert_eq!(c.algorithms, vec![Algorithm::Mv, Algorithm::Alg1]);
        assert_eq!(c.stage_one, StageOneMethod::Sdp);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_input() {
        let mut c = ExperimentConfig::default();
        assert!(matches!(c.apply_text("colour = red"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(c.apply_text("p 0.9"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(c.apply_text("p = x"), Err(ConfigError::BadValue { .. })));
        assert!(matches!(c.apply_text("p = 0.9\np = 0.8"), Err(ConfigError::Syntax { line: 2, .. })));
        let c = ExperimentConfig { q: 0.95, ..ExperimentConfig::default() };
        assert!(c.validate().is_err());
        let c = ExperimentConfig { trials: 0, ..ExperimentConfig::default() };
        assert!(c.validate().is_err());
        let c = ExperimentConfig { budgets: vec![], ..ExperimentConfig::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn defaults_are_valid() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        assert_eq!(c.stage_one_tasks(), 300);
        let p = c.pipeline(4).unwrap();
        assert_eq!((p.r, p.l), (300, 4));
        assert!(p.zeta > 0.5 && p.zeta < 1.0);
    }
}
