//! Experiment configuration.
//!
//! One TOML file fully determines an experiment. The grammar, by example:
//!
//! ```toml
//! name = "compas-dp"        # used in file names and plot titles
//! seed = 2024               # root of every random stream
//! output_dir = "out/compas-dp"
//! threads = 4               # optional, defaults to all cores
//!
//! [problem]
//! kind = "dp"               # dp | roc | two-ball | l1-disk
//! lambda = 0.2
//! kappa = 0.02
//!
//! [problem.dataset]
//! file = "compas.libsvm"
//! data_dir = "../data"      # relative to this file; SSG_DATA_DIR wins
//! split_seed = 7
//! retain_group_feature = false
//! group = { feature = 0, predicate = { op = "greater", value = 0.0 } }
//!
//! [run]
//! iterations = 50000
//! checkpoints = 600         # metric rows per run, equally spaced
//! x0 = "zero"               # zero | erm | feasible
//!
//! [stationarity]
//! enabled = true
//! inner_iters = 2500
//! subsample = 30            # rows that get a near-stationarity value
//!
//! [[solver]]
//! method = "ssg"            # ssg | sssg | ipp-ssg
//! label = "SSG"
//! tolerance = { rule = "constant", values = [1e-6, 1e-5] }
//! step = { rule = "constant", values = [1e-4, 5e-4] }
//! constraint_step = "polyak"
//! ```
//!
//! Relative paths in `output_dir` are taken from the working directory.

use crate::error::{HarnessError, Result};
use serde::{Deserialize, Serialize};
use ssg_core::data::GroupRule;
use ssg_core::ipp::InnerOutput;
use ssg_core::schedules::Rate;
use ssg_core::OutputMode;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

/// Overrides every dataset directory when set.
pub const DATA_DIR_ENV: &str = "SSG_DATA_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub threads: Option<usize>,
    pub problem: ProblemConfig,
    pub run: RunConfig,
    #[serde(default)]
    pub stationarity: StationarityConfig,
    #[serde(rename = "solver")]
    pub solvers: Vec<SolverConfig>,
    /// Directory of the config file, for resolving relative dataset paths.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProblemConfig {
    Dp {
        dataset: DatasetConfig,
        lambda: f64,
        kappa: f64,
        /// Used only when the run starts from x_erm.
        #[serde(default = "default_pretrain_iters")]
        pretrain_iters: usize,
        #[serde(default = "default_pretrain_eta")]
        pretrain_eta: f64,
    },
    Roc {
        dataset: DatasetConfig,
        /// κ as a fraction of the ERM loss L*.
        kappa_frac: f64,
        /// Ball radius as a multiple of ‖x_erm‖.
        radius_mult: f64,
        #[serde(default = "default_pretrain_iters")]
        pretrain_iters: usize,
        #[serde(default = "default_pretrain_eta")]
        pretrain_eta: f64,
    },
    TwoBall {
        c1: Vec<f64>,
        c2: Vec<f64>,
        radius: f64,
        objective: Vec<f64>,
    },
    L1Disk {
        a: Vec<f64>,
        outer: f64,
        /// Gaussian noise on both subgradients, for the stochastic method.
        #[serde(default)]
        noise_sd: Option<f64>,
    },
}

fn default_pretrain_iters() -> usize {
    5000
}

fn default_pretrain_eta() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub file: PathBuf,
    #[serde(default)]
    pub data_dir: Option<PathBuf>,
    #[serde(default)]
    pub split_seed: u64,
    pub group: GroupRule,
    #[serde(default)]
    pub retain_group_feature: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartPoint {
    #[default]
    Zero,
    /// The pretrained hinge-loss minimizer; classification problems only.
    Erm,
    /// The instance's Slater point.
    Feasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub iterations: usize,
    #[serde(default)]
    pub start: usize,
    pub checkpoints: usize,
    #[serde(default)]
    pub x0: StartPoint,
    /// Explicit start point; overrides `x0`.
    #[serde(default)]
    pub x0_point: Option<Vec<f64>>,
    #[serde(default = "one")]
    pub replicates: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StationarityRuns {
    /// Only the winning cell of each solver.
    #[default]
    Winners,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationarityConfig {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default = "default_inner")]
    pub inner_iters: usize,
    #[serde(default = "default_subsample")]
    pub subsample: usize,
    #[serde(default)]
    pub runs: StationarityRuns,
    /// Prox weights; default to `default_prox_weights` of the instance.
    #[serde(default)]
    pub rho_hat: Option<f64>,
    #[serde(default)]
    pub rho_tilde: Option<f64>,
}

fn default_inner() -> usize {
    ssg_core::stationarity::DEFAULT_INNER_ITERS
}

fn default_subsample() -> usize {
    100
}

impl Default for StationarityConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            inner_iters: default_inner(),
            subsample: default_subsample(),
            runs: StationarityRuns::Winners,
            rho_hat: None,
            rho_tilde: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Ssg,
    Sssg,
    IppSsg,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Ssg => "ssg",
            Method::Sssg => "sssg",
            Method::IppSsg => "ipp-ssg",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateRule {
    Zero,
    Constant,
    InverseSqrt,
    InverseLinear,
}

impl RateRule {
    pub fn as_str(&self) -> &'static str {
        match self {
            RateRule::Zero => "zero",
            RateRule::Constant => "constant",
            RateRule::InverseSqrt => "inverse-sqrt",
            RateRule::InverseLinear => "inverse-linear",
        }
    }

    pub fn rate(&self, value: f64) -> Rate {
        match self {
            RateRule::Zero => Rate::Zero,
            RateRule::Constant => Rate::Constant { value },
            RateRule::InverseSqrt => Rate::InverseSqrt { scale: value },
            RateRule::InverseLinear => Rate::InverseLinear { scale: value },
        }
    }
}

/// One rule and the coefficients to try with it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateGrid {
    pub rule: RateRule,
    #[serde(default)]
    pub values: Vec<f64>,
}

impl RateGrid {
    /// Coefficients to iterate over; the zero rule has exactly one.
    pub fn cells(&self) -> Vec<f64> {
        match self.rule {
            RateRule::Zero => vec![0.0],
            _ => self.values.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintRule {
    #[default]
    Same,
    Polyak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhoTildeRule {
    /// 0 for a convex constraint, ρ̂ otherwise.
    #[default]
    Auto,
    Zero,
    EqualRhoHat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub method: Method,
    #[serde(default)]
    pub label: Option<String>,
    pub tolerance: RateGrid,
    pub step: RateGrid,
    #[serde(default)]
    pub constraint_step: ConstraintRule,
    #[serde(default = "unit")]
    pub polyak_scale: f64,
    #[serde(default = "default_output")]
    pub output: OutputMode,
    #[serde(default = "one")]
    pub batch_size: usize,
    /// Inner iterations per prox step (ipp-ssg).
    #[serde(default)]
    pub inner_iters: Option<usize>,
    /// ρ̂ = mult · max(ρ, 1) for each entry (ipp-ssg).
    #[serde(default = "default_rho_mult")]
    pub rho_hat_mult: Vec<f64>,
    #[serde(default)]
    pub rho_tilde: RhoTildeRule,
    #[serde(default)]
    pub inner_output: InnerOutput,
}

fn unit() -> f64 {
    1.0
}

fn default_output() -> OutputMode {
    OutputMode::OutputI
}

fn default_rho_mult() -> Vec<f64> {
    vec![2.0]
}

impl SolverConfig {
    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.method.as_str().to_string())
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            HarnessError::Invalid(message) => HarnessError::Config { path: path.to_path_buf(), message },
            other => other,
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    /// Parses and validates; relative dataset paths resolve against the
    /// working directory.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Invalid(m));
        let run = &self.run;
        if run.iterations < 1 {
            return bad("run.iterations must be at least 1".into());
        }
        if run.checkpoints < 1 || run.checkpoints > run.iterations {
            return bad(format!(
                "run.checkpoints must be in 1..={}, got {}",
                run.iterations, run.checkpoints
            ));
        }
        if run.start >= run.iterations {
            return bad("run.start must be below run.iterations".into());
        }
        if run.replicates < 1 {
            return bad("run.replicates must be at least 1".into());
        }
        let st = &self.stationarity;
        if st.enabled && (st.subsample < 1 || st.subsample > run.checkpoints) {
            return bad(format!(
                "stationarity.subsample must be in 1..={}, got {}",
                run.checkpoints, st.subsample
            ));
        }
        if st.enabled && st.inner_iters < 1 {
            return bad("stationarity.inner_iters must be positive".into());
        }
        if self.solvers.is_empty() {
            return bad("at least one [[solver]] is required".into());
        }
        let mut labels = BTreeSet::new();
        for s in &self.solvers {
            let label = s.label();
            if label.is_empty() || !label.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
                return bad(format!("solver label `{label}` must be nonempty [A-Za-z0-9_-]"));
            }
            if !labels.insert(label.clone()) {
                return bad(format!("duplicate solver label `{label}`"));
            }
            for (name, grid) in [("tolerance", &s.tolerance), ("step", &s.step)] {
                if grid.rule != RateRule::Zero && grid.values.is_empty() {
                    return bad(format!("solver `{label}`: {name} grid is empty"));
                }
            }
            if s.step.rule == RateRule::Zero {
                return bad(format!("solver `{label}`: objective step cannot be zero"));
            }
            if s.method == Method::IppSsg {
                let Some(inner) = s.inner_iters else {
                    return bad(format!("solver `{label}`: ipp-ssg needs inner_iters"));
                };
                if inner < 1 {
                    return bad(format!("solver `{label}`: inner_iters must be positive"));
                }
                if s.rho_hat_mult.is_empty() {
                    return bad(format!("solver `{label}`: rho_hat_mult grid is empty"));
                }
            }
            if s.method != Method::Sssg && s.batch_size != 1 {
                return bad(format!("solver `{label}`: batch_size only applies to sssg"));
            }
        }
        Ok(())
    }

    /// Directory holding `dataset`, honoring the environment override.
    pub fn data_dir(&self, dataset: &DatasetConfig) -> PathBuf {
        if let Some(dir) = std::env::var_os(DATA_DIR_ENV) {
            return PathBuf::from(dir);
        }
        match &dataset.data_dir {
            Some(d) if d.is_absolute() => d.clone(),
            Some(d) => self.base_dir.join(d),
            None => self.base_dir.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        name = "t"
        [problem]
        kind = "l1-disk"
        a = [2.0, 2.0]
        outer = 3.0
        [run]
        iterations = 100
        checkpoints = 10
        [[solver]]
        method = "ssg"
        tolerance = { rule = "constant", values = [0.1] }
        step = { rule = "constant", values = [0.01, 0.02] }
    "#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.run.replicates, 1);
        assert_eq!(c.solvers[0].label(), "ssg");
        assert_eq!(c.solvers[0].output, OutputMode::OutputI);
        assert!(!c.stationarity.enabled);
    }

    #[test]
    fn too_many_checkpoints_rejected() {
        let text = MINIMAL.replace("checkpoints = 10", "checkpoints = 101");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(HarnessError::Invalid(_))));
    }

    #[test]
    fn empty_grid_rejected() {
        let text = MINIMAL.replace("values = [0.01, 0.02]", "values = []");
        let err = ExperimentConfig::from_toml(&text).unwrap_err().to_string();
        assert!(err.contains("step grid is empty"), "{err}");
    }

    #[test]
    fn unknown_key_rejected() {
        let text = MINIMAL.replace("checkpoints = 10", "checkpoints = 10\nbogus = 1");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }
}
