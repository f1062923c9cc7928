//! Experiment configuration files (TOML).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lowerbound::Construction;
use crate::sim_model::{FunctionSpec, NoiseSpec, RegressionModel, DEFAULT_M};
use crate::statistics::StatisticSpec;
use crate::testing::Setting;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    MseRate,
    PowerCurve,
    Type1,
    Lowerbound,
    BaselineCompare,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::MseRate => "mse-rate",
            ExperimentKind::PowerCurve => "power-curve",
            ExperimentKind::Type1 => "type1",
            ExperimentKind::Lowerbound => "lowerbound",
            ExperimentKind::BaselineCompare => "baseline-compare",
        }
    }
}

/// A (f, V, ξ) triple whose grid size is supplied by the experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default = "zero_function")]
    pub mean: FunctionSpec,
    #[serde(default = "unit_function")]
    pub variance: FunctionSpec,
    #[serde(default)]
    pub noise: NoiseSpec,
}

fn zero_function() -> FunctionSpec {
    FunctionSpec::constant(0.0)
}

fn unit_function() -> FunctionSpec {
    FunctionSpec::constant(1.0)
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self { name: None, mean: zero_function(), variance: unit_function(), noise: NoiseSpec::GaussianStd }
    }
}

impl ScenarioSpec {
    pub fn model(&self, n: usize) -> Result<RegressionModel> {
        RegressionModel::new(n, self.mean.clone(), self.variance.clone(), self.noise.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerSpec {
    /// Separation multiples C; the alternative has ‖V − V̄‖ = C·ζ.
    pub multiples: Vec<f64>,
    /// Variance shape rescaled along its deviation (smooth-bump-sum or kappa-prior).
    pub shape: FunctionSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowerboundSpec {
    pub constructions: Vec<Construction>,
    #[serde(default = "default_quadrature")]
    pub num_quadrature: usize,
    #[serde(default = "default_risk_replicates")]
    pub risk_replicates: usize,
}

fn default_quadrature() -> usize {
    2001
}

fn default_risk_replicates() -> usize {
    1000
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// CSV file name, relative to the output directory.
    #[serde(default)]
    pub csv: Option<String>,
    #[serde(default)]
    pub json: Option<String>,
}

/// Pass/fail conditions checked after a run; any failure makes the CLI exit with code 2.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    /// |slope − target| ≤ tolerance (mse-rate).
    #[serde(default)]
    pub slope_target: Option<f64>,
    #[serde(default)]
    pub slope_tolerance: Option<f64>,
    /// Power at the largest multiple is at least this (power-curve).
    #[serde(default)]
    pub min_power: Option<f64>,
    /// Power never drops by more than 2 standard errors as C grows (power-curve).
    #[serde(default)]
    pub monotone_power: Option<bool>,
    /// Every held-out Type I error is at most this (type1, and C = 0 in power-curve).
    #[serde(default)]
    pub max_type1: Option<f64>,
    /// Every marginal gap is below this (lowerbound).
    #[serde(default)]
    pub max_marginal_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_n_grid")]
    pub n_grid: Vec<usize>,
    #[serde(default = "default_setting")]
    pub setting: Setting,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default = "default_eta")]
    pub eta: f64,
    /// Bandwidth constant; `None` picks the smallest admissible power of two.
    #[serde(default)]
    pub c_h: Option<f64>,
    /// Hölder constant M used for the default null scenarios.
    #[serde(default = "default_m")]
    pub hoelder_m: f64,
    /// Overrides the setting's default statistic.
    #[serde(default)]
    pub statistic: Option<StatisticSpec>,
    #[serde(default)]
    pub scenario: ScenarioSpec,
    /// Null scenarios for calibration; defaults to the composite-null corners.
    #[serde(default)]
    pub null_scenarios: Option<Vec<ScenarioSpec>>,
    #[serde(default = "default_calibration_replicates")]
    pub calibration_replicates: usize,
    #[serde(default)]
    pub power: Option<PowerSpec>,
    #[serde(default)]
    pub lowerbound: Option<LowerboundSpec>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub expectations: Expectations,
}

fn default_seed() -> u64 {
    20240601
}

fn default_replicates() -> usize {
    400
}

fn default_n_grid() -> Vec<usize> {
    vec![256, 512, 1024, 2048]
}

fn default_setting() -> Setting {
    Setting::L2
}

fn default_alpha() -> f64 {
    1.0
}

fn default_eta() -> f64 {
    0.1
}

fn default_m() -> f64 {
    DEFAULT_M
}

fn default_calibration_replicates() -> usize {
    2000
}

impl ExperimentConfig {
    /// A config with every optional field at its default.
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            seed: default_seed(),
            replicates: default_replicates(),
            n_grid: default_n_grid(),
            setting: default_setting(),
            alpha: default_alpha(),
            beta: None,
            eta: default_eta(),
            c_h: None,
            hoelder_m: default_m(),
            statistic: None,
            scenario: ScenarioSpec::default(),
            null_scenarios: None,
            calibration_replicates: default_calibration_replicates(),
            power: None,
            lowerbound: None,
            output: OutputSpec::default(),
            expectations: Expectations::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n_grid.is_empty() {
            return bad("n_grid must not be empty".into());
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("n_grid must be strictly increasing, got {:?}", self.n_grid));
        }
        if self.experiment == ExperimentKind::MseRate && self.replicates < 100 {
            return bad(format!("rate experiments need at least 100 replicates, got {}", self.replicates));
        }
        if self.experiment == ExperimentKind::MseRate && self.n_grid.len() < 3 {
            return bad("a rate fit needs at least 3 grid sizes".into());
        }
        if self.replicates == 0 {
            return bad("replicates must be positive".into());
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return bad(format!("eta must lie in (0, 1), got {}", self.eta));
        }
        match self.experiment {
            ExperimentKind::PowerCurve => {
                if self.power.is_none() {
                    return bad("power-curve needs a [power] block".into());
                }
                if self.n_grid.len() != 1 {
                    return bad("power-curve runs at a single grid size; set n_grid = [n]".into());
                }
            }
            ExperimentKind::Lowerbound if self.lowerbound.is_none() => {
                return bad("lowerbound needs a [lowerbound] block".into());
            }
            _ => {}
        }
        Ok(())
    }
}
