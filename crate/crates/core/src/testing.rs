//! Separation rates, Monte Carlo calibration and accept/reject decisions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{default_c_h, BaseKernel, DEFAULT_NORMALIZER_FLOOR};
use crate::numerics::DEFAULT_POINTS;
use crate::rng::{replicate_seed, sub_seed};
use crate::sim_model::{
    design_heteroskedasticity, l2_heteroskedasticity, FunctionSpec, NoiseSpec, PreparedModel, RegressionModel,
};
use crate::statistics::{BandwidthRule, PreparedStatistic, StatisticId, StatisticSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Setting {
    L2,
    Profile,
    DesignKnownNoise,
    DesignUnknownNoise,
}

impl Setting {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "l2" => Ok(Setting::L2),
            "profile" => Ok(Setting::Profile),
            "design-known-noise" => Ok(Setting::DesignKnownNoise),
            "design-unknown-noise" => Ok(Setting::DesignUnknownNoise),
            other => Err(Error::Parse(format!("unknown setting '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationRate {
    pub setting: Setting,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub n: usize,
    pub zeta: f64,
}

fn check_beta(beta: Option<f64>) -> Result<f64> {
    match beta {
        Some(b) if b > 0.0 && b < 0.5 => Ok(b),
        other => Err(Error::Domain(format!("beta must lie in (0, 1/2), got {other:?}"))),
    }
}

/// Separation rate ζ of the given setting.
pub fn zeta(setting: Setting, alpha: f64, beta: Option<f64>, n: usize) -> Result<SeparationRate> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    let nf = n as f64;
    let mean_term = nf.powf(-2.0 * alpha);
    let (zeta, beta) = match setting {
        Setting::L2 | Setting::DesignUnknownNoise => {
            let b = check_beta(beta)?;
            (mean_term + nf.powf(-b) + nf.powf(-2.0 * b / (4.0 * b + 1.0)), Some(b))
        }
        Setting::Profile => (mean_term + nf.powf(-0.25), None),
        Setting::DesignKnownNoise => {
            let b = check_beta(beta)?;
            (mean_term + nf.powf(-(0.25f64.max(2.0 * b / (4.0 * b + 1.0)))), Some(b))
        }
    };
    Ok(SeparationRate { setting, alpha, beta, n, zeta })
}

/// The statistic behind each setting's upper bound.
pub fn dispatch(setting: Setting, beta: Option<f64>) -> Result<StatisticId> {
    match setting {
        Setting::L2 | Setting::DesignUnknownNoise => Ok(StatisticId::THatKernel),
        Setting::Profile => Ok(StatisticId::SHat),
        Setting::DesignKnownNoise => {
            let b = check_beta(beta)?;
            Ok(if b < 0.25 { StatisticId::SHat } else { StatisticId::THatKernel })
        }
    }
}

/// Statistic spec for a setting with the rate-optimal bandwidth; `c_h = None`
/// picks the smallest admissible power of two over `n_grid`.
pub fn default_statistic(setting: Setting, beta: Option<f64>, c_h: Option<f64>, n_grid: &[usize]) -> Result<StatisticSpec> {
    let id = dispatch(setting, beta)?;
    let mut spec = StatisticSpec::new(id);
    if id.uses_bandwidth() {
        let b = check_beta(beta)?;
        let c = match c_h {
            Some(c) => c,
            None => default_c_h(&BaseKernel::Box, b, n_grid, DEFAULT_NORMALIZER_FLOOR)?,
        };
        spec = spec.with_bandwidth(BandwidthRule::Optimal { beta: b, c_h: c });
    }
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum CalibrationMode {
    /// threshold = C′_η · ζ².
    TheoryConstant { c_eta: f64, zeta: f64 },
    /// threshold = max over null scenarios of the empirical `level` quantile.
    McQuantile { level: f64, replicates: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibratedTest {
    pub statistic: StatisticSpec,
    pub setting: Setting,
    pub n: usize,
    pub threshold: f64,
    pub mode: CalibrationMode,
    pub eta: f64,
    pub seed: u64,
    pub scenario_digests: Vec<String>,
    /// Per-scenario quantiles, in scenario order.
    #[serde(default)]
    pub scenario_quantiles: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Reject,
    Accept,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub verdict: Verdict,
    pub statistic: f64,
    pub threshold: f64,
}

/// Statistic values on `replicates` fresh samples of a model.
pub fn simulate_statistic(
    model: &PreparedModel,
    statistic: &PreparedStatistic,
    seed: u64,
    replicates: usize,
) -> Result<Vec<f64>> {
    (0..replicates as u64)
        .into_par_iter()
        .map(|r| statistic.value(&model.sample(replicate_seed(seed, r)).y))
        .collect()
}

/// Empirical quantile: the ⌈p·N⌉-th order statistic.
pub fn empirical_quantile(values: &[f64], p: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let k = ((p * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[k - 1]
}

fn null_is_homoskedastic(setting: Setting, model: &RegressionModel) -> Result<bool> {
    let dev = match setting {
        Setting::L2 => l2_heteroskedasticity(&model.variance, DEFAULT_POINTS)?,
        _ => design_heteroskedasticity(&model.variance, model.grid()),
    };
    let scale = model.grid().values(&model.variance).iter().fold(1.0f64, |m, v| m.max(v.abs()));
    Ok(dev <= 1e-12 * scale)
}

/// Monte Carlo calibration: the threshold is the largest (1 − η/2)-quantile
/// of the statistic over the null scenarios.
pub fn calibrate(
    statistic: &StatisticSpec,
    setting: Setting,
    eta: f64,
    null_scenarios: &[RegressionModel],
    replicates: usize,
    seed: u64,
) -> Result<CalibratedTest> {
    if null_scenarios.is_empty() {
        return Err(Error::Config("calibration needs at least one null scenario".into()));
    }
    if replicates < 1000 {
        return Err(Error::Config(format!("calibration needs at least 1000 replicates, got {replicates}")));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Config(format!("eta must lie in (0, 1), got {eta}")));
    }
    let n = null_scenarios[0].n;
    if null_scenarios.iter().any(|m| m.n != n) {
        return Err(Error::Config("null scenarios must share the grid size".into()));
    }
    for (k, m) in null_scenarios.iter().enumerate() {
        if !null_is_homoskedastic(setting, m)? {
            return Err(Error::Config(format!("null scenario {k} has non-constant variance")));
        }
    }
    let prepared = statistic.prepare(n)?;
    let level = 1.0 - eta / 2.0;
    let mut quantiles = Vec::with_capacity(null_scenarios.len());
    for (k, m) in null_scenarios.iter().enumerate() {
        let model = PreparedModel::new(m.clone())?;
        let values = simulate_statistic(&model, &prepared, sub_seed(seed, k as u64), replicates)?;
        quantiles.push(empirical_quantile(&values, level));
    }
    let threshold = quantiles.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(CalibratedTest {
        statistic: statistic.clone(),
        setting,
        n,
        threshold,
        mode: CalibrationMode::McQuantile { level, replicates },
        eta,
        seed,
        scenario_digests: null_scenarios.iter().map(RegressionModel::digest).collect(),
        scenario_quantiles: quantiles,
    })
}

/// Threshold C′_η·ζ² from the rate with an explicit constant.
pub fn theory_test(
    statistic: &StatisticSpec,
    rate: SeparationRate,
    c_eta: f64,
    eta: f64,
) -> Result<CalibratedTest> {
    if !(c_eta > 0.0) {
        return Err(Error::Config(format!("C'_eta must be positive, got {c_eta}")));
    }
    Ok(CalibratedTest {
        statistic: statistic.clone(),
        setting: rate.setting,
        n: rate.n,
        threshold: c_eta * rate.zeta * rate.zeta,
        mode: CalibrationMode::TheoryConstant { c_eta, zeta: rate.zeta },
        eta,
        seed: 0,
        scenario_digests: Vec::new(),
        scenario_quantiles: Vec::new(),
    })
}

/// Rejects iff the statistic exceeds the threshold.
pub fn decide_value(threshold: f64, statistic: f64) -> Decision {
    Decision {
        verdict: if statistic > threshold { Verdict::Reject } else { Verdict::Accept },
        statistic,
        threshold,
    }
}

pub fn decide(test: &CalibratedTest, y: &[f64]) -> Result<Decision> {
    let prepared = test.statistic.prepare(test.n)?;
    Ok(decide_value(test.threshold, prepared.value(y)?))
}

/// Composite-null corners {f ≡ 0, M-scaled sawtooth in H_α} × {σ² ∈ {M/2, M}}.
pub fn default_null_scenarios(n: usize, alpha: f64, m: f64, noise: NoiseSpec) -> Result<Vec<RegressionModel>> {
    let exponent = alpha.min(2.0);
    let unit = FunctionSpec::SawtoothHoelder { amplitude: 1.0, exponent, count: 8 };
    let per_unit = unit.declared_class().expect("sawtooth has a class").m;
    let saw = FunctionSpec::SawtoothHoelder { amplitude: m / per_unit, exponent, count: 8 };
    let mut out = Vec::new();
    for f in [FunctionSpec::constant(0.0), saw] {
        for s2 in [m / 2.0, m] {
            out.push(RegressionModel::new(n, f.clone(), FunctionSpec::constant(s2), noise.clone())?);
        }
    }
    Ok(out)
}
