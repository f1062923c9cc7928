//! Difference sequences, test statistics, oracle proxies and baselines.

pub mod differences;
pub mod oracle;
pub mod stats;

use serde::{Deserialize, Serialize};

pub use differences::DifferenceSet;
pub use oracle::{proxy_t, proxy_t1_tilde, proxy_t2_tilde, OracleQuantities};
pub use stats::{
    dette_2002, dette_munk, s_hat, t1_hat, t2_hat, t_hat_kernel, t_hat_nondeleted, t_hat_profile, StatisticId,
    StatisticReport, Term,
};

use crate::error::{Error, Result};
use crate::kernel::{build_modified_kernel_with, optimal_bandwidth, BaseKernel, ModifiedKernel, DEFAULT_NORMALIZER_FLOOR};

/// How a bandwidth-dependent statistic picks h at grid size n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum BandwidthRule {
    Fixed { h: f64 },
    /// C_h · n^{−(2/(4β+1) ∧ 1)}.
    Optimal { beta: f64, c_h: f64 },
    /// n^{−1/(2β+1)}, the bandwidth balancing h^{4β} against 1/(n²h²).
    Undersmoothed { beta: f64 },
}

impl BandwidthRule {
    pub fn bandwidth(&self, n: usize) -> Result<f64> {
        match *self {
            BandwidthRule::Fixed { h } => Ok(h),
            BandwidthRule::Optimal { beta, c_h } => Ok(optimal_bandwidth(beta, n, c_h)?.h),
            BandwidthRule::Undersmoothed { beta } => {
                if !(beta > 0.0) {
                    return Err(Error::Domain(format!("beta must be positive, got {beta}")));
                }
                Ok((n as f64).powf(-1.0 / (2.0 * beta + 1.0)))
            }
        }
    }
}

/// A statistic together with the kernel choices it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatisticSpec {
    pub id: StatisticId,
    #[serde(default)]
    pub kernel: BaseKernel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<BandwidthRule>,
    #[serde(default = "default_floor")]
    pub normalizer_floor: f64,
}

fn default_floor() -> f64 {
    DEFAULT_NORMALIZER_FLOOR
}

impl StatisticSpec {
    pub fn new(id: StatisticId) -> Self {
        Self { id, kernel: BaseKernel::Box, bandwidth: None, normalizer_floor: DEFAULT_NORMALIZER_FLOOR }
    }

    pub fn with_bandwidth(mut self, rule: BandwidthRule) -> Self {
        self.bandwidth = Some(rule);
        self
    }

    /// Builds the kernel (if any) for grid size n.
    pub fn prepare(&self, n: usize) -> Result<PreparedStatistic> {
        let h = if self.id.uses_bandwidth() {
            let rule = self
                .bandwidth
                .ok_or_else(|| Error::Config(format!("statistic {} needs a bandwidth rule", self.id)))?;
            Some(rule.bandwidth(n)?)
        } else {
            None
        };
        let kernel = match (self.id, h) {
            (StatisticId::THatKernel, Some(h)) => Some(build_modified_kernel_with(&self.kernel, n, h, self.normalizer_floor)?),
            _ => None,
        };
        Ok(PreparedStatistic { spec: self.clone(), n, h, kernel })
    }
}

/// A statistic ready to evaluate on samples of one grid size.
#[derive(Debug, Clone)]
pub struct PreparedStatistic {
    pub spec: StatisticSpec,
    pub n: usize,
    pub h: Option<f64>,
    pub kernel: Option<ModifiedKernel>,
}

impl PreparedStatistic {
    pub fn report(&self, y: &[f64]) -> Result<StatisticReport> {
        if y.len() != self.n + 1 {
            return Err(Error::Shape(format!("expected {} responses, got {}", self.n + 1, y.len())));
        }
        match self.spec.id {
            StatisticId::THatKernel => t_hat_kernel(y, self.kernel.as_ref().expect("kernel prepared")),
            StatisticId::THatProfile => t_hat_profile(y),
            StatisticId::T1Hat => t1_hat(y),
            StatisticId::T2Hat => t2_hat(y),
            StatisticId::SHat => s_hat(y),
            StatisticId::DetteMunk => dette_munk(y),
            StatisticId::Dette2002 => dette_2002(y, &self.spec.kernel, self.h.expect("bandwidth")),
            StatisticId::THatNondeleted => t_hat_nondeleted(y, &self.spec.kernel, self.h.expect("bandwidth")),
        }
    }

    pub fn value(&self, y: &[f64]) -> Result<f64> {
        Ok(self.report(y)?.value)
    }

    /// The oracle quantity the statistic targets, when (f, V) are known.
    pub fn proxy(&self, oracle: &OracleQuantities) -> f64 {
        match self.spec.id {
            StatisticId::THatKernel | StatisticId::THatProfile | StatisticId::THatNondeleted => oracle.proxy_t(),
            StatisticId::T1Hat => oracle.proxy_t1_tilde(),
            StatisticId::T2Hat => oracle.proxy_t2_tilde(),
            StatisticId::SHat => oracle.proxy_t() + oracle.proxy_t1_tilde() + oracle.proxy_t2_tilde(),
            // Both baselines estimate ‖V − V̄‖², whose design analogue is T/4 for smooth V.
            StatisticId::DetteMunk | StatisticId::Dette2002 => oracle.proxy_t() / 4.0,
        }
    }
}
