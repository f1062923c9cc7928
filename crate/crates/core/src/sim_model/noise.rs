//! Noise laws ξ with E ξ = 0 and E ξ² = 1.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{gauss_hermite, Component, Law};

/// Default ceiling C_ξ on E ξ⁴.
pub const DEFAULT_C_XI: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NoiseSpec {
    GaussianStd,
    /// Σ_k w_k N(0, v_k) with Σ_k w_k v_k = 1.
    ScaledGaussianMixture { weights: Vec<f64>, variances: Vec<f64> },
    /// Gauss–Hermite atoms matching the first q standard normal moments (q ≥ 2).
    MatchedMomentDiscrete { q: u32 },
    /// ±1 with probability ½ each.
    RademacherShift,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec::GaussianStd
    }
}

/// Number of Gauss–Hermite atoms used to match q moments.
pub fn matched_atoms(q: u32) -> usize {
    (q as usize + 1).div_ceil(2)
}

impl NoiseSpec {
    /// The law of ξ as a finite mixture.
    pub fn law(&self) -> Result<Law> {
        match self {
            NoiseSpec::GaussianStd => Ok(Law::gaussian(0.0, 1.0)),
            NoiseSpec::ScaledGaussianMixture { weights, variances } => {
                if weights.len() != variances.len() || weights.is_empty() {
                    return Err(Error::Domain("mixture needs matching weights and variances".into()));
                }
                Law::new(
                    weights
                        .iter()
                        .zip(variances)
                        .map(|(&weight, &var)| Component { weight, mean: 0.0, var })
                        .collect(),
                )
            }
            NoiseSpec::MatchedMomentDiscrete { q } => {
                if *q < 2 {
                    return Err(Error::Domain(format!("matched-moment noise needs q ≥ 2 for unit variance, got {q}")));
                }
                Law::atoms(&gauss_hermite(matched_atoms(*q))?)
            }
            NoiseSpec::RademacherShift => Law::atoms(&[(-1.0, 0.5), (1.0, 0.5)]),
        }
    }

    /// Checks E ξ = 0, E ξ² = 1 (to 1e-10) and E ξ⁴ ≤ C_ξ.
    pub fn validate(&self, c_xi: f64) -> Result<Law> {
        let law = self.law()?;
        let (m1, m2, m4) = (law.moment(1), law.moment(2), law.moment(4));
        if m1.abs() > 1e-10 || (m2 - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(format!("noise must have mean 0 and variance 1, got {m1}, {m2}")));
        }
        if m4 > c_xi {
            return Err(Error::Domain(format!("noise fourth moment {m4} exceeds C_xi = {c_xi}")));
        }
        Ok(law)
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self, NoiseSpec::GaussianStd)
    }
}

/// Sampler bound to a validated law.
#[derive(Debug, Clone)]
pub struct NoiseSampler {
    law: Law,
    gaussian: bool,
}

impl NoiseSampler {
    pub fn new(spec: &NoiseSpec) -> Result<Self> {
        Ok(Self { law: spec.validate(DEFAULT_C_XI)?, gaussian: spec.is_gaussian() })
    }

    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.gaussian {
            rng.sample(rand_distr::StandardNormal)
        } else {
            self.law.sample(rng)
        }
    }

    pub fn law(&self) -> &Law {
        &self.law
    }
}
