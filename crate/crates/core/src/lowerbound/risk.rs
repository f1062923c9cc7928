//! Bayes risk of the likelihood-ratio test versus the χ² risk floor.

use rayon::prelude::*;
use serde::Serialize;

use super::chi2::{chi2_divergence, chi2_tensorize, risk_lower_bound};
use super::construction::{dedupe, Construction, Hypothesis};
use crate::error::Result;
use crate::numerics::{pairwise_sum, Law};
use crate::rng::{replicate_seed, sub_seed};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskReport {
    pub construction: String,
    pub n: usize,
    pub replicates: usize,
    /// P₀(reject) of the likelihood-ratio test.
    pub type1: f64,
    /// P₁(accept) of the likelihood-ratio test.
    pub type2: f64,
    /// type1 + type2, an estimate of 1 − d_TV.
    pub mc_risk: f64,
    pub mc_stderr: f64,
    /// Tensorized χ²(P₁ ‖ P₀).
    pub chi2: f64,
    /// 1 − ½√χ², clamped to [0, 1].
    pub bound_risk: f64,
}

/// Per-coordinate log densities, shared across replicates.
pub struct LikelihoodRatio {
    null: Vec<Law>,
    alt: Vec<Law>,
    null_index: Vec<usize>,
    alt_index: Vec<usize>,
}

impl LikelihoodRatio {
    pub fn new(construction: &Construction, n: usize) -> Result<Self> {
        let (null, null_index) = dedupe(&construction.coordinate_laws(n, Hypothesis::Null)?);
        let (alt, alt_index) = dedupe(&construction.coordinate_laws(n, Hypothesis::Alternative)?);
        Ok(Self { null, alt, null_index, alt_index })
    }

    /// log p₁(y) − log p₀(y).
    pub fn log_ratio(&self, y: &[f64]) -> f64 {
        let terms: Vec<f64> = y
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let l1 = self.alt[self.alt_index[i]].ln_density(v).expect("continuous law");
                let l0 = self.null[self.null_index[i]].ln_density(v).expect("continuous law");
                l1 - l0
            })
            .collect();
        pairwise_sum(&terms)
    }

    /// Tensorized χ² with the null coordinates as reference.
    pub fn chi2(&self) -> Result<f64> {
        let mut cache: Vec<((usize, usize), f64)> = Vec::new();
        let mut values = Vec::with_capacity(self.null_index.len());
        for (&a, &b) in self.null_index.iter().zip(&self.alt_index) {
            let v = match cache.iter().find(|(k, _)| *k == (a, b)) {
                Some((_, v)) => *v,
                None => {
                    let v = chi2_divergence(&self.null[a], &self.alt[b])?.value;
                    cache.push(((a, b), v));
                    v
                }
            };
            values.push(v);
        }
        chi2_tensorize(&values)
    }
}

/// Simulates the likelihood-ratio test (reject iff log LR > 0) under both
/// hypotheses and compares its risk with the χ² floor.
pub fn risk_floor_estimate(construction: &Construction, n: usize, replicates: usize, seed: u64) -> Result<RiskReport> {
    let lr = LikelihoodRatio::new(construction, n)?;
    let run = |hyp: Hypothesis, label: u64| -> Result<f64> {
        let base = sub_seed(seed, label);
        let hits: Vec<f64> = (0..replicates as u64)
            .into_par_iter()
            .map(|r| {
                let y = construction.sample(n, hyp, replicate_seed(base, r))?;
                let reject = lr.log_ratio(&y) > 0.0;
                Ok(match hyp {
                    Hypothesis::Null => reject as u8 as f64,
                    Hypothesis::Alternative => (!reject) as u8 as f64,
                })
            })
            .collect::<Result<_>>()?;
        Ok(pairwise_sum(&hits) / replicates as f64)
    };
    let type1 = run(Hypothesis::Null, 0)?;
    let type2 = run(Hypothesis::Alternative, 1)?;
    let r = replicates as f64;
    let mc_stderr = (type1 * (1.0 - type1) / r + type2 * (1.0 - type2) / r).sqrt();
    let chi2 = lr.chi2()?;
    Ok(RiskReport {
        construction: construction.name().into(),
        n,
        replicates,
        type1,
        type2,
        mc_risk: type1 + type2,
        mc_stderr,
        chi2,
        bound_risk: risk_lower_bound(chi2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_hypotheses_have_risk_one() {
        let r = risk_floor_estimate(&Construction::SpikyTwoPoint { beta: 0.2, c: 0.5 }, 64, 50, 1).unwrap();
        assert_eq!(r.mc_risk, 1.0);
        assert_eq!(r.chi2, 0.0);
        assert_eq!(r.bound_risk, 1.0);
    }

    #[test]
    fn strong_rademacher_signal_is_detected() {
        // Large c: the likelihood-ratio test separates the hypotheses.
        let r = risk_floor_estimate(&Construction::RademacherTwoPoint { c: 2.0 }, 4096, 100, 2).unwrap();
        assert!(r.mc_risk < 0.5, "{r:?}");
    }
}
