//! Two-hypothesis constructions from the lower-bound arguments.
//!
//! Each construction pairs a simple hypothesis (a fixed regression model)
//! with a prior. H0 is the paired model and H1 the prior, except for the
//! nuisance construction where the prior sits on the null (f random, V ≡ 1)
//! and the alternative is the fixed transition variance.
//!
//! Samplers and per-coordinate laws use the unconditioned prior, so the joint
//! law of the data is exactly the product of the per-coordinate laws.

use serde::{Deserialize, Serialize};

use super::priors::PriorSpec;
use crate::error::{Error, Result};
use crate::numerics::Law;
use crate::rng::{rng_from_seed, sub_seed};
use crate::sim_model::{PreparedModel, RegressionModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hypothesis {
    Null,
    Alternative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Construction {
    /// V_i ∈ {1, m} Gaussian vs. V ≡ (1+m)/2 with mixture noise.
    TrivialityMixture { m: f64 },
    /// Spiky V₁ vs. V ≡ 1.
    SpikyTwoPoint { beta: f64, c: f64 },
    /// Rademacher tent variance vs. V ≡ 1 with mixture noise.
    DesignUnknownNoise { beta: f64, c: f64 },
    /// V_i = 1 + τ ± ρ vs. V ≡ 1 + τ, τ = 2ρ.
    RademacherTwoPoint { c: f64 },
    /// Random mean with matched moments vs. transition variance.
    NuisanceMean {
        alpha: f64,
        beta: f64,
        c: f64,
        #[serde(default)]
        q: Option<u32>,
    },
}

impl Construction {
    pub fn name(&self) -> &'static str {
        match self {
            Construction::TrivialityMixture { .. } => "triviality-mixture",
            Construction::SpikyTwoPoint { .. } => "spiky-two-point",
            Construction::DesignUnknownNoise { .. } => "design-unknown-noise",
            Construction::RademacherTwoPoint { .. } => "rademacher-two-point",
            Construction::NuisanceMean { .. } => "nuisance-mean",
        }
    }

    /// Whether the hypotheses are equal in law by construction.
    pub fn is_exact(&self) -> bool {
        matches!(
            self,
            Construction::TrivialityMixture { .. }
                | Construction::SpikyTwoPoint { .. }
                | Construction::DesignUnknownNoise { .. }
        )
    }

    pub fn prior(&self, n: usize) -> PriorSpec {
        match *self {
            Construction::TrivialityMixture { m } => PriorSpec::TwoLevelProfile { m, n },
            Construction::SpikyTwoPoint { beta, c } => PriorSpec::SpikyV1 { beta, c, n },
            Construction::DesignUnknownNoise { beta, c } => PriorSpec::MixtureNoisePair { beta, c, n },
            Construction::RademacherTwoPoint { c } => PriorSpec::RademacherProfile { c, n },
            Construction::NuisanceMean { alpha, beta, c, q } => PriorSpec::NuisanceMeanPrior { alpha, beta, c, q, n },
        }
    }

    /// The side of the test that carries the prior.
    pub fn prior_side(&self) -> Hypothesis {
        match self {
            Construction::NuisanceMean { .. } => Hypothesis::Null,
            _ => Hypothesis::Alternative,
        }
    }

    /// Per-coordinate laws of Y_0..Y_n under `hyp`. The fixed side is read
    /// off the paired model's noise law; the prior side comes from
    /// [`PriorSpec::coordinate_laws`].
    pub fn coordinate_laws(&self, n: usize, hyp: Hypothesis) -> Result<Vec<Law>> {
        let prior = self.prior(n);
        if hyp == self.prior_side() {
            return prior.coordinate_laws();
        }
        let model = prior.paired_model()?;
        let prepared = PreparedModel::new(model.clone())?;
        let noise = model.noise.law()?;
        Ok(prepared.f.iter().zip(&prepared.sd).map(|(&f, &s)| noise.affine(s, f)).collect())
    }

    /// Model for one replicate under `hyp`; the prior side draws from the
    /// unconditioned prior with `seed`.
    pub fn model(&self, n: usize, hyp: Hypothesis, seed: u64) -> Result<RegressionModel> {
        let prior = self.prior(n);
        prior.validate()?;
        if hyp == self.prior_side() {
            prior.draw_unconditioned(&mut rng_from_seed(seed))?.model(n)
        } else {
            prior.paired_model()
        }
    }

    /// One data vector Y_0..Y_n under `hyp`.
    pub fn sample(&self, n: usize, hyp: Hypothesis, seed: u64) -> Result<Vec<f64>> {
        let model = self.model(n, hyp, sub_seed(seed, 0))?;
        Ok(PreparedModel::new(model)?.sample(sub_seed(seed, 1)).y)
    }
}

/// Distinct laws in `laws` and, for each coordinate, the index of its law.
pub(crate) fn dedupe(laws: &[Law]) -> (Vec<Law>, Vec<usize>) {
    let key = |l: &Law| -> Vec<u64> {
        l.components
            .iter()
            .flat_map(|c| [c.weight.to_bits(), c.mean.to_bits(), c.var.to_bits()])
            .collect()
    };
    let mut keys: Vec<Vec<u64>> = Vec::new();
    let mut distinct = Vec::new();
    let mut index = Vec::with_capacity(laws.len());
    for l in laws {
        let k = key(l);
        match keys.iter().position(|x| *x == k) {
            Some(j) => index.push(j),
            None => {
                keys.push(k);
                distinct.push(l.clone());
                index.push(distinct.len() - 1);
            }
        }
    }
    (distinct, index)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalReport {
    pub construction: String,
    pub n: usize,
    /// max_i sup_x |p_{0,i}(x) − p_{1,i}(x)| over the evaluation grid.
    pub max_gap: f64,
    /// Coordinate attaining the maximum.
    pub worst_coordinate: usize,
    pub grid_points: usize,
}

/// Sup-distance between the single-observation marginal densities under the
/// two hypotheses, on `num_quadrature` evenly spaced points of each
/// coordinate's ±12 sd window.
pub fn marginal_equality_check(construction: &Construction, n: usize, num_quadrature: usize) -> Result<MarginalReport> {
    if num_quadrature < 2 {
        return Err(Error::Domain("marginal check needs at least two grid points".into()));
    }
    let p0 = construction.coordinate_laws(n, Hypothesis::Null)?;
    let p1 = construction.coordinate_laws(n, Hypothesis::Alternative)?;
    let mut best = (0.0f64, 0usize);
    let mut seen: Vec<(Law, Law)> = Vec::new();
    for (i, (a, b)) in p0.iter().zip(&p1).enumerate() {
        if seen.iter().any(|(x, y)| x == a && y == b) {
            continue;
        }
        seen.push((a.clone(), b.clone()));
        let l = 12.0 * a.max_sd().max(b.max_sd()) + a.max_abs_mean().max(b.max_abs_mean());
        for k in 0..num_quadrature {
            let x = -l + 2.0 * l * k as f64 / (num_quadrature - 1) as f64;
            let gap = (a.density(x).unwrap_or(f64::NAN) - b.density(x).unwrap_or(f64::NAN)).abs();
            if !(gap <= best.0) {
                best = (gap, i);
            }
        }
    }
    Ok(MarginalReport {
        construction: construction.name().into(),
        n,
        max_gap: best.0,
        worst_coordinate: best.1,
        grid_points: num_quadrature,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::normal_pdf;

    #[test]
    fn triviality_marginals_match_closed_form() {
        let c = Construction::TrivialityMixture { m: 9.0 };
        let laws = c.coordinate_laws(16, Hypothesis::Null).unwrap();
        for x in [-4.0, -1.0, 0.0, 0.3, 2.5] {
            let want = 0.5 * normal_pdf(x, 0.0, 1.0) + 0.5 * normal_pdf(x, 0.0, 9.0);
            assert!((laws[3].density(x).unwrap() - want).abs() < 1e-14);
        }
        let r = marginal_equality_check(&c, 16, 401).unwrap();
        assert!(r.max_gap < 1e-12, "{r:?}");
    }

    #[test]
    fn rademacher_pair_differs() {
        let r = marginal_equality_check(&Construction::RademacherTwoPoint { c: 1.0 }, 256, 201).unwrap();
        assert!(r.max_gap > 1e-6);
    }

    #[test]
    fn samples_have_grid_length() {
        let c = Construction::NuisanceMean { alpha: 0.2, beta: 0.5, c: 0.5, q: None };
        for hyp in [Hypothesis::Null, Hypothesis::Alternative] {
            assert_eq!(c.sample(32, hyp, 5).unwrap().len(), 33);
        }
    }
}
