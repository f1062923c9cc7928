//! Finite mixtures of point masses and Gaussians on ℝ.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One mixture component; `var == 0` is a point mass at `mean`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    pub mean: f64,
    pub var: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Law {
    pub components: Vec<Component>,
}

fn normal_moment(k: u32) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        (1..k).step_by(2).map(|j| j as f64).product()
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

impl Law {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Domain("law needs at least one component".into()));
        }
        for c in &components {
            if !(c.weight >= 0.0) || !(c.var >= 0.0) || !c.mean.is_finite() {
                return Err(Error::Domain(format!("invalid mixture component {c:?}")));
            }
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("mixture weights sum to {total}, not 1")));
        }
        Ok(Self { components })
    }

    pub fn gaussian(mean: f64, var: f64) -> Self {
        Self { components: vec![Component { weight: 1.0, mean, var }] }
    }

    pub fn point(at: f64) -> Self {
        Self::gaussian(at, 0.0)
    }

    pub fn atoms(points: &[(f64, f64)]) -> Result<Self> {
        Self::new(points.iter().map(|&(mean, weight)| Component { weight, mean, var: 0.0 }).collect())
    }

    /// Exact raw moment E X^k.
    pub fn moment(&self, k: u32) -> f64 {
        self.components
            .iter()
            .map(|c| {
                // Only even j contribute, so powers of the variance suffice.
                let m: f64 = (0..=k)
                    .step_by(2)
                    .map(|j| binomial(k, j) * c.mean.powi((k - j) as i32) * c.var.powi(j as i32 / 2) * normal_moment(j))
                    .sum();
                c.weight * m
            })
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.moment(2) - m * m
    }

    /// Law of a·X + b.
    pub fn affine(&self, a: f64, b: f64) -> Self {
        Self {
            components: self
                .components
                .iter()
                .map(|c| Component { weight: c.weight, mean: a * c.mean + b, var: a * a * c.var })
                .collect(),
        }
    }

    /// Law of X + Z with Z ~ N(0, s2) independent.
    pub fn convolve_gaussian(&self, s2: f64) -> Self {
        Self {
            components: self
                .components
                .iter()
                .map(|c| Component { var: c.var + s2, ..*c })
                .collect(),
        }
    }

    pub fn is_absolutely_continuous(&self) -> bool {
        self.components.iter().all(|c| c.var > 0.0)
    }

    /// Lebesgue density; `None` when the law has atoms.
    pub fn density(&self, x: f64) -> Option<f64> {
        if !self.is_absolutely_continuous() {
            return None;
        }
        Some(self.components.iter().map(|c| c.weight * normal_pdf(x, c.mean, c.var)).sum())
    }

    pub fn ln_density(&self, x: f64) -> Option<f64> {
        if !self.is_absolutely_continuous() {
            return None;
        }
        let logs: Vec<f64> = self
            .components
            .iter()
            .filter(|c| c.weight > 0.0)
            .map(|c| c.weight.ln() + ln_normal_pdf(x, c.mean, c.var))
            .collect();
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Some(top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut chosen = self.components.last().unwrap();
        for c in &self.components {
            acc += c.weight;
            if u < acc {
                chosen = c;
                break;
            }
        }
        if chosen.var == 0.0 {
            chosen.mean
        } else {
            let z: f64 = rng.sample(StandardNormal);
            chosen.mean + chosen.var.sqrt() * z
        }
    }

    pub fn max_sd(&self) -> f64 {
        self.components.iter().fold(0.0, |m, c| m.max(c.var.sqrt()))
    }

    pub fn max_abs_mean(&self) -> f64 {
        self.components.iter().fold(0.0, |m, c| m.max(c.mean.abs()))
    }
}

pub fn normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    (-0.5 * d * d / var).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

pub fn ln_normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    -0.5 * d * d / var - 0.5 * (2.0 * std::f64::consts::PI * var).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_moments() {
        let g = Law::gaussian(0.0, 2.0);
        assert_eq!(g.moment(2), 2.0);
        assert_eq!(g.moment(4), 12.0);
        assert_eq!(g.moment(3), 0.0);
    }

    #[test]
    fn shifted_gaussian_moment() {
        let g = Law::gaussian(1.0, 1.0);
        // E(1+Z)^4 = 1 + 6 + 3
        assert!((g.moment(4) - 10.0).abs() < 1e-14);
    }

    #[test]
    fn weights_must_sum_to_one() {
        assert!(Law::atoms(&[(0.0, 0.4), (1.0, 0.4)]).is_err());
    }

    #[test]
    fn ln_density_agrees() {
        let l = Law::new(vec![
            Component { weight: 0.5, mean: 0.0, var: 1.0 },
            Component { weight: 0.5, mean: 0.0, var: 4.0 },
        ])
        .unwrap();
        for x in [-3.0, 0.0, 1.5] {
            assert!((l.ln_density(x).unwrap() - l.density(x).unwrap().ln()).abs() < 1e-14);
        }
    }
}
