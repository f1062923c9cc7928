//! Design grid, regression model and sampling.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::function::FunctionSpec;
use super::noise::{NoiseSampler, NoiseSpec};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// The fixed design x_i = i/n, i = 0..=n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignGrid {
    n: usize,
}

impl DesignGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::Domain(format!("grid needs n ≥ 4, got {n}")));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        i as f64 / self.n as f64
    }

    /// Values of `spec` at every design point.
    pub fn values(&self, spec: &FunctionSpec) -> Vec<f64> {
        (0..=self.n).map(|i| spec.eval_design(i, self.n)).collect()
    }
}

/// Y_i = f(i/n) + V(i/n)^{1/2} ξ_i on the grid of size n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionModel {
    pub n: usize,
    pub mean: FunctionSpec,
    pub variance: FunctionSpec,
    #[serde(default)]
    pub noise: NoiseSpec,
}

impl RegressionModel {
    /// Builds a model, resolving grid-dependent function parameters.
    pub fn new(n: usize, mean: FunctionSpec, variance: FunctionSpec, noise: NoiseSpec) -> Result<Self> {
        DesignGrid::new(n)?;
        mean.validate()?;
        variance.validate()?;
        Ok(Self { n, mean: mean.resolve(n), variance: variance.resolve(n), noise })
    }

    pub fn grid(&self) -> DesignGrid {
        DesignGrid { n: self.n }
    }

    /// A short content digest used to identify scenarios in reports.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let text = serde_json::to_string(self).expect("model serializes");
        let hash = Sha256::digest(text.as_bytes());
        hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone)]
pub struct SampleVector {
    pub y: Vec<f64>,
    pub model: Arc<RegressionModel>,
    pub seed: u64,
}

impl SampleVector {
    pub fn n(&self) -> usize {
        self.y.len() - 1
    }
}

/// Precomputed design-point values of a model, reusable across replicates.
#[derive(Debug, Clone)]
pub struct PreparedModel {
    pub model: Arc<RegressionModel>,
    pub f: Vec<f64>,
    pub sd: Vec<f64>,
    noise: NoiseSampler,
}

impl PreparedModel {
    pub fn new(model: RegressionModel) -> Result<Self> {
        let grid = model.grid();
        let f = grid.values(&model.mean);
        let v = grid.values(&model.variance);
        if let Some((i, val)) = v.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
            return Err(Error::Domain(format!("variance is {val} (negative) at design index {i}")));
        }
        if let Some(i) = f.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("mean is not finite at design index {i}")));
        }
        let noise = NoiseSampler::new(&model.noise)?;
        Ok(Self { model: Arc::new(model), f, sd: v.iter().map(|v| v.sqrt()).collect(), noise })
    }

    pub fn sample(&self, seed: u64) -> SampleVector {
        let mut rng = rng_from_seed(seed);
        let y = self
            .f
            .iter()
            .zip(&self.sd)
            .map(|(f, s)| {
                let xi = self.noise.draw(&mut rng);
                f + s * xi
            })
            .collect();
        SampleVector { y, model: Arc::clone(&self.model), seed }
    }
}

/// Draws Y_i = f(i/n) + √V(i/n)·ξ_i with the stream determined by `seed`.
pub fn sample(model: &RegressionModel, seed: u64) -> Result<SampleVector> {
    Ok(PreparedModel::new(model.clone())?.sample(seed))
}
