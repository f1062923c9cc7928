//! Prior distributions over (f, V, ξ) used by the lower-bound arguments.
//!
//! Every prior except the bump prior is a product over the design points:
//! a latent R_i is drawn iid from a finite atom law and plugged into a tent
//! g(x − i/n) of half-width 1/(2n), so the i-th observation depends on R_i
//! only. [`PriorSpec::realize`] maps a latent vector to a concrete
//! (f, V, noise) triple; the same map evaluated at a constant latent vector
//! gives the per-coordinate mixture components.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::moment::build_moment_matched;
use crate::error::{Error, Result};
use crate::numerics::Law;
use crate::rng::rng_from_seed;
use crate::sim_model::{
    check_declared, check_hoelder, design_heteroskedasticity, l2_heteroskedasticity, DesignGrid,
    FunctionSpec, HoelderReport, HoelderTag, NoiseSpec, RegressionModel, DEFAULT_M,
};

/// Rejection budget for conditioning events.
pub const REJECTION_BUDGET: u64 = 10_000;

const CHECK_REFINEMENT: usize = 4;
const CHECK_QUADRATURE: usize = 1 << 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PriorSpec {
    /// f = Σ R_i √(V₁(i/n) − 1) g(x − i/n) with R_i from the moment-matched
    /// law of order q, V ≡ 1; paired with f ≡ 0, V = V₁ (a smooth transition).
    NuisanceMeanPrior {
        alpha: f64,
        beta: f64,
        c: f64,
        /// Defaults to the smallest q with 2α(q + 1) > 1.
        #[serde(default)]
        q: Option<u32>,
        n: usize,
    },
    /// V_κ = 1 + ρ Σ_j κ_j ψ_j with m = ⌊n^{2/(4β+1)}⌋ bumps and
    /// ρ = c·c′·n^{−(2β+1)/(4β+1)}; paired with V ≡ 1.
    BumpVariancePrior { beta: f64, c: f64, c_prime: f64, n: usize },
    /// The deterministic spiky V₁ (equal to 1 on the design); paired with V ≡ 1.
    SpikyV1 { beta: f64, c: f64, n: usize },
    /// V_i = 1 + τ + ρR_i, ρ = √2·c·n^{−1/4}, τ = 2ρ, R_i Rademacher,
    /// conditioned on (design variance) > ρ²/2; paired with V ≡ 1 + τ.
    RademacherProfile { c: f64, n: usize },
    /// V = 1 + Σ R_i a g(x − i/n), a = √2·c·n^{−β}, Gaussian noise,
    /// conditioned on (design variance) > c²n^{−2β}; paired with V ≡ 1 and
    /// noise ½N(0, 1 + a) + ½N(0, 1 − a).
    MixtureNoisePair { beta: f64, c: f64, n: usize },
    /// V_i ∈ {1, m} with probability ½ each, Gaussian noise, conditioned on
    /// (design variance) ≥ 1; paired with V ≡ (1 + m)/2 and noise
    /// √(2/(1+m))·(½N(0, 1) + ½N(0, m)).
    TwoLevelProfile { m: f64, n: usize },
}

/// One concrete draw from a prior.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriorDraw {
    pub mean: FunctionSpec,
    pub variance: FunctionSpec,
    pub noise: NoiseSpec,
    /// Latent draws that produced this realization.
    pub latent: Vec<f64>,
    /// Number of candidate draws used (1 when no conditioning applies).
    pub attempts: u64,
}

impl PriorDraw {
    pub fn model(&self, n: usize) -> Result<RegressionModel> {
        RegressionModel::new(n, self.mean.clone(), self.variance.clone(), self.noise.clone())
    }
}

/// Membership of a draw in the class the prior is meant to live on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassCheck {
    /// Hölder check of the randomized function (f or V), if the class has one.
    pub hoelder: Option<HoelderReport>,
    pub nonnegative: bool,
    /// Achieved separation (design RMS or L² norm, see `separation_kind`).
    pub separation: f64,
    /// Separation the class requires.
    pub target: f64,
    pub separation_kind: &'static str,
    pub passes: bool,
}

fn rademacher<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    if rng.gen::<bool>() {
        1.0
    } else {
        -1.0
    }
}

fn retag(spec: FunctionSpec, gamma: f64) -> FunctionSpec {
    let m = spec.table_envelope(gamma).expect("tent sums are tables");
    spec.with_declared(HoelderTag { gamma, m })
}

/// Smallest q ≥ 1 with 2α(q + 1) > 1.
pub fn default_moment_order(alpha: f64) -> u32 {
    ((1.0 / (2.0 * alpha)).floor() as u32).max(1)
}

impl PriorSpec {
    pub fn n(&self) -> usize {
        match self {
            PriorSpec::NuisanceMeanPrior { n, .. }
            | PriorSpec::BumpVariancePrior { n, .. }
            | PriorSpec::SpikyV1 { n, .. }
            | PriorSpec::RademacherProfile { n, .. }
            | PriorSpec::MixtureNoisePair { n, .. }
            | PriorSpec::TwoLevelProfile { n, .. } => *n,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PriorSpec::NuisanceMeanPrior { .. } => "nuisance-mean-prior",
            PriorSpec::BumpVariancePrior { .. } => "bump-variance-prior",
            PriorSpec::SpikyV1 { .. } => "spiky-v1",
            PriorSpec::RademacherProfile { .. } => "rademacher-profile",
            PriorSpec::MixtureNoisePair { .. } => "mixture-noise-pair",
            PriorSpec::TwoLevelProfile { .. } => "two-level-profile",
        }
    }

    /// Checks the parameter regime the corresponding argument assumes.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        DesignGrid::new(n)?;
        let bad = |msg: String| Err(Error::Domain(msg));
        match *self {
            PriorSpec::NuisanceMeanPrior { alpha, beta, c, q, .. } => {
                if !(alpha > 0.0 && alpha < 0.25) {
                    return bad(format!("nuisance-mean prior needs 0 < α < 1/4, got {alpha}"));
                }
                if !(beta > 0.0 && c > 0.0) {
                    return bad("nuisance-mean prior needs β > 0 and c > 0".into());
                }
                let q = q.unwrap_or_else(|| default_moment_order(alpha));
                if 2.0 * alpha * (q as f64 + 1.0) <= 1.0 {
                    return bad(format!("moment order q = {q} violates 2α(q + 1) > 1"));
                }
            }
            PriorSpec::BumpVariancePrior { beta, c, c_prime, .. } => {
                if !(beta > 0.25) {
                    return bad(format!("bump prior needs β > 1/4, got {beta}"));
                }
                if !(c > 0.0 && c_prime > 0.0) {
                    return bad("bump prior needs c, c′ > 0".into());
                }
            }
            PriorSpec::SpikyV1 { beta, c, n } => {
                if !(beta > 0.0 && c > 0.0) {
                    return bad("spiky prior needs β > 0 and c > 0".into());
                }
                if 3f64.sqrt() * c * (n as f64).powf(-beta) >= 1.0 {
                    return bad("spiky prior would make V negative; decrease c".into());
                }
            }
            PriorSpec::RademacherProfile { c, n } => {
                let rho = 2f64.sqrt() * c * (n as f64).powf(-0.25);
                if !(c > 0.0) || 2.0 * rho >= 1.0 {
                    return bad(format!("rademacher profile needs 0 < τ = 2ρ < 1, got τ = {}", 2.0 * rho));
                }
            }
            PriorSpec::MixtureNoisePair { beta, c, n } => {
                let a = 2f64.sqrt() * c * (n as f64).powf(-beta);
                if !(beta > 0.0 && c > 0.0) || a >= 1.0 {
                    return bad(format!("mixture-noise pair needs 0 < √2·c·n^(−β) < 1, got {a}"));
                }
            }
            PriorSpec::TwoLevelProfile { m, .. } => {
                if !(m > 1.0) {
                    return bad(format!("two-level profile needs m > 1, got {m}"));
                }
            }
        }
        Ok(())
    }

    /// Number of latent coordinates per draw.
    pub fn latent_len(&self) -> usize {
        match self {
            PriorSpec::BumpVariancePrior { beta, n, .. } => bump_count(*beta, *n),
            PriorSpec::SpikyV1 { .. } => 0,
            _ => self.n() + 1,
        }
    }

    /// The law of each latent coordinate as (value, weight) atoms.
    pub fn latent_atoms(&self) -> Result<Vec<(f64, f64)>> {
        Ok(match self {
            PriorSpec::NuisanceMeanPrior { alpha, q, .. } => {
                build_moment_matched(q.unwrap_or_else(|| default_moment_order(*alpha)))?.atoms
            }
            PriorSpec::SpikyV1 { .. } => vec![(0.0, 1.0)],
            PriorSpec::TwoLevelProfile { .. } => vec![(0.0, 0.5), (1.0, 0.5)],
            _ => vec![(-1.0, 0.5), (1.0, 0.5)],
        })
    }

    /// Whether the i-th observation depends on the i-th latent only.
    pub fn is_product(&self) -> bool {
        !matches!(self, PriorSpec::BumpVariancePrior { .. })
    }

    /// Maps latent values to the concrete (f, V, noise) triple.
    pub fn realize(&self, latent: &[f64]) -> Result<PriorDraw> {
        if latent.len() != self.latent_len() {
            return Err(Error::Shape(format!(
                "{} expects {} latent values, got {}",
                self.name(),
                self.latent_len(),
                latent.len()
            )));
        }
        let gaussian = NoiseSpec::GaussianStd;
        let (mean, variance) = match *self {
            PriorSpec::NuisanceMeanPrior { alpha, beta, c, n, .. } => {
                let v1 = transition(alpha, beta, c, n);
                let amps: Vec<f64> = latent
                    .iter()
                    .enumerate()
                    .map(|(i, r)| r * (v1.eval_design(i, n) - 1.0).max(0.0).sqrt())
                    .collect();
                (retag(FunctionSpec::tent_sum(0.0, &amps), alpha), FunctionSpec::constant(1.0))
            }
            PriorSpec::BumpVariancePrior { beta, c, c_prime, n } => {
                let rho = c * c_prime * (n as f64).powf(-(2.0 * beta + 1.0) / (4.0 * beta + 1.0));
                let signs = latent.iter().map(|&s| if s < 0.0 { -1 } else { 1 }).collect();
                (FunctionSpec::constant(0.0), FunctionSpec::KappaPrior { beta, rho, signs })
            }
            PriorSpec::SpikyV1 { beta, c, n } => (FunctionSpec::constant(0.0), FunctionSpec::SpikyV1 { c, beta, n }),
            PriorSpec::RademacherProfile { c, n } => {
                let rho = 2f64.sqrt() * c * (n as f64).powf(-0.25);
                let amps: Vec<f64> = latent.iter().map(|r| rho * r).collect();
                (FunctionSpec::constant(0.0), FunctionSpec::tent_sum(1.0 + 2.0 * rho, &amps))
            }
            PriorSpec::MixtureNoisePair { beta, c, n } => {
                let a = 2f64.sqrt() * c * (n as f64).powf(-beta);
                let amps: Vec<f64> = latent.iter().map(|r| a * r).collect();
                (FunctionSpec::constant(0.0), retag(FunctionSpec::tent_sum(1.0, &amps), beta))
            }
            PriorSpec::TwoLevelProfile { m, .. } => {
                let amps: Vec<f64> = latent.iter().map(|b| (m - 1.0) * b).collect();
                (FunctionSpec::constant(0.0), FunctionSpec::tent_sum(1.0, &amps))
            }
        };
        Ok(PriorDraw { mean, variance, noise: gaussian, latent: latent.to_vec(), attempts: 1 })
    }

    /// The simple hypothesis the prior is tested against.
    pub fn paired_model(&self) -> Result<RegressionModel> {
        self.validate()?;
        let n = self.n();
        let zero = FunctionSpec::constant(0.0);
        let mixture = |weights: Vec<f64>, variances: Vec<f64>| NoiseSpec::ScaledGaussianMixture { weights, variances };
        match *self {
            PriorSpec::NuisanceMeanPrior { alpha, beta, c, .. } => {
                RegressionModel::new(n, zero, transition(alpha, beta, c, n), NoiseSpec::GaussianStd)
            }
            PriorSpec::BumpVariancePrior { .. } | PriorSpec::SpikyV1 { .. } => {
                RegressionModel::new(n, zero, FunctionSpec::constant(1.0), NoiseSpec::GaussianStd)
            }
            PriorSpec::RademacherProfile { c, .. } => {
                let tau = 2.0 * 2f64.sqrt() * c * (n as f64).powf(-0.25);
                RegressionModel::new(n, zero, FunctionSpec::constant(1.0 + tau), NoiseSpec::GaussianStd)
            }
            PriorSpec::MixtureNoisePair { beta, c, .. } => {
                let a = 2f64.sqrt() * c * (n as f64).powf(-beta);
                RegressionModel::new(n, zero, FunctionSpec::constant(1.0), mixture(vec![0.5, 0.5], vec![1.0 + a, 1.0 - a]))
            }
            PriorSpec::TwoLevelProfile { m, .. } => {
                let s = 2.0 / (1.0 + m);
                RegressionModel::new(
                    n,
                    zero,
                    FunctionSpec::constant((1.0 + m) / 2.0),
                    mixture(vec![0.5, 0.5], vec![s, s * m]),
                )
            }
        }
    }

    /// The conditioning event; `None` for priors without one.
    pub fn event_holds(&self, draw: &PriorDraw) -> Option<bool> {
        let n = self.n();
        let grid = DesignGrid::new(n).ok()?;
        let het2 = || design_heteroskedasticity(&draw.variance, grid).powi(2);
        match *self {
            PriorSpec::RademacherProfile { c, .. } => {
                let rho = 2f64.sqrt() * c * (n as f64).powf(-0.25);
                Some(het2() > rho * rho / 2.0)
            }
            PriorSpec::MixtureNoisePair { beta, c, .. } => Some(het2() > c * c * (n as f64).powf(-2.0 * beta)),
            PriorSpec::TwoLevelProfile { .. } => Some(het2() >= 1.0),
            _ => None,
        }
    }

    /// One draw from the unconditioned prior.
    pub fn draw_unconditioned<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PriorDraw> {
        let law = Law::atoms(&self.latent_atoms()?)?;
        let latent: Vec<f64> = match self {
            PriorSpec::BumpVariancePrior { .. } => (0..self.latent_len()).map(|_| rademacher(rng)).collect(),
            _ => (0..self.latent_len()).map(|_| law.sample(rng)).collect(),
        };
        self.realize(&latent)
    }

    /// Per-coordinate law of Y_i under the unconditioned prior, i = 0..=n.
    /// Built by realizing the prior at each constant latent vector and
    /// evaluating the resulting functions at the design points.
    pub fn coordinate_laws(&self) -> Result<Vec<Law>> {
        if !self.is_product() {
            return Err(Error::Domain(format!("{} is not a product over design points", self.name())));
        }
        self.validate()?;
        let n = self.n();
        let atoms = self.latent_atoms()?;
        let realized: Vec<(f64, PriorDraw)> = atoms
            .iter()
            .map(|&(r, w)| Ok((w, self.realize(&vec![r; self.latent_len()])?)))
            .collect::<Result<_>>()?;
        (0..=n)
            .map(|i| {
                let mut comps = Vec::new();
                for (w, d) in &realized {
                    let f = d.mean.eval_design(i, n);
                    let v = d.variance.eval_design(i, n);
                    let noise = d.noise.law()?.affine(v.sqrt(), f);
                    comps.extend(noise.components.into_iter().map(|mut c| {
                        c.weight *= w;
                        c
                    }));
                }
                Law::new(comps)
            })
            .collect()
    }

    /// Membership checks for a draw (Hölder, nonnegativity, separation).
    pub fn check_class(&self, draw: &PriorDraw) -> Result<ClassCheck> {
        let n = self.n();
        let grid = DesignGrid::new(n)?;
        let nonnegative = grid.values(&draw.variance).iter().all(|&v| v >= 0.0);
        let design = design_heteroskedasticity(&draw.variance, grid);
        let (hoelder, separation, target, kind) = match *self {
            PriorSpec::NuisanceMeanPrior { alpha, beta, c, .. } => {
                let h = check_hoelder(&draw.mean, alpha, DEFAULT_M, CHECK_REFINEMENT)?;
                let v1 = transition(alpha, beta, c, n);
                let sep = l2_heteroskedasticity(&v1, CHECK_QUADRATURE)?;
                (Some(h), sep, c * (n as f64).powf(-2.0 * alpha) / 2f64.sqrt(), "l2")
            }
            PriorSpec::BumpVariancePrior { beta, c, c_prime, .. } => {
                let h = check_declared(&draw.variance, CHECK_REFINEMENT)?;
                let h = HoelderReport { passes: h.passes && h.worst_ratio <= DEFAULT_M && h.sup <= DEFAULT_M, ..h };
                let m = bump_count(beta, n) as f64;
                let rho = c * c_prime * (n as f64).powf(-(2.0 * beta + 1.0) / (4.0 * beta + 1.0));
                let sep = l2_heteroskedasticity(&draw.variance, CHECK_QUADRATURE)?;
                (Some(h), sep, m.sqrt() * rho * (1.0 - 1e-6), "l2")
            }
            PriorSpec::SpikyV1 { beta, c, .. } => {
                let h = check_hoelder(&draw.variance, beta, DEFAULT_M, CHECK_REFINEMENT)?;
                let sep = l2_heteroskedasticity(&draw.variance, CHECK_QUADRATURE)?;
                (Some(h), sep, c * (n as f64).powf(-beta) * (1.0 - 1e-6), "l2")
            }
            PriorSpec::RademacherProfile { c, .. } => (None, design, c * (n as f64).powf(-0.25), "design"),
            PriorSpec::MixtureNoisePair { beta, c, .. } => {
                let h = check_hoelder(&draw.variance, beta, DEFAULT_M, CHECK_REFINEMENT)?;
                (Some(h), design, c * (n as f64).powf(-beta), "design")
            }
            PriorSpec::TwoLevelProfile { .. } => (None, design, 1.0, "design"),
        };
        let strict = matches!(self, PriorSpec::RademacherProfile { .. } | PriorSpec::MixtureNoisePair { .. });
        let separated = if strict { separation > target } else { separation >= target };
        let passes = nonnegative && separated && hoelder.map_or(true, |h| h.passes);
        Ok(ClassCheck { hoelder, nonnegative, separation, target, separation_kind: kind, passes })
    }
}

/// m = ⌊n^{2/(4β+1)}⌋ bumps, at least one.
pub fn bump_count(beta: f64, n: usize) -> usize {
    ((n as f64).powf(2.0 / (4.0 * beta + 1.0)).floor() as usize).clamp(1, n)
}

fn transition(alpha: f64, beta: f64, c: f64, n: usize) -> FunctionSpec {
    FunctionSpec::TransitionV1 { c, alpha, beta, n }
}

/// Draws from the prior conditioned on its event by rejection sampling
/// (at most [`REJECTION_BUDGET`] candidates).
pub fn draw_prior(spec: &PriorSpec, seed: u64) -> Result<PriorDraw> {
    spec.validate()?;
    let mut rng = rng_from_seed(seed);
    for attempt in 1..=REJECTION_BUDGET {
        let mut draw = spec.draw_unconditioned(&mut rng)?;
        if spec.event_holds(&draw).unwrap_or(true) {
            draw.attempts = attempt;
            return Ok(draw);
        }
    }
    Err(Error::Sampling(format!(
        "{}: conditioning event never held in {REJECTION_BUDGET} draws (empirical acceptance rate 0)",
        spec.name()
    )))
}

/// A draw from the unconditioned prior.
pub fn draw_prior_unconditioned(spec: &PriorSpec, seed: u64) -> Result<PriorDraw> {
    spec.validate()?;
    spec.draw_unconditioned(&mut rng_from_seed(seed))
}
