//! Boundary-deleted, renormalized discrete kernels K_n^h and the bandwidth rule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::compensated_sum;

/// Default lower bound c on the normalizer 1 − ∫_{−2/n}^{2/n} (1/h)K(u/h) du.
pub const DEFAULT_NORMALIZER_FLOOR: f64 = 0.1;

/// Largest bandwidth returned by [`optimal_bandwidth`].
pub const MAX_BANDWIDTH: f64 = 1.0 - 1e-9;

/// Symmetric base kernels supported on [−1, 1] with unit mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BaseKernel {
    /// K(u) = ½ on [−1, 1].
    #[default]
    Box,
    /// K(u) = (1 − u⁴/2)/1.8 on [−1, 1].
    QuarticPlateau,
    /// K(u) = table(|u|), linear between knots `us` (0 = us[0] < … < us[last] = 1).
    CustomTable { us: Vec<f64>, values: Vec<f64> },
}

impl BaseKernel {
    pub fn validate(&self) -> Result<()> {
        if let BaseKernel::CustomTable { us, values } = self {
            if us.len() < 2 || us.len() != values.len() || us[0] != 0.0 || *us.last().unwrap() != 1.0 {
                return Err(Error::Domain("kernel table needs knots 0 = u_0 < … < u_m = 1".into()));
            }
            if us.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::Domain("kernel table knots must increase".into()));
            }
            if values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                return Err(Error::Domain("kernel table values must be positive on [−1, 1]".into()));
            }
            let mass = 2.0 * self.half_mass(1.0);
            if (mass - 1.0).abs() > 1e-10 {
                return Err(Error::Domain(format!("kernel table integrates to {mass}, not 1")));
            }
        }
        Ok(())
    }

    pub fn eval(&self, u: f64) -> f64 {
        let a = u.abs();
        if a > 1.0 {
            return 0.0;
        }
        match self {
            BaseKernel::Box => 0.5,
            BaseKernel::QuarticPlateau => (1.0 - a.powi(4) / 2.0) / 1.8,
            BaseKernel::CustomTable { us, values } => {
                let k = us.partition_point(|&t| t <= a).clamp(1, us.len() - 1);
                let (u0, u1) = (us[k - 1], us[k]);
                values[k - 1] + (values[k] - values[k - 1]) * (a - u0) / (u1 - u0)
            }
        }
    }

    /// ∫_0^x K for x ∈ [0, 1].
    fn half_mass(&self, x: f64) -> f64 {
        match self {
            BaseKernel::Box => 0.5 * x,
            BaseKernel::QuarticPlateau => (x - x.powi(5) / 10.0) / 1.8,
            BaseKernel::CustomTable { us, values } => {
                let mut parts = Vec::with_capacity(us.len());
                for k in 1..us.len() {
                    let (u0, u1) = (us[k - 1], us[k]);
                    if x <= u0 {
                        break;
                    }
                    let hi = x.min(u1);
                    let slope = (values[k] - values[k - 1]) / (u1 - u0);
                    let d = hi - u0;
                    parts.push(values[k - 1] * d + 0.5 * slope * d * d);
                }
                compensated_sum(parts)
            }
        }
    }

    /// Distribution function F(x) = ∫_{−1}^{x} K.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= -1.0 {
            0.0
        } else if x >= 1.0 {
            1.0
        } else if x >= 0.0 {
            0.5 + self.half_mass(x)
        } else {
            0.5 - self.half_mass(-x)
        }
    }

    /// ∫_a^b K for 0 ≤ a ≤ b, computed without cancellation against ½.
    fn mass_between_nonneg(&self, a: f64, b: f64) -> f64 {
        let (a, b) = (a.min(1.0), b.min(1.0));
        self.half_mass(b) - self.half_mass(a)
    }

    pub fn sup(&self) -> f64 {
        match self {
            BaseKernel::Box => 0.5,
            BaseKernel::QuarticPlateau => 1.0 / 1.8,
            BaseKernel::CustomTable { values, .. } => values.iter().cloned().fold(0.0, f64::max),
        }
    }

    pub fn inf_on_support(&self) -> f64 {
        match self {
            BaseKernel::Box => 0.5,
            BaseKernel::QuarticPlateau => 0.5 / 1.8,
            BaseKernel::CustomTable { values, .. } => values.iter().cloned().fold(f64::INFINITY, f64::min),
        }
    }
}

/// K_n^h(t) for t ∈ ℤ, stored for t = 0..=t_max (symmetric, zero beyond).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModifiedKernel {
    pub n: usize,
    pub h: f64,
    pub base: BaseKernel,
    pub normalizer: f64,
    weights: Vec<f64>,
}

impl ModifiedKernel {
    #[inline]
    pub fn weight(&self, t: i64) -> f64 {
        let a = t.unsigned_abs() as usize;
        if a < self.weights.len() {
            self.weights[a]
        } else {
            0.0
        }
    }

    /// Largest |t| with a (possibly) nonzero weight.
    pub fn t_max(&self) -> usize {
        self.weights.len().saturating_sub(1)
    }

    /// Weights for t = 0..=t_max.
    pub fn half_weights(&self) -> &[f64] {
        &self.weights
    }

    /// Σ_t |K_n^h(t)|.
    pub fn l1_mass(&self) -> f64 {
        compensated_sum(self.weights.iter().enumerate().map(|(t, w)| if t == 0 { w.abs() } else { 2.0 * w.abs() }))
    }

    /// Kernel table as CSV with header `t,weight`, t from −t_max to t_max.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,weight\n");
        let tm = self.t_max() as i64;
        for t in -tm..=tm {
            out.push_str(&format!("{t},{:e}\n", self.weight(t)));
        }
        out
    }

    /// Rebuilds the kernel from explicit weights (for tests of the deletion
    /// property); weights at |t| ≤ 1 are forced to zero.
    pub fn with_weights(&self, mut weights: Vec<f64>) -> Self {
        for w in weights.iter_mut().take(2) {
            *w = 0.0;
        }
        Self { weights, ..self.clone() }
    }
}

/// ∫_{−2/n}^{2/n} (1/h)K(u/h) du subtracted from one.
pub fn normalizer(base: &BaseKernel, n: usize, h: f64) -> f64 {
    1.0 - 2.0 * base.mass_between_nonneg(0.0, 2.0 / (n as f64 * h))
}

pub fn build_modified_kernel(base: &BaseKernel, n: usize, h: f64) -> Result<ModifiedKernel> {
    build_modified_kernel_with(base, n, h, DEFAULT_NORMALIZER_FLOOR)
}

/// K_n^h(t) = 1{|t| ≥ 2} ∫_{|t|/n}^{(|t|+1)/n} (1/h)K(u/h) du / normalizer.
pub fn build_modified_kernel_with(base: &BaseKernel, n: usize, h: f64, floor: f64) -> Result<ModifiedKernel> {
    if n < 4 {
        return Err(Error::Domain(format!("kernel needs n ≥ 4, got {n}")));
    }
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::Domain(format!("bandwidth must lie in (0, 1), got {h}")));
    }
    base.validate()?;
    let norm = normalizer(base, n, h);
    if !(norm.abs() >= floor) {
        return Err(Error::Calibration(format!(
            "kernel normalizer {norm:.4} is below {floor} at n = {n}, h = {h:.3e} (nh = {:.3}); increase C_h",
            n as f64 * h
        )));
    }
    let nh = n as f64 * h;
    // Weights vanish once |t|/n ≥ h; t is also bounded by the grid.
    let t_max = ((nh.ceil() as usize).saturating_sub(1)).min(n - 1);
    let mut weights = vec![0.0; t_max.max(1) + 1];
    for (t, w) in weights.iter_mut().enumerate().skip(2) {
        let mass = base.mass_between_nonneg(t as f64 / nh, (t + 1) as f64 / nh);
        *w = mass / norm;
    }
    Ok(ModifiedKernel { n, h, base: base.clone(), normalizer: norm, weights })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bandwidth {
    pub h: f64,
    pub clamped: bool,
}

/// Exponent 2/(4β+1) ∧ 1 of the bandwidth rule.
pub fn bandwidth_exponent(beta: f64) -> f64 {
    (2.0 / (4.0 * beta + 1.0)).min(1.0)
}

/// h = C_h · n^{−(2/(4β+1) ∧ 1)}, clamped into (0, 1).
pub fn optimal_bandwidth(beta: f64, n: usize, c_h: f64) -> Result<Bandwidth> {
    if !(beta > 0.0 && beta < 0.5) {
        return Err(Error::Domain(format!("beta must lie in (0, 1/2), got {beta}")));
    }
    if !(c_h > 0.0) || !c_h.is_finite() {
        return Err(Error::Domain(format!("C_h must be positive, got {c_h}")));
    }
    let h = c_h * (n as f64).powf(-bandwidth_exponent(beta));
    if h >= MAX_BANDWIDTH {
        Ok(Bandwidth { h: MAX_BANDWIDTH, clamped: true })
    } else {
        Ok(Bandwidth { h, clamped: false })
    }
}

/// Smallest power of two C_h for which the normalizer condition holds at
/// every n of the grid.
pub fn default_c_h(base: &BaseKernel, beta: f64, n_grid: &[usize], floor: f64) -> Result<f64> {
    for k in -10..=30 {
        let c_h = 2f64.powi(k);
        let ok = n_grid.iter().all(|&n| {
            optimal_bandwidth(beta, n, c_h).map(|b| normalizer(base, n, b.h) >= floor).unwrap_or(false)
        });
        if ok {
            return Ok(c_h);
        }
    }
    Err(Error::Calibration("no power of two C_h satisfies the normalizer condition".into()))
}

/// Row sums Σ_{j=0}^{n−1} K_n^h(i − j) for i = 0..n−1.
pub fn kernel_sum_profile(k: &ModifiedKernel) -> Vec<f64> {
    let n = k.n as i64;
    let tm = k.t_max() as i64;
    (0..n)
        .map(|i| {
            let lo = (i - tm).max(0);
            let hi = (i + tm).min(n - 1);
            compensated_sum((lo..=hi).map(|j| k.weight(i - j)))
        })
        .collect()
}
