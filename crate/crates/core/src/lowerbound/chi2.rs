//! χ² divergences between Gaussian-smoothed mixtures.

use serde::Serialize;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::numerics::{integrate_adaptive, Component, Law};

/// Truncation half-width in units of the largest component standard deviation.
pub const TRUNCATION_SDS: f64 = 12.0;
/// Absolute tolerance of the adaptive quadrature.
pub const CHI2_ABS_TOL: f64 = 1e-18;
const CHI2_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Chi2Report {
    /// Quadrature over [−L, L] plus the tail bound.
    pub value: f64,
    /// Quadrature part only.
    pub interior: f64,
    /// Analytic upper bound on the contribution of |x| > L.
    pub tail_bound: f64,
    pub half_width: f64,
    pub quadrature_error: f64,
}

/// ∫_{x>l} e^{−λx²/2 + bx} dx.
fn gaussian_exp_tail(lambda: f64, b: f64, l: f64) -> f64 {
    let centre = b / lambda;
    let log_peak = b * b / (2.0 * lambda);
    (log_peak).exp() * (2.0 * std::f64::consts::PI / lambda).sqrt() * 0.5 * erfc((lambda / 2.0).sqrt() * (l - centre))
}

/// Upper bound on ∫_{|x|>L} p²/q using q ≥ w_b φ_b for the widest component b
/// of q; infinite when p has heavier tails than that component.
fn tail_bound(q: &Law, p: &Law, l: f64) -> f64 {
    let b = q
        .components
        .iter()
        .filter(|c| c.weight > 0.0)
        .fold(None::<&Component>, |best, c| match best {
            Some(x) if x.var >= c.var => Some(x),
            _ => Some(c),
        })
        .expect("nonempty law");
    let mut total = 0.0;
    for a in &p.components {
        for a2 in &p.components {
            if a.weight == 0.0 || a2.weight == 0.0 {
                continue;
            }
            let lambda = 1.0 / a.var + 1.0 / a2.var - 1.0 / b.var;
            if lambda <= 0.0 {
                return f64::INFINITY;
            }
            let bb = a.mean / a.var + a2.mean / a2.var - b.mean / b.var;
            let c0 = -a.mean * a.mean / (2.0 * a.var) - a2.mean * a2.mean / (2.0 * a2.var)
                + b.mean * b.mean / (2.0 * b.var);
            let pref = (2.0 * std::f64::consts::PI * b.var).sqrt()
                / (2.0 * std::f64::consts::PI * (a.var * a2.var).sqrt());
            let tails = gaussian_exp_tail(lambda, bb, l) + gaussian_exp_tail(lambda, -bb, l);
            total += a.weight * a2.weight / b.weight * pref * c0.exp() * tails;
        }
    }
    // (p − q)²/q ≤ p²/q + q; add q's own tail mass.
    let q_tail: f64 = q
        .components
        .iter()
        .map(|c| {
            let s = (2.0 * c.var).sqrt();
            c.weight * 0.5 * (erfc((l - c.mean) / s) + erfc((l + c.mean) / s))
        })
        .sum();
    total + q_tail
}

fn panel_cuts(laws: [&Law; 2], l: f64) -> Vec<f64> {
    let mut cuts: Vec<f64> = (0..=32).map(|k| -l + 2.0 * l * k as f64 / 32.0).collect();
    for law in laws {
        for c in &law.components {
            let s = c.var.sqrt();
            for k in [-6.0, -3.0, -1.0, 0.0, 1.0, 3.0, 6.0] {
                let x = c.mean + k * s;
                if x > -l && x < l {
                    cuts.push(x);
                }
            }
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    cuts
}

/// χ²(p ‖ q) = ∫ (p − q)²/q for absolutely continuous mixtures, with q the
/// reference law.
pub fn chi2_divergence(q: &Law, p: &Law) -> Result<Chi2Report> {
    if !q.is_absolutely_continuous() || !p.is_absolutely_continuous() {
        return Err(Error::Domain("χ² quadrature needs laws with Gaussian components only".into()));
    }
    let sd = q.max_sd().max(p.max_sd());
    let l = TRUNCATION_SDS * sd + q.max_abs_mean().max(p.max_abs_mean());
    let cuts = panel_cuts([q, p], l);
    let integrand = |x: f64| {
        let qx = q.density(x).unwrap_or(0.0);
        let px = p.density(x).unwrap_or(0.0);
        let d = px - qx;
        if d == 0.0 {
            0.0
        } else {
            d * d / qx
        }
    };
    let mut interior = 0.0;
    let mut err = 0.0;
    let per_panel = CHI2_ABS_TOL / cuts.len() as f64;
    for w in cuts.windows(2) {
        let r = integrate_adaptive(integrand, w[0], w[1], per_panel, CHI2_REL_TOL)?;
        interior += r.value;
        err += r.error;
    }
    let tail = if p == q { 0.0 } else { tail_bound(q, p, l) };
    let interior = interior.max(0.0);
    Ok(Chi2Report { value: interior + tail, interior, tail_bound: tail, half_width: l, quadrature_error: err })
}

/// χ²(ν₁ ∗ N(0, 1) ‖ ν₀ ∗ N(0, 1)), with ν₀ the reference.
pub fn chi2_convolved(nu0: &Law, nu1: &Law) -> Result<Chi2Report> {
    chi2_divergence(&nu0.convolve_gaussian(1.0), &nu1.convolve_gaussian(1.0))
}

/// χ² of product measures from per-coordinate values: Π(1 + χ²_i) − 1.
pub fn chi2_tensorize(per_coordinate: &[f64]) -> Result<f64> {
    if let Some(v) = per_coordinate.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::Domain(format!("χ² values must be nonnegative, got {v}")));
    }
    if per_coordinate.len() == 1 {
        return Ok(per_coordinate[0]);
    }
    let log: f64 = per_coordinate.iter().map(|v| v.ln_1p()).sum();
    Ok(log.exp_m1())
}

/// (16/√L)·ε^{2L+2}/(1 − ε²): χ² bound for ε-subgaussian laws sharing L moments.
pub fn moment_matching_bound(l: u32, eps: f64) -> f64 {
    assert!(l >= 1 && eps > 0.0 && eps < 1.0, "bound needs L ≥ 1 and 0 < ε < 1");
    16.0 / (l as f64).sqrt() * eps.powi(2 * l as i32 + 2) / (1.0 - eps * eps)
}

/// 1 − ½√χ², clamped to [0, 1].
pub fn risk_lower_bound(chi2: f64) -> f64 {
    (1.0 - 0.5 * chi2.sqrt()).clamp(0.0, 1.0)
}
