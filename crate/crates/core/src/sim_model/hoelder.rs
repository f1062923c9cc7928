//! Empirical Hölder checks and heteroskedasticity functionals.

use serde::Serialize;

use super::function::FunctionSpec;
use super::model::DesignGrid;
use crate::error::{Error, Result};
use crate::numerics::{compensated_sum, quadrature_pieces};

const MAX_CHECK_POINTS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HoelderReport {
    pub passes: bool,
    /// Largest observed |g(x) − g(y)|/|x − y|^γ (on g′ for γ > 1).
    pub worst_ratio: f64,
    /// Largest observed |g| (and |g′| for γ > 1).
    pub sup: f64,
}

fn check_points(spec: &FunctionSpec, refinement: usize) -> Vec<f64> {
    let base = (refinement * spec.resolution()).clamp(2, MAX_CHECK_POINTS);
    let mut xs: Vec<f64> = (0..=base).map(|k| k as f64 / base as f64).collect();
    let mut cuts = vec![0.0];
    cuts.extend(spec.breakpoints());
    cuts.push(1.0);
    // Resolve narrow pieces (e.g. a transition layer) that the uniform grid misses.
    let unit = 1.0 / base as f64;
    for w in cuts.windows(2) {
        if w[1] - w[0] < refinement as f64 * unit {
            for k in 0..=refinement {
                xs.push(w[0] + (w[1] - w[0]) * k as f64 / refinement as f64);
            }
        }
    }
    xs.extend(cuts);
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    xs
}

/// Max over pairs of |v_j − v_i| / (x_j − x_i)^γ. Lags are scanned in
/// increasing order and the scan stops once range / gap^γ cannot beat the
/// current maximum.
fn ratio_scan(xs: &[f64], vs: &[f64], gamma: f64) -> f64 {
    let lo = vs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = vs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    if range == 0.0 {
        return 0.0;
    }
    let min_gap = xs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let mut best: f64 = 0.0;
    for lag in 1..xs.len() {
        if best > 0.0 && range / (lag as f64 * min_gap).powf(gamma) <= best {
            break;
        }
        for i in 0..xs.len() - lag {
            let d = (vs[i + lag] - vs[i]).abs();
            if d > 0.0 {
                best = best.max(d / (xs[i + lag] - xs[i]).powf(gamma));
            }
        }
    }
    best
}

/// Grid check of g ∈ H_γ(M): sup |g| ≤ M and the Hölder ratio ≤ M (for
/// γ > 1, |g′| ≤ M and the (γ − 1)-ratio of a finite-difference g′ ≤ M).
pub fn check_hoelder(spec: &FunctionSpec, gamma: f64, m: f64, grid_refinement: usize) -> Result<HoelderReport> {
    if !(gamma > 0.0 && gamma <= 2.0) {
        return Err(Error::Domain(format!("gamma must lie in (0, 2], got {gamma}")));
    }
    if grid_refinement < 2 {
        return Err(Error::Domain("grid refinement must be at least 2".into()));
    }
    let xs = check_points(spec, grid_refinement);
    let vs: Vec<f64> = xs.iter().map(|&x| spec.eval(x)).collect();
    let mut sup = vs.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let worst = if gamma <= 1.0 {
        ratio_scan(&xs, &vs, gamma)
    } else {
        let mids: Vec<f64> = xs.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let ds: Vec<f64> = (1..xs.len()).map(|k| (vs[k] - vs[k - 1]) / (xs[k] - xs[k - 1])).collect();
        sup = ds.iter().fold(sup, |s, d| s.max(d.abs()));
        ratio_scan(&mids, &ds, gamma - 1.0)
    };
    let tol = 1.0 + 1e-9;
    Ok(HoelderReport { passes: worst <= m * tol && sup <= m * tol, worst_ratio: worst, sup })
}

/// Checks a spec against its own declared class.
pub fn check_declared(spec: &FunctionSpec, grid_refinement: usize) -> Result<HoelderReport> {
    let tag = spec
        .declared_class()
        .ok_or_else(|| Error::Domain("function has no declared Hölder class".into()))?;
    check_hoelder(spec, tag.gamma, tag.m, grid_refinement)
}

/// ‖V − V̄‖₂ on [0, 1] by piecewise midpoint/Richardson quadrature split at
/// the function's breakpoints.
pub fn l2_heteroskedasticity(spec: &FunctionSpec, quadrature_points: usize) -> Result<f64> {
    match spec {
        FunctionSpec::Constant { .. } => return Ok(0.0),
        FunctionSpec::SmoothBumpSum { waves, .. } if waves.iter().all(|w| w.amplitude == 0.0) => return Ok(0.0),
        _ => {}
    }
    let cuts = spec.breakpoints();
    let mean = quadrature_pieces(|x| spec.eval(x), 0.0, 1.0, &cuts, quadrature_points)?.value;
    let dev = quadrature_pieces(|x| (spec.eval(x) - mean).powi(2), 0.0, 1.0, &cuts, quadrature_points)?.value;
    Ok(dev.max(0.0).sqrt())
}

/// Root-mean-square deviation of V over the n + 1 design points.
pub fn design_heteroskedasticity(spec: &FunctionSpec, grid: DesignGrid) -> f64 {
    let v = grid.values(spec);
    let mean = compensated_sum(v.iter().copied()) / v.len() as f64;
    let ss = compensated_sum(v.iter().map(|x| (x - mean) * (x - mean)));
    (ss / v.len() as f64).sqrt()
}
