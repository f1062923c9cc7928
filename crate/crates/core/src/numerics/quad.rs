//! One-dimensional quadrature: composite midpoint with Richardson
//! extrapolation, and adaptive Gauss–Kronrod (7/15).

use super::sum::CompensatedSum;
use crate::error::{Error, Result};

pub const DEFAULT_POINTS: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

fn midpoint<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, points: usize) -> Result<f64> {
    let step = (b - a) / points as f64;
    let mut acc = CompensatedSum::new();
    for k in 0..points {
        let x = a + (k as f64 + 0.5) * step;
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::Numeric(format!("integrand not finite at x = {x}")));
        }
        acc.add(v);
    }
    Ok(acc.value() * step)
}

/// Composite midpoint rule on `points` panels refined to `2·points` panels;
/// the refined value is Richardson-extrapolated and the correction is
/// returned as the error estimate.
pub fn quadrature<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, points: usize) -> Result<QuadResult> {
    if !(a < b) {
        return Err(Error::Domain(format!("quadrature needs a < b, got [{a}, {b}]")));
    }
    let coarse_n = points.max(1);
    let coarse = midpoint(&f, a, b, coarse_n)?;
    let fine = midpoint(&f, a, b, 2 * coarse_n)?;
    Ok(QuadResult { value: (4.0 * fine - coarse) / 3.0, error: (fine - coarse).abs() / 3.0 })
}

/// Midpoint/Richardson quadrature over [a, b] split at the given interior
/// breakpoints; panels are allotted in proportion to piece length.
pub fn quadrature_pieces<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    points: usize,
) -> Result<QuadResult> {
    let mut cuts: Vec<f64> = vec![a];
    cuts.extend(breakpoints.iter().copied().filter(|&x| x > a && x < b));
    cuts.push(b);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup();
    let total = b - a;
    let mut value = CompensatedSum::new();
    let mut error = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let share = ((hi - lo) / total * points as f64).ceil() as usize;
        let r = quadrature(&f, lo, hi, share.max(1))?;
        value.add(r.value);
        error += r.error;
    }
    Ok(QuadResult { value: value.value(), error })
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let hl = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = hl * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * hl, ((kron - gauss) * hl).abs())
}

/// Adaptive Gauss–Kronrod integration. Intervals are bisected until the
/// Kronrod/Gauss discrepancy meets `max(abs_tol, rel_tol·|I|)`, with the
/// budget split between halves.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<QuadResult> {
    let (whole, _) = gk15(&f, a, b);
    let tol = abs_tol.max(rel_tol * whole.abs());
    let mut acc = CompensatedSum::new();
    let mut err = 0.0;
    let mut stack = vec![(a, b, tol, 0u32)];
    while let Some((lo, hi, t, depth)) = stack.pop() {
        let (v, e) = gk15(&f, lo, hi);
        if !v.is_finite() {
            return Err(Error::Numeric(format!("integrand not finite on [{lo}, {hi}]")));
        }
        if e <= t || depth >= 60 {
            acc.add(v);
            err += e;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, 0.5 * t, depth + 1));
            stack.push((mid, hi, 0.5 * t, depth + 1));
        }
    }
    Ok(QuadResult { value: acc.value(), error: err })
}
