//! Mean and variance function catalog.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::integrate_adaptive;

/// A sinusoidal component `amplitude · sin(2π·frequency·x + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wave {
    pub amplitude: f64,
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

/// A Hölder class tag (exponent γ, constant M).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoelderTag {
    pub gamma: f64,
    pub m: f64,
}

/// Functions on [0, 1] used as means f or variances V.
///
/// Kinds whose shape depends on the grid (`spiky-v1`, `transition-v1`) take
/// `n = 0` to mean "the grid size of the model they are used in"; see
/// [`FunctionSpec::resolve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FunctionSpec {
    Constant {
        value: f64,
    },
    /// α ≤ 1: `a·m^{−α}·(2·min(t, 1−t))^α` with t = frac(m·x), in H_α(a·2^α).
    /// 1 < α ≤ 2: `a·m^{−α}·sin(2πm·x)`.
    SawtoothHoelder {
        amplitude: f64,
        exponent: f64,
        count: usize,
    },
    /// `base + Σ_k a_k sin(2π f_k x + φ_k)`.
    SmoothBumpSum {
        base: f64,
        #[serde(default)]
        waves: Vec<Wave>,
    },
    /// Piecewise linear, 1 at every multiple of 1/(2n), peaks 1 + √3·c·n^{−β}
    /// at i/n + 1/(4n) and troughs 1 − √3·c·n^{−β} at i/n + 3/(4n).
    SpikyV1 {
        c: f64,
        beta: f64,
        #[serde(default)]
        n: usize,
    },
    /// `1 + 2c·n^{−2α}·ψ(s(x − ½ + 1/(2s)))`, s = n^{2α/⌈β⌉}, ψ the smoothstep.
    TransitionV1 {
        c: f64,
        alpha: f64,
        beta: f64,
        #[serde(default)]
        n: usize,
    },
    /// `1 + ρ Σ_j κ_j √m ψ(m x − j)` over m = signs.len() disjoint bumps.
    KappaPrior {
        beta: f64,
        rho: f64,
        signs: Vec<i8>,
    },
    /// Linear interpolation through (xs, values); constant beyond the ends.
    CustomTable {
        xs: Vec<f64>,
        values: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        declared: Option<HoelderTag>,
    },
}

fn smoothstep_h(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// ψ(t) = h(t)/(h(t) + h(1 − t)) with h(t) = e^{−1/t}·1{t > 0}.
pub fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = smoothstep_h(t);
        a / (a + smoothstep_h(1.0 - t))
    }
}

fn max_slope(g: impl Fn(f64) -> f64) -> f64 {
    const N: usize = 100_000;
    let step = 1.0 / N as f64;
    let mut best: f64 = 0.0;
    let mut prev = g(0.0);
    for k in 1..=N {
        let cur = g(k as f64 * step);
        best = best.max((cur - prev).abs() / step);
        prev = cur;
    }
    best
}

fn smoothstep_slope() -> f64 {
    static SLOPE: OnceLock<f64> = OnceLock::new();
    *SLOPE.get_or_init(|| 1.01 * max_slope(smoothstep))
}

fn bump_raw(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        (-1.0 / (t * (1.0 - t))).exp() * (2.0 * PI * t).sin()
    }
}

struct BumpConstants {
    scale: f64,
    sup: f64,
    slope: f64,
}

fn bump_constants() -> &'static BumpConstants {
    static C: OnceLock<BumpConstants> = OnceLock::new();
    C.get_or_init(|| {
        let norm2 = integrate_adaptive(|t| bump_raw(t).powi(2), 0.0, 1.0, 1e-300, 1e-14)
            .expect("bump norm")
            .value;
        let scale = 1.0 / norm2.sqrt();
        let sup = (0..=100_000).map(|k| (scale * bump_raw(k as f64 / 1e5)).abs()).fold(0.0, f64::max);
        let slope = max_slope(|t| scale * bump_raw(t));
        BumpConstants { scale, sup: 1.01 * sup, slope: 1.01 * slope }
    })
}

/// The zero-mean, unit-L² bump ψ on [0, 1] used by the κ-prior:
/// ψ ∝ exp(−1/(t(1−t)))·sin(2πt).
pub fn bump(t: f64) -> f64 {
    bump_constants().scale * bump_raw(t)
}

/// Upper bounds on ‖ψ‖_∞ and ‖ψ′‖_∞.
pub fn bump_bounds() -> (f64, f64) {
    let c = bump_constants();
    (c.sup, c.slope)
}

fn interp(xs: &[f64], values: &[f64], x: f64) -> f64 {
    let k = xs.partition_point(|&t| t <= x);
    if k == 0 {
        return values[0];
    }
    if xs[k - 1] == x || k == xs.len() {
        return values[k - 1];
    }
    let (x0, x1) = (xs[k - 1], xs[k]);
    let (v0, v1) = (values[k - 1], values[k]);
    v0 + (v1 - v0) * (x - x0) / (x1 - x0)
}

/// Spiky profile on one period, r ∈ [0, 1).
fn spiky_local(amp: f64, r: f64) -> f64 {
    let u = 4.0 * r;
    if u <= 1.0 {
        1.0 + amp * u
    } else if u <= 2.0 {
        1.0 + amp * (2.0 - u)
    } else if u <= 3.0 {
        1.0 - amp * (u - 2.0)
    } else {
        1.0 - amp * (4.0 - u)
    }
}

/// Tent g(x) = (1 − 2n|x|)·1{|x| ≤ 1/(2n)}.
pub fn tent(n: usize, x: f64) -> f64 {
    let v = 1.0 - 2.0 * n as f64 * x.abs();
    v.max(0.0)
}

impl FunctionSpec {
    pub fn constant(value: f64) -> Self {
        FunctionSpec::Constant { value }
    }

    /// Fills in grid-dependent parameters left at `n = 0`.
    pub fn resolve(&self, n: usize) -> Self {
        match self {
            FunctionSpec::SpikyV1 { c, beta, n: 0 } => FunctionSpec::SpikyV1 { c: *c, beta: *beta, n },
            FunctionSpec::TransitionV1 { c, alpha, beta, n: 0 } => {
                FunctionSpec::TransitionV1 { c: *c, alpha: *alpha, beta: *beta, n }
            }
            other => other.clone(),
        }
    }

    /// Tent sum `base + Σ_i a_i g(x − i/n)` stored exactly as a table with
    /// knots at every multiple of 1/(2n).
    pub fn tent_sum(base: f64, amplitudes: &[f64]) -> Self {
        let n = amplitudes.len() - 1;
        let xs: Vec<f64> = (0..=2 * n).map(|k| k as f64 / (2 * n) as f64).collect();
        let values: Vec<f64> = (0..=2 * n)
            .map(|k| if k % 2 == 0 { base + amplitudes[k / 2] } else { base })
            .collect();
        let mut spec = FunctionSpec::CustomTable { xs, values, declared: None };
        spec.tag_table_envelope();
        spec
    }

    /// For tables: sets the declared Hölder tag from the slope/range envelope
    /// at γ = 1 (callers may retag at other γ with [`Self::table_envelope`]).
    fn tag_table_envelope(&mut self) {
        if let Some(m) = self.table_envelope(1.0) {
            if let FunctionSpec::CustomTable { declared, .. } = self {
                *declared = Some(HoelderTag { gamma: 1.0, m });
            }
        }
    }

    /// Envelope constant max(‖g‖_∞, L^γ·range^{1−γ}) of a table, valid for γ ≤ 1.
    pub fn table_envelope(&self, gamma: f64) -> Option<f64> {
        if let FunctionSpec::CustomTable { xs, values, .. } = self {
            let mut slope: f64 = 0.0;
            for k in 1..xs.len() {
                slope = slope.max((values[k] - values[k - 1]).abs() / (xs[k] - xs[k - 1]));
            }
            let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let sup = lo.abs().max(hi.abs());
            let range = hi - lo;
            let holder = if range == 0.0 { 0.0 } else { slope.powf(gamma) * range.powf(1.0 - gamma) };
            Some(sup.max(holder) * (1.0 + 1e-12))
        } else {
            None
        }
    }

    pub fn with_declared(self, tag: HoelderTag) -> Self {
        match self {
            FunctionSpec::CustomTable { xs, values, .. } => {
                FunctionSpec::CustomTable { xs, values, declared: Some(tag) }
            }
            other => other,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Domain(msg));
        match self {
            FunctionSpec::Constant { value } if !value.is_finite() => bad("constant must be finite".into()),
            FunctionSpec::SawtoothHoelder { exponent, count, amplitude } => {
                if !(*exponent > 0.0 && *exponent <= 2.0) || *count == 0 || !amplitude.is_finite() {
                    bad(format!("sawtooth needs exponent in (0, 2] and count ≥ 1, got {exponent}, {count}"))
                } else {
                    Ok(())
                }
            }
            FunctionSpec::SpikyV1 { beta, c, .. } if !(*beta > 0.0 && *beta < 1.0 && c.is_finite()) => {
                bad(format!("spiky-v1 needs beta in (0, 1), got {beta}"))
            }
            FunctionSpec::TransitionV1 { alpha, beta, .. } if !(*alpha > 0.0 && *beta > 0.0) => {
                bad("transition-v1 needs alpha, beta > 0".into())
            }
            FunctionSpec::KappaPrior { signs, .. } if signs.is_empty() => bad("kappa-prior needs m ≥ 1".into()),
            FunctionSpec::CustomTable { xs, values, .. } => {
                if xs.is_empty() || xs.len() != values.len() {
                    return bad("custom-table needs matching, nonempty xs and values".into());
                }
                if xs.windows(2).any(|w| !(w[0] < w[1])) {
                    return bad("custom-table xs must be strictly increasing".into());
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return bad("custom-table values must be finite".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            FunctionSpec::Constant { value } => *value,
            FunctionSpec::SawtoothHoelder { amplitude, exponent, count } => {
                let m = *count as f64;
                let scale = amplitude * m.powf(-exponent);
                if *exponent <= 1.0 {
                    let t = (m * x).rem_euclid(1.0);
                    scale * (2.0 * t.min(1.0 - t)).powf(*exponent)
                } else {
                    scale * (2.0 * PI * m * x).sin()
                }
            }
            FunctionSpec::SmoothBumpSum { base, waves } => {
                base + waves
                    .iter()
                    .map(|w| w.amplitude * (2.0 * PI * w.frequency * x + w.phase).sin())
                    .sum::<f64>()
            }
            FunctionSpec::SpikyV1 { c, beta, n } => {
                let n = (*n).max(1) as f64;
                let amp = 3f64.sqrt() * c * n.powf(-beta);
                let u = x * n;
                spiky_local(amp, u - u.floor())
            }
            FunctionSpec::TransitionV1 { c, alpha, beta, n } => {
                let n = (*n).max(1) as f64;
                let s = n.powf(2.0 * alpha / beta.ceil());
                let rise = 2.0 * c * n.powf(-2.0 * alpha);
                1.0 + rise * smoothstep(s * (x - 0.5 + 0.5 / s))
            }
            FunctionSpec::KappaPrior { rho, signs, .. } => {
                let m = signs.len();
                let u = m as f64 * x;
                let j = (u.floor().max(0.0) as usize).min(m - 1);
                1.0 + rho * (m as f64).sqrt() * signs[j] as f64 * bump(u - j as f64)
            }
            FunctionSpec::CustomTable { xs, values, .. } => interp(xs, values, x),
        }
    }

    /// Value at the design point i/n. Spiky profiles are evaluated with exact
    /// integer arithmetic so that design-point values are exact.
    pub fn eval_design(&self, i: usize, n: usize) -> f64 {
        match self {
            FunctionSpec::SpikyV1 { c, beta, n: ns } => {
                let ns = (*ns).max(1);
                let amp = 3f64.sqrt() * c * (ns as f64).powf(-beta);
                let num = i as u128 * ns as u128;
                let r = num % n as u128;
                if r == 0 {
                    1.0
                } else {
                    spiky_local(amp, r as f64 / n as f64)
                }
            }
            _ => self.eval(i as f64 / n as f64),
        }
    }

    /// Interior points where the function is not smooth (or changes scale).
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            FunctionSpec::SawtoothHoelder { exponent, count, .. } if *exponent <= 1.0 => {
                (1..2 * count).map(|k| k as f64 / (2 * count) as f64).collect()
            }
            FunctionSpec::SpikyV1 { n, .. } => {
                let n = (*n).max(1);
                (1..4 * n).map(|k| k as f64 / (4 * n) as f64).collect()
            }
            FunctionSpec::TransitionV1 { alpha, beta, n, .. } => {
                let s = ((*n).max(1) as f64).powf(2.0 * alpha / beta.ceil());
                vec![0.5 - 0.5 / s, 0.5 + 0.5 / s]
            }
            FunctionSpec::KappaPrior { signs, .. } => {
                let m = signs.len();
                (1..m).map(|j| j as f64 / m as f64).collect()
            }
            FunctionSpec::CustomTable { xs, .. } => xs.iter().copied().filter(|&x| x > 0.0 && x < 1.0).collect(),
            _ => Vec::new(),
        }
    }

    /// Number of evaluation cells per unit length that resolves the shape.
    pub fn resolution(&self) -> usize {
        match self {
            FunctionSpec::Constant { .. } => 4,
            FunctionSpec::SawtoothHoelder { count, .. } => 2 * count,
            FunctionSpec::SmoothBumpSum { waves, .. } => {
                waves.iter().fold(64.0, |m: f64, w| m.max(8.0 * w.frequency.abs())) as usize
            }
            FunctionSpec::SpikyV1 { n, .. } => 4 * (*n).max(1),
            FunctionSpec::TransitionV1 { .. } => 64,
            FunctionSpec::KappaPrior { signs, .. } => 8 * signs.len(),
            FunctionSpec::CustomTable { xs, .. } => xs.len().max(2),
        }
    }

    /// The Hölder class (γ, M) this spec is constructed to belong to.
    pub fn declared_class(&self) -> Option<HoelderTag> {
        let tag = |gamma: f64, m: f64| Some(HoelderTag { gamma, m });
        match self {
            FunctionSpec::Constant { value } => tag(1.0, value.abs()),
            FunctionSpec::SawtoothHoelder { amplitude, exponent, .. } => {
                let a = amplitude.abs();
                if *exponent <= 1.0 {
                    tag(*exponent, a * 2f64.powf(*exponent))
                } else {
                    tag(*exponent, a * 2f64.powf(2.0 - exponent) * (2.0 * PI).powf(*exponent))
                }
            }
            FunctionSpec::SmoothBumpSum { base, waves } => {
                let sup = base.abs() + waves.iter().map(|w| w.amplitude.abs()).sum::<f64>();
                let lip: f64 = waves.iter().map(|w| w.amplitude.abs() * 2.0 * PI * w.frequency.abs()).sum();
                tag(1.0, sup.max(lip))
            }
            FunctionSpec::SpikyV1 { c, beta, n } => {
                let amp = 3f64.sqrt() * c.abs() * ((*n).max(1) as f64).powf(-beta);
                let holder = 2f64.powf(1.0 + beta) * 3f64.sqrt() * c.abs();
                tag(*beta, (1.0 + amp).max(holder))
            }
            FunctionSpec::TransitionV1 { c, alpha, beta, n } => {
                let rise = 2.0 * c.abs() * ((*n).max(1) as f64).powf(-2.0 * alpha);
                let lip = 2.0 * c.abs() * smoothstep_slope();
                let gamma = beta.min(1.0);
                tag(gamma, (1.0 + rise).max(lip.powf(gamma) * rise.powf(1.0 - gamma)))
            }
            FunctionSpec::KappaPrior { beta, rho, signs } => {
                let m = signs.len() as f64;
                let (sup, slope) = bump_bounds();
                let height = rho.abs() * m.sqrt() * sup;
                let lip = rho.abs() * m.powf(1.5) * slope;
                tag(*beta, (1.0 + height).max(lip.powf(*beta) * (2.0 * height).powf(1.0 - beta)))
            }
            FunctionSpec::CustomTable { declared, .. } => *declared,
        }
    }

    /// Scales the non-constant part of the function by `factor` (supported
    /// for `smooth-bump-sum` and `kappa-prior`).
    pub fn scale_deviation(&self, factor: f64) -> Result<Self> {
        match self {
            FunctionSpec::SmoothBumpSum { base, waves } => Ok(FunctionSpec::SmoothBumpSum {
                base: *base,
                waves: waves.iter().map(|w| Wave { amplitude: w.amplitude * factor, ..*w }).collect(),
            }),
            FunctionSpec::KappaPrior { beta, rho, signs } => {
                Ok(FunctionSpec::KappaPrior { beta: *beta, rho: rho * factor, signs: signs.clone() })
            }
            other => Err(Error::Config(format!("cannot rescale the deviation of {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_hits_knots_exactly() {
        let t = FunctionSpec::tent_sum(1.0, &[0.5, -0.25, 0.125, 0.0]);
        for i in 0..=3 {
            let want = 1.0 + [0.5, -0.25, 0.125, 0.0][i];
            assert_eq!(t.eval_design(i, 3), want);
        }
        assert_eq!(t.eval(1.0 / 6.0), 1.0);
    }

    #[test]
    fn spiky_design_points_are_one() {
        let s = FunctionSpec::SpikyV1 { c: 0.3, beta: 0.25, n: 0 }.resolve(37);
        for i in 0..=37 {
            assert_eq!(s.eval_design(i, 37), 1.0);
        }
        let amp = 3f64.sqrt() * 0.3 * 37f64.powf(-0.25);
        assert!((s.eval(1.0 / (4.0 * 37.0)) - (1.0 + amp)).abs() < 1e-12);
        assert!((s.eval(3.0 / (4.0 * 37.0)) - (1.0 - amp)).abs() < 1e-12);
    }

    #[test]
    fn smoothstep_limits() {
        assert_eq!(smoothstep(-1.0), 0.0);
        assert_eq!(smoothstep(2.0), 1.0);
        assert!((smoothstep(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bump_has_unit_norm_and_zero_mean() {
        let n2 = integrate_adaptive(|t| bump(t).powi(2), 0.0, 1.0, 1e-14, 1e-13).unwrap().value;
        let m = integrate_adaptive(bump, 0.0, 1.0, 1e-14, 1e-13).unwrap().value;
        assert!((n2 - 1.0).abs() < 1e-10);
        assert!(m.abs() < 1e-12);
    }

    #[test]
    fn toml_round_trip() {
        let spec = FunctionSpec::SmoothBumpSum {
            base: 1.0,
            waves: vec![Wave { amplitude: 0.5, frequency: 1.0, phase: 0.0 }],
        };
        let text = toml::to_string(&spec).unwrap();
        assert!(text.contains("kind = \"smooth-bump-sum\""));
        let back: FunctionSpec = toml::from_str(&text).unwrap();
        assert_eq!(back, spec);
    }
}
