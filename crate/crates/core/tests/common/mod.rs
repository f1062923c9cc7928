//! Naive reference implementations used as test oracles.
//!
//! The oracles are written straight from the definitions with explicit
//! loops; only the dispatch helpers at the end call into the library.

#![allow(dead_code)]

use hetdetect_core::kernel::BaseKernel;
use hetdetect_core::statistics::{BandwidthRule, StatisticId, StatisticSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random responses Y_0..Y_n with a smooth trend plus noise of varying size.
pub fn random_sample(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let trend = rng.gen_range(-2.0..2.0);
    let spread = rng.gen_range(0.1..3.0);
    (0..=n).map(|i| trend * i as f64 / n as f64 + spread * rng.gen_range(-1.0..1.0)).collect()
}

/// Antiderivative of the base kernel on [0, 1].
fn kernel_primitive(quartic: bool, u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    if quartic {
        (u - u.powi(5) / 10.0) / 1.8
    } else {
        0.5 * u
    }
}

pub fn base_kernel(quartic: bool, u: f64) -> f64 {
    if u.abs() > 1.0 {
        0.0
    } else if quartic {
        (1.0 - u.powi(4) / 2.0) / 1.8
    } else {
        0.5
    }
}

/// K_n^h(t) with the |t| ≤ 1 band removed and the remaining mass renormalized.
pub fn kernel_weight(quartic: bool, n: usize, h: f64, t: i64) -> f64 {
    let t = t.unsigned_abs() as f64;
    if t < 2.0 {
        return 0.0;
    }
    let nh = n as f64 * h;
    let mass = kernel_primitive(quartic, (t + 1.0) / nh) - kernel_primitive(quartic, t / nh);
    let norm = 1.0 - 2.0 * kernel_primitive(quartic, 2.0 / nh);
    mass / norm
}

fn first_differences(y: &[f64]) -> Vec<f64> {
    (0..y.len() - 1).map(|i| y[i + 1] - y[i]).collect()
}

/// A value together with the sum of absolute summands (the scale for relative error).
#[derive(Debug, Clone, Copy)]
pub struct Naive {
    pub value: f64,
    pub scale: f64,
}

struct Acc {
    value: f64,
    scale: f64,
}

impl Acc {
    fn new() -> Self {
        Self { value: 0.0, scale: 0.0 }
    }
    fn add(&mut self, x: f64) {
        self.value += x;
        self.scale += x.abs();
    }
    fn done(self) -> Naive {
        Naive { value: self.value, scale: self.scale }
    }
}

pub fn t_hat_kernel(y: &[f64], quartic: bool, h: f64) -> Naive {
    let r = first_differences(y);
    let n = r.len();
    let nf = n as f64;
    let mut acc = Acc::new();
    for i in 0..n {
        for j in 0..n {
            if i.abs_diff(j) >= 2 {
                let p = r[i] * r[i] * r[j] * r[j];
                acc.add(kernel_weight(quartic, n, h, i as i64 - j as i64) * p / nf);
                acc.add(-p / (nf * nf));
            }
        }
    }
    acc.done()
}

pub fn t_hat_nondeleted(y: &[f64], quartic: bool, h: f64) -> Naive {
    let r = first_differences(y);
    let n = r.len();
    let nf = n as f64;
    let mut acc = Acc::new();
    for i in 0..n {
        for j in 0..n {
            if i.abs_diff(j) >= 2 {
                let p = r[i] * r[i] * r[j] * r[j];
                let u = (i as f64 - j as f64) / nf / h;
                acc.add(base_kernel(quartic, u) / h * p / (nf * nf));
                acc.add(-p / (nf * nf));
            }
        }
    }
    acc.done()
}

pub fn t_hat_profile(y: &[f64]) -> Naive {
    let r = first_differences(y);
    let n = r.len();
    let nf = n as f64;
    let mut acc = Acc::new();
    for i in 0..n {
        for j in 0..n {
            if i.abs_diff(j) >= 2 {
                let (a, b) = (r[i] * r[i], r[j] * r[j]);
                acc.add(((a * a + b * b) / 3.0 - 2.0 * a * b) / (2.0 * nf * nf));
            }
        }
    }
    acc.done()
}

fn quartic_pairs(a: &[f64], b: &[f64], n: usize, acc: &mut Acc) {
    for i in 0..a.len() {
        let (x, y) = (a[i] * a[i], b[i] * b[i]);
        acc.add(((x * x + y * y) / 3.0 - 2.0 * x * y) / n as f64);
    }
}

pub fn t1_hat(y: &[f64]) -> Naive {
    let n = y.len() - 1;
    let mut acc = Acc::new();
    let r_next: Vec<f64> = (0..=n - 3).map(|i| y[i + 2] - y[i + 1]).collect();
    let s: Vec<f64> = (0..=n - 3).map(|i| y[i + 3] - y[i]).collect();
    quartic_pairs(&r_next, &s, n, &mut acc);
    acc.done()
}

pub fn t2_hat(y: &[f64]) -> Naive {
    let n = y.len() - 1;
    let mut acc = Acc::new();
    let a: Vec<f64> = (0..=n - 3).map(|i| y[i + 3] - y[i + 1]).collect();
    let b: Vec<f64> = (0..=n - 3).map(|i| y[i + 2] - y[i]).collect();
    quartic_pairs(&a, &b, n, &mut acc);
    acc.done()
}

pub fn s_hat(y: &[f64]) -> Naive {
    let parts = [t_hat_profile(y), t1_hat(y), t2_hat(y)];
    Naive { value: parts.iter().map(|p| p.value).sum(), scale: parts.iter().map(|p| p.scale).sum() }
}

pub fn dette_munk(y: &[f64]) -> Naive {
    let r = first_differences(y);
    let n = r.len();
    let nf = n as f64;
    let mut acc = Acc::new();
    for i in 0..n - 2 {
        acc.add(r[i] * r[i] * r[i + 2] * r[i + 2] / (4.0 * (nf - 2.0)));
    }
    let mean_half: f64 = r.iter().map(|x| x * x).sum::<f64>() / (2.0 * nf);
    acc.add(-mean_half * mean_half);
    acc.done()
}

pub fn dette_2002(y: &[f64], quartic: bool, h: f64) -> Naive {
    let r = first_differences(y);
    let n = r.len();
    let nf = n as f64;
    let rbar: f64 = r.iter().map(|x| x * x).sum::<f64>() / nf;
    let mut acc = Acc::new();
    for i in 0..n {
        for j in 0..n {
            if i.abs_diff(j) >= 2 {
                let u = (i as f64 - j as f64) / (nf * h);
                let z = (r[i] * r[i] - rbar) * (r[j] * r[j] - rbar);
                acc.add(base_kernel(quartic, u) * z / (4.0 * nf * (nf - 1.0) * h));
            }
        }
    }
    acc.done()
}

/// (k − 1)!! for even k, 0 for odd k.
pub fn normal_moment(k: u32) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    (1..k).step_by(2).map(|j| j as f64).product()
}

/// χ²(P‖Q) for finite Gaussian mixtures by brute-force trapezoid quadrature.
pub fn chi2_mixtures(p: &[(f64, f64, f64)], q: &[(f64, f64, f64)]) -> f64 {
    let dens = |m: &[(f64, f64, f64)], x: f64| -> f64 {
        m.iter()
            .map(|&(w, mu, var)| w * (-(x - mu).powi(2) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt())
            .sum()
    };
    let sd = p.iter().chain(q).map(|c| c.2.sqrt()).fold(0.0, f64::max);
    let mu = p.iter().chain(q).map(|c| c.1.abs()).fold(0.0, f64::max);
    let l = mu + 14.0 * sd;
    let steps = 400_000;
    let dx = 2.0 * l / steps as f64;
    let mut s = 0.0;
    for k in 0..=steps {
        let x = -l + k as f64 * dx;
        let (a, b) = (dens(p, x), dens(q, x));
        let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
        if b > 0.0 {
            s += w * (a - b).powi(2) / b;
        }
    }
    s * dx
}

/// Mann–Whitney estimate of P(X > Y) + ½P(X = Y) and its standard error
/// under the null of identical laws.
pub fn auc(x: &[f64], y: &[f64]) -> (f64, f64) {
    let mut wins = 0.0;
    for a in x {
        for b in y {
            if a > b {
                wins += 1.0;
            } else if a == b {
                wins += 0.5;
            }
        }
    }
    let (m, n) = (x.len() as f64, y.len() as f64);
    (wins / (m * n), ((m + n + 1.0) / (12.0 * m * n)).sqrt())
}

pub fn library_value(id: StatisticId, quartic: bool, h: f64, y: &[f64]) -> f64 {
    let mut spec = StatisticSpec::new(id);
    if quartic {
        spec.kernel = BaseKernel::QuarticPlateau;
    }
    if id.uses_bandwidth() {
        spec = spec.with_bandwidth(BandwidthRule::Fixed { h });
    }
    spec.prepare(y.len() - 1).unwrap().value(y).unwrap()
}

pub fn naive_value(id: StatisticId, quartic: bool, h: f64, y: &[f64]) -> Naive {
    match id {
        StatisticId::THatKernel => t_hat_kernel(y, quartic, h),
        StatisticId::THatNondeleted => t_hat_nondeleted(y, quartic, h),
        StatisticId::THatProfile => t_hat_profile(y),
        StatisticId::T1Hat => t1_hat(y),
        StatisticId::T2Hat => t2_hat(y),
        StatisticId::SHat => s_hat(y),
        StatisticId::DetteMunk => dette_munk(y),
        StatisticId::Dette2002 => dette_2002(y, quartic, h),
    }
}

/// Largest error relative to the naive sum of absolute summands.
pub fn max_relative_error(cases: usize, seed: u64) -> f64 {
    let mut rng = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let n = rng.gen_range(8..=64);
        let h = rng.gen_range((6.0 / n as f64).max(0.1)..0.9);
        let quartic = rng.gen_bool(0.5);
        let y = random_sample(&mut rng, n);
        for id in StatisticId::ALL {
            let fast = library_value(id, quartic, h, &y);
            let slow = naive_value(id, quartic, h, &y);
            worst = worst.max((fast - slow.value).abs() / slow.scale.max(f64::MIN_POSITIVE));
        }
    }
    worst
}
