//! Test statistics built from squared differences.

use serde::{Deserialize, Serialize};

use super::differences::{lag_differences, squares, DifferenceSet};
use crate::error::{Error, Result};
use crate::kernel::{BaseKernel, ModifiedKernel};
use crate::numerics::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatisticId {
    THatKernel,
    THatProfile,
    T1Hat,
    T2Hat,
    SHat,
    DetteMunk,
    #[serde(rename = "dette-2002")]
    Dette2002,
    /// Kernel statistic without deletion/renormalization (plug-in-rate reference).
    THatNondeleted,
}

impl StatisticId {
    pub const ALL: [StatisticId; 8] = [
        StatisticId::THatKernel,
        StatisticId::THatProfile,
        StatisticId::T1Hat,
        StatisticId::T2Hat,
        StatisticId::SHat,
        StatisticId::DetteMunk,
        StatisticId::Dette2002,
        StatisticId::THatNondeleted,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            StatisticId::THatKernel => "t-hat-kernel",
            StatisticId::THatProfile => "t-hat-profile",
            StatisticId::T1Hat => "t1-hat",
            StatisticId::T2Hat => "t2-hat",
            StatisticId::SHat => "s-hat",
            StatisticId::DetteMunk => "dette-munk",
            StatisticId::Dette2002 => "dette-2002",
            StatisticId::THatNondeleted => "t-hat-nondeleted",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown statistic '{s}'")))
    }

    pub fn uses_bandwidth(&self) -> bool {
        matches!(self, StatisticId::THatKernel | StatisticId::Dette2002 | StatisticId::THatNondeleted)
    }
}

impl std::fmt::Display for StatisticId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatisticReport {
    pub statistic_id: StatisticId,
    pub value: f64,
    pub terms: Vec<Term>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub proxy_value: Option<f64>,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl StatisticReport {
    fn from_terms(id: StatisticId, n: usize, h: Option<f64>, terms: Vec<(&str, f64)>) -> Self {
        let mut acc = CompensatedSum::new();
        for (_, v) in &terms {
            acc.add(*v);
        }
        Self {
            statistic_id: id,
            value: acc.value(),
            terms: terms.into_iter().map(|(name, value)| Term { name: name.to_string(), value }).collect(),
            proxy_value: None,
            n,
            h,
            seed: None,
        }
    }

    /// Largest absolute decomposition term; the natural scale for relative
    /// comparisons when terms cancel.
    pub fn scale(&self) -> f64 {
        self.terms.iter().fold(self.value.abs(), |m, t| m.max(t.value.abs()))
    }
}

/// Σ_i a_i a_{i+t}.
fn lag_product(a: &[f64], t: usize) -> f64 {
    let mut acc = CompensatedSum::new();
    for i in 0..a.len().saturating_sub(t) {
        acc.add(a[i] * a[i + t]);
    }
    acc.value()
}

/// Σ_{|i−j|≥2} a_i a_j = (Σa)² − Σa² − 2Σ a_i a_{i+1}.
fn off_band_pair_sum(a: &[f64]) -> f64 {
    let s: f64 = a.iter().copied().collect::<CompensatedSum>().value();
    let mut acc = CompensatedSum::new();
    acc.add(s * s);
    acc.add(-a.iter().map(|x| x * x).collect::<CompensatedSum>().value());
    acc.add(-2.0 * lag_product(a, 1));
    acc.value()
}

fn check_len(y: &[f64], n: usize) -> Result<()> {
    if y.len() != n + 1 {
        return Err(Error::Shape(format!("sample has {} points but the kernel was built for n = {n}", y.len())));
    }
    Ok(())
}

/// T̂ = (1/n) Σ_{|i−j|≥2} K_n^h(i−j) R_i²R_j² − (1/n²) Σ_{|i−j|≥2} R_i²R_j².
pub fn t_hat_kernel(y: &[f64], k: &ModifiedKernel) -> Result<StatisticReport> {
    check_len(y, k.n)?;
    let r2 = squares(&lag_differences(y, 1));
    let n = r2.len() as f64;
    let mut kern = CompensatedSum::new();
    for (t, &w) in k.half_weights().iter().enumerate().skip(2) {
        if w != 0.0 {
            kern.add(2.0 * w * lag_product(&r2, t));
        }
    }
    let centering = off_band_pair_sum(&r2) / (n * n);
    Ok(StatisticReport::from_terms(
        StatisticId::THatKernel,
        k.n,
        Some(k.h),
        vec![("kernel", kern.value() / n), ("centering", -centering)],
    ))
}

/// Kernel statistic with the raw base kernel and no renormalization:
/// (1/n²) Σ_{|i−j|≥2} (1/h)K((x_i − x_j)/h) R_i²R_j² − (1/n²) Σ_{|i−j|≥2} R_i²R_j².
pub fn t_hat_nondeleted(y: &[f64], base: &BaseKernel, h: f64) -> Result<StatisticReport> {
    check_bandwidth(h)?;
    let r2 = squares(&DifferenceSet::new(y)?.r);
    let n = r2.len();
    let nh = n as f64 * h;
    let mut kern = CompensatedSum::new();
    for t in 2..n {
        let u = t as f64 / nh;
        if u > 1.0 {
            break;
        }
        kern.add(2.0 * base.eval(u) / h * lag_product(&r2, t));
    }
    let nf = n as f64;
    let centering = off_band_pair_sum(&r2) / (nf * nf);
    Ok(StatisticReport::from_terms(
        StatisticId::THatNondeleted,
        n,
        Some(h),
        vec![("kernel", kern.value() / (nf * nf)), ("centering", -centering)],
    ))
}

/// T̂ = (1/2n²) Σ_{|i−j|≥2} [(1/3)(R_i⁴ + R_j⁴) − 2R_i²R_j²], in O(n).
pub fn t_hat_profile(y: &[f64]) -> Result<StatisticReport> {
    let r2 = squares(&DifferenceSet::new(y)?.r);
    let n = r2.len();
    // Each i pairs with n − 1 − [i > 0] − [i < n−1] indices j at distance ≥ 2.
    let mut fourth = CompensatedSum::new();
    for (i, x) in r2.iter().enumerate() {
        let partners = n - 1 - usize::from(i > 0) - usize::from(i + 1 < n);
        fourth.add(partners as f64 * x * x);
    }
    let nf = n as f64;
    Ok(StatisticReport::from_terms(
        StatisticId::THatProfile,
        n,
        None,
        vec![("fourth", fourth.value() / (3.0 * nf * nf)), ("cross", -off_band_pair_sum(&r2) / (nf * nf))],
    ))
}

/// (1/n) Σ_i [(1/3)(a_i⁴ + b_i⁴) − 2a_i²b_i²] split into its two terms.
fn paired_quartic(a: &[f64], b: &[f64], n: usize) -> (f64, f64) {
    let mut fourth = CompensatedSum::new();
    let mut cross = CompensatedSum::new();
    for (x, y) in a.iter().zip(b) {
        let (x2, y2) = (x * x, y * y);
        fourth.add(x2 * x2 + y2 * y2);
        cross.add(x2 * y2);
    }
    let nf = n as f64;
    (fourth.value() / (3.0 * nf), -2.0 * cross.value() / nf)
}

/// T̂₁ = (1/n) Σ_{i=0}^{n−3} [(1/3)(R_{i+1}⁴ + S_i⁴) − 2R_{i+1}²S_i²].
pub fn t1_hat(y: &[f64]) -> Result<StatisticReport> {
    let d = DifferenceSet::new(y)?;
    let n = d.n();
    let (fourth, cross) = paired_quartic(&d.r[1..n - 1], &d.s, n);
    Ok(StatisticReport::from_terms(StatisticId::T1Hat, n, None, vec![("fourth", fourth), ("cross", cross)]))
}

/// T̂₂ = (1/n) Σ_{i=0}^{n−3} [(1/3)(R̃_{i+1}⁴ + R̃_i⁴) − 2R̃_{i+1}²R̃_i²].
pub fn t2_hat(y: &[f64]) -> Result<StatisticReport> {
    let d = DifferenceSet::new(y)?;
    let n = d.n();
    let m = d.r_tilde.len();
    let (fourth, cross) = paired_quartic(&d.r_tilde[1..], &d.r_tilde[..m - 1], n);
    Ok(StatisticReport::from_terms(StatisticId::T2Hat, n, None, vec![("fourth", fourth), ("cross", cross)]))
}

/// Ŝ = T̂ (profile) + T̂₁ + T̂₂.
pub fn s_hat(y: &[f64]) -> Result<StatisticReport> {
    let parts = [t_hat_profile(y)?, t1_hat(y)?, t2_hat(y)?];
    let prefixes = ["t-hat", "t1-hat", "t2-hat"];
    let mut names = Vec::new();
    for (p, rep) in prefixes.iter().zip(&parts) {
        for t in &rep.terms {
            names.push((format!("{p}.{}", t.name), t.value));
        }
    }
    let mut report = StatisticReport::from_terms(
        StatisticId::SHat,
        parts[0].n,
        None,
        names.iter().map(|(s, v)| (s.as_str(), *v)).collect(),
    );
    report.terms = names.into_iter().map(|(name, value)| Term { name, value }).collect();
    Ok(report)
}

/// (1/(4(n−2))) Σ_{i=0}^{n−3} R_i²R_{i+2}² − ((1/2n) Σ R_i²)².
pub fn dette_munk(y: &[f64]) -> Result<StatisticReport> {
    let r2 = squares(&DifferenceSet::new(y)?.r);
    let n = r2.len() as f64;
    let lag2 = lag_product(&r2, 2) / (4.0 * (n - 2.0));
    let half_mean = r2.iter().copied().collect::<CompensatedSum>().value() / (2.0 * n);
    Ok(StatisticReport::from_terms(
        StatisticId::DetteMunk,
        r2.len(),
        None,
        vec![("lag2", lag2), ("centering", -half_mean * half_mean)],
    ))
}

fn check_bandwidth(h: f64) -> Result<()> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::Domain(format!("bandwidth must lie in (0, 1), got {h}")));
    }
    Ok(())
}

/// (1/(4n(n−1)h)) Σ_{|i−j|≥2} K((x_i − x_j)/h)(R_i² − R̄²)(R_j² − R̄²) with the raw base kernel.
pub fn dette_2002(y: &[f64], base: &BaseKernel, h: f64) -> Result<StatisticReport> {
    check_bandwidth(h)?;
    let r2 = squares(&DifferenceSet::new(y)?.r);
    let n = r2.len();
    let nf = n as f64;
    let m = r2.iter().copied().collect::<CompensatedSum>().value() / nf;
    let z: Vec<f64> = r2.iter().map(|x| x - m).collect();
    let mut acc = CompensatedSum::new();
    for t in 2..n {
        let u = t as f64 / (nf * h);
        if u > 1.0 {
            break;
        }
        acc.add(2.0 * base.eval(u) * lag_product(&z, t));
    }
    Ok(StatisticReport::from_terms(
        StatisticId::Dette2002,
        n,
        Some(h),
        vec![("kernel", acc.value() / (4.0 * nf * (nf - 1.0) * h))],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::build_modified_kernel;

    #[test]
    fn constant_sample_gives_zero_everywhere() {
        let y = vec![3.0; 33];
        let k = build_modified_kernel(&BaseKernel::Box, 32, 0.3).unwrap();
        assert_eq!(t_hat_kernel(&y, &k).unwrap().value, 0.0);
        for r in [t_hat_profile(&y), t1_hat(&y), t2_hat(&y), s_hat(&y), dette_munk(&y)] {
            assert_eq!(r.unwrap().value, 0.0);
        }
        assert_eq!(dette_2002(&y, &BaseKernel::Box, 0.3).unwrap().value, 0.0);
        assert_eq!(t_hat_nondeleted(&y, &BaseKernel::Box, 0.3).unwrap().value, 0.0);
    }

    #[test]
    fn mismatched_kernel_is_shape_error() {
        let k = build_modified_kernel(&BaseKernel::Box, 32, 0.3).unwrap();
        assert!(matches!(t_hat_kernel(&[0.0; 20], &k), Err(Error::Shape(_))));
    }

    #[test]
    fn ids_round_trip() {
        for id in StatisticId::ALL {
            assert_eq!(StatisticId::parse(id.name()).unwrap(), id);
            let json = serde_json::to_string(&id).unwrap();
            assert_eq!(json, format!("\"{}\"", id.name()));
        }
    }
}
