//! Finitely supported sequences on ℤ, finite differences, the discrete
//! correlation f ∗ g⁻, and the appendix smoothness checks.

use crate::error::{Error, Result};

/// A real sequence on ℤ that is zero outside `[offset, offset + len)`.
/// `n` is the nominal grid size the sequence was built for.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSequence {
    pub n: usize,
    pub offset: i64,
    pub values: Vec<f64>,
}

impl DiscreteSequence {
    /// Sequence supported on `[0, n]` with `values.len() == n + 1`.
    pub fn on_grid(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Shape("grid sequence needs at least one value".into()));
        }
        Ok(Self { n: values.len() - 1, offset: 0, values })
    }

    pub fn zeros(n: usize, offset: i64, len: usize) -> Self {
        Self { n, offset, values: vec![0.0; len] }
    }

    pub fn lo(&self) -> i64 {
        self.offset
    }

    /// One past the last supported index.
    pub fn hi(&self) -> i64 {
        self.offset + self.values.len() as i64
    }

    #[inline]
    pub fn get(&self, z: i64) -> f64 {
        if z < self.lo() || z >= self.hi() {
            0.0
        } else {
            self.values[(z - self.offset) as usize]
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// g⁻(z) = g(−z).
    pub fn reflect(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self { n: self.n, offset: -(self.hi() - 1), values }
    }
}

/// D_h g(z) = g(z + h) − g(z), applied `order` times (1 or 2).
pub fn finite_difference(g: &DiscreteSequence, h: i64, order: u8) -> Result<DiscreteSequence> {
    if h.unsigned_abs() as usize > g.n.max(1) {
        return Err(Error::Domain(format!("|h| = {} exceeds n = {}", h.abs(), g.n)));
    }
    match order {
        1 => Ok(difference_once(g, h)),
        2 => Ok(difference_once(&difference_once(g, h), h)),
        _ => Err(Error::Domain(format!("finite difference order must be 1 or 2, got {order}"))),
    }
}

fn difference_once(g: &DiscreteSequence, h: i64) -> DiscreteSequence {
    let lo = g.lo().min(g.lo() - h);
    let hi = g.hi().max(g.hi() - h);
    let values = (lo..hi).map(|z| g.get(z + h) - g.get(z)).collect();
    DiscreteSequence { n: g.n, offset: lo, values }
}

fn correlation_support(f: &DiscreteSequence, g: &DiscreteSequence) -> (i64, i64) {
    // (f ∗ g⁻)(z) = Σ_k f(k) g(k − z): nonzero only for k − z inside g's support.
    (f.lo() - (g.hi() - 1), f.hi() - g.lo())
}

/// Reference evaluation of (f ∗ g⁻)(z) = Σ_k f(k) g(k − z), one z at a time.
pub fn discrete_convolution_reference(f: &DiscreteSequence, g: &DiscreteSequence) -> DiscreteSequence {
    let (lo, hi) = correlation_support(f, g);
    let mut out = DiscreteSequence::zeros(f.n.max(g.n), lo, (hi - lo).max(0) as usize);
    for (slot, z) in out.values.iter_mut().zip(lo..hi) {
        let k_lo = f.lo().max(g.lo() + z);
        let k_hi = f.hi().min(g.hi() + z);
        let mut acc = 0.0;
        for k in k_lo..k_hi {
            acc += f.get(k) * g.get(k - z);
        }
        *slot = acc;
    }
    out
}

/// Blocked direct summation of f ∗ g⁻: scatter products block by block of f,
/// keeping the working set of `out` small.
pub fn discrete_convolution(f: &DiscreteSequence, g: &DiscreteSequence) -> DiscreteSequence {
    const BLOCK: usize = 256;
    let (lo, hi) = correlation_support(f, g);
    let mut out = DiscreteSequence::zeros(f.n.max(g.n), lo, (hi - lo).max(0) as usize);
    if f.values.is_empty() || g.values.is_empty() {
        return out;
    }
    for (bi, fb) in f.values.chunks(BLOCK).enumerate() {
        let k0 = f.lo() + (bi * BLOCK) as i64;
        for (gj, &gv) in g.values.iter().enumerate() {
            if gv == 0.0 {
                continue;
            }
            // z = k − j with j = g.lo() + gj.
            let base = k0 - (g.lo() + gj as i64) - lo;
            let dst = &mut out.values[base as usize..base as usize + fb.len()];
            for (d, &fv) in dst.iter_mut().zip(fb) {
                *d += fv * gv;
            }
        }
    }
    out
}

/// C(α) = Σ_{k≥0} 2^{−k(1−α)}, so that C(α)/2 = Σ_{k≥0} 2^{−k(1−α)−1}.
/// Evaluated by truncating at 200 terms; the second value bounds the
/// neglected geometric tail.
pub fn zygmund_constant(alpha: f64) -> Result<(f64, f64)> {
    if !(alpha < 1.0) || alpha.is_nan() {
        return Err(Error::Domain(format!("Zygmund constant needs alpha < 1, got {alpha}")));
    }
    let r = 2f64.powf(-(1.0 - alpha));
    let mut sum = 0.0;
    let mut term = 1.0;
    for _ in 0..200 {
        sum += term;
        term *= r;
    }
    Ok((sum, term / (1.0 - r)))
}

/// ‖g‖_* = sup_{z, 0<|h|≤n} |D_h² g(z)| / |h/n|^α. Negative h reduce to
/// positive ones by a shift of z, so only h > 0 is scanned.
pub fn zygmund_seminorm(g: &DiscreteSequence, alpha: f64) -> f64 {
    let n = g.n as i64;
    let mut best: f64 = 0.0;
    for h in 1..=n.max(1) {
        let scale = (h as f64 / n as f64).powf(alpha);
        for z in (g.lo() - 2 * h)..g.hi() {
            let d2 = g.get(z + 2 * h) - 2.0 * g.get(z + h) + g.get(z);
            best = best.max(d2.abs() / scale);
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZygmundReport {
    pub seminorm: f64,
    /// max over z ∈ [−n, n] of |g(z) − g(0)| / bound(z); ≤ 1 means the bound holds.
    pub worst_ratio: f64,
    pub holds: bool,
}

/// Checks |g(z) − g(0)| ≤ |z/n|^α (‖g‖_* C(α)/2 + 2‖g‖_∞) for all z ∈ [−n, n].
pub fn zygmund_check(g: &DiscreteSequence, alpha: f64) -> Result<ZygmundReport> {
    let (c, tail) = zygmund_constant(alpha)?;
    let seminorm = zygmund_seminorm(g, alpha);
    let sup = g.sup_norm();
    let n = g.n as i64;
    let factor = seminorm * (c + tail) / 2.0 + 2.0 * sup;
    let mut worst: f64 = 0.0;
    for z in -n..=n {
        if z == 0 {
            continue;
        }
        let lhs = (g.get(z) - g.get(0)).abs();
        if lhs == 0.0 {
            continue;
        }
        let bound = (z.abs() as f64 / n as f64).powf(alpha) * factor;
        worst = worst.max(lhs / bound);
    }
    Ok(ZygmundReport { seminorm, worst_ratio: worst, holds: worst <= 1.0 + 1e-12 })
}

/// Largest ratio |f(z+h) − f(z)| / |h/n|^β over the admissible (z, h) pairs of
/// the discrete Hölder premise, with both z and z + h inside [0, n].
pub fn discrete_hoelder_ratio(f: &DiscreteSequence, beta: f64) -> f64 {
    let n = f.n as i64;
    let mut best: f64 = 0.0;
    for h in 1..=n {
        let scale = (h as f64 / n as f64).powf(beta);
        for z in 0..=(n - h) {
            best = best.max((f.get(z + h) - f.get(z)).abs() / scale);
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothnessReport {
    /// Empirical max_z |c(z) − c(0)| / (n |z/n|^{2β}); `None` when the premise fails.
    pub constant: Option<f64>,
    pub premise_ratio: f64,
    pub premise_holds: bool,
    /// Constant implied by the Zygmund argument: 2M²C(2β) + 2‖c‖_∞/n.
    pub theory_constant: f64,
}

/// Empirical smoothness constant of f ∗ g⁻ for sequences supported on [0, n]
/// satisfying |f(z+h) − f(z)| ≤ M|h/n|^β (and likewise g).
pub fn convolution_smoothness_check(
    f: &DiscreteSequence,
    g: &DiscreteSequence,
    beta: f64,
    m: f64,
) -> Result<SmoothnessReport> {
    if !(beta > 0.0 && beta < 0.5) {
        return Err(Error::Domain(format!("beta must lie in (0, 1/2), got {beta}")));
    }
    if f.n != g.n || f.lo() != 0 || g.lo() != 0 {
        return Err(Error::Shape("sequences must share n and be supported on [0, n]".into()));
    }
    let n = f.n as i64;
    let premise_ratio = discrete_hoelder_ratio(f, beta).max(discrete_hoelder_ratio(g, beta));
    // Boundary terms of the premise: D_h f jumps to ±f near the support edge.
    let edge = f.sup_norm().max(g.sup_norm());
    let premise_holds = premise_ratio <= m * (1.0 + 1e-12) && edge <= m * (1.0 + 1e-12);
    let conv = discrete_convolution(f, g);
    let (c, tail) = zygmund_constant(2.0 * beta)?;
    let theory_constant = 2.0 * m * m * (c + tail) + 2.0 * conv.sup_norm() / n as f64;
    if !premise_holds {
        return Ok(SmoothnessReport { constant: None, premise_ratio, premise_holds, theory_constant });
    }
    let c0 = conv.get(0);
    let mut worst: f64 = 0.0;
    for z in -n..=n {
        if z == 0 {
            continue;
        }
        let denom = n as f64 * (z.abs() as f64 / n as f64).powf(2.0 * beta);
        worst = worst.max((conv.get(z) - c0).abs() / denom);
    }
    Ok(SmoothnessReport { constant: Some(worst), premise_ratio, premise_holds, theory_constant })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(v: &[f64]) -> DiscreteSequence {
        DiscreteSequence::on_grid(v.to_vec()).unwrap()
    }

    #[test]
    fn difference_of_constant_vanishes_inside() {
        let g = seq(&[2.0; 6]);
        let d = finite_difference(&g, 2, 1).unwrap();
        for z in 0..=3 {
            assert_eq!(d.get(z), 0.0);
        }
    }

    #[test]
    fn second_difference_of_linear_vanishes_in_support() {
        let g = seq(&(0..10).map(|i| i as f64).collect::<Vec<_>>());
        let d = finite_difference(&g, 1, 2).unwrap();
        for z in 0..=7 {
            assert_eq!(d.get(z), 0.0);
        }
    }

    #[test]
    fn order_three_rejected() {
        assert!(finite_difference(&seq(&[1.0, 2.0]), 1, 3).is_err());
    }

    #[test]
    fn delta_correlation_reflects() {
        let f = seq(&[1.0]);
        let g = seq(&[1.0, 2.0, 3.0]);
        let c = discrete_convolution(&f, &g);
        for z in -2..=0 {
            assert_eq!(c.get(z), g.get(-z));
        }
    }

    #[test]
    fn zygmund_constant_closed_form() {
        let (c, tail) = zygmund_constant(0.5).unwrap();
        let exact = 1.0 / (1.0 - 2f64.powf(-0.5));
        assert!((c - exact).abs() < 1e-13);
        assert!(tail < 1e-15);
    }

    #[test]
    fn smoothness_of_zero_sequence_is_zero() {
        let f = seq(&[0.0; 33]);
        let r = convolution_smoothness_check(&f, &f, 0.3, 1.0).unwrap();
        assert_eq!(r.constant, Some(0.0));
    }

    #[test]
    fn nonzero_constants_have_finite_constant() {
        // Truncation to [0, n] makes c(z) = (n + 1 − |z|)a², so increments are
        // linear in |z| rather than zero.
        let f = seq(&[1.0; 33]);
        let r = convolution_smoothness_check(&f, &f, 0.3, 1.0).unwrap();
        assert!(r.premise_holds);
        assert!(r.constant.unwrap() <= r.theory_constant);
    }
}
