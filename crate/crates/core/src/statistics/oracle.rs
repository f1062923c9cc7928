//! Oracle quantities and proxy functionals computed from known (f, V).
//!
//! Index mapping (0-based over the n + 1 design points): the first-difference
//! proxy T sums over i = 0..n−1; the profile proxies T̃₁ and T̃₂ sum over
//! i = 0..n−3 and use 1/n as normalization.

use crate::numerics::{compensated_sum, mean};
use crate::sim_model::{DesignGrid, FunctionSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleQuantities {
    pub f: Vec<f64>,
    pub v: Vec<f64>,
    /// W_i = V_{i+1} + V_i.
    pub w: Vec<f64>,
    /// δ_i = f_{i+1} − f_i.
    pub delta: Vec<f64>,
    /// U_i = δ_i² + W_i.
    pub u: Vec<f64>,
    /// W̃_i = V_{i+2} + V_i.
    pub w_tilde: Vec<f64>,
    /// δ̃_i = f_{i+2} − f_i.
    pub delta_tilde: Vec<f64>,
}

impl OracleQuantities {
    pub fn new(f: &FunctionSpec, v: &FunctionSpec, grid: DesignGrid) -> Self {
        Self::from_values(grid.values(f), grid.values(v))
    }

    /// From design-point values f_0..f_n and V_0..V_n.
    pub fn from_values(f: Vec<f64>, v: Vec<f64>) -> Self {
        let n = f.len() - 1;
        let w: Vec<f64> = (0..n).map(|i| v[i + 1] + v[i]).collect();
        let delta: Vec<f64> = (0..n).map(|i| f[i + 1] - f[i]).collect();
        let u = w.iter().zip(&delta).map(|(w, d)| w + d * d).collect();
        let w_tilde = (0..n - 1).map(|i| v[i + 2] + v[i]).collect();
        let delta_tilde = (0..n - 1).map(|i| f[i + 2] - f[i]).collect();
        Self { f, v, w, delta, u, w_tilde, delta_tilde }
    }

    pub fn n(&self) -> usize {
        self.w.len()
    }

    /// E R_i⁴ = 3W_i² + 6W_iδ_i² + δ_i⁴ under Gaussian noise.
    pub fn fourth_moment(&self, i: usize) -> f64 {
        let (w, d2) = (self.w[i], self.delta[i] * self.delta[i]);
        3.0 * w * w + 6.0 * w * d2 + d2 * d2
    }

    /// T = (1/n) Σ_{i=0}^{n−1} (U_i − Ū)².
    pub fn proxy_t(&self) -> f64 {
        let ubar = mean(&self.u);
        compensated_sum(self.u.iter().map(|u| (u - ubar).powi(2))) / self.n() as f64
    }

    /// T̃₁ = (1/n) Σ_{i=0}^{n−3} (U_{i+1} − V_i − V_{i+3} − (f_{i+3} − f_i)²)².
    pub fn proxy_t1_tilde(&self) -> f64 {
        let n = self.n();
        compensated_sum((0..n - 2).map(|i| {
            let d3 = self.f[i + 3] - self.f[i];
            (self.u[i + 1] - self.v[i] - self.v[i + 3] - d3 * d3).powi(2)
        })) / n as f64
    }

    /// T̃₂ = (1/n) Σ_{i=0}^{n−3} (W̃_{i+1} + δ̃_{i+1}² − W̃_i − δ̃_i²)².
    pub fn proxy_t2_tilde(&self) -> f64 {
        let n = self.n();
        let ut = |i: usize| self.w_tilde[i] + self.delta_tilde[i] * self.delta_tilde[i];
        compensated_sum((0..n - 2).map(|i| (ut(i + 1) - ut(i)).powi(2))) / n as f64
    }

    /// (1/n) Σ_{i=0}^{n−1} (V_i − V̄)² over the first n design points.
    pub fn profile_variance(&self) -> f64 {
        let v = &self.v[..self.n()];
        let vbar = mean(v);
        compensated_sum(v.iter().map(|x| (x - vbar).powi(2))) / self.n() as f64
    }
}

pub fn proxy_t(f: &FunctionSpec, v: &FunctionSpec, grid: DesignGrid) -> f64 {
    OracleQuantities::new(f, v, grid).proxy_t()
}

pub fn proxy_t1_tilde(f: &FunctionSpec, v: &FunctionSpec, grid: DesignGrid) -> f64 {
    OracleQuantities::new(f, v, grid).proxy_t1_tilde()
}

pub fn proxy_t2_tilde(f: &FunctionSpec, v: &FunctionSpec, grid: DesignGrid) -> f64 {
    OracleQuantities::new(f, v, grid).proxy_t2_tilde()
}
