//! Regression model Y_i = f(i/n) + V(i/n)^{1/2} ξ_i on the fixed design.

pub mod function;
pub mod hoelder;
pub mod model;
pub mod noise;

pub use function::{bump, smoothstep, tent, FunctionSpec, HoelderTag, Wave};
pub use hoelder::{check_declared, check_hoelder, design_heteroskedasticity, l2_heteroskedasticity, HoelderReport};
pub use model::{sample, DesignGrid, PreparedModel, RegressionModel, SampleVector};
pub use noise::{matched_atoms, NoiseSampler, NoiseSpec, DEFAULT_C_XI};

/// Default Hölder constant M.
pub const DEFAULT_M: f64 = 10.0;
