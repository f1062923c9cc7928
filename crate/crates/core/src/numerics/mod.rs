//! Shared numeric kernels.

pub mod quad;
pub mod sequence;
pub mod sum;

pub use quad::{integrate_adaptive, quadrature, quadrature_pieces, QuadResult, DEFAULT_POINTS};
pub use sequence::{
    convolution_smoothness_check, discrete_convolution, discrete_convolution_reference,
    discrete_hoelder_ratio, finite_difference, zygmund_check, zygmund_constant, zygmund_seminorm,
    DiscreteSequence, SmoothnessReport, ZygmundReport,
};
pub use sum::{compensated_sum, mean, mean_stderr, pairwise_sum, CompensatedSum};

pub mod hermite;
pub mod law;

pub use hermite::gauss_hermite;
pub use law::{ln_normal_pdf, normal_pdf, Component, Law};
