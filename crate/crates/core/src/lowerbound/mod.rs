//! Lower-bound priors and numerical (in)distinguishability checks.

pub mod chi2;
pub mod construction;
pub mod moment;
pub mod priors;
pub mod risk;

pub use chi2::{
    chi2_convolved, chi2_divergence, chi2_tensorize, moment_matching_bound, risk_lower_bound, Chi2Report,
};
pub use construction::{marginal_equality_check, Construction, Hypothesis, MarginalReport};
pub use moment::{build_moment_matched, normal_moment, MomentMatchedLaw};
pub use priors::{
    bump_count, default_moment_order, draw_prior, draw_prior_unconditioned, ClassCheck, PriorDraw, PriorSpec,
    REJECTION_BUDGET,
};
pub use risk::{risk_floor_estimate, LikelihoodRatio, RiskReport};
