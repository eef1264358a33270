//! Bayesian linear mixed model: design construction, the conjugate Gibbs
//! sampler, and chain diagnostics.

mod design;
mod geweke;
mod gibbs;

pub use design::{build_design, outcome_vector, LmmDesign};
pub use geweke::{geweke_z, geweke_z_default, GEWEKE_FRAC_EARLY, GEWEKE_FRAC_LATE};
pub use gibbs::{
    gibbs_run, ChainConfig, GibbsEngine, GibbsState, IccSummary, PosteriorDraws, PriorConfig,
};
