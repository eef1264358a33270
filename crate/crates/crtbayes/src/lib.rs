//! Estimand-aligned Bayesian analysis of cluster-randomized trials.
//!
//! The crate fits a Bayesian linear mixed model by conjugate Gibbs sampling,
//! turns posterior draws into cluster-average and individual-average
//! treatment effects via model-based g-computation or model-robust
//! standardization, and calibrates interval estimates by combining
//! cluster-bootstrap data variability with posterior parameter variability.
//! A simulation harness replicates trial generation, analysis, and scoring
//! (bias, coverage, MCSD/AESE, relative efficiency) under several
//! data-generating processes.
//!
//! Entry points:
//! - [`trial`]: dataset types, CSV ingestion, per-cluster summaries.
//! - [`lmm`]: design matrices, the Gibbs sampler, Geweke diagnostics.
//! - [`estimands`]: effect scales, conditional-mean models, the three
//!   estimators, and posterior point estimation.
//! - [`calibration`]: posterior-quantile intervals and the bootstrap-
//!   calibrated variance.
//! - [`dgp`]: scenario generators and ground-truth estimands.
//! - [`metrics`]: replication-study metrics and the results table.
//! - [`pipeline`]: the `simulate` / `analyze` / `truth` commands as library
//!   functions; the `crtbayes` binary is a thin wrapper over these.
//!
//! Each major capability has a runnable example under `examples/`.

pub mod calibration;
pub mod dgp;
pub mod error;
pub mod estimands;
pub mod lmm;
pub mod metrics;
pub mod pipeline;
pub mod rng;
pub mod stats;
pub mod trial;

pub use error::{Error, Result};
