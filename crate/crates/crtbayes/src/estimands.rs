//! Treatment-effect estimands and their estimators.
//!
//! Two marginal estimands are supported: the cluster-average treatment
//! effect (every cluster weighted equally) and the individual-average
//! treatment effect (every individual weighted equally). Each is evaluated
//! on a chosen effect scale from arm-specific means mu(1), mu(0), which are
//! estimated by one of three routes:
//!
//! - model-based g-computation: plug-in averages of conditional-mean
//!   predictions over the observed clusters,
//! - model-robust standardization: g-computation plus an inverse-probability
//!   weighted residual augmentation, consistent under outcome-model
//!   misspecification because the randomization probability is known,
//! - the nonparametric unadjusted estimator (no outcome model at all).
//!
//! For the unadjusted working model the g-computation formulas collapse to
//! mu(a) = beta0 + beta1*a for both estimands, so the two unit choices give
//! literally the same value; the evaluator applies that reduction directly.

use crate::error::{Error, Result};
use crate::lmm::PosteriorDraws;
use crate::stats::mean;
use crate::trial::{cluster_summaries, ClusterSummary, TrialDataset};

/// Effect measure f(mu1, mu0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectScale {
    Difference,
    RiskRatio,
    OddsRatio,
}

impl EffectScale {
    pub fn apply(&self, mu1: f64, mu0: f64) -> Result<f64> {
        match self {
            EffectScale::Difference => Ok(mu1 - mu0),
            EffectScale::RiskRatio => {
                if mu0 <= 0.0 {
                    return Err(Error::ScaleDomain(format!(
                        "risk ratio needs mu(0) > 0, got {mu0}"
                    )));
                }
                Ok(mu1 / mu0)
            }
            EffectScale::OddsRatio => {
                for (label, v) in [("mu(1)", mu1), ("mu(0)", mu0)] {
                    if !(0.0 < v && v < 1.0) {
                        return Err(Error::ScaleDomain(format!(
                            "odds ratio needs {label} in (0,1), got {v}"
                        )));
                    }
                }
                Ok(mu1 * (1.0 - mu0) / (mu0 * (1.0 - mu1)))
            }
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            EffectScale::Difference => "difference",
            EffectScale::RiskRatio => "risk-ratio",
            EffectScale::OddsRatio => "odds-ratio",
        }
    }
}

impl std::str::FromStr for EffectScale {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "difference" | "diff" => Ok(EffectScale::Difference),
            "risk-ratio" | "rr" => Ok(EffectScale::RiskRatio),
            "odds-ratio" | "or" => Ok(EffectScale::OddsRatio),
            other => Err(Error::Config(format!(
                "unknown effect scale {other:?} (expected difference, risk-ratio, or odds-ratio)"
            ))),
        }
    }
}

/// Unit of inference: cluster weights omega_i = 1, individual weights
/// omega_i = N_i.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimandUnit {
    Cluster,
    Individual,
}

impl EstimandUnit {
    pub fn label(&self) -> &'static str {
        match self {
            EstimandUnit::Cluster => "cluster-ATE",
            EstimandUnit::Individual => "individual-ATE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    GComputation,
    ModelRobust,
    Nonparametric,
}

impl EstimatorKind {
    pub fn label(&self) -> &'static str {
        match self {
            EstimatorKind::GComputation => "g-computation",
            EstimatorKind::ModelRobust => "model-robust",
            EstimatorKind::Nonparametric => "nonparametric",
        }
    }
}

/// A fully specified estimand/estimator choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct EstimandSpec {
    pub unit: EstimandUnit,
    pub scale: EffectScale,
    pub estimator: EstimatorKind,
    pub adjusted: bool,
}

impl EstimandSpec {
    pub fn validate(&self) -> Result<()> {
        if self.estimator == EstimatorKind::Nonparametric && self.adjusted {
            return Err(Error::Config(
                "the nonparametric estimator is unadjusted by definition".into(),
            ));
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        format!(
            "{} {} ({}, {})",
            if self.adjusted {
                "adjusted"
            } else {
                "unadjusted"
            },
            self.estimator.label(),
            self.unit.label(),
            self.scale.label()
        )
    }
}

/// Provider of the cluster-level conditional means E(Ybar_i | A=a, X_i, N_i)
/// and E(Y_i+ | A=a, X_i, N_i).
pub trait ConditionalMeanModel {
    fn mean_bar(&self, arm: u8, cluster: &ClusterSummary) -> f64;

    /// Defaults to N_i * mean_bar, which is exact whenever both means derive
    /// from one per-individual linear predictor.
    fn mean_sum(&self, arm: u8, cluster: &ClusterSummary) -> f64 {
        cluster.size_f() * self.mean_bar(arm, cluster)
    }

    /// A cluster-invariant prediction, if the model has one. Lets the
    /// g-computation evaluator apply the unadjusted-model reduction
    /// mu_C(a) = mu_I(a) = constant without averaging.
    fn constant_bar(&self, _arm: u8) -> Option<f64> {
        None
    }
}

/// Conditional means induced by one fixed-effect draw of the working LMM.
///
/// Adjusted layout: [1, A, X_1..X_q, N, A*X_1..A*X_q, A*N];
/// unadjusted: [1, A]. Cluster random effects integrate out of these means.
#[derive(Debug, Clone)]
pub struct LmmMeans<'a> {
    beta: &'a [f64],
    adjusted: bool,
    n_covariates: usize,
}

impl<'a> LmmMeans<'a> {
    pub fn new(beta: &'a [f64], adjusted: bool, n_covariates: usize) -> Result<Self> {
        let expected = if adjusted { 2 * n_covariates + 4 } else { 2 };
        if beta.len() != expected {
            return Err(Error::Config(format!(
                "coefficient vector has length {}, expected {} for {} model with q = {}",
                beta.len(),
                expected,
                if adjusted {
                    "the adjusted"
                } else {
                    "the unadjusted"
                },
                n_covariates
            )));
        }
        Ok(Self {
            beta,
            adjusted,
            n_covariates,
        })
    }
}

impl ConditionalMeanModel for LmmMeans<'_> {
    fn mean_bar(&self, arm: u8, cluster: &ClusterSummary) -> f64 {
        let a = f64::from(arm);
        let b = self.beta;
        if !self.adjusted {
            return b[0] + b[1] * a;
        }
        let q = self.n_covariates;
        debug_assert_eq!(cluster.xbar.len(), q);
        let n = cluster.size_f();
        let mut main = 0.0;
        let mut interaction = 0.0;
        for (j, &xb) in cluster.xbar.iter().enumerate() {
            main += b[2 + j] * xb;
            interaction += b[3 + q + j] * xb;
        }
        b[0] + b[1] * a + main + b[2 + q] * n + a * (interaction + b[3 + 2 * q] * n)
    }

    fn constant_bar(&self, arm: u8) -> Option<f64> {
        if self.adjusted {
            None
        } else {
            Some(self.beta[0] + self.beta[1] * f64::from(arm))
        }
    }
}

/// The zero outcome model: turns model-robust standardization into the
/// nonparametric two-sample estimator.
#[derive(Debug, Clone, Copy)]
pub struct ZeroMeans;

impl ConditionalMeanModel for ZeroMeans {
    fn mean_bar(&self, _arm: u8, _cluster: &ClusterSummary) -> f64 {
        0.0
    }

    fn constant_bar(&self, _arm: u8) -> Option<f64> {
        Some(0.0)
    }
}

/// Fixture model backed by a closure, for tests and experimentation.
pub struct ClosureMeans<F: Fn(u8, &ClusterSummary) -> f64>(pub F);

impl<F: Fn(u8, &ClusterSummary) -> f64> ConditionalMeanModel for ClosureMeans<F> {
    fn mean_bar(&self, arm: u8, cluster: &ClusterSummary) -> f64 {
        (self.0)(arm, cluster)
    }
}

/// Arm means and the effect for one spec.
#[derive(Debug, Clone, Copy)]
pub struct ArmEstimates {
    pub mu1: f64,
    pub mu0: f64,
    pub delta: f64,
}

/// Arm means (mu1, mu0) for every estimator/unit combination, computed in
/// one pass over the cluster summaries.
#[derive(Debug, Clone, Copy)]
pub struct AllArmMeans {
    pub gcomp_cluster: (f64, f64),
    pub gcomp_individual: (f64, f64),
    pub mr_cluster: (f64, f64),
    pub mr_individual: (f64, f64),
    pub np_cluster: (f64, f64),
    pub np_individual: (f64, f64),
}

impl AllArmMeans {
    pub fn pick(&self, estimator: EstimatorKind, unit: EstimandUnit) -> (f64, f64) {
        match (estimator, unit) {
            (EstimatorKind::GComputation, EstimandUnit::Cluster) => self.gcomp_cluster,
            (EstimatorKind::GComputation, EstimandUnit::Individual) => self.gcomp_individual,
            (EstimatorKind::ModelRobust, EstimandUnit::Cluster) => self.mr_cluster,
            (EstimatorKind::ModelRobust, EstimandUnit::Individual) => self.mr_individual,
            (EstimatorKind::Nonparametric, EstimandUnit::Cluster) => self.np_cluster,
            (EstimatorKind::Nonparametric, EstimandUnit::Individual) => self.np_individual,
        }
    }
}

/// Evaluate all six (estimator, unit) arm-mean pairs for one conditional-mean
/// model. Outer expectations are empirical averages over the observed
/// clusters; E(N_i) is the sample mean of this dataset's sizes.
pub fn evaluate_all(
    summaries: &[ClusterSummary],
    pi: f64,
    model: &dyn ConditionalMeanModel,
) -> AllArmMeans {
    let m = summaries.len() as f64;
    let total_n: f64 = summaries.iter().map(ClusterSummary::size_f).sum();

    let mut gcomp_c = [0.0f64; 2];
    let mut gcomp_i = [0.0f64; 2];
    let mut mr_c = [0.0f64; 2];
    let mut mr_i = [0.0f64; 2];
    let mut np_c = [0.0f64; 2];
    let mut np_i = [0.0f64; 2];
    // the reduction applies only when both arms have invariant predictions
    let constant: [Option<f64>; 2] = match (model.constant_bar(0), model.constant_bar(1)) {
        (Some(c0), Some(c1)) => [Some(c0), Some(c1)],
        _ => [None, None],
    };

    for arm in 0..2usize {
        let inv_pi_a = 1.0 / if arm == 1 { pi } else { 1.0 - pi };
        match constant[arm] {
            // Cluster-invariant prediction: factor it out of the sums. For
            // the cluster mean the augmented form regroups as
            //   mu_mr(a) = (c_a (M - w #{A_i=a}) + w sum_{A_i=a} Ybar_i) / M,
            // so when w #{A_i=a} equals M exactly (equal arms, pi = 1/2) the
            // prediction cancels bitwise and the value is draw-invariant.
            Some(c_a) => {
                let mut match_count = 0.0f64;
                let mut match_n = 0.0f64;
                let mut match_ybar = 0.0f64;
                let mut match_ysum = 0.0f64;
                for c in summaries {
                    if usize::from(c.treatment) == arm {
                        match_count += 1.0;
                        match_n += c.size_f();
                        match_ybar += c.ybar;
                        match_ysum += c.ysum;
                        np_c[arm] += c.ybar * inv_pi_a;
                        np_i[arm] += c.size_f() * c.ybar * inv_pi_a;
                    }
                }
                mr_c[arm] = c_a * (m - inv_pi_a * match_count) + inv_pi_a * match_ybar;
                mr_i[arm] = c_a * (total_n - inv_pi_a * match_n) + inv_pi_a * match_ysum;
            }
            None => {
                for c in summaries {
                    let bar = model.mean_bar(arm as u8, c);
                    let sum_pred = model.mean_sum(arm as u8, c);
                    gcomp_c[arm] += bar;
                    gcomp_i[arm] += sum_pred;
                    if usize::from(c.treatment) == arm {
                        mr_c[arm] += bar + (c.ybar - bar) * inv_pi_a;
                        mr_i[arm] += sum_pred + (c.ysum - sum_pred) * inv_pi_a;
                        np_c[arm] += c.ybar * inv_pi_a;
                        np_i[arm] += c.size_f() * c.ybar * inv_pi_a;
                    } else {
                        mr_c[arm] += bar;
                        mr_i[arm] += sum_pred;
                    }
                }
            }
        }
    }

    let (gcomp_cluster, gcomp_individual) = match (constant[0], constant[1]) {
        (Some(c0), Some(c1)) => ((c1, c0), (c1, c0)),
        _ => (
            (gcomp_c[1] / m, gcomp_c[0] / m),
            (gcomp_i[1] / total_n, gcomp_i[0] / total_n),
        ),
    };
    AllArmMeans {
        gcomp_cluster,
        gcomp_individual,
        mr_cluster: (mr_c[1] / m, mr_c[0] / m),
        mr_individual: (mr_i[1] / total_n, mr_i[0] / total_n),
        np_cluster: (np_c[1] / m, np_c[0] / m),
        np_individual: (np_i[1] / total_n, np_i[0] / total_n),
    }
}

fn require_both_arms(summaries: &[ClusterSummary]) -> Result<()> {
    let treated = summaries.iter().filter(|c| c.treatment == 1).count();
    if treated == 0 || treated == summaries.len() {
        return Err(Error::Data(
            "estimator requires at least one cluster in each arm".into(),
        ));
    }
    Ok(())
}

fn expect_estimator(spec: &EstimandSpec, expected: EstimatorKind) -> Result<()> {
    spec.validate()?;
    if spec.estimator != expected {
        return Err(Error::Config(format!(
            "spec names estimator {:?} but {:?} was invoked",
            spec.estimator, expected
        )));
    }
    Ok(())
}

fn assemble(pair: (f64, f64), scale: EffectScale) -> Result<ArmEstimates> {
    let (mu1, mu0) = pair;
    Ok(ArmEstimates {
        mu1,
        mu0,
        delta: scale.apply(mu1, mu0)?,
    })
}

/// Model-based g-computation over the observed covariate distribution.
pub fn g_computation(
    dataset: &TrialDataset,
    model: &dyn ConditionalMeanModel,
    spec: &EstimandSpec,
) -> Result<ArmEstimates> {
    expect_estimator(spec, EstimatorKind::GComputation)?;
    let summaries = cluster_summaries(dataset);
    g_computation_from_summaries(&summaries, dataset.assignment_probability(), model, spec)
}

pub fn g_computation_from_summaries(
    summaries: &[ClusterSummary],
    pi: f64,
    model: &dyn ConditionalMeanModel,
    spec: &EstimandSpec,
) -> Result<ArmEstimates> {
    expect_estimator(spec, EstimatorKind::GComputation)?;
    let all = evaluate_all(summaries, pi, model);
    assemble(all.pick(spec.estimator, spec.unit), spec.scale)
}

/// Model-robust standardization: augments the model predictions with
/// inverse-probability weighted residuals of the observed arm.
pub fn model_robust(
    dataset: &TrialDataset,
    model: &dyn ConditionalMeanModel,
    spec: &EstimandSpec,
) -> Result<ArmEstimates> {
    expect_estimator(spec, EstimatorKind::ModelRobust)?;
    let summaries = cluster_summaries(dataset);
    model_robust_from_summaries(&summaries, dataset.assignment_probability(), model, spec)
}

pub fn model_robust_from_summaries(
    summaries: &[ClusterSummary],
    pi: f64,
    model: &dyn ConditionalMeanModel,
    spec: &EstimandSpec,
) -> Result<ArmEstimates> {
    expect_estimator(spec, EstimatorKind::ModelRobust)?;
    require_both_arms(summaries)?;
    let all = evaluate_all(summaries, pi, model);
    assemble(all.pick(spec.estimator, spec.unit), spec.scale)
}

/// The nonparametric unadjusted estimator.
pub fn nonparametric(dataset: &TrialDataset, spec: &EstimandSpec) -> Result<ArmEstimates> {
    expect_estimator(spec, EstimatorKind::Nonparametric)?;
    let summaries = cluster_summaries(dataset);
    nonparametric_from_summaries(&summaries, dataset.assignment_probability(), spec)
}

pub fn nonparametric_from_summaries(
    summaries: &[ClusterSummary],
    pi: f64,
    spec: &EstimandSpec,
) -> Result<ArmEstimates> {
    expect_estimator(spec, EstimatorKind::Nonparametric)?;
    require_both_arms(summaries)?;
    let all = evaluate_all(summaries, pi, &ZeroMeans);
    assemble(all.pick(spec.estimator, spec.unit), spec.scale)
}

/// Point estimate: the posterior average of per-draw estimand values, with
/// the per-draw sequence retained for interval construction.
#[derive(Debug, Clone)]
pub struct PosteriorEstimate {
    pub point: f64,
    pub per_draw: Vec<f64>,
}

/// Per-draw estimand values for several specs sharing one chain, evaluated
/// in one pass per draw. Every spec must match the chain's covariate
/// adjustment; ratio scales are applied per draw, then averaged upstream.
pub fn per_draw_values(
    summaries: &[ClusterSummary],
    pi: f64,
    n_covariates: usize,
    draws: &PosteriorDraws,
    specs: &[EstimandSpec],
) -> Result<Vec<Vec<f64>>> {
    if draws.n_draws() == 0 {
        return Err(Error::InsufficientDraws(
            "no posterior draws available".into(),
        ));
    }
    for spec in specs {
        spec.validate()?;
        if spec.estimator == EstimatorKind::ModelRobust
            || spec.estimator == EstimatorKind::Nonparametric
        {
            require_both_arms(summaries)?;
        }
    }
    let mr_or_gcomp: Vec<&EstimandSpec> = specs
        .iter()
        .filter(|s| s.estimator != EstimatorKind::Nonparametric)
        .collect();
    if let Some(first) = mr_or_gcomp.first() {
        if mr_or_gcomp.iter().any(|s| s.adjusted != first.adjusted) {
            return Err(Error::Config(
                "specs sharing one chain must agree on covariate adjustment".into(),
            ));
        }
        let expected = if first.adjusted {
            2 * n_covariates + 4
        } else {
            2
        };
        if draws.n_coef() != expected {
            return Err(Error::Config(format!(
                "chain has {} coefficients but the specs need {}",
                draws.n_coef(),
                expected
            )));
        }
    }

    let b_total = draws.n_draws();
    let mut out: Vec<Vec<f64>> = specs.iter().map(|_| Vec::with_capacity(b_total)).collect();
    // the nonparametric value does not involve the chain: evaluate it once
    let np_all = evaluate_all(summaries, pi, &ZeroMeans);

    for b in 0..b_total {
        let needs_model = !mr_or_gcomp.is_empty();
        let model_all = if needs_model {
            let adjusted = mr_or_gcomp[0].adjusted;
            let model = LmmMeans::new(draws.beta_draw(b), adjusted, n_covariates)?;
            Some(evaluate_all(summaries, pi, &model))
        } else {
            None
        };
        for (spec, column) in specs.iter().zip(&mut out) {
            let all = if spec.estimator == EstimatorKind::Nonparametric {
                &np_all
            } else {
                model_all.as_ref().expect("model evaluated")
            };
            let (mu1, mu0) = all.pick(spec.estimator, spec.unit);
            let value = spec
                .scale
                .apply(mu1, mu0)
                .map_err(|e| Error::ScaleDomain(format!("draw {b}, {}: {e}", spec.label())))?;
            column.push(value);
        }
    }
    Ok(out)
}

/// Posterior point estimate for one spec.
pub fn posterior_point(
    dataset: &TrialDataset,
    draws: &PosteriorDraws,
    spec: &EstimandSpec,
) -> Result<PosteriorEstimate> {
    let summaries = cluster_summaries(dataset);
    let values = per_draw_values(
        &summaries,
        dataset.assignment_probability(),
        dataset.n_covariates(),
        draws,
        std::slice::from_ref(spec),
    )?;
    let per_draw = values.into_iter().next().expect("one spec requested");
    Ok(PosteriorEstimate {
        point: mean(&per_draw),
        per_draw,
    })
}
