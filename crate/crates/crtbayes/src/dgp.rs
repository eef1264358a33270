//! Data-generating processes for the simulation studies, plus ground-truth
//! estimand computation by large-sample Monte Carlo.
//!
//! Four scenarios are provided. S1 is linear in the working-model terms, S2
//! and S3 add nonlinearities and interactions that a linear working model
//! cannot capture, and NoIcs removes every cluster-size dependence so the
//! cluster- and individual-average effects coincide.
//!
//! Shared covariate process for S1-S3 (per cluster i, individual j):
//!
//! ```text
//! N_i  ~ DiscreteUniform{10..50}            (mean 30, CV = sqrt(140)/30 ~ 0.394)
//! C_1  ~ Normal(N_i/10, sd 3)
//! C_2  ~ Bernoulli(expit(log(N_i/10) C_1))
//! X_1  ~ Bernoulli(N_i/50)
//! X_2  ~ Normal((sum_j X_1)(2 C_2 - 1)/N_i, sd 9)
//! ```
//!
//! Potential outcomes are Y_ij(a) ~ Normal(eta_ij(a) + phi_i, 1) with
//! phi_i ~ Normal(0, sigma_phi^2); with the default sigma_phi^2 = 0.25 the
//! intracluster correlation is 0.2. Assignments A_i ~ Bernoulli(pi) come
//! from their own RNG substream, so regenerating with a different
//! assignment seed leaves the potential-outcome streams untouched.
//!
//! Every cluster gets one substream per role (size, covariates, random
//! effect, outcome noise, assignment) derived from (seed, role, cluster).

use crate::error::{Error, Result};
use crate::estimands::EffectScale;
use crate::rng::substream;
use crate::trial::{ClusterRecord, TrialDataset};
use rand::Rng;
use rand_distr::StandardNormal;

const ROLE_SIZE: u64 = 1;
const ROLE_COVARIATES: u64 = 2;
const ROLE_RANDOM_EFFECT: u64 = 3;
const ROLE_OUTCOME_NOISE: u64 = 4;
const ROLE_ASSIGNMENT: u64 = 5;

const SIZE_MIN: u32 = 10;
const SIZE_MAX: u32 = 50;
const C1_SD: f64 = 3.0;
const X2_SD: f64 = 9.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    S1,
    S2,
    S3,
    NoIcs,
}

impl Scenario {
    pub fn label(&self) -> &'static str {
        match self {
            Scenario::S1 => "s1",
            Scenario::S2 => "s2",
            Scenario::S3 => "s3",
            Scenario::NoIcs => "noics",
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s1" | "i" => Ok(Scenario::S1),
            "s2" | "ii" => Ok(Scenario::S2),
            "s3" | "iii" => Ok(Scenario::S3),
            "noics" => Ok(Scenario::NoIcs),
            other => Err(Error::Config(format!(
                "unknown scenario {other:?} (expected s1, s2, s3, or noics)"
            ))),
        }
    }
}

/// Scenario, cluster count, assignment probability, random-intercept
/// variance, and master seed for one generated trial.
#[derive(Debug, Clone, Copy)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub n_clusters: usize,
    pub pi: f64,
    pub sigma_phi2: f64,
    pub seed: u64,
}

impl ScenarioConfig {
    /// Paper defaults: pi = 0.5, sigma_phi^2 = 0.25.
    pub fn new(scenario: Scenario, n_clusters: usize, seed: u64) -> Self {
        Self {
            scenario,
            n_clusters,
            pi: 0.5,
            sigma_phi2: 0.25,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_clusters < 2 {
            return Err(Error::Config(format!(
                "need at least 2 clusters, got {}",
                self.n_clusters
            )));
        }
        if !(self.pi > 0.0 && self.pi < 1.0) {
            return Err(Error::Config(format!(
                "assignment probability must be inside (0,1), got {}",
                self.pi
            )));
        }
        if !self.sigma_phi2.is_finite() || self.sigma_phi2 <= 0.0 {
            return Err(Error::Config(format!(
                "sigma_phi^2 must be positive, got {}",
                self.sigma_phi2
            )));
        }
        Ok(())
    }
}

fn expit(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Covariates for one cluster, before any treatment is assigned.
struct ClusterCovariates {
    n: usize,
    c1: f64,
    c2: f64,
    x1: Vec<f64>,
    x2: Vec<f64>,
}

fn draw_covariates(cfg: &ScenarioConfig, index: usize) -> ClusterCovariates {
    let mut size_rng = substream(cfg.seed, &[ROLE_SIZE, index as u64]);
    let n = size_rng.random_range(SIZE_MIN..=SIZE_MAX) as usize;
    let nf = n as f64;

    let mut cov_rng = substream(cfg.seed, &[ROLE_COVARIATES, index as u64]);
    let (c1, c2) = match cfg.scenario {
        Scenario::NoIcs => {
            let c1 = 3.0 + C1_SD * cov_rng.sample::<f64, _>(StandardNormal);
            let c2 = f64::from(cov_rng.random_bool(expit(3f64.ln() * c1)));
            (c1, c2)
        }
        _ => {
            let c1 = nf / 10.0 + C1_SD * cov_rng.sample::<f64, _>(StandardNormal);
            let c2 = f64::from(cov_rng.random_bool(expit((nf / 10.0).ln() * c1)));
            (c1, c2)
        }
    };

    let x1: Vec<f64> = match cfg.scenario {
        Scenario::NoIcs => (0..n)
            .map(|_| f64::from(cov_rng.random_bool(0.6)))
            .collect(),
        _ => (0..n)
            .map(|_| f64::from(cov_rng.random_bool(nf / 50.0)))
            .collect(),
    };
    let x1_sum: f64 = x1.iter().sum();
    let x2: Vec<f64> = match cfg.scenario {
        Scenario::NoIcs => x1
            .iter()
            .map(|&x| x * (2.0 * c2 - 1.0) + X2_SD * cov_rng.sample::<f64, _>(StandardNormal))
            .collect(),
        _ => {
            let center = x1_sum * (2.0 * c2 - 1.0) / nf;
            (0..n)
                .map(|_| center + X2_SD * cov_rng.sample::<f64, _>(StandardNormal))
                .collect()
        }
    };

    ClusterCovariates { n, c1, c2, x1, x2 }
}

/// Fixed-effect component of the outcome model for one individual.
fn eta(scenario: Scenario, arm: f64, n: f64, c1: f64, c2: f64, x1: f64, x2: f64) -> f64 {
    match scenario {
        Scenario::S1 => {
            0.3 * arm
                + n / 200.0
                + c1 / 3.0
                + (2.0 * c2 - 1.0) / 5.0
                + arm * c2 / 10.0
                + 0.25 * (x1 + x2)
                + arm * n / 200.0
                + arm * x1 / 10.0
        }
        Scenario::S2 => {
            -0.1 - 0.3 * expit(6.0 * (n + c1 + c2 + x1 + x2))
                + 0.2 * x1 * x2
                + 0.3 * (n / 100.0 + c1 + c2) * arm
                - arm * expit(4.0 * (x1 + x2))
        }
        Scenario::S3 => {
            n * arm / 60.0
                + 0.5 * n * c1.sin() * (2.0 * c2 - 1.0)
                + 0.5 * x1.exp() * x2.abs()
                + 0.25 * arm * x2 * c1.abs().ln()
        }
        Scenario::NoIcs => {
            -0.1 - 0.3 * expit(6.0 * (30.0 + x1 + x2)) + 0.2 * x1 * x2 + 0.3 * (3.0 + x1) * arm
                - arm * expit(4.0 * (x1 + x2))
        }
    }
}

/// Both potential-outcome vectors, per cluster and individual.
#[derive(Debug, Clone)]
pub struct PotentialOutcomes {
    pub y1: Vec<Vec<f64>>,
    pub y0: Vec<Vec<f64>>,
}

fn generate_inner(
    cfg: &ScenarioConfig,
    assignment_seed: u64,
) -> Result<(TrialDataset, PotentialOutcomes)> {
    cfg.validate()?;
    let mut clusters = Vec::with_capacity(cfg.n_clusters);
    let mut y1_all = Vec::with_capacity(cfg.n_clusters);
    let mut y0_all = Vec::with_capacity(cfg.n_clusters);

    for i in 0..cfg.n_clusters {
        let cov = draw_covariates(cfg, i);
        let nf = cov.n as f64;

        let mut phi_rng = substream(cfg.seed, &[ROLE_RANDOM_EFFECT, i as u64]);
        let phi = cfg.sigma_phi2.sqrt() * phi_rng.sample::<f64, _>(StandardNormal);

        let mut noise_rng = substream(cfg.seed, &[ROLE_OUTCOME_NOISE, i as u64]);
        let mut y1 = Vec::with_capacity(cov.n);
        let mut y0 = Vec::with_capacity(cov.n);
        for j in 0..cov.n {
            let base1 = eta(cfg.scenario, 1.0, nf, cov.c1, cov.c2, cov.x1[j], cov.x2[j]) + phi;
            let base0 = eta(cfg.scenario, 0.0, nf, cov.c1, cov.c2, cov.x1[j], cov.x2[j]) + phi;
            y1.push(base1 + noise_rng.sample::<f64, _>(StandardNormal));
            y0.push(base0 + noise_rng.sample::<f64, _>(StandardNormal));
        }

        let mut assign_rng = substream(assignment_seed, &[ROLE_ASSIGNMENT, i as u64]);
        let treatment = u8::from(assign_rng.random_bool(cfg.pi));

        let observed = if treatment == 1 { &y1 } else { &y0 };
        let covariates: Vec<Vec<f64>> = (0..cov.n)
            .map(|j| vec![cov.c1, cov.c2, cov.x1[j], cov.x2[j]])
            .collect();
        clusters.push(ClusterRecord {
            id: format!("c{}", i + 1),
            treatment,
            covariates,
            outcomes: observed.clone(),
        });
        y1_all.push(y1);
        y0_all.push(y0);
    }

    let dataset = TrialDataset::new(
        clusters,
        cfg.pi,
        vec!["c1".into(), "c2".into(), "x1".into(), "x2".into()],
    )?;
    Ok((
        dataset,
        PotentialOutcomes {
            y1: y1_all,
            y0: y0_all,
        },
    ))
}

/// Generate one trial dataset.
pub fn generate_trial(cfg: &ScenarioConfig) -> Result<TrialDataset> {
    generate_inner(cfg, cfg.seed).map(|(d, _)| d)
}

/// Generate one trial dataset along with both potential-outcome vectors.
pub fn generate_trial_with_potentials(
    cfg: &ScenarioConfig,
) -> Result<(TrialDataset, PotentialOutcomes)> {
    generate_inner(cfg, cfg.seed)
}

/// Persist potential outcomes as a sidecar CSV (cluster, row, y1, y0)
/// matching the dataset's row order.
pub fn write_potentials_csv(
    dataset: &TrialDataset,
    potentials: &PotentialOutcomes,
    path: &std::path::Path,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["cluster", "row", "y1", "y0"])?;
    for (cluster, (y1, y0)) in dataset
        .clusters()
        .iter()
        .zip(potentials.y1.iter().zip(&potentials.y0))
    {
        for (j, (a, b)) in y1.iter().zip(y0).enumerate() {
            w.write_record(&[
                cluster.id.clone(),
                format!("{}", j + 1),
                format!("{a}"),
                format!("{b}"),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Ground-truth estimands for a scenario, from potential-outcome means.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct TruthEstimate {
    pub delta_c: f64,
    pub delta_i: f64,
    pub n_clusters_used: usize,
    pub scale: EffectScale,
}

/// Monte-Carlo ground truth over `n_truth` fresh clusters.
///
/// Works with the conditional potential-outcome means (eta evaluated under
/// each arm): the random intercept and residual noise are mean-zero, so they
/// integrate out of mu(a) exactly and never enter the computation.
pub fn true_estimands(
    cfg: &ScenarioConfig,
    n_truth: usize,
    scale: EffectScale,
) -> Result<TruthEstimate> {
    cfg.validate()?;
    if n_truth < 10_000 {
        return Err(Error::Config(format!(
            "ground truth needs n_truth >= 10000 clusters, got {n_truth}"
        )));
    }
    let truth_cfg = ScenarioConfig {
        n_clusters: n_truth,
        ..*cfg
    };
    let mut sum_cluster_mean = [0.0f64; 2];
    let mut sum_individual = [0.0f64; 2];
    let mut total_n = 0usize;
    for i in 0..n_truth {
        let cov = draw_covariates(&truth_cfg, i);
        let nf = cov.n as f64;
        for (arm_idx, arm) in [(0usize, 0.0f64), (1, 1.0)] {
            let mut cluster_sum = 0.0;
            for j in 0..cov.n {
                cluster_sum += eta(cfg.scenario, arm, nf, cov.c1, cov.c2, cov.x1[j], cov.x2[j]);
            }
            sum_cluster_mean[arm_idx] += cluster_sum / nf;
            sum_individual[arm_idx] += cluster_sum;
        }
        total_n += cov.n;
    }
    let m = n_truth as f64;
    let n = total_n as f64;
    let mu_c = [sum_cluster_mean[0] / m, sum_cluster_mean[1] / m];
    let mu_i = [sum_individual[0] / n, sum_individual[1] / n];
    Ok(TruthEstimate {
        delta_c: scale.apply(mu_c[1], mu_c[0])?,
        delta_i: scale.apply(mu_i[1], mu_i[0])?,
        n_clusters_used: n_truth,
        scale,
    })
}
