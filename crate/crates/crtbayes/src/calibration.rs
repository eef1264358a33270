//! Interval estimation: uncalibrated posterior-quantile intervals and the
//! bootstrap-calibrated variance.
//!
//! The calibrated variance combines two sources of uncertainty:
//!
//! ```text
//! Var(Delta_hat) = Var_{D^(k)}{ E_{beta|D}[Delta(D^(k), beta)] }   (data)
//!                + Var_{beta|D}[Delta(D, beta)]                     (parameter)
//! ```
//!
//! where D^(1..K) are cluster-level bootstrap resamples of the observed
//! dataset and the beta draws come from the posterior fitted to the original
//! data, held fixed across resamples. Conceptually the first term is the
//! variance of row means of the K x B matrix G = [Delta(D^(k), beta^(b))];
//! the implementation streams over draws instead of materializing G, and
//! [`GMatrix`] is available when the full matrix is wanted. The calibrated
//! interval is a normal approximation around the posterior point estimate.

use rand::Rng;
use serde_json::json;

use crate::error::{Error, Result};
use crate::estimands::{
    evaluate_all, per_draw_values, EstimandSpec, EstimatorKind, LmmMeans, ZeroMeans,
};
use crate::lmm::{geweke_z_default, PosteriorDraws};
use crate::rng::substream;
use crate::stats::{empirical_interval, mean, normal_quantile, sample_variance};
use crate::trial::{cluster_summaries, ClusterSummary, TrialDataset};

/// Resamples that lost an arm are redrawn rather than dropped, keeping K
/// fixed; give up after this many redraws for one replicate.
pub const MAX_SINGLE_ARM_RETRIES: usize = 100;

/// Cluster-level bootstrap settings. Resampling is always by whole cluster.
#[derive(Debug, Clone, Copy)]
pub struct BootstrapPlan {
    /// Number of resampled datasets K.
    pub replicates: usize,
    pub seed: u64,
}

impl BootstrapPlan {
    pub fn new(replicates: usize, seed: u64) -> Result<Self> {
        let plan = Self { replicates, seed };
        plan.validate()?;
        Ok(plan)
    }

    fn validate(&self) -> Result<()> {
        if self.replicates < 2 {
            return Err(Error::Config(format!(
                "bootstrap needs K >= 2 resamples, got {}",
                self.replicates
            )));
        }
        Ok(())
    }
}

fn resample_indices<R: Rng>(rng: &mut R, m: usize) -> Vec<usize> {
    (0..m).map(|_| rng.random_range(0..m)).collect()
}

/// Indices for resample k. When `enforce_arms` is set, single-arm draws are
/// redrawn from the same per-k stream, up to the retry cap.
fn resample_for_k(
    plan: &BootstrapPlan,
    k: usize,
    summaries: &[ClusterSummary],
    enforce_arms: bool,
) -> Result<Vec<usize>> {
    let mut rng = substream(plan.seed, &[k as u64]);
    let m = summaries.len();
    for attempt in 0..=MAX_SINGLE_ARM_RETRIES {
        let idx = resample_indices(&mut rng, m);
        if !enforce_arms {
            return Ok(idx);
        }
        let treated = idx.iter().filter(|&&i| summaries[i].treatment == 1).count();
        if treated > 0 && treated < m {
            if attempt > 0 {
                log::info!("bootstrap replicate {k}: redrew {attempt} single-arm resample(s)");
            }
            return Ok(idx);
        }
    }
    Err(Error::Calibration(format!(
        "bootstrap replicate {k} produced single-arm resamples {MAX_SINGLE_ARM_RETRIES} times in a row"
    )))
}

/// Draw K datasets by resampling M clusters with replacement, i.i.d. from
/// the empirical distribution. Deterministic given the plan seed. No arm
/// constraint is imposed here; a resample may hold a single arm, in which
/// case arm-dependent estimators reject it downstream.
pub fn bootstrap_datasets(
    dataset: &TrialDataset,
    plan: &BootstrapPlan,
) -> Result<Vec<TrialDataset>> {
    plan.validate()?;
    let m = dataset.n_clusters();
    (0..plan.replicates)
        .map(|k| {
            let mut rng = substream(plan.seed, &[k as u64]);
            let idx = resample_indices(&mut rng, m);
            let clusters = idx.iter().map(|&i| dataset.clusters()[i].clone()).collect();
            TrialDataset::new(
                clusters,
                dataset.assignment_probability(),
                dataset.covariate_names().to_vec(),
            )
        })
        .collect()
}

/// Per-spec bootstrap row means: entry k is (1/B) sum_b Delta(D^(k), beta^(b)).
///
/// All specs share the same K resamples (and the same redraw decisions), so
/// reports produced together are mutually consistent. Runs the K loop in
/// parallel when asked; results are reduced in k order either way.
pub(crate) fn bootstrap_row_means(
    summaries: &[ClusterSummary],
    pi: f64,
    n_covariates: usize,
    draws: &PosteriorDraws,
    specs: &[EstimandSpec],
    plan: &BootstrapPlan,
    parallel: bool,
) -> Result<Vec<Vec<f64>>> {
    plan.validate()?;
    let enforce_arms = {
        let treated = summaries.iter().filter(|c| c.treatment == 1).count();
        treated > 0 && treated < summaries.len()
    };
    let row_means_for_k = |k: usize| -> Result<Vec<f64>> {
        let idx = resample_for_k(plan, k, summaries, enforce_arms)?;
        let resampled: Vec<ClusterSummary> = idx.iter().map(|&i| summaries[i].clone()).collect();
        row_means_on(&resampled, pi, n_covariates, draws, specs)
            .map_err(|e| Error::Calibration(format!("bootstrap replicate {k}: {e}")))
    };

    let per_k: Vec<Vec<f64>> = if parallel {
        use rayon::prelude::*;
        (0..plan.replicates)
            .into_par_iter()
            .map(row_means_for_k)
            .collect::<Result<_>>()?
    } else {
        (0..plan.replicates)
            .map(row_means_for_k)
            .collect::<Result<_>>()?
    };

    // transpose to per-spec vectors of length K
    let mut out = vec![Vec::with_capacity(plan.replicates); specs.len()];
    for row in per_k {
        for (spec_idx, v) in row.into_iter().enumerate() {
            out[spec_idx].push(v);
        }
    }
    Ok(out)
}

/// Mean over draws of each spec's estimand value on one (resampled) dataset.
fn row_means_on(
    summaries: &[ClusterSummary],
    pi: f64,
    n_covariates: usize,
    draws: &PosteriorDraws,
    specs: &[EstimandSpec],
) -> Result<Vec<f64>> {
    let b_total = draws.n_draws();
    let np_all = evaluate_all(summaries, pi, &ZeroMeans);
    let model_specs: Vec<usize> = specs
        .iter()
        .enumerate()
        .filter(|(_, s)| s.estimator != EstimatorKind::Nonparametric)
        .map(|(i, _)| i)
        .collect();
    let mut acc = vec![0.0f64; specs.len()];

    // nonparametric entries are draw-invariant
    for (i, spec) in specs.iter().enumerate() {
        if spec.estimator == EstimatorKind::Nonparametric {
            let (mu1, mu0) = np_all.pick(spec.estimator, spec.unit);
            acc[i] = spec.scale.apply(mu1, mu0)?;
        }
    }
    if !model_specs.is_empty() {
        let adjusted = specs[model_specs[0]].adjusted;
        for b in 0..b_total {
            let model = LmmMeans::new(draws.beta_draw(b), adjusted, n_covariates)?;
            let all = evaluate_all(summaries, pi, &model);
            for &i in &model_specs {
                let (mu1, mu0) = all.pick(specs[i].estimator, specs[i].unit);
                acc[i] += specs[i]
                    .scale
                    .apply(mu1, mu0)
                    .map_err(|e| Error::ScaleDomain(format!("draw {b}: {e}")))?;
            }
        }
        for &i in &model_specs {
            acc[i] /= b_total as f64;
        }
    }
    Ok(acc)
}

/// The K x B matrix of estimand evaluations, materialized. Uses the same
/// resampling (including single-arm redraws) as [`calibrated_variance`].
#[derive(Debug, Clone)]
pub struct GMatrix {
    values: Vec<f64>,
    n_resamples: usize,
    n_draws: usize,
}

impl GMatrix {
    pub fn compute(
        dataset: &TrialDataset,
        draws: &PosteriorDraws,
        spec: &EstimandSpec,
        plan: &BootstrapPlan,
    ) -> Result<Self> {
        spec.validate()?;
        plan.validate()?;
        let summaries = cluster_summaries(dataset);
        let pi = dataset.assignment_probability();
        let q = dataset.n_covariates();
        let enforce_arms = dataset.has_both_arms();
        let b_total = draws.n_draws();
        let mut values = Vec::with_capacity(plan.replicates * b_total);
        for k in 0..plan.replicates {
            let idx = resample_for_k(plan, k, &summaries, enforce_arms)?;
            let resampled: Vec<ClusterSummary> =
                idx.iter().map(|&i| summaries[i].clone()).collect();
            let cols = per_draw_values(&resampled, pi, q, draws, std::slice::from_ref(spec))?;
            values.extend_from_slice(&cols[0]);
        }
        Ok(Self {
            values,
            n_resamples: plan.replicates,
            n_draws: b_total,
        })
    }

    pub fn n_resamples(&self) -> usize {
        self.n_resamples
    }

    pub fn n_draws(&self) -> usize {
        self.n_draws
    }

    pub fn value(&self, k: usize, b: usize) -> f64 {
        self.values[k * self.n_draws + b]
    }

    /// (1/B) G 1: the per-resample posterior means.
    pub fn row_means(&self) -> Vec<f64> {
        (0..self.n_resamples)
            .map(|k| {
                let row = &self.values[k * self.n_draws..(k + 1) * self.n_draws];
                row.iter().sum::<f64>() / self.n_draws as f64
            })
            .collect()
    }
}

/// Empirical two-sided posterior-quantile interval from per-draw values.
/// Degenerate constant sequences yield a zero-width interval.
pub fn uncalibrated_interval(per_draw: &[f64], level: f64) -> Result<(f64, f64)> {
    if per_draw.len() < 20 {
        return Err(Error::InsufficientDraws(format!(
            "quantile interval needs at least 20 draws, got {}",
            per_draw.len()
        )));
    }
    empirical_interval(per_draw, level)
}

/// A complete interval-estimation report for one spec.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EstimateReport {
    pub spec: EstimandSpec,
    /// Posterior-averaged point estimate.
    pub point: f64,
    pub uncalibrated: (f64, f64),
    /// Set when the per-draw sequence is degenerate and the quantile
    /// interval has exactly zero width.
    pub zero_width_uncalibrated: bool,
    /// Cluster-bootstrap variability of the posterior-mean functional.
    pub data_var: f64,
    /// Posterior variance of the per-draw estimand values.
    pub param_var: f64,
    /// data_var + param_var.
    pub total_var: f64,
    pub calibrated: (f64, f64),
    pub level: f64,
    /// Geweke z per monitored chain quantity; absent when the chain is too
    /// short for the windows.
    pub diagnostics: Vec<(String, f64)>,
}

impl EstimateReport {
    /// Aligned human-readable block.
    pub fn text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("{}\n", self.spec.label()));
        s.push_str(&format!("  point estimate          {:>12.6}\n", self.point));
        s.push_str(&format!(
            "  uncalibrated {:.0}% CI     ({:.6}, {:.6}){}\n",
            self.level * 100.0,
            self.uncalibrated.0,
            self.uncalibrated.1,
            if self.zero_width_uncalibrated {
                "  [zero width]"
            } else {
                ""
            }
        ));
        s.push_str(&format!(
            "  calibrated {:.0}% CI       ({:.6}, {:.6})\n",
            self.level * 100.0,
            self.calibrated.0,
            self.calibrated.1
        ));
        s.push_str(&format!(
            "  variance                data {:.6e} + parameter {:.6e} = {:.6e}\n",
            self.data_var, self.param_var, self.total_var
        ));
        if !self.diagnostics.is_empty() {
            let parts: Vec<String> = self
                .diagnostics
                .iter()
                .map(|(name, z)| format!("{name} {z:.2}"))
                .collect();
            s.push_str(&format!("  geweke z                {}\n", parts.join(", ")));
        }
        s
    }

    /// Flat machine-readable dump.
    pub fn to_json(&self) -> serde_json::Value {
        let mut diagnostics = serde_json::Map::new();
        for (name, z) in &self.diagnostics {
            diagnostics.insert(name.clone(), json!(z));
        }
        json!({
            "estimator": self.spec.estimator.label(),
            "unit": self.spec.unit.label(),
            "scale": self.spec.scale.label(),
            "adjusted": self.spec.adjusted,
            "level": self.level,
            "point": self.point,
            "uncalibrated_ci_low": self.uncalibrated.0,
            "uncalibrated_ci_high": self.uncalibrated.1,
            "zero_width_uncalibrated": self.zero_width_uncalibrated,
            "calibrated_ci_low": self.calibrated.0,
            "calibrated_ci_high": self.calibrated.1,
            "data_var": self.data_var,
            "param_var": self.param_var,
            "total_var": self.total_var,
            "geweke_z": serde_json::Value::Object(diagnostics),
        })
    }
}

/// Full calibrated-variance procedure for one spec: point estimate,
/// posterior-quantile interval, bootstrap data variance, parameter variance,
/// and the normal-approximation calibrated interval.
pub fn calibrated_variance(
    dataset: &TrialDataset,
    draws: &PosteriorDraws,
    spec: &EstimandSpec,
    plan: &BootstrapPlan,
    level: f64,
) -> Result<EstimateReport> {
    let summaries = cluster_summaries(dataset);
    let pi = dataset.assignment_probability();
    let q = dataset.n_covariates();
    let per_draw = per_draw_values(&summaries, pi, q, draws, std::slice::from_ref(spec))?
        .pop()
        .expect("one spec");
    let row_means = bootstrap_row_means(
        &summaries,
        pi,
        q,
        draws,
        std::slice::from_ref(spec),
        plan,
        true,
    )?
    .pop()
    .expect("one spec");
    assemble_report(spec, &per_draw, &row_means, draws, level)
}

/// Build the report from precomputed per-draw values and bootstrap row
/// means; shared by `calibrated_variance` and the simulation pipeline.
pub(crate) fn assemble_report(
    spec: &EstimandSpec,
    per_draw: &[f64],
    row_means: &[f64],
    draws: &PosteriorDraws,
    level: f64,
) -> Result<EstimateReport> {
    let point = mean(per_draw);
    let uncalibrated = uncalibrated_interval(per_draw, level)?;
    let param_var = sample_variance(per_draw);
    let data_var = sample_variance(row_means);
    let total_var = data_var + param_var;
    let z = normal_quantile(1.0 - (1.0 - level) / 2.0);
    let half = z * total_var.sqrt();

    let mut diagnostics = Vec::new();
    for (name, series) in [
        ("delta", per_draw),
        ("sigma_phi2", draws.sigma_phi2()),
        ("sigma_eps2", draws.sigma_eps2()),
    ] {
        if let Ok(score) = geweke_z_default(series) {
            diagnostics.push((name.to_string(), score));
        }
    }

    Ok(EstimateReport {
        spec: *spec,
        point,
        uncalibrated,
        zero_width_uncalibrated: uncalibrated.0 == uncalibrated.1,
        data_var,
        param_var,
        total_var,
        calibrated: (point - half, point + half),
        level,
        diagnostics,
    })
}
