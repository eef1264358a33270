//! Replication-study metrics: relative bias, Monte Carlo SD, average
//! estimated standard error, empirical coverage, and relative efficiency,
//! plus the results table in the familiar layout (Estimator, Posterior
//! Inference, M, Estimand, Relative Bias (SE), Coverage, MCSD, AESE, RE).

use crate::error::{Error, Result};
use crate::stats::{mean, sample_sd, sample_variance};

/// Which interval a coverage figure refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalKind {
    Uncalibrated,
    Calibrated,
}

impl IntervalKind {
    pub fn label(&self) -> &'static str {
        match self {
            IntervalKind::Uncalibrated => "Uncalibrated",
            IntervalKind::Calibrated => "Calibrated",
        }
    }
}

/// One replicate's estimate summary for one (spec, unit) cell.
#[derive(Debug, Clone)]
pub struct ReplicateResult {
    /// Posterior point estimate of this replicate.
    pub point: f64,
    /// SD over draws of the per-draw estimand values.
    pub posterior_sd: f64,
    /// sqrt of the calibrated total variance, when calibration ran.
    pub calibrated_se: Option<f64>,
    pub uncalibrated_interval: (f64, f64),
    pub calibrated_interval: Option<(f64, f64)>,
}

/// Relative bias (mean point - truth)/truth and its Monte Carlo SE.
pub fn relative_bias(points: &[f64], truth: f64) -> Result<(f64, f64)> {
    if truth == 0.0 {
        return Err(Error::UndefinedMetric(
            "relative bias is undefined for a zero truth; use absolute bias".into(),
        ));
    }
    if points.is_empty() {
        return Err(Error::UndefinedMetric("no replicate points".into()));
    }
    let value = (mean(points) - truth) / truth;
    let se = if points.len() >= 2 {
        sample_sd(points) / (points.len() as f64).sqrt() / truth.abs()
    } else {
        0.0
    };
    Ok((value, se))
}

/// Monte Carlo standard deviation of the replicate point estimates.
pub fn mcsd(points: &[f64]) -> f64 {
    sample_sd(points)
}

/// Posterior SD of one replicate's per-draw estimand values, i.e. the
/// uncalibrated standard error. Undefined for a single draw (B-1
/// denominator).
pub fn posterior_se(per_draw: &[f64]) -> Result<f64> {
    if per_draw.len() < 2 {
        return Err(Error::InsufficientDraws(
            "posterior standard error needs at least 2 draws".into(),
        ));
    }
    Ok(sample_sd(per_draw))
}

/// Average estimated standard error: the mean of per-replicate SEs
/// (posterior SDs for uncalibrated inference, sqrt of the calibrated
/// variance for calibrated inference).
pub fn aese(ses: &[f64]) -> Result<f64> {
    if ses.is_empty() {
        return Err(Error::UndefinedMetric("no standard errors supplied".into()));
    }
    Ok(mean(ses))
}

/// Fraction of intervals containing the truth.
pub fn coverage(intervals: &[(f64, f64)], truth: f64) -> f64 {
    let hits = intervals
        .iter()
        .filter(|(lo, hi)| *lo <= truth && truth <= *hi)
        .count();
    hits as f64 / intervals.len() as f64
}

/// Half-width of the binomial Monte Carlo band around a coverage estimate:
/// 1.96 sqrt(p(1-p)/R).
pub fn coverage_mc_halfwidth(p: f64, replicates: usize) -> f64 {
    1.96 * (p * (1.0 - p) / replicates as f64).sqrt()
}

/// Variance of the nonparametric unadjusted points divided by the variance
/// of the covariate-adjusted points, over the same replicated datasets.
pub fn relative_efficiency(unadjusted_np_points: &[f64], adjusted_points: &[f64]) -> f64 {
    sample_variance(unadjusted_np_points) / sample_variance(adjusted_points)
}

/// One row of the results table.
#[derive(Debug, Clone)]
pub struct MetricRow {
    pub estimator: String,
    pub inference: String,
    pub n_clusters: usize,
    pub estimand: String,
    pub rel_bias: f64,
    pub rel_bias_se: f64,
    /// Empirical coverage with its binomial Monte Carlo half-width,
    /// or None for point-only rows.
    pub coverage: Option<(f64, f64)>,
    pub mcsd: f64,
    pub aese: Option<f64>,
    pub re: Option<f64>,
}

/// The assembled results table for one simulation run.
#[derive(Debug, Clone)]
pub struct MetricTable {
    pub rows: Vec<MetricRow>,
    pub truth_c: f64,
    pub truth_i: f64,
    pub replicates: usize,
    /// Replicates excluded under permissive error handling.
    pub excluded: usize,
}

impl MetricTable {
    /// Aligned text rendering.
    pub fn text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!(
            "replicates: {}   truth cluster-ATE: {:.4}   truth individual-ATE: {:.4}\n",
            self.replicates, self.truth_c, self.truth_i
        ));
        if self.excluded > 0 {
            s.push_str(&format!(
                "excluded replicates (permissive mode): {}\n",
                self.excluded
            ));
        }
        s.push_str(&format!(
            "{:<25} {:<13} {:>4} {:<15} {:>16} {:>15} {:>8} {:>8} {:>8}\n",
            "Estimator",
            "Inference",
            "M",
            "Estimand",
            "Rel.Bias% (SE)",
            "Coverage% (MC)",
            "MCSD",
            "AESE",
            "RE"
        ));
        for r in &self.rows {
            let bias = format!("{:.1} ({:.1})", 100.0 * r.rel_bias, 100.0 * r.rel_bias_se);
            let cover = match r.coverage {
                Some((p, half)) => format!("{:.1} (±{:.1})", 100.0 * p, 100.0 * half),
                None => "--".to_string(),
            };
            let aese = match r.aese {
                Some(v) => format!("{v:.3}"),
                None => "--".into(),
            };
            let re = match r.re {
                Some(v) => format!("{v:.3}"),
                None => "--".into(),
            };
            s.push_str(&format!(
                "{:<25} {:<13} {:>4} {:<15} {:>16} {:>15} {:>8.3} {:>8} {:>8}\n",
                r.estimator, r.inference, r.n_clusters, r.estimand, bias, cover, r.mcsd, aese, re
            ));
        }
        s
    }

    /// CSV rendering with full-precision numeric fields.
    pub fn csv(&self) -> String {
        let mut s = String::from(
            "estimator,inference,m,estimand,rel_bias,rel_bias_se,coverage,coverage_mc_halfwidth,mcsd,aese,re,truth_cluster,truth_individual,replicates,excluded\n",
        );
        for r in &self.rows {
            let (cov, cov_half) = match r.coverage {
                Some((p, h)) => (format!("{p}"), format!("{h}")),
                None => (String::new(), String::new()),
            };
            let aese = r.aese.map(|v| format!("{v}")).unwrap_or_default();
            let re = r.re.map(|v| format!("{v}")).unwrap_or_default();
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.estimator,
                r.inference,
                r.n_clusters,
                r.estimand,
                r.rel_bias,
                r.rel_bias_se,
                cov,
                cov_half,
                r.mcsd,
                aese,
                re,
                self.truth_c,
                self.truth_i,
                self.replicates,
                self.excluded
            ));
        }
        s
    }

    /// Row lookup by (estimator label, inference label, estimand label).
    pub fn find(&self, estimator: &str, inference: &str, estimand: &str) -> Option<&MetricRow> {
        self.rows.iter().find(|r| {
            r.estimator == estimator && r.inference == inference && r.estimand == estimand
        })
    }
}
