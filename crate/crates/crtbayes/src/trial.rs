//! Cluster-randomized trial data: domain types, CSV ingestion, and
//! per-cluster summaries.
//!
//! A [`TrialDataset`] is a sequence of clusters, each holding its treatment
//! indicator A_i, its N_i individual covariate rows X_i, and outcomes Y_i,
//! together with the known assignment probability pi. Datasets are immutable
//! after construction and safe to share across workers.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};

/// One cluster: treatment arm, covariate rows (N_i x q), and outcomes.
///
/// Cluster-level covariates appear replicated on each individual row; the
/// ingestion layer deliberately does not deduplicate them, so the X_i matrix
/// keeps one row per individual.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterRecord {
    pub id: String,
    /// Arm indicator A_i, exactly 0 or 1.
    pub treatment: u8,
    /// N_i rows, each of length q.
    pub covariates: Vec<Vec<f64>>,
    /// Length N_i.
    pub outcomes: Vec<f64>,
}

impl ClusterRecord {
    pub fn size(&self) -> usize {
        self.outcomes.len()
    }
}

/// An immutable cluster-randomized trial dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialDataset {
    clusters: Vec<ClusterRecord>,
    assignment_probability: f64,
    covariate_names: Vec<String>,
}

impl TrialDataset {
    /// Validate and assemble a dataset.
    ///
    /// Checks: at least one cluster, every treatment in {0,1}, per-cluster
    /// row/outcome agreement, a uniform covariate dimension matching
    /// `covariate_names`, finite values, and pi strictly inside (0,1).
    ///
    /// Single-arm datasets are permitted here (cluster-bootstrap resamples
    /// can lose an arm); estimators that need both arms enforce that
    /// precondition themselves.
    pub fn new(
        clusters: Vec<ClusterRecord>,
        assignment_probability: f64,
        covariate_names: Vec<String>,
    ) -> Result<Self> {
        if clusters.is_empty() {
            return Err(Error::Data("dataset has no clusters".into()));
        }
        if !(assignment_probability > 0.0 && assignment_probability < 1.0) {
            return Err(Error::Data(format!(
                "assignment probability must lie strictly inside (0,1), got {assignment_probability}"
            )));
        }
        let q = covariate_names.len();
        for c in &clusters {
            if c.treatment > 1 {
                return Err(Error::Data(format!(
                    "cluster {:?}: treatment must be 0 or 1, got {}",
                    c.id, c.treatment
                )));
            }
            if c.outcomes.is_empty() {
                return Err(Error::Data(format!("cluster {:?} is empty", c.id)));
            }
            if c.covariates.len() != c.outcomes.len() {
                return Err(Error::Data(format!(
                    "cluster {:?}: {} covariate rows but {} outcomes",
                    c.id,
                    c.covariates.len(),
                    c.outcomes.len()
                )));
            }
            for row in &c.covariates {
                if row.len() != q {
                    return Err(Error::Data(format!(
                        "cluster {:?}: covariate row of length {} but {} names",
                        c.id,
                        row.len(),
                        q
                    )));
                }
                if row.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Data(format!(
                        "cluster {:?}: non-finite covariate value",
                        c.id
                    )));
                }
            }
            if c.outcomes.iter().any(|v| !v.is_finite()) {
                return Err(Error::Data(format!(
                    "cluster {:?}: non-finite outcome value",
                    c.id
                )));
            }
        }
        Ok(Self {
            clusters,
            assignment_probability,
            covariate_names,
        })
    }

    pub fn clusters(&self) -> &[ClusterRecord] {
        &self.clusters
    }

    pub fn assignment_probability(&self) -> f64 {
        self.assignment_probability
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    /// Number of clusters M.
    pub fn n_clusters(&self) -> usize {
        self.clusters.len()
    }

    /// Total number of individuals N.
    pub fn n_individuals(&self) -> usize {
        self.clusters.iter().map(ClusterRecord::size).sum()
    }

    /// Covariate dimension q.
    pub fn n_covariates(&self) -> usize {
        self.covariate_names.len()
    }

    /// (control clusters, treated clusters).
    pub fn arm_counts(&self) -> (usize, usize) {
        let treated = self.clusters.iter().filter(|c| c.treatment == 1).count();
        (self.clusters.len() - treated, treated)
    }

    pub fn has_both_arms(&self) -> bool {
        let (c0, c1) = self.arm_counts();
        c0 > 0 && c1 > 0
    }
}

/// Per-cluster sufficient statistics for the estimand engine:
/// (A_i, N_i, Ybar_i, Y_i+, Xbar_i).
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSummary {
    pub treatment: u8,
    pub size: usize,
    /// Within-cluster outcome mean Ybar_i.
    pub ybar: f64,
    /// Within-cluster outcome sum Y_i+.
    pub ysum: f64,
    /// Within-cluster covariate means, length q.
    pub xbar: Vec<f64>,
}

impl ClusterSummary {
    pub fn size_f(&self) -> f64 {
        self.size as f64
    }
}

/// Reduce each cluster to (Ybar_i, Y_i+, N_i, A_i) plus covariate means.
pub fn cluster_summaries(dataset: &TrialDataset) -> Vec<ClusterSummary> {
    let q = dataset.n_covariates();
    dataset
        .clusters()
        .iter()
        .map(|c| {
            let n = c.size() as f64;
            let ysum: f64 = c.outcomes.iter().sum();
            let mut xbar = vec![0.0; q];
            for row in &c.covariates {
                for (acc, v) in xbar.iter_mut().zip(row) {
                    *acc += v;
                }
            }
            for acc in &mut xbar {
                *acc /= n;
            }
            ClusterSummary {
                treatment: c.treatment,
                size: c.size(),
                ybar: ysum / n,
                ysum,
                xbar,
            }
        })
        .collect()
}

/// Column mapping for CSV ingestion. Columns are addressed by header name.
#[derive(Debug, Clone)]
pub struct CsvSchema {
    pub cluster_col: String,
    pub treatment_col: String,
    pub outcome_col: String,
    pub covariate_cols: Vec<String>,
    pub delimiter: u8,
}

impl CsvSchema {
    pub fn new<S: Into<String>>(
        cluster_col: S,
        treatment_col: S,
        outcome_col: S,
        covariate_cols: Vec<String>,
    ) -> Self {
        Self {
            cluster_col: cluster_col.into(),
            treatment_col: treatment_col.into(),
            outcome_col: outcome_col.into(),
            covariate_cols,
            delimiter: b',',
        }
    }

    /// The schema `write_csv` emits: cluster / treatment / outcome plus the
    /// dataset's covariate names.
    pub fn for_written(dataset: &TrialDataset) -> Self {
        Self::new(
            "cluster",
            "treatment",
            "outcome",
            dataset.covariate_names().to_vec(),
        )
    }
}

fn parse_cell(raw: &str, row: usize, column: &str) -> Result<f64> {
    match raw.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse {
            row,
            column: column.to_string(),
            value: raw.to_string(),
        }),
    }
}

/// Load a trial dataset from a delimited UTF-8 file with a header row.
///
/// One `ClusterRecord` per distinct cluster id, in first-appearance order,
/// with row order preserved within each cluster. N_i is inferred as the row
/// count. Missing or non-numeric cells are rejected with the 1-based data
/// row index.
pub fn load_csv(path: &Path, schema: &CsvSchema, pi: f64) -> Result<TrialDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .has_headers(true)
        .from_path(path)?;

    let headers = reader.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(name.to_string()))
    };
    let cluster_idx = col(&schema.cluster_col)?;
    let treat_idx = col(&schema.treatment_col)?;
    let outcome_idx = col(&schema.outcome_col)?;
    let covar_idx: Vec<usize> = schema
        .covariate_cols
        .iter()
        .map(|c| col(c))
        .collect::<Result<_>>()?;

    let mut order: Vec<String> = Vec::new();
    let mut by_id: HashMap<String, ClusterRecord> = HashMap::new();

    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        let id = record.get(cluster_idx).unwrap_or("").to_string();
        if id.is_empty() {
            return Err(Error::Data(format!("row {row}: empty cluster id")));
        }
        let treat_raw = record.get(treat_idx).unwrap_or("");
        let treat_val = parse_cell(treat_raw, row, &schema.treatment_col)?;
        let treatment = if treat_val == 0.0 {
            0u8
        } else if treat_val == 1.0 {
            1u8
        } else {
            return Err(Error::Data(format!(
                "row {row}: treatment must be 0 or 1, got {treat_raw:?}"
            )));
        };
        let outcome = parse_cell(
            record.get(outcome_idx).unwrap_or(""),
            row,
            &schema.outcome_col,
        )?;
        let covars: Vec<f64> = covar_idx
            .iter()
            .zip(&schema.covariate_cols)
            .map(|(&ci, name)| parse_cell(record.get(ci).unwrap_or(""), row, name))
            .collect::<Result<_>>()?;

        match by_id.get_mut(&id) {
            Some(existing) => {
                if existing.treatment != treatment {
                    return Err(Error::Data(format!(
                        "cluster {id:?} carries both treatment values (row {row})"
                    )));
                }
                existing.covariates.push(covars);
                existing.outcomes.push(outcome);
            }
            None => {
                order.push(id.clone());
                by_id.insert(
                    id.clone(),
                    ClusterRecord {
                        id,
                        treatment,
                        covariates: vec![covars],
                        outcomes: vec![outcome],
                    },
                );
            }
        }
    }

    let clusters: Vec<ClusterRecord> = order
        .into_iter()
        .map(|id| by_id.remove(&id).expect("cluster recorded"))
        .collect();
    TrialDataset::new(clusters, pi, schema.covariate_cols.clone())
}

/// Write a dataset as CSV with header `cluster,treatment,outcome,<covariates>`.
///
/// Numeric cells use the shortest representation that round-trips, so a
/// write/load cycle reproduces the values bit for bit.
pub fn write_csv(dataset: &TrialDataset, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec![
        "cluster".to_string(),
        "treatment".to_string(),
        "outcome".to_string(),
    ];
    header.extend(dataset.covariate_names().iter().cloned());
    writer.write_record(&header)?;
    for c in dataset.clusters() {
        for (row, y) in c.covariates.iter().zip(&c.outcomes) {
            let mut rec = vec![c.id.clone(), c.treatment.to_string(), format!("{y}")];
            rec.extend(row.iter().map(|v| format!("{v}")));
            writer.write_record(&rec)?;
        }
    }
    writer.flush()?;
    Ok(())
}
