//! Fixed-effect design matrix for the working linear mixed model.
//!
//! The adjusted model regresses Y_ij on
//! [1, A_i, X_ij, N_i, A_i*X_ij, A_i*N_i], giving p = 2q + 4 columns; the
//! unadjusted model keeps only [1, A_i]. Rows are laid out cluster by
//! cluster in dataset order, and cluster membership is carried as a row ->
//! cluster index vector (the Z matrix is never materialized).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::trial::TrialDataset;

#[derive(Debug, Clone)]
pub struct LmmDesign {
    matrix: DMatrix<f64>,
    cluster_index: Vec<usize>,
    /// Contiguous row range per cluster; valid because rows are emitted
    /// cluster by cluster.
    cluster_ranges: Vec<(usize, usize)>,
    sizes: Vec<usize>,
    adjusted: bool,
}

impl LmmDesign {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Row -> cluster index map (the membership structure Z).
    pub fn cluster_index(&self) -> &[usize] {
        &self.cluster_index
    }

    pub fn cluster_ranges(&self) -> &[(usize, usize)] {
        &self.cluster_ranges
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn n_rows(&self) -> usize {
        self.matrix.nrows()
    }

    /// Fixed-effect dimension p.
    pub fn n_coef(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn n_clusters(&self) -> usize {
        self.sizes.len()
    }

    pub fn adjusted(&self) -> bool {
        self.adjusted
    }
}

/// Build the fixed-effect design for `dataset`.
///
/// Column order for the adjusted model: intercept, A, X_1..X_q, N, A*X_1..
/// A*X_q, A*N. The unadjusted model keeps intercept and A only.
pub fn build_design(dataset: &TrialDataset, adjusted: bool) -> Result<LmmDesign> {
    let q = dataset.n_covariates();
    if adjusted && q == 0 {
        return Err(Error::Config(
            "adjusted design requested but the dataset has no covariates".into(),
        ));
    }
    let p = if adjusted { 2 * q + 4 } else { 2 };
    let n = dataset.n_individuals();
    let mut matrix = DMatrix::zeros(n, p);
    let mut cluster_index = Vec::with_capacity(n);
    let mut cluster_ranges = Vec::with_capacity(dataset.n_clusters());
    let mut sizes = Vec::with_capacity(dataset.n_clusters());

    let mut row = 0usize;
    for (ci, cluster) in dataset.clusters().iter().enumerate() {
        let start = row;
        let a = f64::from(cluster.treatment);
        let size = cluster.size() as f64;
        for covars in &cluster.covariates {
            matrix[(row, 0)] = 1.0;
            matrix[(row, 1)] = a;
            if adjusted {
                for (j, &x) in covars.iter().enumerate() {
                    matrix[(row, 2 + j)] = x;
                    matrix[(row, 3 + q + j)] = a * x;
                }
                matrix[(row, 2 + q)] = size;
                matrix[(row, 3 + 2 * q)] = a * size;
            }
            cluster_index.push(ci);
            row += 1;
        }
        cluster_ranges.push((start, row));
        sizes.push(cluster.size());
    }
    assert_eq!(matrix.ncols(), if adjusted { 2 * q + 4 } else { 2 });

    Ok(LmmDesign {
        matrix,
        cluster_index,
        cluster_ranges,
        sizes,
        adjusted,
    })
}

/// Outcomes stacked in the same row order as the design.
pub fn outcome_vector(dataset: &TrialDataset) -> DVector<f64> {
    let mut y = Vec::with_capacity(dataset.n_individuals());
    for cluster in dataset.clusters() {
        y.extend_from_slice(&cluster.outcomes);
    }
    DVector::from_vec(y)
}
