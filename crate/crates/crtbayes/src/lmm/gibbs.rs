//! Conjugate Gibbs sampler for the random-intercept linear mixed model
//!
//! ```text
//! Y_ij = H_ij' beta + phi_i + eps_ij,   phi_i ~ N(0, sigma_phi^2),
//!                                       eps_ij ~ N(0, sigma_eps^2)
//! ```
//!
//! with priors beta ~ N(0, L0) where L0 = beta_scale * I,
//! sigma_eps^2 ~ IG(a, b), sigma_phi^2 ~ IG(alpha, c). The four full
//! conditionals are sampled in the fixed order beta -> phi -> sigma_phi^2 ->
//! sigma_eps^2:
//!
//! ```text
//! beta  | . ~ N( Lam^-1 H'(Y - Z phi) / se2, Lam^-1 ),  Lam = H'H/se2 + L0^-1
//! phi_i | . ~ N( sp2 * sum_{k in i}(Y_k - H_k' beta) / (se2 + sp2 N_i),
//!               sp2 se2 / (se2 + sp2 N_i) )
//! sp2   | . ~ IG(alpha + M/2, c + phi'phi / 2)
//! se2   | . ~ IG(a + N/2,    b + ||Y - H beta - Z phi||^2 / 2)
//! ```
//!
//! Identical inputs (including the chain seed) give bitwise-identical draws.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use super::design::LmmDesign;
use crate::error::{Error, Result};
use crate::stats::{empirical_interval, mean};

/// Numerical floor for variance draws; hits are logged.
const VARIANCE_FLOOR: f64 = 1e-12;

/// Weakly-informative conjugate prior settings.
#[derive(Debug, Clone)]
pub struct PriorConfig {
    /// Scale of the N(0, beta_scale * I) prior on the fixed effects.
    pub beta_scale: f64,
    /// Shape a of the IG(a, b) prior on sigma_eps^2.
    pub eps_shape: f64,
    /// Rate b of the IG(a, b) prior on sigma_eps^2.
    pub eps_rate: f64,
    /// Shape alpha of the IG(alpha, c) prior on sigma_phi^2.
    pub phi_shape: f64,
    /// Rate c of the IG(alpha, c) prior on sigma_phi^2.
    pub phi_rate: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            beta_scale: 100.0,
            eps_shape: 0.001,
            eps_rate: 0.001,
            phi_shape: 0.001,
            phi_rate: 0.001,
        }
    }
}

impl PriorConfig {
    fn validate(&self) -> Result<()> {
        let all = [
            self.beta_scale,
            self.eps_shape,
            self.eps_rate,
            self.phi_shape,
            self.phi_rate,
        ];
        if all.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::Config(
                "all prior parameters must be strictly positive and finite".into(),
            ));
        }
        Ok(())
    }
}

/// Chain length controls.
#[derive(Debug, Clone, Copy)]
pub struct ChainConfig {
    pub total_iters: usize,
    pub burn_in: usize,
    pub seed: u64,
}

/// Current parameter state of the chain.
#[derive(Debug, Clone)]
pub struct GibbsState {
    pub beta: DVector<f64>,
    pub phi: DVector<f64>,
    pub sigma_phi2: f64,
    pub sigma_eps2: f64,
}

impl GibbsState {
    /// beta = 0, phi = 0, sigma_phi^2 = sigma_eps^2 = 1: inside the prior's
    /// high-mass region, so the first sweep is well conditioned.
    pub fn initial(n_coef: usize, n_clusters: usize) -> Self {
        Self {
            beta: DVector::zeros(n_coef),
            phi: DVector::zeros(n_clusters),
            sigma_phi2: 1.0,
            sigma_eps2: 1.0,
        }
    }
}

/// Precomputed quantities for one (design, outcome, prior) triple, exposing
/// single-block redraws so each full conditional can be verified in
/// isolation.
#[derive(Debug)]
pub struct GibbsEngine<'a> {
    design: &'a LmmDesign,
    y: &'a DVector<f64>,
    priors: PriorConfig,
    hth: DMatrix<f64>,
}

impl<'a> GibbsEngine<'a> {
    pub fn new(design: &'a LmmDesign, y: &'a DVector<f64>, priors: PriorConfig) -> Result<Self> {
        priors.validate()?;
        if design.n_rows() != y.len() {
            return Err(Error::Config(format!(
                "design has {} rows but the outcome vector has {}",
                design.n_rows(),
                y.len()
            )));
        }
        let hth = design.matrix().tr_mul(design.matrix());
        Ok(Self {
            design,
            y,
            priors,
            hth,
        })
    }

    fn beta_precision_rhs(&self, state: &GibbsState) -> (DMatrix<f64>, DVector<f64>) {
        let p = self.design.n_coef();
        let mut precision = &self.hth / state.sigma_eps2;
        for d in 0..p {
            precision[(d, d)] += 1.0 / self.priors.beta_scale;
        }
        // H'(Y - Z phi) / se2
        let mut adj = self.y.clone();
        for (row, &ci) in self.design.cluster_index().iter().enumerate() {
            adj[row] -= state.phi[ci];
        }
        let rhs = self.design.matrix().tr_mul(&adj) / state.sigma_eps2;
        (precision, rhs)
    }

    /// Conditional mean and covariance of the beta block at `state`.
    pub fn beta_conditional_params(
        &self,
        state: &GibbsState,
    ) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let (precision, rhs) = self.beta_precision_rhs(state);
        let chol = nalgebra::linalg::Cholesky::new(precision).ok_or_else(|| {
            Error::LinearAlgebra("beta-block precision matrix is not positive definite".into())
        })?;
        let mean = chol.solve(&rhs);
        let cov = chol.inverse();
        Ok((mean, cov))
    }

    /// Draw beta from its full conditional.
    pub fn redraw_beta<R: Rng>(&self, state: &GibbsState, rng: &mut R) -> Result<DVector<f64>> {
        let (precision, rhs) = self.beta_precision_rhs(state);
        let chol = nalgebra::linalg::Cholesky::new(precision).ok_or_else(|| {
            Error::LinearAlgebra("beta-block precision matrix is not positive definite".into())
        })?;
        let mean = chol.solve(&rhs);
        let z = DVector::from_fn(self.design.n_coef(), |_, _| rng.sample(StandardNormal));
        // beta = mean + L^-T z has covariance (L L')^-1
        let l_t = chol.l().transpose();
        let noise = l_t
            .solve_upper_triangular(&z)
            .ok_or_else(|| Error::LinearAlgebra("beta-block Cholesky factor is singular".into()))?;
        Ok(mean + noise)
    }

    /// Conditional mean and variance of phi_i at `state`.
    pub fn phi_conditional_params(&self, state: &GibbsState, cluster: usize) -> (f64, f64) {
        let resid = self.y - self.design.matrix() * &state.beta;
        self.phi_params_from_resid(&resid, state, cluster)
    }

    fn phi_params_from_resid(
        &self,
        resid: &DVector<f64>,
        state: &GibbsState,
        cluster: usize,
    ) -> (f64, f64) {
        let (start, end) = self.design.cluster_ranges()[cluster];
        let sum: f64 = resid.as_slice()[start..end].iter().sum();
        let n_i = (end - start) as f64;
        let denom = state.sigma_eps2 + state.sigma_phi2 * n_i;
        let mean = state.sigma_phi2 * sum / denom;
        let var = state.sigma_phi2 * state.sigma_eps2 / denom;
        (mean, var)
    }

    /// Draw the whole phi vector from its full conditionals (each phi_i is
    /// conditionally independent given beta and the variances).
    pub fn redraw_phi<R: Rng>(&self, state: &GibbsState, rng: &mut R) -> DVector<f64> {
        let resid = self.y - self.design.matrix() * &state.beta;
        let m = self.design.n_clusters();
        DVector::from_fn(m, |i, _| {
            let (mean, var) = self.phi_params_from_resid(&resid, state, i);
            mean + var.sqrt() * rng.sample::<f64, _>(StandardNormal)
        })
    }

    /// (shape, rate) of the inverse-gamma conditional for sigma_phi^2.
    pub fn sigma_phi2_conditional_params(&self, state: &GibbsState) -> (f64, f64) {
        let m = self.design.n_clusters() as f64;
        (
            self.priors.phi_shape + m / 2.0,
            self.priors.phi_rate + 0.5 * state.phi.dot(&state.phi),
        )
    }

    pub fn redraw_sigma_phi2<R: Rng>(&self, state: &GibbsState, rng: &mut R) -> f64 {
        let (shape, rate) = self.sigma_phi2_conditional_params(state);
        floor_variance(draw_inverse_gamma(shape, rate, rng), "sigma_phi2")
    }

    /// (shape, rate) of the inverse-gamma conditional for sigma_eps^2.
    pub fn sigma_eps2_conditional_params(&self, state: &GibbsState) -> (f64, f64) {
        let mut resid = self.y - self.design.matrix() * &state.beta;
        for (row, &ci) in self.design.cluster_index().iter().enumerate() {
            resid[row] -= state.phi[ci];
        }
        let n = self.design.n_rows() as f64;
        (
            self.priors.eps_shape + n / 2.0,
            self.priors.eps_rate + 0.5 * resid.dot(&resid),
        )
    }

    pub fn redraw_sigma_eps2<R: Rng>(&self, state: &GibbsState, rng: &mut R) -> f64 {
        let (shape, rate) = self.sigma_eps2_conditional_params(state);
        floor_variance(draw_inverse_gamma(shape, rate, rng), "sigma_eps2")
    }

    /// One full sweep in the fixed order beta -> phi -> sigma_phi^2 ->
    /// sigma_eps^2.
    pub fn sweep<R: Rng>(&self, state: &mut GibbsState, rng: &mut R) -> Result<()> {
        state.beta = self.redraw_beta(state, rng)?;
        state.phi = self.redraw_phi(state, rng);
        state.sigma_phi2 = self.redraw_sigma_phi2(state, rng);
        state.sigma_eps2 = self.redraw_sigma_eps2(state, rng);
        Ok(())
    }
}

fn draw_inverse_gamma<R: Rng>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    // If X ~ Gamma(shape, scale = 1/rate) then 1/X ~ InverseGamma(shape, rate).
    let g = Gamma::new(shape, 1.0 / rate)
        .expect("inverse-gamma parameters are positive")
        .sample(rng);
    1.0 / g
}

fn floor_variance(draw: f64, name: &str) -> f64 {
    if draw < VARIANCE_FLOOR {
        log::warn!("{name} draw {draw:e} fell below {VARIANCE_FLOOR:e}; clamped");
        VARIANCE_FLOOR
    } else {
        draw
    }
}

/// Stored posterior draws from one chain, post burn-in.
#[derive(Debug, Clone)]
pub struct PosteriorDraws {
    n_draws: usize,
    n_coef: usize,
    n_clusters: usize,
    burn_in: usize,
    beta: Vec<f64>,
    phi: Vec<f64>,
    sigma_phi2: Vec<f64>,
    sigma_eps2: Vec<f64>,
}

impl PosteriorDraws {
    /// Stored draw count B.
    pub fn n_draws(&self) -> usize {
        self.n_draws
    }

    /// Fixed-effect dimension p.
    pub fn n_coef(&self) -> usize {
        self.n_coef
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    pub fn burn_in(&self) -> usize {
        self.burn_in
    }

    /// Fixed-effect draw b as a slice of length p.
    pub fn beta_draw(&self, b: usize) -> &[f64] {
        &self.beta[b * self.n_coef..(b + 1) * self.n_coef]
    }

    /// Random-effect draw b as a slice of length M.
    pub fn phi_draw(&self, b: usize) -> &[f64] {
        &self.phi[b * self.n_clusters..(b + 1) * self.n_clusters]
    }

    pub fn sigma_phi2(&self) -> &[f64] {
        &self.sigma_phi2
    }

    pub fn sigma_eps2(&self) -> &[f64] {
        &self.sigma_eps2
    }

    /// Posterior mean of the fixed effects.
    pub fn beta_mean(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.n_coef];
        for b in 0..self.n_draws {
            for (a, v) in acc.iter_mut().zip(self.beta_draw(b)) {
                *a += v;
            }
        }
        for a in &mut acc {
            *a /= self.n_draws as f64;
        }
        acc
    }

    /// Per-draw intracluster correlation sigma_phi^2 / (sigma_phi^2 + sigma_eps^2).
    pub fn icc_draws(&self) -> Vec<f64> {
        self.sigma_phi2
            .iter()
            .zip(&self.sigma_eps2)
            .map(|(&sp, &se)| sp / (sp + se))
            .collect()
    }

    pub fn icc_summary(&self) -> IccSummary {
        let draws = self.icc_draws();
        let (lower, upper) = empirical_interval(&draws, 0.95).expect("valid level");
        IccSummary {
            mean: mean(&draws),
            lower,
            upper,
            draws,
        }
    }

    /// Dump one row per stored iteration: beta1..betap, sigma_phi2, sigma_eps2.
    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header: Vec<String> = (1..=self.n_coef).map(|j| format!("beta{j}")).collect();
        header.push("sigma_phi2".into());
        header.push("sigma_eps2".into());
        w.write_record(&header)?;
        for b in 0..self.n_draws {
            let mut rec: Vec<String> = self.beta_draw(b).iter().map(|v| format!("{v}")).collect();
            rec.push(format!("{}", self.sigma_phi2[b]));
            rec.push(format!("{}", self.sigma_eps2[b]));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Posterior ICC summary: per-draw values with mean and 95% quantiles.
#[derive(Debug, Clone)]
pub struct IccSummary {
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
    pub draws: Vec<f64>,
}

/// Run one Gibbs chain and store the post-burn-in states.
pub fn gibbs_run(
    design: &LmmDesign,
    y: &DVector<f64>,
    priors: &PriorConfig,
    chain: &ChainConfig,
) -> Result<PosteriorDraws> {
    if chain.total_iters <= chain.burn_in {
        return Err(Error::Config(format!(
            "total iterations ({}) must exceed burn-in ({})",
            chain.total_iters, chain.burn_in
        )));
    }
    let engine = GibbsEngine::new(design, y, priors.clone())?;
    let p = design.n_coef();
    let m = design.n_clusters();
    let stored = chain.total_iters - chain.burn_in;

    let mut rng = ChaCha12Rng::seed_from_u64(chain.seed);
    let mut state = GibbsState::initial(p, m);
    let mut draws = PosteriorDraws {
        n_draws: stored,
        n_coef: p,
        n_clusters: m,
        burn_in: chain.burn_in,
        beta: Vec::with_capacity(stored * p),
        phi: Vec::with_capacity(stored * m),
        sigma_phi2: Vec::with_capacity(stored),
        sigma_eps2: Vec::with_capacity(stored),
    };

    for iter in 0..chain.total_iters {
        engine.sweep(&mut state, &mut rng).map_err(|e| match e {
            Error::LinearAlgebra(msg) => Error::LinearAlgebra(format!("sweep {iter}: {msg}")),
            other => other,
        })?;
        if iter >= chain.burn_in {
            draws.beta.extend_from_slice(state.beta.as_slice());
            draws.phi.extend_from_slice(state.phi.as_slice());
            draws.sigma_phi2.push(state.sigma_phi2);
            draws.sigma_eps2.push(state.sigma_eps2);
        }
    }
    Ok(draws)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lmm::design::{build_design, outcome_vector};
    use crate::trial::{ClusterRecord, TrialDataset};

    fn single_obs_dataset() -> TrialDataset {
        TrialDataset::new(
            vec![ClusterRecord {
                id: "only".into(),
                treatment: 1,
                covariates: vec![vec![]],
                outcomes: vec![2.0],
            }],
            0.5,
            vec![],
        )
        .unwrap()
    }

    /// M=1, N=1 closed forms, derived by hand from the printed conditionals.
    #[test]
    fn single_observation_conditionals_match_hand_computation() {
        let d = single_obs_dataset();
        let design = build_design(&d, false).unwrap();
        let y = outcome_vector(&d);
        let engine = GibbsEngine::new(&design, &y, PriorConfig::default()).unwrap();

        let state = GibbsState {
            beta: DVector::from_vec(vec![0.0, 0.0]),
            phi: DVector::from_vec(vec![0.3]),
            sigma_phi2: 0.5,
            sigma_eps2: 2.0,
        };

        // beta block: H = [1 1], Lam = H'H/2 + I/100 = [[.51,.5],[.5,.51]],
        // rhs = H'(y - phi)/2 = [.85, .85]; mean = Lam^-1 rhs.
        let det = 0.51 * 0.51 - 0.25;
        let expect_mean = (0.51 * 0.85 - 0.5 * 0.85) / det;
        let expect_var = 0.51 / det;
        let expect_cov = -0.5 / det;
        let (mean, cov) = engine.beta_conditional_params(&state).unwrap();
        assert!((mean[0] - expect_mean).abs() < 1e-12);
        assert!((mean[1] - expect_mean).abs() < 1e-12);
        assert!((cov[(0, 0)] - expect_var).abs() < 1e-9);
        assert!((cov[(0, 1)] - expect_cov).abs() < 1e-9);

        // phi block with beta fixed at (0.5, 0.25): residual = 2 - 0.75 = 1.25,
        // mean = sp2 * 1.25 / (se2 + sp2), var = sp2*se2 / (se2 + sp2).
        let state2 = GibbsState {
            beta: DVector::from_vec(vec![0.5, 0.25]),
            ..state.clone()
        };
        let (pm, pv) = engine.phi_conditional_params(&state2, 0);
        assert!((pm - 0.5 * 1.25 / 2.5).abs() < 1e-12);
        assert!((pv - 0.5 * 2.0 / 2.5).abs() < 1e-12);

        // variance blocks at state2: phi'phi = 0.09, residual after phi:
        // 1.25 - 0.3 = 0.95.
        let (shape_p, rate_p) = engine.sigma_phi2_conditional_params(&state2);
        assert!((shape_p - (0.001 + 0.5)).abs() < 1e-12);
        assert!((rate_p - (0.001 + 0.045)).abs() < 1e-12);
        let (shape_e, rate_e) = engine.sigma_eps2_conditional_params(&state2);
        assert!((shape_e - (0.001 + 0.5)).abs() < 1e-12);
        assert!((rate_e - (0.001 + 0.5 * 0.95 * 0.95)).abs() < 1e-12);
    }

    fn two_arm_dataset(m_per_arm: usize, n_each: usize, effect: f64) -> TrialDataset {
        // deterministic outcomes with a pure arm shift
        let mut clusters = Vec::new();
        for i in 0..2 * m_per_arm {
            let treatment = u8::from(i < m_per_arm);
            let base = 0.1 * i as f64;
            let outcomes: Vec<f64> = (0..n_each)
                .map(|j| base + 0.05 * j as f64 + effect * f64::from(treatment))
                .collect();
            clusters.push(ClusterRecord {
                id: format!("c{i}"),
                treatment,
                covariates: vec![vec![]; n_each],
                outcomes,
            });
        }
        TrialDataset::new(clusters, 0.5, vec![]).unwrap()
    }

    #[test]
    fn same_seed_same_chain_different_seed_same_posterior() {
        let d = two_arm_dataset(5, 6, 1.0);
        let design = build_design(&d, false).unwrap();
        let y = outcome_vector(&d);
        let chain = ChainConfig {
            total_iters: 400,
            burn_in: 100,
            seed: 11,
        };
        let a = gibbs_run(&design, &y, &PriorConfig::default(), &chain).unwrap();
        let b = gibbs_run(&design, &y, &PriorConfig::default(), &chain).unwrap();
        assert_eq!(a.beta, b.beta);
        assert_eq!(a.sigma_eps2, b.sigma_eps2);

        let c = gibbs_run(
            &design,
            &y,
            &PriorConfig::default(),
            &ChainConfig {
                seed: 12,
                total_iters: 4000,
                burn_in: 1000,
            },
        )
        .unwrap();
        let d2 = gibbs_run(
            &design,
            &y,
            &PriorConfig::default(),
            &ChainConfig {
                seed: 13,
                total_iters: 4000,
                burn_in: 1000,
            },
        )
        .unwrap();
        let m1 = mean(
            &(0..c.n_draws())
                .map(|b| c.beta_draw(b)[1])
                .collect::<Vec<_>>(),
        );
        let m2 = mean(
            &(0..d2.n_draws())
                .map(|b| d2.beta_draw(b)[1])
                .collect::<Vec<_>>(),
        );
        assert!((m1 - m2).abs() < 0.05, "{m1} vs {m2}");
    }

    #[test]
    fn null_outcomes_shrink_everything() {
        let mut d = two_arm_dataset(4, 5, 0.0);
        // all-zero outcomes
        let clusters: Vec<ClusterRecord> = d
            .clusters()
            .iter()
            .map(|c| ClusterRecord {
                outcomes: vec![0.0; c.size()],
                ..c.clone()
            })
            .collect();
        d = TrialDataset::new(clusters, 0.5, vec![]).unwrap();
        let design = build_design(&d, false).unwrap();
        let y = outcome_vector(&d);
        let chain = ChainConfig {
            total_iters: 3000,
            burn_in: 1000,
            seed: 5,
        };
        let draws = gibbs_run(&design, &y, &PriorConfig::default(), &chain).unwrap();
        let b1 = mean(
            &(0..draws.n_draws())
                .map(|b| draws.beta_draw(b)[1])
                .collect::<Vec<_>>(),
        );
        assert!(b1.abs() < 0.05, "beta1 posterior mean {b1}");
        let se2 = mean(draws.sigma_eps2());
        assert!(se2 < 0.01, "sigma_eps2 posterior mean {se2}");
        assert!(draws.sigma_phi2().iter().all(|&v| v > 0.0));
        assert!(draws.icc_draws().iter().all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn unadjusted_beta1_matches_gls_oracle_on_balanced_data() {
        // Equal cluster sizes: GLS reduces to the difference in arm-level
        // grand means, which is the oracle here.
        let d = two_arm_dataset(10, 8, 1.5);
        let mut treated_sum = 0.0;
        let mut treated_n = 0.0;
        let mut control_sum = 0.0;
        let mut control_n = 0.0;
        for c in d.clusters() {
            let s: f64 = c.outcomes.iter().sum();
            if c.treatment == 1 {
                treated_sum += s;
                treated_n += c.size() as f64;
            } else {
                control_sum += s;
                control_n += c.size() as f64;
            }
        }
        let oracle = treated_sum / treated_n - control_sum / control_n;

        let design = build_design(&d, false).unwrap();
        let y = outcome_vector(&d);
        let chain = ChainConfig {
            total_iters: 6000,
            burn_in: 1000,
            seed: 21,
        };
        let draws = gibbs_run(&design, &y, &PriorConfig::default(), &chain).unwrap();
        let b1 = mean(
            &(0..draws.n_draws())
                .map(|b| draws.beta_draw(b)[1])
                .collect::<Vec<_>>(),
        );
        assert!(
            (b1 - oracle).abs() < 0.08,
            "posterior mean {b1} vs GLS oracle {oracle}"
        );
    }

    #[test]
    fn rejects_nonpositive_priors() {
        let d = single_obs_dataset();
        let design = build_design(&d, false).unwrap();
        let y = outcome_vector(&d);
        let bad = PriorConfig {
            eps_rate: 0.0,
            ..PriorConfig::default()
        };
        let err = GibbsEngine::new(&design, &y, bad).unwrap_err();
        assert_eq!(err.category(), "config");
    }

    #[test]
    fn rejects_degenerate_chain_config() {
        let d = single_obs_dataset();
        let design = build_design(&d, false).unwrap();
        let y = outcome_vector(&d);
        let err = gibbs_run(
            &design,
            &y,
            &PriorConfig::default(),
            &ChainConfig {
                total_iters: 100,
                burn_in: 100,
                seed: 0,
            },
        )
        .unwrap_err();
        assert_eq!(err.category(), "config");
    }

    #[test]
    fn draw_dump_round_trips() {
        let d = two_arm_dataset(3, 4, 0.5);
        let design = build_design(&d, false).unwrap();
        let y = outcome_vector(&d);
        let draws = gibbs_run(
            &design,
            &y,
            &PriorConfig::default(),
            &ChainConfig {
                total_iters: 50,
                burn_in: 10,
                seed: 3,
            },
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("draws.csv");
        draws.write_csv(&path).unwrap();
        let mut rdr = csv::Reader::from_path(&path).unwrap();
        assert_eq!(
            rdr.headers().unwrap().iter().collect::<Vec<_>>(),
            vec!["beta1", "beta2", "sigma_phi2", "sigma_eps2"]
        );
        assert_eq!(rdr.records().count(), 40);
    }
}
