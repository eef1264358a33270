//! The three batch pipelines behind the CLI: `simulate` (replicate a
//! scenario and reduce to a metrics table), `analyze` (fit one dataset and
//! emit estimate reports), and `truth` (ground-truth estimands).
//!
//! All randomness flows from one master seed through documented substreams:
//! replicate r draws its dataset from (seed, DATASET, r), its chains from
//! (seed, CHAIN_*, r), and its bootstrap from (seed, BOOTSTRAP, r); the
//! ground truth uses (seed, TRUTH). Replicates are reduced in index order,
//! so outputs are byte-identical across parallelism settings.
//!
//! Replicate-level parallelism is the outermost loop; bootstrap replicates
//! parallelize inside a replicate only when there are fewer replicates than
//! worker threads.

use std::fmt;
use std::path::PathBuf;

use rayon::prelude::*;

use crate::calibration::{assemble_report, bootstrap_row_means, BootstrapPlan, EstimateReport};
use crate::dgp::{
    generate_trial, generate_trial_with_potentials, true_estimands, write_potentials_csv, Scenario,
    ScenarioConfig, TruthEstimate,
};
use crate::error::{Error, Result};
use crate::estimands::{
    nonparametric_from_summaries, per_draw_values, EffectScale, EstimandSpec, EstimandUnit,
    EstimatorKind,
};
use crate::lmm::{
    build_design, gibbs_run, outcome_vector, ChainConfig, PosteriorDraws, PriorConfig,
};
use crate::metrics::{
    aese, coverage, coverage_mc_halfwidth, mcsd, relative_bias, relative_efficiency, IntervalKind,
    MetricRow, MetricTable, ReplicateResult,
};
use crate::rng::derive_seed;
use crate::stats::{mean, normal_quantile, sample_variance};
use crate::trial::{cluster_summaries, load_csv, CsvSchema, TrialDataset};

pub const DEFAULT_LEVEL: f64 = 0.95;

const STAGE_DATASET: u64 = 101;
const STAGE_CHAIN_ADJUSTED: u64 = 102;
const STAGE_CHAIN_UNADJUSTED: u64 = 103;
const STAGE_BOOTSTRAP: u64 = 104;
const STAGE_TRUTH: u64 = 105;

const UNITS: [EstimandUnit; 2] = [EstimandUnit::Cluster, EstimandUnit::Individual];

/// An estimator/adjustment cell; both estimand units are always evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MethodSpec {
    pub estimator: EstimatorKind,
    pub adjusted: bool,
}

impl MethodSpec {
    pub fn label(&self) -> String {
        if self.estimator == EstimatorKind::Nonparametric {
            "nonparametric".to_string()
        } else {
            format!(
                "{} {}",
                if self.adjusted {
                    "adjusted"
                } else {
                    "unadjusted"
                },
                self.estimator.label()
            )
        }
    }

    fn uses_chain(&self) -> bool {
        self.estimator != EstimatorKind::Nonparametric
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.estimator {
            EstimatorKind::Nonparametric => write!(f, "np"),
            EstimatorKind::GComputation => {
                write!(
                    f,
                    "gcomp:{}",
                    if self.adjusted {
                        "adjusted"
                    } else {
                        "unadjusted"
                    }
                )
            }
            EstimatorKind::ModelRobust => {
                write!(
                    f,
                    "mr:{}",
                    if self.adjusted {
                        "adjusted"
                    } else {
                        "unadjusted"
                    }
                )
            }
        }
    }
}

impl std::str::FromStr for MethodSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (est, adj) = match s.split_once(':') {
            Some((e, a)) => (e, Some(a)),
            None => (s, None),
        };
        let estimator = match est {
            "gcomp" | "g-computation" => EstimatorKind::GComputation,
            "mr" | "model-robust" => EstimatorKind::ModelRobust,
            "np" | "nonparametric" => EstimatorKind::Nonparametric,
            other => {
                return Err(Error::Config(format!(
                    "unknown estimator {other:?} (expected gcomp, mr, or np)"
                )))
            }
        };
        let adjusted = match (estimator, adj) {
            (EstimatorKind::Nonparametric, None) => false,
            (EstimatorKind::Nonparametric, Some(_)) => {
                return Err(Error::Config(
                    "the nonparametric estimator takes no adjustment qualifier".into(),
                ))
            }
            (_, Some("adjusted")) => true,
            (_, Some("unadjusted")) => false,
            (_, Some(other)) => {
                return Err(Error::Config(format!(
                    "unknown adjustment {other:?} (expected adjusted or unadjusted)"
                )))
            }
            (_, None) => {
                return Err(Error::Config(format!(
                    "estimator {est:?} needs an adjustment qualifier, e.g. {est}:adjusted"
                )))
            }
        };
        Ok(MethodSpec {
            estimator,
            adjusted,
        })
    }
}

/// The default simulate cells: adjusted and unadjusted g-computation plus
/// adjusted model-robust standardization.
pub fn default_simulate_methods() -> Vec<MethodSpec> {
    vec![
        MethodSpec {
            estimator: EstimatorKind::GComputation,
            adjusted: true,
        },
        MethodSpec {
            estimator: EstimatorKind::GComputation,
            adjusted: false,
        },
        MethodSpec {
            estimator: EstimatorKind::ModelRobust,
            adjusted: true,
        },
    ]
}

/// The four working-model cells analyzed by default: {adjusted, unadjusted}
/// x {g-computation, model-robust}; each report carries both interval types.
pub fn default_analyze_methods() -> Vec<MethodSpec> {
    vec![
        MethodSpec {
            estimator: EstimatorKind::GComputation,
            adjusted: false,
        },
        MethodSpec {
            estimator: EstimatorKind::ModelRobust,
            adjusted: false,
        },
        MethodSpec {
            estimator: EstimatorKind::GComputation,
            adjusted: true,
        },
        MethodSpec {
            estimator: EstimatorKind::ModelRobust,
            adjusted: true,
        },
    ]
}

#[derive(Debug, Clone)]
pub struct SimulateConfig {
    pub scenario: Scenario,
    pub clusters: usize,
    pub replications: usize,
    /// Stored posterior draws per chain (post burn-in).
    pub draws: usize,
    pub burn_in: usize,
    /// Bootstrap resamples K per replicate.
    pub bootstrap: usize,
    pub seed: u64,
    pub pi: f64,
    pub sigma_phi2: f64,
    pub scale: EffectScale,
    pub methods: Vec<MethodSpec>,
    pub n_truth: usize,
    /// Worker threads; 0 keeps the process-wide default pool.
    pub threads: usize,
    /// Exclude-and-count failed replicates instead of aborting.
    pub permissive: bool,
    pub out_dir: Option<PathBuf>,
    /// Also persist every replicate's dataset (and its potential-outcomes
    /// sidecar) under `out_dir/data/`.
    pub dump_data: bool,
}

impl SimulateConfig {
    pub fn new(scenario: Scenario, clusters: usize, replications: usize, seed: u64) -> Self {
        Self {
            scenario,
            clusters,
            replications,
            draws: 1000,
            burn_in: 1000,
            bootstrap: 100,
            seed,
            pi: 0.5,
            sigma_phi2: 0.25,
            scale: EffectScale::Difference,
            methods: default_simulate_methods(),
            n_truth: 100_000,
            threads: 0,
            permissive: false,
            out_dir: None,
            dump_data: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.replications < 2 {
            return Err(Error::Config("need at least 2 replications".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no estimator methods requested".into()));
        }
        if self.draws < 20 {
            return Err(Error::Config(
                "need at least 20 stored draws for interval construction".into(),
            ));
        }
        for m in &self.methods {
            EstimandSpec {
                unit: EstimandUnit::Cluster,
                scale: self.scale,
                estimator: m.estimator,
                adjusted: m.adjusted,
            }
            .validate()?;
        }
        Ok(())
    }
}

#[derive(Debug)]
pub struct SimulateOutput {
    pub table: MetricTable,
    pub truth: TruthEstimate,
    pub written: Vec<PathBuf>,
}

/// Everything one replicate contributes to the metric table.
struct ReplicateOutcome {
    /// Indexed by (method, unit) in method-major order; None for the
    /// nonparametric method whose results live in `np_points`.
    cells: Vec<Option<ReplicateResult>>,
    /// Nonparametric point per unit, the relative-efficiency baseline.
    np_points: [f64; 2],
}

fn with_context(err: Error, context: &str) -> Error {
    match err {
        Error::Config(m) => Error::Config(format!("{context}: {m}")),
        Error::Data(m) => Error::Data(format!("{context}: {m}")),
        Error::ScaleDomain(m) => Error::ScaleDomain(format!("{context}: {m}")),
        Error::LinearAlgebra(m) => Error::LinearAlgebra(format!("{context}: {m}")),
        Error::Calibration(m) => Error::Calibration(format!("{context}: {m}")),
        Error::InsufficientDraws(m) => Error::InsufficientDraws(format!("{context}: {m}")),
        Error::UndefinedMetric(m) => Error::UndefinedMetric(format!("{context}: {m}")),
        other => other,
    }
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    if threads == 0 {
        f()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
            .install(f)
    }
}

fn fit_chain(
    dataset: &TrialDataset,
    adjusted: bool,
    draws: usize,
    burn_in: usize,
    seed: u64,
) -> Result<PosteriorDraws> {
    let design = build_design(dataset, adjusted)?;
    let y = outcome_vector(dataset);
    gibbs_run(
        &design,
        &y,
        &PriorConfig::default(),
        &ChainConfig {
            total_iters: burn_in + draws,
            burn_in,
            seed,
        },
    )
}

/// One replicate: generate, fit the needed chains, evaluate every requested
/// cell with both interval types.
fn run_replicate(cfg: &SimulateConfig, r: usize, inner_parallel: bool) -> Result<ReplicateOutcome> {
    let data_cfg = ScenarioConfig {
        scenario: cfg.scenario,
        n_clusters: cfg.clusters,
        pi: cfg.pi,
        sigma_phi2: cfg.sigma_phi2,
        seed: derive_seed(cfg.seed, &[STAGE_DATASET, r as u64]),
    };
    let dataset = generate_trial(&data_cfg)?;
    let summaries = cluster_summaries(&dataset);
    let q = dataset.n_covariates();
    let pi = dataset.assignment_probability();

    // nonparametric points: the relative-efficiency baseline
    let mut np_points = [0.0f64; 2];
    for (u, unit) in UNITS.iter().enumerate() {
        let spec = EstimandSpec {
            unit: *unit,
            scale: cfg.scale,
            estimator: EstimatorKind::Nonparametric,
            adjusted: false,
        };
        np_points[u] = nonparametric_from_summaries(&summaries, pi, &spec)?.delta;
    }

    let z = normal_quantile(1.0 - (1.0 - DEFAULT_LEVEL) / 2.0);
    let mut cells: Vec<Option<ReplicateResult>> = vec![None; cfg.methods.len() * UNITS.len()];

    for &adjusted in &[true, false] {
        let chain_methods: Vec<usize> = cfg
            .methods
            .iter()
            .enumerate()
            .filter(|(_, m)| m.uses_chain() && m.adjusted == adjusted)
            .map(|(i, _)| i)
            .collect();
        if chain_methods.is_empty() {
            continue;
        }
        let stage = if adjusted {
            STAGE_CHAIN_ADJUSTED
        } else {
            STAGE_CHAIN_UNADJUSTED
        };
        let draws = fit_chain(
            &dataset,
            adjusted,
            cfg.draws,
            cfg.burn_in,
            derive_seed(cfg.seed, &[stage, r as u64]),
        )?;

        // spec list: requested methods x both units, sharing this chain
        let mut specs = Vec::with_capacity(chain_methods.len() * UNITS.len());
        for &mi in &chain_methods {
            for unit in UNITS {
                specs.push(EstimandSpec {
                    unit,
                    scale: cfg.scale,
                    estimator: cfg.methods[mi].estimator,
                    adjusted,
                });
            }
        }
        let per_draw = per_draw_values(&summaries, pi, q, &draws, &specs)?;
        let plan = BootstrapPlan::new(
            cfg.bootstrap,
            derive_seed(cfg.seed, &[STAGE_BOOTSTRAP, r as u64]),
        )?;
        let row_means =
            bootstrap_row_means(&summaries, pi, q, &draws, &specs, &plan, inner_parallel)?;

        for (s, (&mi, unit_idx)) in chain_methods
            .iter()
            .flat_map(|mi| UNITS.iter().enumerate().map(move |(u, _)| (mi, u)))
            .enumerate()
        {
            let col = &per_draw[s];
            let point = mean(col);
            let posterior_sd = crate::metrics::posterior_se(col)?;
            let uncal = crate::calibration::uncalibrated_interval(col, DEFAULT_LEVEL)?;
            let param_var = sample_variance(col);
            let data_var = sample_variance(&row_means[s]);
            let cal_se = (param_var + data_var).sqrt();
            let cal = (point - z * cal_se, point + z * cal_se);
            cells[mi * UNITS.len() + unit_idx] = Some(ReplicateResult {
                point,
                posterior_sd,
                calibrated_se: Some(cal_se),
                uncalibrated_interval: uncal,
                calibrated_interval: Some(cal),
            });
        }
    }

    Ok(ReplicateOutcome { cells, np_points })
}

/// Run the full simulation study and reduce to a metric table.
pub fn run_simulate(cfg: &SimulateConfig) -> Result<SimulateOutput> {
    cfg.validate()?;
    let truth_cfg = ScenarioConfig {
        scenario: cfg.scenario,
        n_clusters: 2,
        pi: cfg.pi,
        sigma_phi2: cfg.sigma_phi2,
        seed: derive_seed(cfg.seed, &[STAGE_TRUTH]),
    };
    let truth = true_estimands(&truth_cfg, cfg.n_truth, cfg.scale)?;

    let outcomes: Vec<(usize, Result<ReplicateOutcome>)> = with_threads(cfg.threads, || {
        let workers = rayon::current_num_threads();
        let outer_parallel = cfg.replications >= workers;
        let inner_parallel = !outer_parallel;
        if outer_parallel {
            (0..cfg.replications)
                .into_par_iter()
                .map(|r| (r, run_replicate(cfg, r, inner_parallel)))
                .collect()
        } else {
            (0..cfg.replications)
                .map(|r| (r, run_replicate(cfg, r, inner_parallel)))
                .collect()
        }
    });

    let mut kept = Vec::with_capacity(cfg.replications);
    let mut excluded = 0usize;
    for (r, outcome) in outcomes {
        match outcome {
            Ok(o) => kept.push(o),
            Err(e) if cfg.permissive => {
                log::warn!("replicate {r} excluded: {e}");
                excluded += 1;
            }
            Err(e) => return Err(with_context(e, &format!("replicate {r}"))),
        }
    }
    if kept.len() < 2 {
        return Err(Error::Calibration(format!(
            "only {} replicates succeeded; need at least 2",
            kept.len()
        )));
    }

    let table = reduce_to_table(cfg, &truth, &kept, excluded)?;
    let mut written = Vec::new();
    if let Some(dir) = &cfg.out_dir {
        std::fs::create_dir_all(dir)?;
        let header = format!(
            "scenario: {}   clusters: {}   replications: {}   draws: {}   burn-in: {}   bootstrap: {}   seed: {}   scale: {}\n",
            cfg.scenario.label(),
            cfg.clusters,
            cfg.replications,
            cfg.draws,
            cfg.burn_in,
            cfg.bootstrap,
            cfg.seed,
            cfg.scale.label()
        );
        let txt = dir.join("metrics.txt");
        std::fs::write(&txt, format!("{header}\n{}", table.text()))?;
        written.push(txt);
        let csv = dir.join("metrics.csv");
        std::fs::write(&csv, table.csv())?;
        written.push(csv);
        if cfg.dump_data {
            // datasets are regenerated from their replicate seeds, so the
            // dump matches what the analysis saw
            let data_dir = dir.join("data");
            std::fs::create_dir_all(&data_dir)?;
            for r in 0..cfg.replications {
                let data_cfg = ScenarioConfig {
                    scenario: cfg.scenario,
                    n_clusters: cfg.clusters,
                    pi: cfg.pi,
                    sigma_phi2: cfg.sigma_phi2,
                    seed: derive_seed(cfg.seed, &[STAGE_DATASET, r as u64]),
                };
                let (dataset, potentials) = generate_trial_with_potentials(&data_cfg)?;
                let data_path = data_dir.join(format!("rep{r:04}.csv"));
                crate::trial::write_csv(&dataset, &data_path)?;
                written.push(data_path);
                let po_path = data_dir.join(format!("rep{r:04}_potentials.csv"));
                write_potentials_csv(&dataset, &potentials, &po_path)?;
                written.push(po_path);
            }
        }
    }
    Ok(SimulateOutput {
        table,
        truth,
        written,
    })
}

fn reduce_to_table(
    cfg: &SimulateConfig,
    truth: &TruthEstimate,
    outcomes: &[ReplicateOutcome],
    excluded: usize,
) -> Result<MetricTable> {
    let replicates = outcomes.len();
    let mut rows = Vec::new();
    let truth_for = |unit: EstimandUnit| match unit {
        EstimandUnit::Cluster => truth.delta_c,
        EstimandUnit::Individual => truth.delta_i,
    };
    let np_points_for =
        |u: usize| -> Vec<f64> { outcomes.iter().map(|o| o.np_points[u]).collect() };

    for (mi, method) in cfg.methods.iter().enumerate() {
        for (u, unit) in UNITS.iter().enumerate() {
            let truth_val = truth_for(*unit);
            if !method.uses_chain() {
                let points = np_points_for(u);
                let (rel, rel_se) = relative_bias(&points, truth_val)?;
                rows.push(MetricRow {
                    estimator: method.label(),
                    inference: "--".into(),
                    n_clusters: cfg.clusters,
                    estimand: unit.label().into(),
                    rel_bias: rel,
                    rel_bias_se: rel_se,
                    coverage: None,
                    mcsd: mcsd(&points),
                    aese: None,
                    re: Some(1.0),
                });
                continue;
            }
            let cells: Vec<&ReplicateResult> = outcomes
                .iter()
                .map(|o| {
                    o.cells[mi * UNITS.len() + u]
                        .as_ref()
                        .expect("chain cell present")
                })
                .collect();
            let points: Vec<f64> = cells.iter().map(|c| c.point).collect();
            let (rel, rel_se) = relative_bias(&points, truth_val)?;
            let spread = mcsd(&points);
            let re = Some(relative_efficiency(&np_points_for(u), &points));

            for kind in [IntervalKind::Uncalibrated, IntervalKind::Calibrated] {
                let (ses, intervals): (Vec<f64>, Vec<(f64, f64)>) = match kind {
                    IntervalKind::Uncalibrated => (
                        cells.iter().map(|c| c.posterior_sd).collect(),
                        cells.iter().map(|c| c.uncalibrated_interval).collect(),
                    ),
                    IntervalKind::Calibrated => (
                        cells.iter().map(|c| c.calibrated_se.expect("se")).collect(),
                        cells
                            .iter()
                            .map(|c| c.calibrated_interval.expect("interval"))
                            .collect(),
                    ),
                };
                let p = coverage(&intervals, truth_val);
                rows.push(MetricRow {
                    estimator: method.label(),
                    inference: kind.label().into(),
                    n_clusters: cfg.clusters,
                    estimand: unit.label().into(),
                    rel_bias: rel,
                    rel_bias_se: rel_se,
                    coverage: Some((p, coverage_mc_halfwidth(p, replicates))),
                    mcsd: spread,
                    aese: Some(aese(&ses)?),
                    re,
                });
            }
        }
    }
    Ok(MetricTable {
        rows,
        truth_c: truth.delta_c,
        truth_i: truth.delta_i,
        replicates,
        excluded,
    })
}

#[derive(Debug, Clone)]
pub struct AnalyzeConfig {
    pub data: PathBuf,
    pub schema: CsvSchema,
    pub pi: f64,
    pub methods: Vec<MethodSpec>,
    pub scale: EffectScale,
    pub draws: usize,
    pub burn_in: usize,
    pub bootstrap: usize,
    pub seed: u64,
    pub level: f64,
    pub threads: usize,
    pub out_dir: Option<PathBuf>,
    /// Also dump the raw chains as CSV (one per fitted model).
    pub dump_draws: bool,
}

impl AnalyzeConfig {
    pub fn new(data: PathBuf, schema: CsvSchema, pi: f64, seed: u64) -> Self {
        Self {
            data,
            schema,
            pi,
            methods: default_analyze_methods(),
            scale: EffectScale::Difference,
            draws: 1000,
            burn_in: 1000,
            bootstrap: 100,
            seed,
            level: DEFAULT_LEVEL,
            threads: 0,
            out_dir: None,
            dump_draws: false,
        }
    }
}

#[derive(Debug)]
pub struct AnalyzeOutput {
    pub reports: Vec<EstimateReport>,
    pub written: Vec<PathBuf>,
}

/// Fit the working models to a CSV dataset and produce one report per
/// requested method and estimand unit, each carrying both interval types.
pub fn run_analyze(cfg: &AnalyzeConfig) -> Result<AnalyzeOutput> {
    if cfg.methods.is_empty() {
        return Err(Error::Config("no estimator methods requested".into()));
    }
    if cfg
        .methods
        .iter()
        .any(|m| m.estimator == EstimatorKind::Nonparametric)
    {
        return Err(Error::Config(
            "analyze reports posterior intervals; the draw-free nonparametric estimator is simulate-only".into(),
        ));
    }
    if cfg.draws < 20 {
        return Err(Error::Config(
            "need at least 20 stored draws for interval construction".into(),
        ));
    }
    let dataset = load_csv(&cfg.data, &cfg.schema, cfg.pi)?;
    if !dataset.has_both_arms() {
        return Err(Error::Data(
            "analysis requires at least one cluster in each arm".into(),
        ));
    }
    let summaries = cluster_summaries(&dataset);
    let q = dataset.n_covariates();
    let pi = dataset.assignment_probability();

    let mut written = Vec::new();
    if let Some(dir) = &cfg.out_dir {
        std::fs::create_dir_all(dir)?;
    }

    let mut reports: Vec<Option<EstimateReport>> = vec![None; cfg.methods.len() * UNITS.len()];
    with_threads(cfg.threads, || -> Result<()> {
        for &adjusted in &[false, true] {
            let chain_methods: Vec<usize> = cfg
                .methods
                .iter()
                .enumerate()
                .filter(|(_, m)| m.adjusted == adjusted)
                .map(|(i, _)| i)
                .collect();
            if chain_methods.is_empty() {
                continue;
            }
            let stage = if adjusted {
                STAGE_CHAIN_ADJUSTED
            } else {
                STAGE_CHAIN_UNADJUSTED
            };
            let draws = fit_chain(
                &dataset,
                adjusted,
                cfg.draws,
                cfg.burn_in,
                derive_seed(cfg.seed, &[stage]),
            )?;
            if cfg.dump_draws {
                if let Some(dir) = &cfg.out_dir {
                    let path = dir.join(format!(
                        "draws_{}.csv",
                        if adjusted { "adjusted" } else { "unadjusted" }
                    ));
                    draws.write_csv(&path)?;
                    written.push(path);
                }
            }

            let mut specs = Vec::new();
            for &mi in &chain_methods {
                for unit in UNITS {
                    specs.push(EstimandSpec {
                        unit,
                        scale: cfg.scale,
                        estimator: cfg.methods[mi].estimator,
                        adjusted,
                    });
                }
            }
            let per_draw = per_draw_values(&summaries, pi, q, &draws, &specs)?;
            let plan =
                BootstrapPlan::new(cfg.bootstrap, derive_seed(cfg.seed, &[STAGE_BOOTSTRAP]))?;
            let row_means = bootstrap_row_means(&summaries, pi, q, &draws, &specs, &plan, true)?;
            for (s, spec) in specs.iter().enumerate() {
                let report = assemble_report(spec, &per_draw[s], &row_means[s], &draws, cfg.level)?;
                let mi = chain_methods[s / UNITS.len()];
                reports[mi * UNITS.len() + s % UNITS.len()] = Some(report);
            }
        }
        Ok(())
    })?;

    let reports: Vec<EstimateReport> = reports.into_iter().map(|r| r.expect("filled")).collect();
    if let Some(dir) = &cfg.out_dir {
        let mut txt = String::new();
        for r in &reports {
            txt.push_str(&r.text());
            txt.push('\n');
        }
        let txt_path = dir.join("reports.txt");
        std::fs::write(&txt_path, txt)?;
        written.push(txt_path);
        let json: Vec<serde_json::Value> = reports.iter().map(EstimateReport::to_json).collect();
        let json_path = dir.join("reports.json");
        std::fs::write(&json_path, serde_json::to_string_pretty(&json)? + "\n")?;
        written.push(json_path);
    }
    Ok(AnalyzeOutput { reports, written })
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(std::io::Error::other(e))
    }
}

#[derive(Debug, Clone)]
pub struct TruthConfig {
    pub scenario: Scenario,
    pub n_truth: usize,
    pub seed: u64,
    pub pi: f64,
    pub sigma_phi2: f64,
    pub scale: EffectScale,
    pub out_dir: Option<PathBuf>,
}

impl TruthConfig {
    pub fn new(scenario: Scenario, n_truth: usize, seed: u64) -> Self {
        Self {
            scenario,
            n_truth,
            seed,
            pi: 0.5,
            sigma_phi2: 0.25,
            scale: EffectScale::Difference,
            out_dir: None,
        }
    }
}

/// Ground-truth estimands for a scenario, optionally persisted.
pub fn run_truth(cfg: &TruthConfig) -> Result<(TruthEstimate, Vec<PathBuf>)> {
    let scenario_cfg = ScenarioConfig {
        scenario: cfg.scenario,
        n_clusters: 2,
        pi: cfg.pi,
        sigma_phi2: cfg.sigma_phi2,
        seed: derive_seed(cfg.seed, &[STAGE_TRUTH]),
    };
    let truth = true_estimands(&scenario_cfg, cfg.n_truth, cfg.scale)?;
    let mut written = Vec::new();
    if let Some(dir) = &cfg.out_dir {
        std::fs::create_dir_all(dir)?;
        let txt = dir.join("truth.txt");
        std::fs::write(
            &txt,
            format!(
                "scenario: {}   n_truth: {}   scale: {}\ncluster-ATE:    {:.6}\nindividual-ATE: {:.6}\n",
                cfg.scenario.label(),
                cfg.n_truth,
                cfg.scale.label(),
                truth.delta_c,
                truth.delta_i
            ),
        )?;
        written.push(txt);
        let json = dir.join("truth.json");
        std::fs::write(&json, serde_json::to_string_pretty(&truth)? + "\n")?;
        written.push(json);
    }
    Ok((truth, written))
}

/// Read files back as bytes for determinism comparisons.
pub fn read_output_bytes(paths: &[PathBuf]) -> Result<Vec<(String, Vec<u8>)>> {
    paths
        .iter()
        .map(|p| {
            let name = p
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok((name, std::fs::read(p)?))
        })
        .collect()
}
