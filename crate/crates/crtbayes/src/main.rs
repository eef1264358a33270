//! Thin command-line front end over the library pipelines.
//!
//! Subcommands: `simulate` (replicate a scenario, emit a metrics table),
//! `analyze` (fit a CSV dataset, emit estimate reports), `truth` (compute
//! ground-truth estimands). Options may also come from a flat TOML config
//! file via --config; explicit flags override file values. The master seed
//! is always required; there is no wall-clock fallback. Progress goes to
//! stderr, results to stdout and the output directory.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crtbayes::error::{Error, Result};
use crtbayes::estimands::EffectScale;
use crtbayes::pipeline::{
    default_analyze_methods, default_simulate_methods, run_analyze, run_simulate, run_truth,
    AnalyzeConfig, MethodSpec, SimulateConfig, TruthConfig, DEFAULT_LEVEL,
};
use crtbayes::trial::CsvSchema;

#[derive(Parser)]
#[command(
    name = "crtbayes",
    version,
    about = "Estimand-aligned Bayesian analysis of cluster-randomized trials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replicate a simulated scenario and reduce to a metrics table.
    Simulate(SimulateArgs),
    /// Analyze a trial dataset from CSV.
    Analyze(AnalyzeArgs),
    /// Compute ground-truth estimands for a scenario.
    Truth(TruthArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Flat TOML key/value file supplying any of the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario: s1, s2, s3, or noics.
    #[arg(long)]
    scenario: Option<String>,
    /// Number of clusters M per simulated trial.
    #[arg(long)]
    clusters: Option<usize>,
    /// Number of replications R.
    #[arg(long)]
    reps: Option<usize>,
    /// Stored posterior draws B per chain.
    #[arg(long)]
    draws: Option<usize>,
    /// Burn-in iterations discarded before storage.
    #[arg(long)]
    burnin: Option<usize>,
    /// Bootstrap resamples K per replicate.
    #[arg(long)]
    boot: Option<usize>,
    /// Master seed (required; no wall-clock default).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for metrics.txt / metrics.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Assignment probability.
    #[arg(long)]
    pi: Option<f64>,
    /// Random-intercept variance of the generating model.
    #[arg(long = "sigma-phi2")]
    sigma_phi2: Option<f64>,
    /// Estimator cells, e.g. gcomp:adjusted,mr:adjusted,np (repeatable).
    #[arg(long = "spec", value_delimiter = ',')]
    specs: Vec<String>,
    /// Effect scale: difference, risk-ratio, odds-ratio.
    #[arg(long)]
    scale: Option<String>,
    /// Clusters used for the ground-truth Monte Carlo.
    #[arg(long = "n-truth")]
    n_truth: Option<usize>,
    /// Worker threads (0 = all available).
    #[arg(long)]
    threads: Option<usize>,
    /// Exclude-and-count failed replicates instead of aborting.
    #[arg(long)]
    permissive: bool,
    /// Persist every replicate's dataset plus its potential-outcomes
    /// sidecar under OUT/data/.
    #[arg(long = "dump-data")]
    dump_data: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input CSV path.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Column holding the cluster identifier.
    #[arg(long = "cluster-col")]
    cluster_col: Option<String>,
    /// Column holding the 0/1 treatment indicator.
    #[arg(long = "treat-col")]
    treat_col: Option<String>,
    /// Column holding the outcome.
    #[arg(long = "outcome-col")]
    outcome_col: Option<String>,
    /// Covariate columns, comma separated.
    #[arg(long = "covars", value_delimiter = ',')]
    covars: Vec<String>,
    /// Field delimiter (single character).
    #[arg(long)]
    delimiter: Option<char>,
    /// Known assignment probability.
    #[arg(long)]
    pi: Option<f64>,
    /// Estimator cells, e.g. gcomp:adjusted,mr:unadjusted.
    #[arg(long = "spec", value_delimiter = ',')]
    specs: Vec<String>,
    #[arg(long)]
    scale: Option<String>,
    #[arg(long)]
    draws: Option<usize>,
    #[arg(long)]
    burnin: Option<usize>,
    #[arg(long)]
    boot: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Credible-interval level.
    #[arg(long)]
    level: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also dump the fitted chains as CSV into the output directory.
    #[arg(long = "dump-draws")]
    dump_draws: bool,
}

#[derive(Args)]
struct TruthArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<String>,
    /// Clusters used for the Monte Carlo (default 100000).
    #[arg(long = "n-truth")]
    n_truth: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    pi: Option<f64>,
    #[arg(long = "sigma-phi2")]
    sigma_phi2: Option<f64>,
    #[arg(long)]
    scale: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Flat TOML key/value document mirroring the flag names.
struct FileConfig(toml::Table);

impl FileConfig {
    fn load(path: Option<&PathBuf>) -> Result<Self> {
        let table = match path {
            None => toml::Table::new(),
            Some(p) => {
                let text = std::fs::read_to_string(p)?;
                text.parse::<toml::Table>()
                    .map_err(|e| Error::Config(format!("config file {}: {e}", p.display())))?
            }
        };
        Ok(Self(table))
    }

    fn string(&self, key: &str) -> Option<String> {
        self.0.get(key).and_then(|v| v.as_str().map(str::to_owned))
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.string(key).map(PathBuf::from)
    }

    fn usize_val(&self, key: &str) -> Option<usize> {
        self.0
            .get(key)
            .and_then(toml::Value::as_integer)
            .map(|v| v as usize)
    }

    fn u64_val(&self, key: &str) -> Option<u64> {
        self.0
            .get(key)
            .and_then(toml::Value::as_integer)
            .map(|v| v as u64)
    }

    fn f64_val(&self, key: &str) -> Option<f64> {
        self.0.get(key).and_then(|v| match v {
            toml::Value::Float(f) => Some(*f),
            toml::Value::Integer(i) => Some(*i as f64),
            _ => None,
        })
    }

    fn bool_val(&self, key: &str) -> Option<bool> {
        self.0.get(key).and_then(toml::Value::as_bool)
    }

    fn string_list(&self, key: &str) -> Option<Vec<String>> {
        match self.0.get(key) {
            Some(toml::Value::String(s)) => {
                Some(s.split(',').map(|p| p.trim().to_string()).collect())
            }
            Some(toml::Value::Array(items)) => Some(
                items
                    .iter()
                    .filter_map(|v| v.as_str().map(str::to_owned))
                    .collect(),
            ),
            _ => None,
        }
    }
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config(format!("missing required option --{flag}")))
}

fn parse_methods(
    cli: &[String],
    file: Option<Vec<String>>,
    defaults: Vec<MethodSpec>,
) -> Result<Vec<MethodSpec>> {
    let raw: Vec<String> = if !cli.is_empty() {
        cli.to_vec()
    } else if let Some(from_file) = file {
        from_file
    } else {
        return Ok(defaults);
    };
    raw.iter().map(|s| s.parse()).collect()
}

fn parse_scale(cli: Option<String>, file: Option<String>) -> Result<EffectScale> {
    match cli.or(file) {
        Some(s) => s.parse(),
        None => Ok(EffectScale::Difference),
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let file = FileConfig::load(args.config.as_ref())?;
    let scenario = required(
        args.scenario.or_else(|| file.string("scenario")),
        "scenario",
    )?
    .parse()?;
    let clusters = required(
        args.clusters.or_else(|| file.usize_val("clusters")),
        "clusters",
    )?;
    let reps = required(args.reps.or_else(|| file.usize_val("reps")), "reps")?;
    let seed = required(args.seed.or_else(|| file.u64_val("seed")), "seed")?;

    let mut cfg = SimulateConfig::new(scenario, clusters, reps, seed);
    cfg.draws = args
        .draws
        .or_else(|| file.usize_val("draws"))
        .unwrap_or(cfg.draws);
    cfg.burn_in = args
        .burnin
        .or_else(|| file.usize_val("burnin"))
        .unwrap_or(cfg.burn_in);
    cfg.bootstrap = args
        .boot
        .or_else(|| file.usize_val("boot"))
        .unwrap_or(cfg.bootstrap);
    cfg.pi = args.pi.or_else(|| file.f64_val("pi")).unwrap_or(cfg.pi);
    cfg.sigma_phi2 = args
        .sigma_phi2
        .or_else(|| file.f64_val("sigma_phi2"))
        .unwrap_or(cfg.sigma_phi2);
    cfg.scale = parse_scale(args.scale, file.string("scale"))?;
    cfg.methods = parse_methods(
        &args.specs,
        file.string_list("spec"),
        default_simulate_methods(),
    )?;
    cfg.n_truth = args
        .n_truth
        .or_else(|| file.usize_val("n_truth"))
        .unwrap_or(cfg.n_truth);
    cfg.threads = args
        .threads
        .or_else(|| file.usize_val("threads"))
        .unwrap_or(0);
    cfg.permissive = args.permissive || file.bool_val("permissive").unwrap_or(false);
    cfg.out_dir = args.out.or_else(|| file.path("out"));
    cfg.dump_data = args.dump_data || file.bool_val("dump_data").unwrap_or(false);

    log::info!(
        "simulate: scenario {} M {} R {} B {} burn-in {} K {} seed {}",
        cfg.scenario.label(),
        cfg.clusters,
        cfg.replications,
        cfg.draws,
        cfg.burn_in,
        cfg.bootstrap,
        cfg.seed
    );
    let out = run_simulate(&cfg)?;
    print!("{}", out.table.text());
    for path in &out.written {
        log::info!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<()> {
    let file = FileConfig::load(args.config.as_ref())?;
    let data = required(args.data.or_else(|| file.path("data")), "data")?;
    let cluster_col = required(
        args.cluster_col.or_else(|| file.string("cluster_col")),
        "cluster-col",
    )?;
    let treat_col = required(
        args.treat_col.or_else(|| file.string("treat_col")),
        "treat-col",
    )?;
    let outcome_col = required(
        args.outcome_col.or_else(|| file.string("outcome_col")),
        "outcome-col",
    )?;
    let pi = required(args.pi.or_else(|| file.f64_val("pi")), "pi")?;
    let seed = required(args.seed.or_else(|| file.u64_val("seed")), "seed")?;
    let covars = if !args.covars.is_empty() {
        args.covars
    } else {
        file.string_list("covars").unwrap_or_default()
    };

    let mut schema = CsvSchema::new(cluster_col, treat_col, outcome_col, covars);
    if let Some(delim) = args
        .delimiter
        .or_else(|| file.string("delimiter").and_then(|s| s.chars().next()))
    {
        schema.delimiter = u8::try_from(delim)
            .map_err(|_| Error::Config("delimiter must be a single ASCII character".into()))?;
    }

    let mut cfg = AnalyzeConfig::new(data, schema, pi, seed);
    cfg.methods = parse_methods(
        &args.specs,
        file.string_list("spec"),
        default_analyze_methods(),
    )?;
    cfg.scale = parse_scale(args.scale, file.string("scale"))?;
    cfg.draws = args
        .draws
        .or_else(|| file.usize_val("draws"))
        .unwrap_or(cfg.draws);
    cfg.burn_in = args
        .burnin
        .or_else(|| file.usize_val("burnin"))
        .unwrap_or(cfg.burn_in);
    cfg.bootstrap = args
        .boot
        .or_else(|| file.usize_val("boot"))
        .unwrap_or(cfg.bootstrap);
    cfg.level = args
        .level
        .or_else(|| file.f64_val("level"))
        .unwrap_or(DEFAULT_LEVEL);
    cfg.threads = args
        .threads
        .or_else(|| file.usize_val("threads"))
        .unwrap_or(0);
    cfg.out_dir = args.out.or_else(|| file.path("out"));
    cfg.dump_draws = args.dump_draws || file.bool_val("dump_draws").unwrap_or(false);

    log::info!(
        "analyze: {} B {} burn-in {} K {} seed {}",
        cfg.data.display(),
        cfg.draws,
        cfg.burn_in,
        cfg.bootstrap,
        cfg.seed
    );
    let out = run_analyze(&cfg)?;
    for report in &out.reports {
        print!("{}", report.text());
        println!();
    }
    for path in &out.written {
        log::info!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_truth(args: TruthArgs) -> Result<()> {
    let file = FileConfig::load(args.config.as_ref())?;
    let scenario = required(
        args.scenario.or_else(|| file.string("scenario")),
        "scenario",
    )?
    .parse()?;
    let seed = required(args.seed.or_else(|| file.u64_val("seed")), "seed")?;
    let n_truth = args
        .n_truth
        .or_else(|| file.usize_val("n_truth"))
        .unwrap_or(100_000);

    let mut cfg = TruthConfig::new(scenario, n_truth, seed);
    cfg.pi = args.pi.or_else(|| file.f64_val("pi")).unwrap_or(cfg.pi);
    cfg.sigma_phi2 = args
        .sigma_phi2
        .or_else(|| file.f64_val("sigma_phi2"))
        .unwrap_or(cfg.sigma_phi2);
    cfg.scale = parse_scale(args.scale, file.string("scale"))?;
    cfg.out_dir = args.out.or_else(|| file.path("out"));

    let (truth, written) = run_truth(&cfg)?;
    println!(
        "scenario {} ({}): cluster-ATE {:.6}, individual-ATE {:.6}",
        cfg.scenario.label(),
        cfg.scale.label(),
        truth.delta_c,
        truth.delta_i
    );
    for path in &written {
        log::info!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Truth(args) => cmd_truth(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: category={} {}", e.category(), e);
            ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(1))
        }
    }
}
