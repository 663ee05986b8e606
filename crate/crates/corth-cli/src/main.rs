//! Command-line surface: `simulate` draws benchmark SEM datasets,
//! `discover` runs the parent search on a CSV, `bench` sweeps a parameter
//! grid, and `stability` reports selection frequencies over repeated runs.

mod io;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use corth::bench::{
    aggregate, run_grid, stability, write_records_csv, AggregateReport, Method, ResampleMode,
    StabilityReport, SweepGrid,
};
use corth::linmodel::CvConfig;
use corth::orthosearch::{discover, Nuisance, ParentReport, SearchConfig};
use corth::semgen::{parent_names, sample_dag, sample_data, GenConfig};

use io::Failure;

#[derive(Parser)]
#[command(name = "corth", version, about = "Orthogonal-score search for direct causal parents")]
struct Cli {
    /// Worker threads (0 = all cores); the CORTH_THREADS environment
    /// variable is the fallback.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a random SEM benchmark dataset with ground truth.
    Simulate(SimulateArgs),
    /// Test every covariate of a CSV dataset for direct causal parenthood.
    Discover(DiscoverArgs),
    /// Sweep simulator settings and score each method against the truth.
    Bench(BenchArgs),
    /// Rerun discovery under varied randomness and report selection rates.
    Stability(StabilityArgs),
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum NuisanceArg {
    /// Lasso with a cross-validated penalty.
    LassoCv,
    /// Lasso at the fixed penalty given by --lambda.
    LassoFixed,
    /// Least-squares projection.
    Projection,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum MethodArg {
    Corth,
    #[value(name = "lasso_baseline")]
    LassoBaseline,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Corth => Method::Corth,
            MethodArg::LassoBaseline => Method::LassoBaseline,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum ModeArg {
    /// Vary only fold-partition and cross-validation randomness.
    Reseed,
    /// Additionally resample rows with replacement (see --fraction).
    Bootstrap,
}

/// Search settings shared by discover, bench, and stability.
#[derive(Args)]
struct SearchFlags {
    /// Cross-fitting folds.
    #[arg(long, default_value_t = 2)]
    folds: usize,
    /// Significance level for the parent test.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Test at alpha directly instead of alpha / d.
    #[arg(long)]
    no_bonferroni: bool,
    /// Nuisance regression estimator.
    #[arg(long, value_enum, default_value_t = NuisanceArg::LassoCv)]
    nuisance: NuisanceArg,
    /// Penalty for --nuisance lasso-fixed.
    #[arg(long)]
    lambda: Option<f64>,
    /// Folds for nuisance cross-validation.
    #[arg(long, default_value_t = 10)]
    cv_folds: usize,
    /// Penalty-grid size for nuisance cross-validation.
    #[arg(long, default_value_t = 100)]
    cv_grid: usize,
    /// Smallest grid penalty as a fraction of the largest.
    #[arg(long, default_value_t = 1e-4)]
    cv_min_ratio: f64,
    /// Ridge fallback when a projection nuisance hits a singular design.
    #[arg(long, default_value_t = 1e-8)]
    projection_ridge: f64,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SearchFlags {
    fn to_config(&self) -> Result<SearchConfig, Failure> {
        let nuisance = match self.nuisance {
            NuisanceArg::LassoCv => Nuisance::LassoCv,
            NuisanceArg::Projection => Nuisance::Projection,
            NuisanceArg::LassoFixed => Nuisance::LassoFixed(self.lambda.ok_or_else(|| {
                Failure::Usage("--nuisance lasso-fixed requires --lambda".into())
            })?),
        };
        if self.lambda.is_some() && self.nuisance != NuisanceArg::LassoFixed {
            return Err(Failure::Usage(
                "--lambda only applies to --nuisance lasso-fixed".into(),
            ));
        }
        Ok(SearchConfig {
            folds: self.folds,
            alpha: self.alpha,
            bonferroni: !self.no_bonferroni,
            nuisance,
            cv: CvConfig {
                folds: self.cv_folds,
                grid_size: self.cv_grid,
                lambda_min_ratio: self.cv_min_ratio,
                seed: 0,
            },
            projection_ridge: self.projection_ridge,
            seed: self.seed,
        })
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Graph nodes, response included.
    #[arg(long)]
    nodes: usize,
    /// Probability of each forward edge.
    #[arg(long)]
    sparsity: f64,
    /// Probability that an edge contributes nonlinearly.
    #[arg(long)]
    nonlinear_prob: f64,
    /// Structural noise variance.
    #[arg(long)]
    noise_var: f64,
    /// Observations to draw.
    #[arg(long)]
    obs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Linear edge weight (default: 2 up to 10 nodes, 0.5 above).
    #[arg(long)]
    linear_weight: Option<f64>,
    /// Nonlinear contribution scale.
    #[arg(long, default_value_t = 0.5)]
    tanh_scale: f64,
    /// Nonlinear contribution slope.
    #[arg(long, default_value_t = 1.5)]
    tanh_slope: f64,
    /// Response node (default: last in topological order).
    #[arg(long)]
    target_node: Option<usize>,
    /// Force edges into the response to contribute linearly.
    #[arg(long)]
    force_linear_target: bool,
    /// Output prefix: writes <out>.csv, <out>.truth.json, <out>.dag.json.
    #[arg(long, default_value = "sim")]
    out: String,
}

#[derive(Args)]
struct DiscoverArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    input: PathBuf,
    /// Response column name.
    #[arg(long)]
    target: String,
    /// Report JSON path.
    #[arg(long, default_value = "report.json")]
    report: PathBuf,
    #[command(flatten)]
    search: SearchFlags,
}

#[derive(Args)]
struct BenchArgs {
    /// Sweep grid JSON file (replaces the grid list flags).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Node counts to sweep, comma separated.
    #[arg(long, value_delimiter = ',', required_unless_present = "config", conflicts_with = "config")]
    nodes: Vec<usize>,
    /// Edge probabilities to sweep.
    #[arg(long, value_delimiter = ',', required_unless_present = "config", conflicts_with = "config")]
    sparsities: Vec<f64>,
    /// Nonlinearity probabilities to sweep.
    #[arg(long, value_delimiter = ',', required_unless_present = "config", conflicts_with = "config")]
    nonlinear_probs: Vec<f64>,
    /// Noise variances to sweep.
    #[arg(long, value_delimiter = ',', required_unless_present = "config", conflicts_with = "config")]
    noise_vars: Vec<f64>,
    /// Observation counts to sweep.
    #[arg(long, value_delimiter = ',', required_unless_present = "config", conflicts_with = "config")]
    obs: Vec<usize>,
    /// Graphs per grid cell.
    #[arg(long, default_value_t = 100, conflicts_with = "config")]
    graphs: usize,
    /// Methods to run.
    #[arg(long, value_delimiter = ',', value_enum,
          default_values_t = vec![MethodArg::Corth, MethodArg::LassoBaseline],
          conflicts_with = "config")]
    methods: Vec<MethodArg>,
    #[arg(long, default_value_t = 0, conflicts_with = "config")]
    base_seed: u64,
    /// Records CSV path.
    #[arg(long, default_value = "records.csv")]
    records: PathBuf,
    /// Aggregate JSON path.
    #[arg(long, default_value = "aggregate.json")]
    aggregate: PathBuf,
    /// Cell parameter the aggregate groups by (d, p_s, p_n, noise_var, z).
    #[arg(long, default_value = "d")]
    group_by: String,
    #[command(flatten)]
    search: SearchFlags,
}

#[derive(Args)]
struct StabilityArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    input: PathBuf,
    /// Response column name.
    #[arg(long)]
    target: String,
    /// Number of repeated runs.
    #[arg(long)]
    runs: usize,
    /// Randomness source across runs.
    #[arg(long, value_enum, default_value_t = ModeArg::Reseed)]
    mode: ModeArg,
    /// Row fraction for bootstrap resampling.
    #[arg(long, default_value_t = 0.8)]
    fraction: f64,
    /// Report JSON path.
    #[arg(long, default_value = "stability.json")]
    out: PathBuf,
    #[command(flatten)]
    search: SearchFlags,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    init_threads(cli.threads)?;
    match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Discover(args) => cmd_discover(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Stability(args) => cmd_stability(args),
    }
}

fn init_threads(flag: Option<usize>) -> Result<(), Failure> {
    let threads = match flag {
        Some(t) => t,
        None => match std::env::var("CORTH_THREADS") {
            Ok(v) => v.parse().map_err(|_| {
                Failure::Usage(format!("CORTH_THREADS must be a thread count, got '{v}'"))
            })?,
            Err(_) => 0,
        },
    };
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Usage(format!("could not set thread count: {e}")))?;
    }
    Ok(())
}

/// Errors produced while computing on flag-built configurations: parameter
/// problems are usage errors, everything else is a data problem.
fn classify(e: corth::Error) -> Failure {
    match e {
        corth::Error::InvalidParameter(_) | corth::Error::UnknownGroupKey(_) => {
            Failure::Usage(e.to_string())
        }
        other => Failure::Data(other.to_string()),
    }
}

/// Fixed-precision scientific notation; infinities and NaN print as words.
fn num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.6e}")
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Failure> {
    let mut cfg = GenConfig::new(
        args.nodes,
        args.sparsity,
        args.nonlinear_prob,
        args.noise_var,
        args.obs,
        args.seed,
    );
    cfg.alpha = args.tanh_scale;
    cfg.beta = args.tanh_slope;
    if let Some(w) = args.linear_weight {
        cfg.theta = w;
    }
    cfg.target = args.target_node;
    cfg.force_linear_target = args.force_linear_target;
    let dag = sample_dag(&cfg).map_err(classify)?;
    let sim = sample_data(&dag, &cfg).map_err(classify)?;

    let csv_path = PathBuf::from(format!("{}.csv", args.out));
    let truth_path = PathBuf::from(format!("{}.truth.json", args.out));
    let dag_path = PathBuf::from(format!("{}.dag.json", args.out));
    io::write_dataset_csv(&sim.dataset, &csv_path)?;
    let parents = parent_names(&dag);
    io::write_json(&truth_path, &serde_json::json!({ "parents": parents }))?;
    io::write_json(&dag_path, &dag)?;

    println!(
        "wrote {} observations of {} covariates to {}",
        sim.dataset.n(),
        sim.dataset.p(),
        csv_path.display()
    );
    println!(
        "graph: {} edges; true parents: {}",
        dag.edges.len(),
        if parents.is_empty() {
            "(none)".to_string()
        } else {
            parents.join(", ")
        }
    );
    println!(
        "truth in {}, graph in {}",
        truth_path.display(),
        dag_path.display()
    );
    Ok(())
}

fn print_feature_table(report: &ParentReport) {
    println!(
        "{:<16} {:>14} {:>14} {:>14} {:>14} {:>14}  parent",
        "feature", "theta", "chi", "sigma", "z", "p_value"
    );
    for f in &report.features {
        let verdict = if f.failed {
            "failed"
        } else if f.is_parent {
            "yes"
        } else {
            "no"
        };
        println!(
            "{:<16} {:>14} {:>14} {:>14} {:>14} {:>14}  {}",
            f.name,
            num(f.theta_hat),
            num(f.chi_hat),
            num(f.sigma_hat),
            num(f.z),
            num(f.p_value),
            verdict
        );
    }
}

fn cmd_discover(args: DiscoverArgs) -> Result<(), Failure> {
    let data = io::load_csv(&args.input, &args.target)?;
    let cfg = args.search.to_config()?;
    let report = discover(&data, &cfg).map_err(classify)?;
    print_feature_table(&report);
    let parents: Vec<&str> = report
        .features
        .iter()
        .filter(|f| f.is_parent)
        .map(|f| f.name.as_str())
        .collect();
    println!(
        "parents: {}",
        if parents.is_empty() {
            "(none)".to_string()
        } else {
            parents.join(", ")
        }
    );
    io::write_text(&args.report, &(report.to_json_pretty() + "\n"))?;
    println!("report written to {}", args.report.display());
    Ok(())
}

fn print_aggregate_table(report: &AggregateReport) {
    println!(
        "{:<12} {:<16} {:>6} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}",
        report.group_by, "method", "runs", "tpr", "fpr", "csi", "acc", "f1", "mcc"
    );
    for row in &report.rows {
        println!(
            "{:<12} {:<16} {:>6} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            row.value,
            row.method.name(),
            row.runs,
            row.means.tpr,
            row.means.fpr,
            row.means.csi,
            row.means.acc,
            row.means.f1,
            row.means.mcc
        );
    }
}

fn cmd_bench(args: BenchArgs) -> Result<(), Failure> {
    let grid: SweepGrid = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Failure::Data(format!("{}: invalid sweep config: {e}", path.display())))?
        }
        None => SweepGrid {
            node_counts: args.nodes.clone(),
            sparsities: args.sparsities.clone(),
            nonlinear_probs: args.nonlinear_probs.clone(),
            noise_vars: args.noise_vars.clone(),
            obs_counts: args.obs.clone(),
            graphs_per_cell: args.graphs,
            methods: args.methods.iter().map(|&m| m.into()).collect(),
            base_seed: args.base_seed,
        },
    };
    let cfg = args.search.to_config()?;
    let records = run_grid(&grid, &cfg).map_err(classify)?;

    let file = fs::File::create(&args.records)
        .map_err(|e| Failure::Data(format!("{}: {e}", args.records.display())))?;
    write_records_csv(&records, std::io::BufWriter::new(file))
        .map_err(|e| Failure::Data(format!("{}: {e}", args.records.display())))?;
    let agg = aggregate(&records, &args.group_by).map_err(classify)?;
    io::write_json(&args.aggregate, &agg)?;

    println!(
        "wrote {} records to {}",
        records.len(),
        args.records.display()
    );
    print_aggregate_table(&agg);
    println!("aggregate written to {}", args.aggregate.display());
    Ok(())
}

fn print_stability_table(report: &StabilityReport, path: &Path) {
    println!("{:<16} {:>14} {:>6}", "feature", "selection_rate", "rank");
    for entry in &report.features {
        println!(
            "{:<16} {:>14.4} {:>6}",
            entry.name, entry.selection_rate, entry.rank
        );
    }
    if report.failed_runs > 0 {
        println!("failed runs: {} of {}", report.failed_runs, report.runs);
    }
    println!("stability report written to {}", path.display());
}

fn cmd_stability(args: StabilityArgs) -> Result<(), Failure> {
    let data = io::load_csv(&args.input, &args.target)?;
    let cfg = args.search.to_config()?;
    let mode = match args.mode {
        ModeArg::Reseed => ResampleMode::Reseed,
        ModeArg::Bootstrap => ResampleMode::Bootstrap(args.fraction),
    };
    let report = stability(&data, &cfg, args.runs, mode).map_err(classify)?;
    io::write_json(&args.out, &report)?;
    print_stability_table(&report, &args.out);
    Ok(())
}
