use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dnt_core::oracle::OracleLimits;
use dnt_core::search::SearchMode;
use dnt_core::{
    brute_force_fit, check_h_assumption, fit, fit_graphon, fit_sparse, generate_dsbm, io,
    rate_sweep, run_experiment, sample_adjacency, sample_graphon, ClusterFamily,
    DsbmGeneratorSpec, EstimatorConfig, ExperimentConfig, FitResult, GraphonFitConfig,
    GraphonSpec, PairSeries, PenaltySpec, SparseConfig, SweepAxis, TemporalBasis,
    ZetaDistribution,
};

#[derive(Parser)]
#[command(name = "dnt", version, about = "Dynamic network tensors: simulate block models and graphons, estimate connection probabilities, and verify risk behavior at desk scale")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate dynamic block-model data (DNT1 bits, plus optional truth).
    GenData(GenDataArgs),
    /// Generate dynamic graphon data.
    GenGraphon(GenGraphonArgs),
    /// Penalized least-squares fit of the probability tensor.
    Fit(FitArgs),
    /// Graphon pipeline: time-constant clustering with truncation selection.
    FitGraphon(FitGraphonArgs),
    /// Brute-force reference fit (tiny instances only).
    Oracle(OracleArgs),
    /// Run a replicated experiment from a JSON config.
    Experiment(ExperimentArgs),
    /// Check the structural conditions of a temporal basis.
    CheckBasis(CheckBasisArgs),
}

#[derive(Args)]
struct GenDataArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    l: usize,
    /// Number of planted classes.
    #[arg(long, default_value_t = 2)]
    m: usize,
    /// Class-pair levels in canonical order (comma separated, m(m+1)/2 values).
    #[arg(long, default_value = "0.8,0.2,0.75")]
    levels: String,
    #[arg(long, default_value_t = 0.0)]
    wiggle: f64,
    #[arg(long, default_value_t = 1.0)]
    nu0: f64,
    /// Nodes switching class per step in the generated truth.
    #[arg(long, default_value_t = 0)]
    n0: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output DNT1 bits file.
    #[arg(long)]
    out: PathBuf,
    /// Optional output for the true probability tensor (DNT1 f64).
    #[arg(long)]
    truth_out: Option<PathBuf>,
}

#[derive(Args)]
struct GenGraphonArgs {
    /// JSON graphon spec file.
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    l: usize,
    #[arg(long, value_enum, default_value_t = ZetaArg::Uniform)]
    zeta: ZetaArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    truth_out: Option<PathBuf>,
    /// Optional JSON output for the sampled latent positions.
    #[arg(long)]
    zeta_out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ZetaArg {
    Uniform,
    Grid,
}

impl From<ZetaArg> for ZetaDistribution {
    fn from(z: ZetaArg) -> Self {
        match z {
            ZetaArg::Uniform => ZetaDistribution::IidUniform,
            ZetaArg::Grid => ZetaDistribution::FixedGrid,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BasisArg {
    Dct,
    Haar,
    File,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Free,
    Balanced,
}

#[derive(Clone, Copy, ValueEnum)]
enum SearchArg {
    Exhaustive,
    Heuristic,
}

#[derive(Args)]
struct FitArgs {
    /// Input DNT1 bits file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = BasisArg::Dct)]
    basis: BasisArg,
    /// Basis file (DNT1 f64 matrix) when --basis file.
    #[arg(long)]
    basis_file: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    m_max: usize,
    /// Switching budget of the clustering family.
    #[arg(long, default_value_t = 0)]
    n0: usize,
    #[arg(long, value_enum, default_value_t = FamilyArg::Free)]
    family: FamilyArg,
    #[arg(long, default_value_t = 0.5)]
    aleph1: f64,
    #[arg(long, default_value_t = 2.0)]
    aleph2: f64,
    #[arg(long, value_enum, default_value_t = SearchArg::Heuristic)]
    search: SearchArg,
    #[arg(long, default_value_t = 4)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output DNT1 f64 estimate; diagnostics go to <out>.diag.json.
    #[arg(long)]
    out: PathBuf,
    /// Sparse variant: known probability bound rho_n in (0, 1].
    #[arg(long)]
    sparse_rho: Option<f64>,
    /// Sparse variant tuning factor.
    #[arg(long, default_value_t = 1.0)]
    lambda0: f64,
    /// Keep raw (possibly out-of-range) estimates.
    #[arg(long, default_value_t = false)]
    no_clamp: bool,
}

#[derive(Args)]
struct FitGraphonArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = BasisArg::Dct)]
    basis: BasisArg,
    #[arg(long)]
    basis_file: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    m_max: usize,
    #[arg(long, default_value_t = 4)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = BasisArg::Dct)]
    basis: BasisArg,
    #[arg(long)]
    basis_file: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    m_max: usize,
    #[arg(long, default_value_t = 0)]
    n0: usize,
    #[arg(long, value_enum, default_value_t = FamilyArg::Free)]
    family: FamilyArg,
    #[arg(long, default_value_t = 0.5)]
    aleph1: f64,
    #[arg(long, default_value_t = 2.0)]
    aleph2: f64,
    #[arg(long)]
    out: PathBuf,
    /// Raise the enumeration guard (use with care).
    #[arg(long)]
    limits_override: Option<f64>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for results.csv and summary.json.
    #[arg(long)]
    out_dir: PathBuf,
    /// Optional rate sweep over n (comma-separated values).
    #[arg(long)]
    sweep_n: Option<String>,
    /// Optional rate sweep over L (comma-separated values).
    #[arg(long)]
    sweep_l: Option<String>,
}

#[derive(Args)]
struct CheckBasisArgs {
    #[arg(long, value_enum, default_value_t = BasisArg::Dct)]
    basis: BasisArg,
    #[arg(long)]
    basis_file: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    l: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::GenData(args) => gen_data(args),
        Command::GenGraphon(args) => gen_graphon(args),
        Command::Fit(args) => do_fit(args),
        Command::FitGraphon(args) => do_fit_graphon(args),
        Command::Oracle(args) => do_oracle(args),
        Command::Experiment(args) => do_experiment(args),
        Command::CheckBasis(args) => do_check_basis(args),
    }
}

fn parse_levels(raw: &str) -> Result<Vec<f64>, Box<dyn std::error::Error>> {
    raw.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(Into::into))
        .collect()
}

fn build_basis(kind: BasisArg, file: &Option<PathBuf>, horizon: usize) -> Result<TemporalBasis, Box<dyn std::error::Error>> {
    match kind {
        BasisArg::Dct => Ok(TemporalBasis::dct(horizon)),
        BasisArg::Haar => Ok(TemporalBasis::haar(horizon)?),
        BasisArg::File => {
            let path = file.as_ref().ok_or("--basis file needs --basis-file")?;
            let m = io::read_matrix(path)?;
            if m.rows() != horizon {
                return Err(format!("basis is {}x{}, data horizon is {horizon}", m.rows(), m.cols()).into());
            }
            Ok(TemporalBasis::from_matrix(m)?)
        }
    }
}

fn gen_data(args: GenDataArgs) -> Result<(), Box<dyn std::error::Error>> {
    let spec = DsbmGeneratorSpec {
        m_star: args.m,
        levels: parse_levels(&args.levels)?,
        wiggle: args.wiggle,
        nu0: args.nu0,
        max_switches: args.n0,
    };
    let basis = TemporalBasis::dct(args.l);
    let truth = generate_dsbm(&spec, args.n, args.l, &basis, args.seed)?;
    let b = sample_adjacency(&truth.lambda, dnt_core::seed::mix(args.seed, 2));
    io::write_adjacency(&b, &args.out)?;
    if let Some(path) = &args.truth_out {
        io::write_probability(&truth.lambda, path)?;
    }
    println!("wrote {} (n={}, L={})", args.out.display(), args.n, args.l);
    Ok(())
}

fn gen_graphon(args: GenGraphonArgs) -> Result<(), Box<dyn std::error::Error>> {
    let raw = std::fs::read_to_string(&args.spec)?;
    let spec: GraphonSpec = serde_json::from_str(&raw)?;
    let (lambda, zeta) = sample_graphon(&spec, args.n, args.l, args.zeta.into(), args.seed)?;
    let b = sample_adjacency(&lambda, dnt_core::seed::mix(args.seed, 2));
    io::write_adjacency(&b, &args.out)?;
    if let Some(path) = &args.truth_out {
        io::write_probability(&lambda, path)?;
    }
    if let Some(path) = &args.zeta_out {
        std::fs::write(path, serde_json::to_string_pretty(&zeta)?)?;
    }
    println!("wrote {} (n={}, L={})", args.out.display(), args.n, args.l);
    Ok(())
}

fn fit_to_json(result: &FitResult) -> serde_json::Value {
    serde_json::json!({
        "m_hat": result.m_hat,
        "support": result.support,
        "support_size": result.support.len(),
        "objective": result.objective,
        "rss": result.diagnostics.rss,
        "penalty": result.diagnostics.penalty_value,
        "coefficients": result.coefficients,
        "memberships": (0..result.memberships.horizon())
            .map(|l| result.memberships.slice(l).to_vec())
            .collect::<Vec<_>>(),
        "per_m_objective": result.diagnostics.per_m_objective,
    })
}

fn write_fit_outputs(result: &FitResult, out: &Path, diag: serde_json::Value) -> Result<(), Box<dyn std::error::Error>> {
    io::write_probability(&result.lambda_hat, out)?;
    let mut diag_path = out.as_os_str().to_os_string();
    diag_path.push(".diag.json");
    std::fs::write(diag_path, serde_json::to_string_pretty(&diag)?)?;
    Ok(())
}

fn do_fit(args: FitArgs) -> Result<(), Box<dyn std::error::Error>> {
    let b = io::read_adjacency(&args.input)?;
    let a = PairSeries::from_adjacency(&b);
    let basis = build_basis(args.basis, &args.basis_file, b.horizon())?;
    let family = match args.family {
        FamilyArg::Free => ClusterFamily::free(b.n(), b.horizon(), args.n0)?,
        FamilyArg::Balanced => {
            ClusterFamily::balanced(b.n(), b.horizon(), args.n0, args.aleph1, args.aleph2)?
        }
    };
    let search = match args.search {
        SearchArg::Exhaustive => SearchMode::Exhaustive,
        SearchArg::Heuristic => SearchMode::Heuristic { restarts: args.restarts.max(1) },
    };
    let config = EstimatorConfig::new(family, basis, args.m_max)?
        .with_search(search)
        .with_seed(args.seed)
        .with_clamp(!args.no_clamp);
    let result = match args.sparse_rho {
        None => fit(&a, &config)?,
        Some(rho) => {
            let sparse = SparseConfig::new(rho, args.lambda0, config)?;
            fit_sparse(&a, &sparse)?
        }
    };
    let diag = fit_to_json(&result);
    write_fit_outputs(&result, &args.out, diag)?;
    println!(
        "m_hat={} support={} objective={:.6}",
        result.m_hat,
        result.support.len(),
        result.objective
    );
    Ok(())
}

fn do_fit_graphon(args: FitGraphonArgs) -> Result<(), Box<dyn std::error::Error>> {
    let b = io::read_adjacency(&args.input)?;
    let a = PairSeries::from_adjacency(&b);
    let basis = build_basis(args.basis, &args.basis_file, b.horizon())?;
    let config = GraphonFitConfig::new(basis, args.m_max)
        .with_seed(args.seed)
        .with_restarts(args.restarts);
    let result = fit_graphon(&a, &config)?;
    io::write_probability(&result.lambda_hat, &args.out)?;
    let diag = serde_json::json!({
        "m_hat": result.m_hat,
        "l1_hat": result.l1_hat,
        "objective": result.objective,
        "rss": result.rss,
        "penalty": result.penalty_value,
        "support_size": result.support.len(),
        "memberships": result.memberships.slice(0).to_vec(),
    });
    let mut diag_path = args.out.as_os_str().to_os_string();
    diag_path.push(".diag.json");
    std::fs::write(diag_path, serde_json::to_string_pretty(&diag)?)?;
    println!(
        "m_hat={} l1_hat={} objective={:.6}",
        result.m_hat, result.l1_hat, result.objective
    );
    Ok(())
}

fn do_oracle(args: OracleArgs) -> Result<(), Box<dyn std::error::Error>> {
    let b = io::read_adjacency(&args.input)?;
    let a = PairSeries::from_adjacency(&b);
    let basis = build_basis(args.basis, &args.basis_file, b.horizon())?;
    let family = match args.family {
        FamilyArg::Free => ClusterFamily::free(b.n(), b.horizon(), args.n0)?,
        FamilyArg::Balanced => {
            ClusterFamily::balanced(b.n(), b.horizon(), args.n0, args.aleph1, args.aleph2)?
        }
    };
    let mut limits = OracleLimits::default();
    if let Some(states) = args.limits_override {
        limits.max_states = states;
        limits.max_n = b.n();
        limits.max_m = args.m_max;
        limits.max_horizon = b.horizon();
    }
    let penalty = PenaltySpec::standard(family.clone());
    let result = brute_force_fit(&a, &family, &penalty, &basis, 1..=args.m_max, &limits)?;
    let diag = fit_to_json(&result);
    write_fit_outputs(&result, &args.out, diag)?;
    println!(
        "m_hat={} support={} objective={:.6}",
        result.m_hat,
        result.support.len(),
        result.objective
    );
    Ok(())
}

fn parse_values(raw: &str) -> Result<Vec<usize>, Box<dyn std::error::Error>> {
    raw.split(',')
        .map(|s| s.trim().parse::<usize>().map_err(Into::into))
        .collect()
}

fn do_experiment(args: ExperimentArgs) -> Result<(), Box<dyn std::error::Error>> {
    let raw = std::fs::read_to_string(&args.config)?;
    let config: ExperimentConfig = serde_json::from_str(&raw)?;
    std::fs::create_dir_all(&args.out_dir)?;
    if let Some(values) = args.sweep_n.as_deref() {
        let report = rate_sweep(&config, SweepAxis::Nodes, &parse_values(values)?)?;
        std::fs::write(
            args.out_dir.join("sweep.json"),
            serde_json::to_string_pretty(&report)?,
        )?;
        println!("sweep over n: slope {:.3}", report.slope);
        return Ok(());
    }
    if let Some(values) = args.sweep_l.as_deref() {
        let report = rate_sweep(&config, SweepAxis::Horizon, &parse_values(values)?)?;
        std::fs::write(
            args.out_dir.join("sweep.json"),
            serde_json::to_string_pretty(&report)?,
        )?;
        println!("sweep over L: slope {:.3}", report.slope);
        return Ok(());
    }
    let run = run_experiment(&config)?;
    dnt_core::write_csv(&run, &args.out_dir.join("results.csv"))?;
    dnt_core::write_summary_json(&run, &args.out_dir.join("summary.json"))?;
    println!(
        "{} replicates ok, median mse {:.6}",
        run.summary.replicates_ok, run.summary.median_mse
    );
    Ok(())
}

fn do_check_basis(args: CheckBasisArgs) -> Result<(), Box<dyn std::error::Error>> {
    let basis = build_basis(args.basis, &args.basis_file, args.l)?;
    let report = check_h_assumption(basis.matrix())?;
    println!("L = {}", args.l);
    println!("orthogonal: {}", basis.is_orthogonal());
    println!("flat first row (H*1 = sqrt(L) e1): {}", report.e1_ok);
    println!(
        "entry bound (max |H| = {:.6} vs 1/sqrt(L) = {:.6}): {}",
        report.max_abs_entry,
        1.0 / (args.l as f64).sqrt(),
        report.entry_bound_ok
    );
    println!(
        "binary sup bound ({}, worst ratio {:.6}): {}",
        if report.binary_check_exhaustive { "exhaustive" } else { "sampled" },
        report.worst_binary_ratio,
        report.binary_sup_ok
    );
    Ok(())
}
