//! `icomp`: pipeline driver for independent-component embedding analysis.
//!
//! Subcommands read prior stage artifacts from the cache directory and emit
//! plot-ready CSV/TSV/DOT/JSON-lines files into the output directory. Exit
//! codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

mod artifacts;
mod commands;
mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use icomp_core::CoreError;

use artifacts::CacheDir;
use config::ConfigFile;

#[derive(Debug)]
pub enum CmdError {
    Usage(String),
    Data(String),
    Numeric(String),
}

impl From<CoreError> for CmdError {
    fn from(e: CoreError) -> Self {
        use CoreError::*;
        match e {
            InvalidParam(_) => CmdError::Usage(e.to_string()),
            NotWhitened(_) | EmptyIntruderPool { .. } | DegenerateDistances { .. }
            | SingularMatrix(_) | ConstantInput(_) | EmptyCluster(_) | ZeroNormRow(_) => {
                CmdError::Numeric(e.to_string())
            }
            _ => CmdError::Data(e.to_string()),
        }
    }
}

impl CmdError {
    fn exit_code(&self) -> i32 {
        match self {
            CmdError::Usage(_) => 1,
            CmdError::Data(_) => 2,
            CmdError::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CmdError::Usage(m) | CmdError::Data(m) | CmdError::Numeric(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(name = "icomp", version, about = "Semantic component analysis of embedding matrices")]
struct Cli {
    /// Key=value config file supplying defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for binary pipeline artifacts.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,

    /// Directory for exported tables and graphs.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load embeddings + frequencies into the binary cache.
    Ingest(commands::pipeline::IngestArgs),
    /// Fit the PCA whitening model.
    Whiten(commands::pipeline::WhitenArgs),
    /// Estimate the ICA rotation and canonicalize axes by skewness.
    Ica(commands::pipeline::IcaArgs),
    /// Compute the higher-order correlation matrix.
    Hoc(commands::pipeline::HocArgs),
    /// Export top words per axis (table1-style TSV).
    TopWords(commands::tables::TopWordsArgs),
    /// Export top per-word contributions for axis pairs (table3-style TSV).
    Contributors(commands::tables::ContributorsArgs),
    /// Export per-axis frequency correlations (fig6-style CSV).
    FreqCorr(commands::tables::FreqCorrArgs),
    /// Export a histogram of HOC values (fig7-style CSV).
    HocHist(commands::tables::HocHistArgs),
    /// Score axes with the word-intrusion task and derive the sigma order.
    Intrusion(commands::intrusion::IntrusionArgs),
    /// Build the HOC-weighted graph and its maximum spanning tree.
    Mst(commands::graph::MstArgs),
    /// Spectral-cluster the spanning tree (fig5-style JSON).
    Cluster(commands::graph::ClusterArgs),
    /// Extract a radius-limited subtree around a root node (fig4-style DOT).
    Subtree(commands::graph::SubtreeArgs),
    /// Benchmark cluster-average reduction against random clustering.
    ReduceBench(commands::eval::ReduceBenchArgs),
    /// Evaluate embeddings on word-similarity datasets.
    EvalSim(commands::eval::EvalSimArgs),
    /// Build judge trials and a request file (table2 protocol).
    JudgeBuild(commands::judge::JudgeBuildArgs),
    /// Aggregate judge responses into a table2-style CSV.
    JudgeAggregate(commands::judge::JudgeAggregateArgs),
    /// Export heatmap matrix data (fig1-style CSV).
    ExportHeatmapData(commands::export::HeatmapArgs),
    /// Export scatter data for an axis pair (fig2/fig10-style CSV).
    ExportScatterData(commands::export::ScatterArgs),
}

/// Shared command context.
pub struct Ctx {
    pub cache: CacheDir,
    pub out_dir: PathBuf,
    pub config: ConfigFile,
}

impl Ctx {
    pub fn out_path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    pub fn ensure_out(&self) -> Result<(), CmdError> {
        std::fs::create_dir_all(&self.out_dir)
            .map_err(|e| CmdError::Data(format!("cannot create out dir: {e}")))?;
        Ok(())
    }
}

fn run(cli: Cli) -> Result<(), CmdError> {
    let config = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let cache_root = cli
        .cache_dir
        .or_else(|| config.get("paths.cache-dir").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("cache"));
    let out_dir = cli
        .out_dir
        .or_else(|| config.get("paths.out-dir").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let ctx = Ctx {
        cache: CacheDir::new(&cache_root),
        out_dir,
        config,
    };
    match cli.command {
        Command::Ingest(args) => commands::pipeline::ingest(&ctx, args),
        Command::Whiten(args) => commands::pipeline::whiten(&ctx, args),
        Command::Ica(args) => commands::pipeline::ica(&ctx, args),
        Command::Hoc(args) => commands::pipeline::hoc(&ctx, args),
        Command::TopWords(args) => commands::tables::top_words(&ctx, args),
        Command::Contributors(args) => commands::tables::contributors(&ctx, args),
        Command::FreqCorr(args) => commands::tables::freq_corr(&ctx, args),
        Command::HocHist(args) => commands::tables::hoc_hist(&ctx, args),
        Command::Intrusion(args) => commands::intrusion::run(&ctx, args),
        Command::Mst(args) => commands::graph::mst(&ctx, args),
        Command::Cluster(args) => commands::graph::cluster(&ctx, args),
        Command::Subtree(args) => commands::graph::subtree(&ctx, args),
        Command::ReduceBench(args) => commands::eval::reduce_bench(&ctx, args),
        Command::EvalSim(args) => commands::eval::eval_sim(&ctx, args),
        Command::JudgeBuild(args) => commands::judge::build(&ctx, args),
        Command::JudgeAggregate(args) => commands::judge::aggregate(&ctx, args),
        Command::ExportHeatmapData(args) => commands::export::heatmap(&ctx, args),
        Command::ExportScatterData(args) => commands::export::scatter(&ctx, args),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version as "errors" with zero exit
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {}", e.message());
        std::process::exit(e.exit_code());
    }
}
