//! Evaluation commands: reduce-bench and eval-sim.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use icomp_core::intrusion::SigmaOrder;
use icomp_core::reduction::{load_similarity_tsv, run_reduction_benchmark, SimilarityDataset};
use icomp_core::whitening::apply_whitening;

use crate::artifacts::write_text;
use crate::config::{parse_list, Provenance, Resolver};
use crate::{CmdError, Ctx};

fn dataset_name(path: &std::path::Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn load_datasets(raw: &str) -> Result<Vec<SimilarityDataset>, CmdError> {
    let paths: Vec<PathBuf> = parse_list(raw, "dataset path")?;
    if paths.is_empty() {
        return Err(CmdError::Usage("no dataset paths given".into()));
    }
    let mut out = Vec::with_capacity(paths.len());
    for path in &paths {
        out.push(load_similarity_tsv(path, &dataset_name(path))?);
    }
    Ok(out)
}

#[derive(Args)]
pub struct ReduceBenchArgs {
    /// Comma-separated similarity dataset TSV paths.
    #[arg(long)]
    datasets: Option<String>,
    /// Target dimensions, e.g. "2,5,10,20".
    #[arg(long)]
    dims: Option<String>,
    /// Seeds, e.g. "0,1,2".
    #[arg(long)]
    seeds: Option<String>,
    /// Component space: ica or pca.
    #[arg(long)]
    transform: Option<String>,
}

pub fn reduce_bench(ctx: &Ctx, args: ReduceBenchArgs) -> Result<(), CmdError> {
    let mut r = Resolver::new(&ctx.config);
    let datasets_raw = r
        .resolve_opt("reduce-bench.datasets", args.datasets)?
        .ok_or_else(|| CmdError::Usage("--datasets is required".into()))?;
    let dims_raw = r.resolve("reduce-bench.dims", args.dims, "2,5,10,20".to_string())?;
    let seeds_raw = r.resolve("reduce-bench.seeds", args.seeds, "0,1,2,3,4".to_string())?;
    let transform = r.resolve("reduce-bench.transform", args.transform, "ica".to_string())?;

    let dims: Vec<usize> = parse_list(&dims_raw, "dimension")?;
    let seeds: Vec<u64> = parse_list(&seeds_raw, "seed")?;
    let datasets = load_datasets(&datasets_raw)?;

    let matrix = ctx.cache.load_embedding()?;
    let (components, hoc) = match transform.as_str() {
        "ica" => {
            let (ica, _) = ctx.cache.load_ica()?;
            let hoc = ctx.cache.load_hoc()?;
            (ica.components, hoc)
        }
        "pca" => {
            // standardized PCA coordinates: the whitened view
            let model = ctx.cache.load_whitening()?;
            let z = apply_whitening(&model, matrix.vectors())?;
            let hoc = icomp_core::hoc_matrix(&z)?;
            (z, hoc)
        }
        other => {
            return Err(CmdError::Usage(format!(
                "unknown transform '{other}' (expected ica or pca)"
            )))
        }
    };
    let sigma = SigmaOrder {
        sigma: (0..components.ncols()).collect(),
    };
    let bench = run_reduction_benchmark(
        &components,
        &hoc,
        &sigma,
        matrix.vocab(),
        &datasets,
        &dims,
        &seeds,
    )?;

    let mut out = Provenance::new("table4-style", &r)
        .with("transform", &transform)
        .with("seeds", seeds.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" "))
        .with(
            "datasets",
            datasets.iter().map(|d| d.name.as_str()).collect::<Vec<_>>().join(" "),
        )
        .hash_comments();
    out.push_str("method");
    for k in &bench.dims {
        let _ = write!(out, ",k={k}");
    }
    out.push('\n');
    out.push_str("random_clustering");
    for cell in &bench.random {
        let _ = write!(out, ",{}", cell.mean_rho);
    }
    out.push('\n');
    out.push_str("spectral_on_mst");
    for cell in &bench.spectral {
        let _ = write!(out, ",{}", cell.mean_rho);
    }
    out.push('\n');
    ctx.ensure_out()?;
    let path = ctx.out_path("reduction_scores.csv");
    write_text(&path, &out)?;
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Args)]
pub struct EvalSimArgs {
    /// Comma-separated similarity dataset TSV paths.
    #[arg(long)]
    datasets: Option<String>,
}

pub fn eval_sim(ctx: &Ctx, args: EvalSimArgs) -> Result<(), CmdError> {
    let mut r = Resolver::new(&ctx.config);
    let datasets_raw = r
        .resolve_opt("eval-sim.datasets", args.datasets)?
        .ok_or_else(|| CmdError::Usage("--datasets is required".into()))?;
    let datasets = load_datasets(&datasets_raw)?;

    let matrix = ctx.cache.load_embedding()?;
    let mut out = Provenance::new("similarity-eval", &r)
        .with("variant", "raw embedding vectors")
        .hash_comments();
    out.push_str("dataset,rho,used,skipped\n");
    for ds in &datasets {
        let eval = icomp_core::evaluate_similarity(matrix.vectors(), matrix.vocab(), ds)?;
        let _ = writeln!(out, "{},{},{},{}", ds.name, eval.rho, eval.used, eval.skipped);
    }
    ctx.ensure_out()?;
    let path = ctx.out_path("eval_sim.csv");
    write_text(&path, &out)?;
    println!("wrote {}", path.display());
    Ok(())
}
