//! Stage commands: ingest, whiten, ica, hoc.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use icomp_core::cache;
use icomp_core::fastica::{canonicalize, fit_ica, IcaConfig, Nonlinearity};
use icomp_core::whitening::{apply_whitening, fit_whitening, DEFAULT_EPS};

use crate::artifacts::write_text;
use crate::config::{Provenance, Resolver};
use crate::{CmdError, Ctx};

#[derive(Args)]
pub struct IngestArgs {
    /// word2vec text file: header "n d", then "word v1 ... vd" rows.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// TSV frequency file: "word<TAB>count".
    #[arg(long)]
    frequencies: Option<PathBuf>,
    /// Treat vocabulary words without a frequency entry as an error.
    #[arg(long)]
    strict_freq: bool,
}

pub fn ingest(ctx: &Ctx, args: IngestArgs) -> Result<(), CmdError> {
    let mut r = Resolver::new(&ctx.config);
    let embeddings: PathBuf = r
        .resolve_opt("paths.embeddings", args.embeddings)?
        .ok_or_else(|| CmdError::Usage("--embeddings is required".into()))?;
    let frequencies: Option<PathBuf> = r.resolve_opt("paths.frequencies", args.frequencies)?;
    r.note("ingest.strict-freq", args.strict_freq);

    let matrix = icomp_core::load_word2vec_text(&embeddings)?;
    let (matrix, missing) = match &frequencies {
        Some(path) => {
            let table = icomp_core::load_frequencies(path)?;
            matrix.with_frequencies(&table, args.strict_freq)?
        }
        None => (matrix, 0),
    };

    ctx.cache.ensure()?;
    let prov = Provenance::new("cache-embedding", &r);
    cache::save_embedding(&matrix, &ctx.cache.embedding_path(), &prov.meta_string())?;
    println!(
        "ingested {} words x {} dims ({} missing frequency entries) -> {}",
        matrix.n(),
        matrix.d(),
        missing,
        ctx.cache.embedding_path().display()
    );
    Ok(())
}

#[derive(Args)]
pub struct WhitenArgs {
    /// Retained dimension (default: all).
    #[arg(long)]
    retain: Option<usize>,
    /// Relative eigenvalue floor.
    #[arg(long)]
    eps: Option<f64>,
}

pub fn whiten(ctx: &Ctx, args: WhitenArgs) -> Result<(), CmdError> {
    let mut r = Resolver::new(&ctx.config);
    let retain = r.resolve_opt("whiten.retain", args.retain)?;
    let eps = r.resolve("whiten.eps", args.eps, DEFAULT_EPS)?;

    let matrix = ctx.cache.load_embedding()?;
    let model = fit_whitening(matrix.vectors(), retain, eps)?;
    let prov = Provenance::new("cache-whitening", &r);
    cache::save_whitening(&model, &ctx.cache.whitening_path(), &prov.meta_string())?;
    println!(
        "whitening fitted: {} -> {} dims ({} dropped) -> {}",
        model.input_dim(),
        model.output_dim(),
        model.dropped,
        ctx.cache.whitening_path().display()
    );
    Ok(())
}

#[derive(Args)]
pub struct IcaArgs {
    /// Contrast function: logcosh or cube.
    #[arg(long)]
    nonlinearity: Option<String>,
    /// logcosh alpha in [1, 2].
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

pub fn ica(ctx: &Ctx, args: IcaArgs) -> Result<(), CmdError> {
    let mut r = Resolver::new(&ctx.config);
    let nonlinearity = r.resolve("ica.nonlinearity", args.nonlinearity, "logcosh".to_string())?;
    let alpha = r.resolve("ica.alpha", args.alpha, 1.0)?;
    let max_iter = r.resolve("ica.max-iter", args.max_iter, 200)?;
    let tol = r.resolve("ica.tol", args.tol, 1e-4)?;
    let seed = r.resolve("ica.seed", args.seed, 0)?;
    let nonlinearity = match nonlinearity.as_str() {
        "logcosh" => Nonlinearity::LogCosh { alpha },
        "cube" => Nonlinearity::Cube,
        other => {
            return Err(CmdError::Usage(format!(
                "unknown nonlinearity '{other}' (expected logcosh or cube)"
            )))
        }
    };
    let cfg = IcaConfig { nonlinearity, max_iter, tol, seed };

    let matrix = ctx.cache.load_embedding()?;
    let model = ctx.cache.load_whitening()?;
    let z = apply_whitening(&model, matrix.vectors())?;
    let result = canonicalize(fit_ica(&z, &cfg)?);
    if !result.converged {
        eprintln!(
            "warning: FastICA did not converge in {} iterations; components are still usable",
            result.iterations
        );
    }
    let prov = Provenance::new("cache-ica", &r).with("seed", seed);
    cache::save_ica(&result, &cfg, &ctx.cache.ica_path(), &prov.meta_string())?;
    println!(
        "ica fitted: {} components, converged={} after {} iterations -> {}",
        result.components.ncols(),
        result.converged,
        result.iterations,
        ctx.cache.ica_path().display()
    );
    Ok(())
}

#[derive(Args)]
pub struct HocArgs {
    /// Also export the full matrix as CSV.
    #[arg(long, default_value_t = true)]
    csv: bool,
}

pub fn hoc(ctx: &Ctx, args: HocArgs) -> Result<(), CmdError> {
    let mut r = Resolver::new(&ctx.config);
    r.note("hoc.csv", args.csv);
    let (ica, _) = ctx.cache.load_ica()?;
    let h = icomp_core::hoc_matrix(&ica.components)?;
    let prov = Provenance::new("cache-hoc", &r);
    cache::save_hoc(&h, &ctx.cache.hoc_path(), &prov.meta_string())?;
    println!(
        "hoc matrix: {0} x {0} -> {1}",
        h.dim(),
        ctx.cache.hoc_path().display()
    );

    if args.csv {
        ctx.ensure_out()?;
        let d = h.dim();
        let mut out = Provenance::new("fig3-style", &r)
            .with("variant", "ica components, unnormalized")
            .hash_comments();
        out.push_str("axis");
        for j in 0..d {
            let _ = write!(out, ",s{j}");
        }
        out.push('\n');
        for i in 0..d {
            let _ = write!(out, "{i}");
            for j in 0..d {
                let _ = write!(out, ",{}", h.values[[i, j]]);
            }
            out.push('\n');
        }
        let path = ctx.out_path("hoc_matrix.csv");
        write_text(&path, &out)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
