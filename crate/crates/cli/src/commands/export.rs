//! Plot-data exports: heatmap matrices and axis-pair scatter data.
//!
//! Coordinates are exported from row-normalized embeddings by default (the
//! visualization convention); contribution columns always come from the
//! unnormalized components. Headers state the variant in use.

use std::fmt::Write as _;

use clap::Args;
use icomp_core::embedding::normalize_rows_array;
use icomp_core::hoc::top_word_indices;
use icomp_core::whitening::{apply_whitening, pca_view};
use ndarray::Array2;

use crate::artifacts::write_text;
use crate::config::{parse_list, Provenance, Resolver};
use crate::{CmdError, Ctx};

fn transformed_matrix(ctx: &Ctx, transform: &str) -> Result<Array2<f64>, CmdError> {
    match transform {
        "ica" => Ok(ctx.cache.load_ica()?.0.components),
        "pca" => {
            let matrix = ctx.cache.load_embedding()?;
            let model = ctx.cache.load_whitening()?;
            Ok(pca_view(&model, matrix.vectors())?)
        }
        "whitened" => {
            let matrix = ctx.cache.load_embedding()?;
            let model = ctx.cache.load_whitening()?;
            Ok(apply_whitening(&model, matrix.vectors())?)
        }
        other => Err(CmdError::Usage(format!(
            "unknown transform '{other}' (expected ica, pca, or whitened)"
        ))),
    }
}

#[derive(Args)]
pub struct HeatmapArgs {
    /// Component space: ica, pca, or whitened.
    #[arg(long)]
    transform: Option<String>,
    /// Number of leading display axes exported.
    #[arg(long)]
    axes: Option<usize>,
    /// Top words selected per axis.
    #[arg(long)]
    top_k: Option<usize>,
    /// Frequency filter for the word selection.
    #[arg(long)]
    min_freq: Option<u64>,
    /// Export raw coordinates instead of norm-1 rows.
    #[arg(long)]
    no_normalize: bool,
}

pub fn heatmap(ctx: &Ctx, args: HeatmapArgs) -> Result<(), CmdError> {
    let mut r = Resolver::new(&ctx.config);
    let transform = r.resolve("heatmap.transform", args.transform, "ica".to_string())?;
    let axes = r.resolve("heatmap.axes", args.axes, 100)?;
    let top_k = r.resolve("heatmap.top-k", args.top_k, 4)?;
    let min_freq = r.resolve("heatmap.min-freq", args.min_freq, 100)?;
    r.note("heatmap.no-normalize", args.no_normalize);

    let matrix = ctx.cache.load_embedding()?;
    let transformed = transformed_matrix(ctx, &transform)?;
    let d = transformed.ncols();
    let axes = axes.min(d);
    let export = if args.no_normalize {
        transformed.clone()
    } else {
        normalize_rows_array(&transformed, |i| matrix.word(i))?
    };

    // union of per-axis top words, in (axis, rank) order
    let mut selected: Vec<usize> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for axis in 0..axes {
        for t in top_word_indices(&export, matrix.freq(), axis, top_k, min_freq)? {
            if seen.insert(t) {
                selected.push(t);
            }
        }
    }

    let mut out = Provenance::new("fig1-style", &r)
        .with("transform", &transform)
        .with(
            "variant",
            if args.no_normalize { "raw coordinates" } else { "rows normalized to unit norm" },
        )
        .with("axes", axes)
        .hash_comments();
    out.push_str("word");
    for j in 0..axes {
        let _ = write!(out, ",axis{j}");
    }
    out.push('\n');
    for &t in &selected {
        out.push_str(matrix.word(t));
        for j in 0..axes {
            let _ = write!(out, ",{}", export[[t, j]]);
        }
        out.push('\n');
    }
    ctx.ensure_out()?;
    let path = ctx.out_path(&format!("heatmap_{transform}.csv"));
    write_text(&path, &out)?;
    println!("wrote {} ({} words x {} axes)", path.display(), selected.len(), axes);
    Ok(())
}

#[derive(Args)]
pub struct ScatterArgs {
    /// Axis pair "i,j".
    #[arg(long)]
    axes: String,
    /// Component space: ica, pca, or whitened.
    #[arg(long)]
    transform: Option<String>,
    /// Export raw coordinates instead of norm-1 rows.
    #[arg(long)]
    no_normalize: bool,
}

pub fn scatter(ctx: &Ctx, args: ScatterArgs) -> Result<(), CmdError> {
    let mut r = Resolver::new(&ctx.config);
    let transform = r.resolve("scatter.transform", args.transform, "ica".to_string())?;
    r.note("scatter.axes", &args.axes);
    r.note("scatter.no-normalize", args.no_normalize);

    let pair: Vec<usize> = parse_list(&args.axes, "axis")?;
    if pair.len() != 2 {
        return Err(CmdError::Usage(format!(
            "--axes needs 'i,j', got '{}'",
            args.axes
        )));
    }
    let (i, j) = (pair[0], pair[1]);

    let matrix = ctx.cache.load_embedding()?;
    let transformed = transformed_matrix(ctx, &transform)?;
    let d = transformed.ncols();
    for axis in [i, j] {
        if axis >= d {
            return Err(CmdError::Data(format!("axis {axis} out of range for {d} axes")));
        }
    }
    let export = if args.no_normalize {
        transformed.clone()
    } else {
        normalize_rows_array(&transformed, |t| matrix.word(t))?
    };

    let mut out = Provenance::new("fig2/fig10-style", &r)
        .with("transform", &transform)
        .with(
            "coords",
            if args.no_normalize { "raw coordinates" } else { "rows normalized to unit norm" },
        )
        .with("contribution", "squared product from unnormalized coordinates")
        .hash_comments();
    let _ = writeln!(out, "word,s{i},s{j},contribution");
    for t in 0..matrix.n() {
        let a = transformed[[t, i]];
        let b = transformed[[t, j]];
        let _ = writeln!(
            out,
            "{},{},{},{}",
            matrix.word(t),
            export[[t, i]],
            export[[t, j]],
            a * a * b * b
        );
    }
    ctx.ensure_out()?;
    let path = ctx.out_path(&format!("scatter_{i}_{j}.csv"));
    write_text(&path, &out)?;
    println!("wrote {}", path.display());
    Ok(())
}
