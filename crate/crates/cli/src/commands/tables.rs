//! Table exports: top words, contributors, frequency correlations, and the
//! HOC histogram.

use std::fmt::Write as _;

use clap::Args;
use icomp_core::hoc::top_word_indices;

use crate::artifacts::write_text;
use crate::config::{parse_list, Provenance, Resolver};
use crate::{CmdError, Ctx};

#[derive(Args)]
pub struct TopWordsArgs {
    /// Comma-separated display axes (default: all).
    #[arg(long)]
    axes: Option<String>,
    /// Words per axis.
    #[arg(long)]
    k: Option<usize>,
    /// Frequency filter.
    #[arg(long)]
    min_freq: Option<u64>,
}

pub fn top_words(ctx: &Ctx, args: TopWordsArgs) -> Result<(), CmdError> {
    let mut r = Resolver::new(&ctx.config);
    let k = r.resolve("top-words.k", args.k, 4)?;
    let min_freq = r.resolve("top-words.min-freq", args.min_freq, 100)?;
    let axes_raw = r.resolve_opt("top-words.axes", args.axes)?;

    let matrix = ctx.cache.load_embedding()?;
    let (ica, _) = ctx.cache.load_ica()?;
    let d = ica.components.ncols();
    let axes: Vec<usize> = match axes_raw {
        Some(raw) => parse_list(&raw, "axis")?,
        None => (0..d).collect(),
    };

    let mut out = Provenance::new("table1-style", &r)
        .with("variant", "ica components, unnormalized")
        .with("min-freq", min_freq)
        .hash_comments();
    out.push_str("axis\trank\tword\tvalue\tfreq\n");
    for &axis in &axes {
        let idx = top_word_indices(&ica.components, matrix.freq(), axis, k, min_freq)?;
        for (rank, &t) in idx.iter().enumerate() {
            let _ = writeln!(
                out,
                "{axis}\t{}\t{}\t{}\t{}",
                rank + 1,
                matrix.word(t),
                ica.components[[t, axis]],
                matrix.freq()[t]
            );
        }
    }
    ctx.ensure_out()?;
    let path = ctx.out_path("top_words.tsv");
    write_text(&path, &out)?;
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Args)]
pub struct ContributorsArgs {
    /// Axis pair "i,j"; repeatable.
    #[arg(long = "pair", required = true)]
    pairs: Vec<String>,
    /// Contributors per pair.
    #[arg(long)]
    k: Option<usize>,
}

pub fn contributors(ctx: &Ctx, args: ContributorsArgs) -> Result<(), CmdError> {
    let mut r = Resolver::new(&ctx.config);
    let k = r.resolve("contributors.k", args.k, 6)?;
    r.note("contributors.pairs", args.pairs.join(";"));

    let matrix = ctx.cache.load_embedding()?;
    let (ica, _) = ctx.cache.load_ica()?;
    let hoc = ctx.cache.load_hoc()?;

    ctx.ensure_out()?;
    for pair in &args.pairs {
        let parts: Vec<usize> = parse_list(pair, "axis")?;
        if parts.len() != 2 {
            return Err(CmdError::Usage(format!("--pair needs 'i,j', got '{pair}'")));
        }
        let (i, j) = (parts[0], parts[1]);
        let list = icomp_core::top_contributors(&ica.components, i, j, k)?;
        let mut out = Provenance::new("table3-style", &r)
            .with("pair", format!("({i}, {j})"))
            .with("hoc", hoc.values[[i, j]])
            .with("variant", "ica components, unnormalized")
            .hash_comments();
        out.push_str("rank\tword\tcontribution\n");
        for (rank, (t, v)) in list.entries.iter().enumerate() {
            let _ = writeln!(out, "{}\t{}\t{}", rank + 1, matrix.word(*t), v);
        }
        let path = ctx.out_path(&format!("contributors_{i}_{j}.tsv"));
        write_text(&path, &out)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

#[derive(Args)]
pub struct FreqCorrArgs {
    /// Correlate ln(1 + count) instead of raw counts.
    #[arg(long)]
    log_counts: bool,
}

pub fn freq_corr(ctx: &Ctx, args: FreqCorrArgs) -> Result<(), CmdError> {
    let mut r = Resolver::new(&ctx.config);
    r.note("freq-corr.log-counts", args.log_counts);

    let matrix = ctx.cache.load_embedding()?;
    let (ica, _) = ctx.cache.load_ica()?;
    let fc = icomp_core::frequency_correlation(&ica.components, matrix.freq(), args.log_counts)?;

    let mut out = Provenance::new("fig6-style", &r)
        .with("counts", if args.log_counts { "ln(1+n_w)" } else { "raw n_w" })
        .hash_comments();
    out.push_str("axis,r,degenerate\n");
    for (axis, (r_val, degenerate)) in fc.r.iter().zip(fc.degenerate.iter()).enumerate() {
        let _ = writeln!(out, "{axis},{r_val},{}", u8::from(*degenerate));
    }
    ctx.ensure_out()?;
    let path = ctx.out_path("freq_corr.csv");
    write_text(&path, &out)?;
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Args)]
pub struct HocHistArgs {
    #[arg(long)]
    bins: Option<usize>,
    /// Lower edge of the histogram range.
    #[arg(long)]
    min: Option<f64>,
    /// Upper edge of the histogram range.
    #[arg(long)]
    max: Option<f64>,
    /// Include diagonal fourth moments.
    #[arg(long)]
    include_diag: bool,
}

pub fn hoc_hist(ctx: &Ctx, args: HocHistArgs) -> Result<(), CmdError> {
    let mut r = Resolver::new(&ctx.config);
    let bins = r.resolve("hoc-hist.bins", args.bins, 50)?;
    let lo = r.resolve("hoc-hist.min", args.min, 0.0)?;
    let hi = r.resolve("hoc-hist.max", args.max, 3.0)?;
    r.note("hoc-hist.include-diag", args.include_diag);

    let hoc = ctx.cache.load_hoc()?;
    let counts = icomp_core::hoc_histogram(&hoc, args.include_diag, bins, (lo, hi))?;

    let mut out = Provenance::new("fig7-style", &r)
        .with("entries", if args.include_diag { "upper triangle + diagonal" } else { "upper triangle" })
        .with("clamping", "out-of-range values fall into the end bins")
        .hash_comments();
    out.push_str("bin_lo,bin_hi,count\n");
    let width = (hi - lo) / bins as f64;
    for (b, count) in counts.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{count}",
            lo + b as f64 * width,
            lo + (b + 1) as f64 * width
        );
    }
    ctx.ensure_out()?;
    let path = ctx.out_path("hoc_hist.csv");
    write_text(&path, &out)?;
    println!("wrote {}", path.display());
    Ok(())
}
