//! Word-intrusion scoring command.

use std::fmt::Write as _;

use clap::Args;
use icomp_core::cache;
use icomp_core::intrusion::{score_all_axes, sigma_order, IntrusionConfig};

use crate::artifacts::write_text;
use crate::config::{Provenance, Resolver};
use crate::{CmdError, Ctx};

#[derive(Args)]
pub struct IntrusionArgs {
    /// Top words per axis.
    #[arg(long)]
    k: Option<usize>,
    /// Intruders sampled per axis.
    #[arg(long)]
    intruders: Option<usize>,
    /// Frequency filter for top-word lists.
    #[arg(long)]
    min_freq: Option<u64>,
    /// Bottom quantile fraction on the scored axis.
    #[arg(long)]
    low_q: Option<f64>,
    /// Top quantile fraction on some other axis.
    #[arg(long)]
    high_q: Option<f64>,
    /// Apply the frequency filter to the intruder pool too.
    #[arg(long)]
    filter_pool: bool,
    #[arg(long)]
    seed: Option<u64>,
}

pub fn run(ctx: &Ctx, args: IntrusionArgs) -> Result<(), CmdError> {
    let mut r = Resolver::new(&ctx.config);
    let cfg = IntrusionConfig {
        k: r.resolve("intrusion.k", args.k, 5)?,
        l: r.resolve("intrusion.intruders", args.intruders, 100)?,
        min_freq: r.resolve("intrusion.min-freq", args.min_freq, 100)?,
        low_q: r.resolve("intrusion.low-q", args.low_q, 0.5)?,
        high_q: r.resolve("intrusion.high-q", args.high_q, 0.1)?,
        filter_pool: args.filter_pool,
        seed: r.resolve("intrusion.seed", args.seed, 0)?,
    };
    r.note("intrusion.filter-pool", cfg.filter_pool);

    let matrix = ctx.cache.load_embedding()?;
    let (ica, _) = ctx.cache.load_ica()?;
    let scores = score_all_axes(&ica.components, matrix.freq(), &cfg)?;
    let sigma = sigma_order(&scores);

    let prov = Provenance::new("cache-intrusion", &r).with("seed", cfg.seed);
    cache::save_intrusion(&scores, &sigma, &ctx.cache.intrusion_path(), &prov.meta_string())?;
    println!(
        "scored {} axes -> {}",
        scores.len(),
        ctx.cache.intrusion_path().display()
    );

    let mut out = Provenance::new("intrusion-scores", &r)
        .with("seed", cfg.seed)
        .with("variant", "ica components, unnormalized")
        .hash_comments();
    out.push_str("axis\tscore\tintra\tinter\ttop_words\n");
    for s in &scores {
        let tops = icomp_core::top_words(
            &ica.components,
            matrix.vocab(),
            matrix.freq(),
            s.axis,
            cfg.k,
            cfg.min_freq,
        )?;
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            s.axis,
            s.score,
            s.intra,
            s.inter,
            tops.join(" ")
        );
    }
    ctx.ensure_out()?;
    let path = ctx.out_path("intrusion.tsv");
    write_text(&path, &out)?;
    println!("wrote {}", path.display());
    Ok(())
}
