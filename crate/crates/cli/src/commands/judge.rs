//! Judge harness commands: trial building and response aggregation.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use icomp_core::judge::{
    self, build_trials, read_responses, resolve, write_requests, write_trials, JudgeConfig,
};

use crate::artifacts::write_text;
use crate::config::{parse_list, Provenance, Resolver};
use crate::{CmdError, Ctx};

#[derive(Args)]
pub struct JudgeBuildArgs {
    /// Correlation ranks probed, e.g. "1,2,3,4,5".
    #[arg(long)]
    ks: Option<String>,
    /// Words per list.
    #[arg(long)]
    top_k: Option<usize>,
    /// Frequency filter for the lists.
    #[arg(long)]
    min_freq: Option<u64>,
    /// Low-dependence fraction of the ranking.
    #[arg(long)]
    bottom_frac: Option<f64>,
    /// Leading components probed.
    #[arg(long)]
    max_components: Option<usize>,
    /// Rank partners by raw HOC value instead of |value - 1|.
    #[arg(long)]
    rank_by_raw: bool,
    #[arg(long)]
    seed: Option<u64>,
}

pub fn build(ctx: &Ctx, args: JudgeBuildArgs) -> Result<(), CmdError> {
    let mut r = Resolver::new(&ctx.config);
    let ks_raw = r.resolve("judge.ks", args.ks, "1,2,3,4,5".to_string())?;
    let cfg = JudgeConfig {
        ks: parse_list(&ks_raw, "k")?,
        top_k: r.resolve("judge.top-k", args.top_k, 5)?,
        min_freq: r.resolve("judge.min-freq", args.min_freq, 100)?,
        bottom_frac: r.resolve("judge.bottom-frac", args.bottom_frac, 0.3)?,
        max_components: r.resolve("judge.max-components", args.max_components, 100)?,
        rank_by_raw: args.rank_by_raw,
        seed: r.resolve("judge.seed", args.seed, 0)?,
    };
    r.note("judge.rank-by-raw", cfg.rank_by_raw);

    let matrix = ctx.cache.load_embedding()?;
    let (ica, _) = ctx.cache.load_ica()?;
    let hoc = ctx.cache.load_hoc()?;
    let trials = build_trials(&ica.components, matrix.vocab(), matrix.freq(), &hoc, &cfg)?;

    let prov = Provenance::new("judge-requests", &r).with("seed", cfg.seed);
    ctx.cache.ensure()?;
    ctx.ensure_out()?;

    let mut trial_bytes = Vec::new();
    serde_json::to_writer(&mut trial_bytes, &prov.json())
        .map_err(|e| CmdError::Data(e.to_string()))?;
    trial_bytes.push(b'\n');
    write_trials(&mut trial_bytes, &trials)?;
    std::fs::write(ctx.cache.trials_path(), &trial_bytes)
        .map_err(|e| CmdError::Data(e.to_string()))?;

    let mut req_bytes = Vec::new();
    serde_json::to_writer(&mut req_bytes, &prov.json())
        .map_err(|e| CmdError::Data(e.to_string()))?;
    req_bytes.push(b'\n');
    write_requests(&mut req_bytes, &trials)?;
    let req_path = ctx.out_path("judge_requests.jsonl");
    std::fs::write(&req_path, &req_bytes).map_err(|e| CmdError::Data(e.to_string()))?;

    println!(
        "built {} trials -> {} and {}",
        trials.len(),
        ctx.cache.trials_path().display(),
        req_path.display()
    );
    Ok(())
}

#[derive(Args)]
pub struct JudgeAggregateArgs {
    /// JSON-lines response file: {"trial_id": ..., "text": ...}.
    #[arg(long)]
    responses: Option<PathBuf>,
    /// Ks to report (default: every k present in the trials).
    #[arg(long)]
    ks: Option<String>,
}

pub fn aggregate(ctx: &Ctx, args: JudgeAggregateArgs) -> Result<(), CmdError> {
    let mut r = Resolver::new(&ctx.config);
    let responses_path: PathBuf = r
        .resolve_opt("judge.responses", args.responses)?
        .ok_or_else(|| CmdError::Usage("--responses is required".into()))?;
    let ks_raw = r.resolve_opt("judge.aggregate-ks", args.ks)?;

    let trials = ctx.cache.load_trials()?;
    let file = std::fs::File::open(&responses_path).map_err(|e| {
        CmdError::Data(format!("cannot open {}: {e}", responses_path.display()))
    })?;
    let responses = read_responses(std::io::BufReader::new(file))?;

    let mut verdicts = Vec::with_capacity(trials.len());
    let mut unanswered = 0usize;
    for trial in &trials {
        match responses.get(&trial.id) {
            Some(text) => verdicts.push(resolve(trial, text)),
            None => {
                unanswered += 1;
                verdicts.push(resolve(trial, ""));
            }
        }
    }
    if unanswered > 0 {
        eprintln!("warning: {unanswered} trials had no response; counted as undecided");
    }

    let ks: Vec<usize> = match ks_raw {
        Some(raw) => parse_list(&raw, "k")?,
        None => {
            let mut ks: Vec<usize> = trials.iter().map(|t| t.k).collect();
            ks.sort_unstable();
            ks.dedup();
            ks
        }
    };
    let rows = judge::aggregate(&verdicts, &ks)?;

    let mut out = Provenance::new("table2-style", &r)
        .with("responses", responses_path.display())
        .hash_comments();
    out.push_str("metric");
    for row in &rows {
        let _ = write!(out, ",k={}", row.k);
    }
    out.push('\n');
    for (name, pick) in [
        ("high_pair_pct", 0usize),
        ("low_pair_pct", 1),
        ("undecided_pct", 2),
    ] {
        out.push_str(name);
        for row in &rows {
            let v = match pick {
                0 => row.high_pct,
                1 => row.low_pct,
                _ => row.undecided_pct,
            };
            let _ = write!(out, ",{v:.3}");
        }
        out.push('\n');
    }
    out.push_str("total");
    for row in &rows {
        let _ = write!(out, ",{}", row.total);
    }
    out.push('\n');

    ctx.ensure_out()?;
    let path = ctx.out_path("judge_table.csv");
    write_text(&path, &out)?;
    println!("wrote {}", path.display());
    Ok(())
}
