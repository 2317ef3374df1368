//! Pairwise semantic-relatedness trials against a pluggable text judge.
//!
//! For each probed component, three word lists are built: the component's
//! own top words, the top words of its k-th most dependent component (by
//! higher-order correlation), and the top words of a random component from
//! the bottom 30% of that ranking. The judge is asked which pair is more
//! related; label order is counterbalanced with a reversed twin per trial.
//! Requests and responses travel as JSON-lines so any external runner can
//! sit on the other side; a deterministic mock serves offline tests.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::hoc::{top_words, HocMatrix};
use crate::synthetic::shuffled;

/// Which prompt label carries the high-HOC pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelMap {
    HighIsAb,
    HighIsCd,
}

/// One judging trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeTrial {
    pub id: String,
    pub component: usize,
    pub k: usize,
    pub wordlist_1: Vec<String>,
    pub wordlist_2: Vec<String>,
    pub wordlist_3: Vec<String>,
    pub prompt: String,
    pub label_map: LabelMap,
    pub seed: u64,
}

/// Trial building parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct JudgeConfig {
    /// Correlation ranks probed (1 = most dependent partner).
    pub ks: Vec<usize>,
    /// Words per list.
    pub top_k: usize,
    /// Frequency filter for the top-word lists.
    pub min_freq: u64,
    /// Fraction of the dependence ranking treated as "low".
    pub bottom_frac: f64,
    /// Number of leading (skewness-ranked) components probed.
    pub max_components: usize,
    /// Rank partners by raw HOC value instead of |value - 1|.
    pub rank_by_raw: bool,
    pub seed: u64,
}

impl Default for JudgeConfig {
    fn default() -> Self {
        Self {
            ks: (1..=5).collect(),
            top_k: 5,
            min_freq: 100,
            bottom_frac: 0.3,
            max_components: 100,
            rank_by_raw: false,
            seed: 0,
        }
    }
}

fn render_list(words: &[String]) -> String {
    let quoted: Vec<String> = words.iter().map(|w| format!("'{w}'")).collect();
    format!("[{}]", quoted.join(", "))
}

fn render_prompt(list_1: &[String], list_ab: &[String], list_cd: &[String]) -> String {
    format!(
        "Question:\n  You are given 2 list pairs (A, B), (C, D).\n  If one pair is more semantically relevant than the other, answer the pair.\n  If you cannot determine, answer \"XX\".\n\nList pair (A, B): ({}, {})\nList pair (C, D): ({}, {})\n\nOutput:\n  \"AB\" if (A, B) is more semantically related\n  \"CD\" if (C, D) is more semantically related\n  \"XX\" if equally related, or you can't decide\nRespond with only AB, CD, or XX.",
        render_list(list_1),
        render_list(list_ab),
        render_list(list_1),
        render_list(list_cd),
    )
}

/// Ranking of the other components by dependence with `component`:
/// descending `|E(S_i^2 S_j^2) - 1|` (or raw value), ties by ascending axis.
pub fn dependence_ranking(hoc: &HocMatrix, component: usize, rank_by_raw: bool) -> Vec<usize> {
    let d = hoc.dim();
    let key = |j: usize| {
        let v = hoc.values[[component, j]];
        if rank_by_raw {
            v
        } else {
            (v - 1.0).abs()
        }
    };
    let mut others: Vec<usize> = (0..d).filter(|&j| j != component).collect();
    others.sort_by(|&a, &b| key(b).partial_cmp(&key(a)).unwrap().then(a.cmp(&b)));
    others
}

/// Builds the full trial set: for each probed component and each k, one
/// trial per label order (a reversed twin), sharing the same shuffled word
/// lists.
pub fn build_trials(
    s: &Array2<f64>,
    vocab: &[String],
    freq: &[u64],
    hoc: &HocMatrix,
    cfg: &JudgeConfig,
) -> Result<Vec<JudgeTrial>> {
    let d = s.ncols();
    if d < 2 {
        return Err(CoreError::InvalidParam("need at least 2 components".into()));
    }
    let probed = cfg.max_components.min(d);
    if d < cfg.max_components {
        log::warn!(
            "only {d} components available (asked to probe {}); using all",
            cfg.max_components
        );
    }
    let max_k = cfg.ks.iter().copied().max().unwrap_or(0);
    if max_k == 0 {
        return Err(CoreError::InvalidParam("empty k list".into()));
    }
    if max_k > d - 1 {
        return Err(CoreError::InvalidParam(format!(
            "k = {max_k} exceeds the {} available partners",
            d - 1
        )));
    }

    let mut top_cache: HashMap<usize, Vec<String>> = HashMap::new();
    let mut top_of = |axis: usize| -> Result<Vec<String>> {
        if let Some(hit) = top_cache.get(&axis) {
            return Ok(hit.clone());
        }
        let words = top_words(s, vocab, freq, axis, cfg.top_k, cfg.min_freq)?;
        if words.len() < cfg.top_k {
            return Err(CoreError::InvalidParam(format!(
                "component {axis}: insufficient vocabulary after frequency filter \
                 ({} of {} words)",
                words.len(),
                cfg.top_k
            )));
        }
        top_cache.insert(axis, words.clone());
        Ok(words)
    };

    let mut trials = Vec::with_capacity(probed * cfg.ks.len() * 2);
    for i in 0..probed {
        let ranking = dependence_ranking(hoc, i, cfg.rank_by_raw);
        let bottom_len = ((ranking.len() as f64) * cfg.bottom_frac).ceil() as usize;
        let bottom_start = ranking.len() - bottom_len.max(1);
        for &k in &cfg.ks {
            let partner = ranking[k - 1];
            let bottom: Vec<usize> = ranking[bottom_start..]
                .iter()
                .copied()
                .filter(|&j| j != partner)
                .collect();
            if bottom.is_empty() {
                return Err(CoreError::InvalidParam(format!(
                    "component {i}: no low-dependence component available for k = {k}"
                )));
            }
            // per-(i, k) derived stream: low-component draw, then list shuffles
            let seed = cfg.seed ^ i as u64 ^ k as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let low = bottom[rng.random_range(0..bottom.len())];

            let list_1 = shuffled(&top_of(i)?, &mut rng);
            let list_2 = shuffled(&top_of(partner)?, &mut rng);
            let list_3 = shuffled(&top_of(low)?, &mut rng);

            for (twin, label_map) in [(0u8, LabelMap::HighIsAb), (1u8, LabelMap::HighIsCd)] {
                let (ab, cd) = match label_map {
                    LabelMap::HighIsAb => (&list_2, &list_3),
                    LabelMap::HighIsCd => (&list_3, &list_2),
                };
                trials.push(JudgeTrial {
                    id: format!("c{i:03}k{k}r{twin}"),
                    component: i,
                    k,
                    wordlist_1: list_1.clone(),
                    wordlist_2: list_2.clone(),
                    wordlist_3: list_3.clone(),
                    prompt: render_prompt(&list_1, ab, cd),
                    label_map,
                    seed,
                });
            }
        }
    }
    Ok(trials)
}

/// Raw response categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParsedVerdict {
    Ab,
    Cd,
    Xx,
    ParseFailure,
}

/// Semantic resolution of a response through the trial's label map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolved {
    HighPair,
    LowPair,
    Undecided,
}

/// Trims whitespace and accepts exactly AB, CD, or XX (case-insensitive).
pub fn parse_response(text: &str) -> ParsedVerdict {
    match text.trim().to_ascii_uppercase().as_str() {
        "AB" => ParsedVerdict::Ab,
        "CD" => ParsedVerdict::Cd,
        "XX" => ParsedVerdict::Xx,
        _ => ParsedVerdict::ParseFailure,
    }
}

/// A parsed and resolved response to one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeVerdict {
    pub trial_id: String,
    pub k: usize,
    pub raw: String,
    pub parsed: ParsedVerdict,
    pub resolved: Resolved,
}

/// Parses a raw response and resolves it through the trial's label map.
pub fn resolve(trial: &JudgeTrial, raw: &str) -> JudgeVerdict {
    let parsed = parse_response(raw);
    let resolved = match (parsed, trial.label_map) {
        (ParsedVerdict::Ab, LabelMap::HighIsAb) => Resolved::HighPair,
        (ParsedVerdict::Ab, LabelMap::HighIsCd) => Resolved::LowPair,
        (ParsedVerdict::Cd, LabelMap::HighIsAb) => Resolved::LowPair,
        (ParsedVerdict::Cd, LabelMap::HighIsCd) => Resolved::HighPair,
        (ParsedVerdict::Xx, _) | (ParsedVerdict::ParseFailure, _) => Resolved::Undecided,
    };
    JudgeVerdict {
        trial_id: trial.id.clone(),
        k: trial.k,
        raw: raw.to_string(),
        parsed,
        resolved,
    }
}

/// Percentage row for one k.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub k: usize,
    pub high_pct: f64,
    pub low_pct: f64,
    pub undecided_pct: f64,
    pub total: usize,
}

/// Percentages of high-pair / low-pair / undecided resolutions per probed k.
/// Parse failures count as undecided. Errors when a k has no verdicts.
pub fn aggregate(verdicts: &[JudgeVerdict], ks: &[usize]) -> Result<Vec<AggregateRow>> {
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        let mut high = 0usize;
        let mut low = 0usize;
        let mut undecided = 0usize;
        for v in verdicts.iter().filter(|v| v.k == k) {
            match v.resolved {
                Resolved::HighPair => high += 1,
                Resolved::LowPair => low += 1,
                Resolved::Undecided => undecided += 1,
            }
        }
        let total = high + low + undecided;
        if total == 0 {
            return Err(CoreError::InvalidParam(format!("no verdicts for k = {k}")));
        }
        let pct = |c: usize| 100.0 * c as f64 / total as f64;
        rows.push(AggregateRow {
            k,
            high_pct: pct(high),
            low_pct: pct(low),
            undecided_pct: pct(undecided),
            total,
        });
    }
    Ok(rows)
}

/// Text-in/text-out judge interface.
pub trait Judge {
    fn respond(&self, trial: &JudgeTrial) -> String;
}

/// Offline judge that answers from ground-truth word clusters: the pair
/// whose lists share more cluster ids wins; exact ties answer "XX".
pub struct MockJudge {
    pub clusters: HashMap<String, usize>,
}

/// Free-function form of the mock for direct use in tests.
pub fn mock_judge(trial: &JudgeTrial, clusters: &HashMap<String, usize>) -> String {
    let ids = |words: &[String]| -> HashSet<usize> {
        words.iter().filter_map(|w| clusters.get(w).copied()).collect()
    };
    let base = ids(&trial.wordlist_1);
    let (ab_list, cd_list) = match trial.label_map {
        LabelMap::HighIsAb => (&trial.wordlist_2, &trial.wordlist_3),
        LabelMap::HighIsCd => (&trial.wordlist_3, &trial.wordlist_2),
    };
    let ab_overlap = base.intersection(&ids(ab_list)).count();
    let cd_overlap = base.intersection(&ids(cd_list)).count();
    match ab_overlap.cmp(&cd_overlap) {
        std::cmp::Ordering::Greater => "AB".to_string(),
        std::cmp::Ordering::Less => "CD".to_string(),
        std::cmp::Ordering::Equal => "XX".to_string(),
    }
}

impl Judge for MockJudge {
    fn respond(&self, trial: &JudgeTrial) -> String {
        mock_judge(trial, &self.clusters)
    }
}

#[derive(Serialize, Deserialize)]
struct RequestRecord {
    trial_id: String,
    prompt: String,
}

#[derive(Serialize, Deserialize)]
struct ResponseRecord {
    trial_id: String,
    text: String,
}

/// Writes `{trial_id, prompt}` JSON lines.
pub fn write_requests<W: Write>(mut w: W, trials: &[JudgeTrial]) -> Result<()> {
    for t in trials {
        let rec = RequestRecord {
            trial_id: t.id.clone(),
            prompt: t.prompt.clone(),
        };
        serde_json::to_writer(&mut w, &rec).map_err(io_err)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Writes full trial records as JSON lines.
pub fn write_trials<W: Write>(mut w: W, trials: &[JudgeTrial]) -> Result<()> {
    for t in trials {
        serde_json::to_writer(&mut w, t).map_err(io_err)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads trial records back, skipping non-trial lines (e.g. provenance).
pub fn read_trials<R: BufRead>(r: R) -> Result<Vec<JudgeTrial>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if let Ok(t) = serde_json::from_str::<JudgeTrial>(&line) {
            out.push(t);
        }
    }
    Ok(out)
}

/// Reads `{trial_id, text}` responses, skipping non-response lines.
pub fn read_responses<R: BufRead>(r: R) -> Result<HashMap<String, String>> {
    let mut out = HashMap::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if let Ok(rec) = serde_json::from_str::<ResponseRecord>(&line) {
            out.insert(rec.trial_id, rec.text);
        }
    }
    Ok(out)
}

fn io_err(e: serde_json::Error) -> CoreError {
    CoreError::Io(std::io::Error::new(std::io::ErrorKind::Other, e))
}
