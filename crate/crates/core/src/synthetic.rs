//! Deterministic synthetic data generators.
//!
//! Used to validate the estimators on data with known ground truth: mixtures
//! of independent non-Gaussian sources, dependent pairs with a planted
//! higher-order correlation, and group-structured embedding fixtures.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::stats;

/// Independent source families with unit variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    /// Laplace with variance 1 (scale 1/sqrt(2)).
    Laplace,
    /// Uniform on [-sqrt(3), sqrt(3)].
    Uniform,
}

/// Draws `n` samples of `kinds.len()` independent sources, one column per
/// source.
pub fn independent_sources(n: usize, kinds: &[SourceKind], seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = kinds.len();
    let mut out = Array2::zeros((n, k));
    for (j, kind) in kinds.iter().enumerate() {
        for i in 0..n {
            out[[i, j]] = match kind {
                SourceKind::Laplace => {
                    let u: f64 = rng.random_range(-0.5..0.5);
                    let b = 1.0 / 2.0f64.sqrt();
                    -b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
                }
                SourceKind::Uniform => rng.random_range(-3.0f64.sqrt()..3.0f64.sqrt()),
            };
        }
    }
    out
}

/// A random k x k mixing matrix with standard-normal entries, re-drawn until
/// it is comfortably invertible.
pub fn random_mixing(k: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut m = Array2::zeros((k, k));
        for v in m.iter_mut() {
            *v = rng.sample::<f64, _>(StandardNormal);
        }
        if crate::linalg::inverse(&m).is_ok() {
            return m;
        }
    }
}

/// Standardizes every column to mean 0 and variance 1 (1/n convention).
pub fn standardize_columns(x: &Array2<f64>) -> Array2<f64> {
    let means = stats::column_means(x);
    let vars = stats::column_vars(x);
    let mut out = x.clone();
    for (j, mut col) in out.columns_mut().into_iter().enumerate() {
        let s = vars[j].sqrt();
        col.mapv_inplace(|v| (v - means[j]) / s);
    }
    out
}

/// Uncorrelated but dependent pair: `x = r cos(theta)`, `y = r sin(theta)`
/// with `theta` uniform and `r` a two-point scale mixture taking
/// `r_large` with probability `p_large` and 1 otherwise.
///
/// After standardization the pair has higher-order correlation
/// `E(r^4) / (2 E(r^2)^2)` while staying exactly uncorrelated in law.
pub fn scale_mixture_pair(n: usize, r_large: f64, p_large: f64, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Array2::zeros((n, 2));
    for i in 0..n {
        let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let r = if rng.random_range(0.0..1.0) < p_large {
            r_large
        } else {
            1.0
        };
        out[[i, 0]] = r * theta.cos();
        out[[i, 1]] = r * theta.sin();
    }
    out
}

/// Group-structured component fixture.
///
/// Axes are partitioned into `groups` consecutive blocks of
/// `axes_per_group`. Every word belongs to one group; on its group's axes it
/// takes `base + noise`, scaled by a per-word amplitude shared across the
/// whole block, and plain noise elsewhere. Within-block axis pairs therefore
/// carry a large higher-order correlation while cross-block pairs stay near
/// the independence baseline.
pub struct GroupModel {
    pub components: Array2<f64>,
    pub vocab: Vec<String>,
    pub freq: Vec<u64>,
    pub word_group: Vec<usize>,
    pub groups: usize,
    pub axes_per_group: usize,
}

pub struct GroupModelConfig {
    pub words: usize,
    pub groups: usize,
    pub axes_per_group: usize,
    pub base: f64,
    pub amplitude: f64,
    pub amplitude_prob: f64,
    pub seed: u64,
}

impl Default for GroupModelConfig {
    fn default() -> Self {
        Self {
            words: 1200,
            groups: 6,
            axes_per_group: 6,
            base: 3.0,
            amplitude: 4.0,
            amplitude_prob: 0.1,
            seed: 0,
        }
    }
}

pub fn group_model(cfg: &GroupModelConfig) -> GroupModel {
    let d = cfg.groups * cfg.axes_per_group;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut components = Array2::zeros((cfg.words, d));
    let mut vocab = Vec::with_capacity(cfg.words);
    let mut freq = Vec::with_capacity(cfg.words);
    let mut word_group = Vec::with_capacity(cfg.words);
    for t in 0..cfg.words {
        let g = t % cfg.groups;
        word_group.push(g);
        vocab.push(format!("w{t:05}"));
        freq.push(rng.random_range(100..10_000));
        let amp = if rng.random_range(0.0..1.0) < cfg.amplitude_prob {
            cfg.amplitude
        } else {
            1.0
        };
        for a in 0..d {
            let noise: f64 = rng.sample(StandardNormal);
            components[[t, a]] = if a / cfg.axes_per_group == g {
                amp * (cfg.base + noise)
            } else {
                noise
            };
        }
    }
    GroupModel {
        components: standardize_columns(&components),
        vocab,
        freq,
        word_group,
        groups: cfg.groups,
        axes_per_group: cfg.axes_per_group,
    }
}

/// Similarity pairs with gold scores derived from group membership: same
/// group scores high, different groups low, with a small seeded jitter to
/// break rank ties.
pub fn group_similarity_pairs(
    model: &GroupModel,
    same_pairs: usize,
    cross_pairs: usize,
    seed: u64,
) -> Vec<(String, String, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = model.vocab.len();
    let mut pairs = Vec::with_capacity(same_pairs + cross_pairs);
    let mut seen = std::collections::HashSet::new();
    while pairs.len() < same_pairs {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a == b || model.word_group[a] != model.word_group[b] {
            continue;
        }
        let key = (a.min(b), a.max(b));
        if !seen.insert(key) {
            continue;
        }
        let jitter: f64 = rng.random_range(-0.2..0.2);
        pairs.push((model.vocab[a].clone(), model.vocab[b].clone(), 8.0 + jitter));
    }
    while pairs.len() < same_pairs + cross_pairs {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a == b || model.word_group[a] == model.word_group[b] {
            continue;
        }
        let key = (a.min(b), a.max(b));
        if !seen.insert(key) {
            continue;
        }
        let jitter: f64 = rng.random_range(-0.2..0.2);
        pairs.push((model.vocab[a].clone(), model.vocab[b].clone(), 2.0 + jitter));
    }
    pairs
}

/// Renders a word2vec-text fixture with group structure plus a matching
/// frequency table. Returns `(embedding_text, frequency_text)`.
pub fn word2vec_fixture(words: usize, dim: usize, groups: usize, seed: u64) -> (String, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut emb = String::new();
    let mut freqs = String::new();
    emb.push_str(&format!("{words} {dim}\n"));
    let axes_per_group = (dim / groups).max(1);
    for t in 0..words {
        let g = t % groups;
        let word = format!("g{g:02}w{t:04}");
        let amp = if rng.random_range(0.0..1.0) < 0.15 { 3.0 } else { 1.0 };
        let mut row = Vec::with_capacity(dim);
        for a in 0..dim {
            let noise: f64 = rng.sample(StandardNormal);
            let v = if a / axes_per_group == g {
                amp * (2.5 + noise)
            } else {
                0.7 * noise
            };
            row.push(format!("{v:.6}"));
        }
        emb.push_str(&word);
        emb.push(' ');
        emb.push_str(&row.join(" "));
        emb.push('\n');
        freqs.push_str(&format!("{word}\t{}\n", rng.random_range(1..5_000)));
    }
    (emb, freqs)
}

/// Seeded Fisher-Yates shuffle helper used by trial builders.
pub fn shuffled<T: Clone>(items: &[T], rng: &mut ChaCha8Rng) -> Vec<T> {
    let mut out = items.to_vec();
    out.shuffle(rng);
    out
}
