//! Word-intrusion consistency scoring of component axes.
//!
//! Each axis is scored by how far randomly drawn "intruder" words sit from
//! the axis's top words, relative to the top words' own spread. Scores
//! induce the sigma ordering used to pick the best-interpretable axes for
//! the component graph.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};
use crate::hoc::top_word_indices;
use crate::stats::descending_ranks;

/// Consistency score of one axis: `score = inter / intra`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyScore {
    pub axis: usize,
    pub score: f64,
    /// Mean pairwise distance among the top-k words.
    pub intra: f64,
    /// Mean over intruders of the mean distance to the top-k words.
    pub inter: f64,
    /// Sampled intruder word indices (with replacement).
    pub intruder_sample: Vec<usize>,
    pub seed: u64,
}

/// Permutation of display axes by descending consistency score.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaOrder {
    /// `sigma[j]` is the axis with the j-th highest score.
    pub sigma: Vec<usize>,
}

/// Scoring parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntrusionConfig {
    /// Top words per axis.
    pub k: usize,
    /// Intruders sampled per axis.
    pub l: usize,
    /// Frequency filter applied to the top-word lists.
    pub min_freq: u64,
    /// Bottom quantile fraction an intruder must occupy on the scored axis.
    pub low_q: f64,
    /// Top quantile fraction it must reach on at least one other axis.
    pub high_q: f64,
    /// Apply the frequency filter to the intruder pool as well.
    pub filter_pool: bool,
    pub seed: u64,
}

impl Default for IntrusionConfig {
    fn default() -> Self {
        Self {
            k: 5,
            l: 100,
            min_freq: 100,
            low_q: 0.5,
            high_q: 0.1,
            filter_pool: false,
            seed: 0,
        }
    }
}

fn check_quantiles(low_q: f64, high_q: f64) -> Result<()> {
    for (name, v) in [("low_q", low_q), ("high_q", high_q)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(CoreError::InvalidParam(format!(
                "{name} must be in [0, 1], got {v}"
            )));
        }
    }
    Ok(())
}

/// Words simultaneously in the bottom `low_q` fraction by component value on
/// `axis` and in the top `high_q` fraction on at least one other axis.
///
/// Quantile ranks are descending-value competition ranks divided by n, ties
/// sharing the better rank.
pub fn intruder_pool(
    s: &Array2<f64>,
    axis: usize,
    low_q: f64,
    high_q: f64,
) -> Result<Vec<usize>> {
    let (n, d) = (s.nrows(), s.ncols());
    if axis >= d {
        return Err(CoreError::AxisOutOfRange { axis, d });
    }
    if d < 2 {
        return Err(CoreError::InvalidParam(
            "intruder pool needs at least 2 axes".into(),
        ));
    }
    check_quantiles(low_q, high_q)?;

    let col: Vec<f64> = s.column(axis).to_vec();
    let ranks = descending_ranks(&col);
    let mut in_bottom = vec![false; n];
    for (t, &r) in ranks.iter().enumerate() {
        in_bottom[t] = r as f64 / n as f64 > 1.0 - low_q;
    }

    let mut top_elsewhere = vec![false; n];
    for other in 0..d {
        if other == axis {
            continue;
        }
        let col: Vec<f64> = s.column(other).to_vec();
        let ranks = descending_ranks(&col);
        for (t, &r) in ranks.iter().enumerate() {
            if r as f64 / n as f64 <= high_q {
                top_elsewhere[t] = true;
            }
        }
    }

    let pool: Vec<usize> = (0..n)
        .filter(|&t| in_bottom[t] && top_elsewhere[t])
        .collect();
    if pool.is_empty() {
        return Err(CoreError::EmptyIntruderPool { axis });
    }
    Ok(pool)
}

/// Euclidean distance between two rows.
fn row_distance(s: &Array2<f64>, a: usize, b: usize) -> f64 {
    s.row(a)
        .iter()
        .zip(s.row(b).iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// IntraDist/InterDist over explicit member indices.
///
/// `intra` averages the distances over all ordered distinct top pairs
/// (denominator `k(k-1)`); `inter` averages, over intruders, the mean
/// distance from the intruder to the top words.
pub fn score_from_members(
    s: &Array2<f64>,
    top: &[usize],
    intruders: &[usize],
    axis: usize,
) -> Result<(f64, f64)> {
    let k = top.len();
    if k < 2 {
        return Err(CoreError::InvalidParam(format!(
            "axis {axis}: need at least 2 top words to score, got {k}"
        )));
    }
    if intruders.is_empty() {
        return Err(CoreError::InvalidParam(format!(
            "axis {axis}: empty intruder sample"
        )));
    }
    let mut intra = 0.0;
    for &a in top {
        for &b in top {
            if a != b {
                intra += row_distance(s, a, b);
            }
        }
    }
    intra /= (k * (k - 1)) as f64;
    if intra == 0.0 {
        return Err(CoreError::DegenerateDistances { axis });
    }
    let mut inter = 0.0;
    for &w in intruders {
        let mut sum = 0.0;
        for &a in top {
            sum += row_distance(s, a, w);
        }
        inter += sum / k as f64;
    }
    inter /= intruders.len() as f64;
    Ok((intra, inter))
}

/// Scores one axis: top words by component value (frequency-filtered),
/// intruders sampled with replacement from the pool under the given seed.
pub fn score_axis(
    s: &Array2<f64>,
    freq: &[u64],
    axis: usize,
    cfg: &IntrusionConfig,
) -> Result<ConsistencyScore> {
    let top = top_word_indices(s, freq, axis, cfg.k, cfg.min_freq)?;
    let mut pool = intruder_pool(s, axis, cfg.low_q, cfg.high_q)?;
    if cfg.filter_pool {
        pool.retain(|&t| freq[t] >= cfg.min_freq);
        if pool.is_empty() {
            return Err(CoreError::EmptyIntruderPool { axis });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let intruders: Vec<usize> = (0..cfg.l)
        .map(|_| pool[rng.random_range(0..pool.len())])
        .collect();
    let (intra, inter) = score_from_members(s, &top, &intruders, axis)?;
    Ok(ConsistencyScore {
        axis,
        score: inter / intra,
        intra,
        inter,
        intruder_sample: intruders,
        seed: cfg.seed,
    })
}

/// Scores every axis with per-axis derived seeds (`seed + axis`). The
/// quantile masks are computed once and shared.
pub fn score_all_axes(
    s: &Array2<f64>,
    freq: &[u64],
    cfg: &IntrusionConfig,
) -> Result<Vec<ConsistencyScore>> {
    let (n, d) = (s.nrows(), s.ncols());
    if d < 2 {
        return Err(CoreError::InvalidParam(
            "intrusion scoring needs at least 2 axes".into(),
        ));
    }
    check_quantiles(cfg.low_q, cfg.high_q)?;

    // one pass per axis: bottom mask and top mask from descending ranks
    let mut bottom = vec![false; n * d];
    let mut top = vec![false; n * d];
    for a in 0..d {
        let col: Vec<f64> = s.column(a).to_vec();
        let ranks = descending_ranks(&col);
        for (t, &r) in ranks.iter().enumerate() {
            let q = r as f64 / n as f64;
            bottom[a * n + t] = q > 1.0 - cfg.low_q;
            top[a * n + t] = q <= cfg.high_q;
        }
    }
    let mut top_count = vec![0u32; n];
    for a in 0..d {
        for t in 0..n {
            if top[a * n + t] {
                top_count[t] += 1;
            }
        }
    }

    let mut scores = Vec::with_capacity(d);
    for axis in 0..d {
        let mut pool: Vec<usize> = (0..n)
            .filter(|&t| {
                let own_top = top[axis * n + t] as u32;
                bottom[axis * n + t] && top_count[t] - own_top >= 1
            })
            .collect();
        if cfg.filter_pool {
            pool.retain(|&t| freq[t] >= cfg.min_freq);
        }
        if pool.is_empty() {
            return Err(CoreError::EmptyIntruderPool { axis });
        }
        let top_words = top_word_indices(s, freq, axis, cfg.k, cfg.min_freq)?;
        let seed = cfg.seed + axis as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let intruders: Vec<usize> = (0..cfg.l)
            .map(|_| pool[rng.random_range(0..pool.len())])
            .collect();
        let (intra, inter) = score_from_members(s, &top_words, &intruders, axis)?;
        scores.push(ConsistencyScore {
            axis,
            score: inter / intra,
            intra,
            inter,
            intruder_sample: intruders,
            seed,
        });
    }
    Ok(scores)
}

/// Stable sort descending by score; ties keep the lower axis number first.
pub fn sigma_order(scores: &[ConsistencyScore]) -> SigmaOrder {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .score
            .partial_cmp(&scores[a].score)
            .unwrap()
            .then(scores[a].axis.cmp(&scores[b].axis))
    });
    SigmaOrder {
        sigma: order.into_iter().map(|i| scores[i].axis).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn pool_matches_hand_quantiles() {
        let s = array![
            [10.0, 0.0],
            [9.0, 1.0],
            [1.0, 9.0],
            [0.0, 10.0],
        ];
        let pool = intruder_pool(&s, 0, 0.5, 0.5).unwrap();
        assert_eq!(pool, vec![2, 3]);
        let pool = intruder_pool(&s, 1, 0.5, 0.5).unwrap();
        assert_eq!(pool, vec![0, 1]);
    }

    #[test]
    fn word_top_everywhere_is_never_pooled() {
        // word 0 leads on both axes
        let s = array![
            [10.0, 10.0],
            [1.0, 2.0],
            [2.0, 1.0],
            [0.0, 0.0],
        ];
        for axis in 0..2 {
            let pool = intruder_pool(&s, axis, 0.5, 0.5).unwrap();
            assert!(!pool.contains(&0), "axis {axis}: {pool:?}");
        }
    }

    #[test]
    fn zero_high_quantile_gives_empty_pool_error() {
        let s = array![[1.0, 0.0], [0.0, 1.0], [-1.0, 2.0], [2.0, -1.0]];
        let err = intruder_pool(&s, 0, 0.5, 0.0).unwrap_err();
        assert!(matches!(err, CoreError::EmptyIntruderPool { axis: 0 }));
    }

    #[test]
    fn score_matches_hand_arithmetic() {
        // collinear rows: top pair at distance 2, intruder at 4 and 6
        let s = array![
            [0.0, 0.0],
            [1.2, 1.6],
            [-2.4, -3.2],
        ];
        let (intra, inter) = score_from_members(&s, &[0, 1], &[2], 0).unwrap();
        assert!((intra - 2.0).abs() < 1e-12);
        assert!((inter - 5.0).abs() < 1e-12);
        assert!((inter / intra - 2.5).abs() < 1e-12);
    }

    #[test]
    fn constant_distances_give_exact_ratio() {
        // equilateral top pair at distance 1; intruder far along a fresh axis
        let h = 3.0f64.sqrt() / 2.0;
        let s = array![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.5, h, 0.0],
        ];
        let (intra, inter) = score_from_members(&s, &[0, 1], &[2], 0).unwrap();
        assert!((intra - 1.0).abs() < 1e-12);
        assert!((inter - 1.0).abs() < 1e-12);
    }

    #[test]
    fn intruders_on_top_positions_hand_case() {
        // intruder sits exactly on top word 0: inter = (0 + d01)/2
        let s = array![[0.0, 0.0], [2.0, 0.0], [0.0, 0.0]];
        let (intra, inter) = score_from_members(&s, &[0, 1], &[2], 0).unwrap();
        assert!((intra - 2.0).abs() < 1e-12);
        assert!((inter - 1.0).abs() < 1e-12);
    }

    #[test]
    fn duplicate_top_embeddings_error_names_axis() {
        let s = array![[1.0, 1.0], [1.0, 1.0], [0.0, 0.0]];
        let err = score_from_members(&s, &[0, 1], &[2], 7).unwrap_err();
        assert!(err.to_string().contains("axis 7"), "{err}");
    }

    fn toy_components() -> (Array2<f64>, Vec<u64>) {
        // axis 0 tops: words 0, 1; axis 1 tops: words 4, 5
        // words 2, 3 are low on axis 0 and high-ish on axis 1
        let s = array![
            [10.0, 0.0],
            [9.0, 0.5],
            [-5.0, 8.0],
            [-6.0, 7.0],
            [1.0, 12.0],
            [0.5, 11.0],
        ];
        let freq = vec![1000u64; 6];
        (s, freq)
    }

    #[test]
    fn score_axis_is_deterministic_per_seed() {
        let (s, freq) = toy_components();
        let cfg = IntrusionConfig {
            k: 2,
            l: 10,
            min_freq: 0,
            low_q: 0.5,
            high_q: 0.5,
            ..Default::default()
        };
        let a = score_axis(&s, &freq, 0, &cfg).unwrap();
        let b = score_axis(&s, &freq, 0, &cfg).unwrap();
        assert_eq!(a, b);
        let c = score_axis(&s, &freq, 0, &IntrusionConfig { seed: 1, ..cfg }).unwrap();
        assert_eq!(a.intra, c.intra);
    }

    #[test]
    fn score_is_scale_invariant() {
        let (s, freq) = toy_components();
        let cfg = IntrusionConfig {
            k: 2,
            l: 10,
            min_freq: 0,
            low_q: 0.5,
            high_q: 0.5,
            ..Default::default()
        };
        let base = score_axis(&s, &freq, 0, &cfg).unwrap();
        for c in [0.1, 10.0] {
            let scaled = s.mapv(|v| c * v);
            let got = score_axis(&scaled, &freq, 0, &cfg).unwrap();
            assert!(
                (got.score - base.score).abs() < 1e-12,
                "scale {c}: {} vs {}",
                got.score,
                base.score
            );
        }
    }

    #[test]
    fn moving_intruders_away_increases_score() {
        // add a fresh coordinate; push intruders out along it
        let s = array![
            [5.0, 0.0, 0.0],
            [4.0, 1.0, 0.0],
            [-3.0, 4.0, 0.0],
            [-4.0, 5.0, 0.0],
        ];
        let (intra, inter) = score_from_members(&s, &[0, 1], &[2, 3], 0).unwrap();
        let mut pushed = s.clone();
        pushed[[2, 2]] = 50.0;
        pushed[[3, 2]] = 50.0;
        let (intra2, inter2) = score_from_members(&pushed, &[0, 1], &[2, 3], 0).unwrap();
        assert_eq!(intra, intra2);
        assert!(inter2 > inter);
    }

    #[test]
    fn batch_scores_match_single_axis_path() {
        let (s, freq) = toy_components();
        let cfg = IntrusionConfig {
            k: 2,
            l: 16,
            min_freq: 0,
            low_q: 0.5,
            high_q: 0.5,
            seed: 3,
            ..Default::default()
        };
        let all = score_all_axes(&s, &freq, &cfg).unwrap();
        for sc in &all {
            let single = score_axis(
                &s,
                &freq,
                sc.axis,
                &IntrusionConfig { seed: cfg.seed + sc.axis as u64, ..cfg },
            )
            .unwrap();
            assert_eq!(sc.score, single.score);
            assert_eq!(sc.intruder_sample, single.intruder_sample);
        }
    }

    #[test]
    fn batch_pool_matches_standalone_pool() {
        let (s, _) = toy_components();
        // reconstruct pools through the public single-axis op and ensure the
        // batch path samples from the same sets (same seed, same draws)
        let cfg = IntrusionConfig {
            k: 2,
            l: 200,
            min_freq: 0,
            low_q: 0.5,
            high_q: 0.5,
            seed: 11,
            ..Default::default()
        };
        let freq = vec![1u64; 6];
        let all = score_all_axes(&s, &freq, &cfg).unwrap();
        for sc in &all {
            let pool = intruder_pool(&s, sc.axis, cfg.low_q, cfg.high_q).unwrap();
            for w in &sc.intruder_sample {
                assert!(pool.contains(w));
            }
        }
    }

    #[test]
    fn sigma_sorts_descending_with_ties_by_axis() {
        let mk = |axis, score| ConsistencyScore {
            axis,
            score,
            intra: 1.0,
            inter: score,
            intruder_sample: vec![],
            seed: 0,
        };
        let sigma = sigma_order(&[mk(0, 1.2), mk(1, 3.0), mk(2, 2.0)]);
        assert_eq!(sigma.sigma, vec![1, 2, 0]);

        let sigma = sigma_order(&[mk(0, 2.0), mk(1, 2.0), mk(2, 2.0)]);
        assert_eq!(sigma.sigma, vec![0, 1, 2]);

        let sigma = sigma_order(&[mk(0, 3.0), mk(1, 1.0), mk(2, 3.0)]);
        assert_eq!(sigma.sigma, vec![0, 2, 1]);
    }
}
