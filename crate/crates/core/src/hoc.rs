//! Higher-order correlations between components.
//!
//! For a whitened component matrix the average `E(S_i^2 S_j^2)` equals 1
//! exactly when components i and j are independent; its deviation from 1
//! measures the residual dependence left behind by the linear decomposition.
//! This module computes the full matrix of these averages, decomposes single
//! entries into per-word contributions, extracts top words per axis, and
//! provides the frequency-correlation and histogram diagnostics.

use ndarray::{Array2, ArrayView2};

use crate::error::{CoreError, Result};
use crate::stats;

/// Symmetric matrix of `E(S_i^2 S_j^2)` values. Diagonal entries are the
/// fourth moments `E(S_i^4)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HocMatrix {
    pub values: Array2<f64>,
    pub diag_is_fourth_moment: bool,
}

impl HocMatrix {
    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    /// Upper-triangle entries (i < j) in row-major order.
    pub fn upper_triangle(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        let d = self.dim();
        (0..d).flat_map(move |i| ((i + 1)..d).map(move |j| ((i, j), self.values[[i, j]])))
    }
}

/// Largest tolerated deviation of column means from 0 and variances from 1.
pub const STANDARDIZATION_TOLERANCE: f64 = 1e-3;

fn check_standardized(s: &ArrayView2<f64>) -> Result<()> {
    let owned = s.to_owned();
    let means = stats::column_means(&owned);
    let vars = stats::column_vars(&owned);
    let mut offenders = Vec::new();
    for j in 0..s.ncols() {
        if means[j].abs() > STANDARDIZATION_TOLERANCE
            || (vars[j] - 1.0).abs() > STANDARDIZATION_TOLERANCE
        {
            offenders.push(format!(
                "column {j}: mean {:.3e}, variance {:.6}",
                means[j], vars[j]
            ));
        }
    }
    if offenders.is_empty() {
        Ok(())
    } else {
        let shown = offenders.iter().take(5).cloned().collect::<Vec<_>>().join("; ");
        Err(CoreError::NotWhitened(format!(
            "{} of {} columns are not standardized ({shown})",
            offenders.len(),
            s.ncols()
        )))
    }
}

/// Computes the full d x d higher-order correlation matrix
/// `values[i][j] = (1/n) sum_t s_ti^2 s_tj^2`, including the diagonal.
///
/// Implemented as one matrix product over the elementwise-squared input,
/// then mirrored so the result is exactly symmetric.
pub fn hoc_matrix(s: &Array2<f64>) -> Result<HocMatrix> {
    check_standardized(&s.view())?;
    let n = s.nrows() as f64;
    let squared = s.mapv(|v| v * v);
    let mut values = squared.t().dot(&squared) / n;
    let d = values.nrows();
    for i in 0..d {
        for j in (i + 1)..d {
            let v = values[[i, j]];
            values[[j, i]] = v;
        }
    }
    Ok(HocMatrix {
        values,
        diag_is_fourth_moment: true,
    })
}

/// Per-word contributions `s_ti^2 s_tj^2` for one axis pair, sorted
/// descending with ties broken by vocabulary index.
#[derive(Debug, Clone, PartialEq)]
pub struct ContributionList {
    pub axes: (usize, usize),
    /// `(vocab index, contribution)` pairs.
    pub entries: Vec<(usize, f64)>,
}

/// The top-k contributors to `E(S_i^2 S_j^2)`; `i == j` yields fourth
/// powers. `k` larger than the vocabulary returns the full list.
pub fn top_contributors(
    s: &Array2<f64>,
    i: usize,
    j: usize,
    k: usize,
) -> Result<ContributionList> {
    let d = s.ncols();
    for axis in [i, j] {
        if axis >= d {
            return Err(CoreError::AxisOutOfRange { axis, d });
        }
    }
    if k < 1 {
        return Err(CoreError::InvalidParam("k must be >= 1".into()));
    }
    let mut entries: Vec<(usize, f64)> = (0..s.nrows())
        .map(|t| {
            let a = s[[t, i]];
            let b = s[[t, j]];
            (t, a * a * b * b)
        })
        .collect();
    entries.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap().then(x.0.cmp(&y.0)));
    entries.truncate(k);
    Ok(ContributionList { axes: (i, j), entries })
}

/// Indices of the k words with the largest signed component value on `axis`,
/// restricted to words with frequency at least `min_freq`. Ties break by
/// vocabulary index. Returns fewer than k (with a warning) when the filter
/// leaves too few words.
pub fn top_word_indices(
    s: &Array2<f64>,
    freq: &[u64],
    axis: usize,
    k: usize,
    min_freq: u64,
) -> Result<Vec<usize>> {
    let d = s.ncols();
    if axis >= d {
        return Err(CoreError::AxisOutOfRange { axis, d });
    }
    if k < 1 {
        return Err(CoreError::InvalidParam("k must be >= 1".into()));
    }
    if freq.len() != s.nrows() {
        return Err(CoreError::LengthMismatch {
            left: freq.len(),
            right: s.nrows(),
        });
    }
    let mut eligible: Vec<usize> = (0..s.nrows()).filter(|&t| freq[t] >= min_freq).collect();
    eligible.sort_by(|&a, &b| {
        s[[b, axis]]
            .partial_cmp(&s[[a, axis]])
            .unwrap()
            .then(a.cmp(&b))
    });
    if eligible.len() < k {
        log::warn!(
            "axis {axis}: only {} words pass the frequency filter (asked for {k})",
            eligible.len()
        );
    }
    eligible.truncate(k);
    Ok(eligible)
}

/// Word forms of [`top_word_indices`].
pub fn top_words(
    s: &Array2<f64>,
    vocab: &[String],
    freq: &[u64],
    axis: usize,
    k: usize,
    min_freq: u64,
) -> Result<Vec<String>> {
    Ok(top_word_indices(s, freq, axis, k, min_freq)?
        .into_iter()
        .map(|t| vocab[t].clone())
        .collect())
}

/// Per-axis Pearson correlation between word frequency and component value.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyCorrelation {
    pub r: Vec<f64>,
    /// True where either variable had zero variance; `r` is recorded as 0.
    pub degenerate: Vec<bool>,
    pub log_counts: bool,
}

/// Correlates raw counts (or `ln(1 + count)` with `log_counts`) against each
/// component column over the full vocabulary.
pub fn frequency_correlation(
    s: &Array2<f64>,
    freq: &[u64],
    log_counts: bool,
) -> Result<FrequencyCorrelation> {
    let n = s.nrows();
    if freq.len() != n {
        return Err(CoreError::LengthMismatch {
            left: freq.len(),
            right: n,
        });
    }
    if n < 2 {
        return Err(CoreError::InvalidParam(
            "need at least 2 words for correlations".into(),
        ));
    }
    let counts: Vec<f64> = freq
        .iter()
        .map(|&c| if log_counts { (1.0 + c as f64).ln() } else { c as f64 })
        .collect();
    let mut r = Vec::with_capacity(s.ncols());
    let mut degenerate = Vec::with_capacity(s.ncols());
    for col in s.columns() {
        let values: Vec<f64> = col.to_vec();
        match stats::pearson(&counts, &values) {
            Some(v) => {
                r.push(v);
                degenerate.push(false);
            }
            None => {
                r.push(0.0);
                degenerate.push(true);
            }
        }
    }
    Ok(FrequencyCorrelation { r, degenerate, log_counts })
}

/// Histogram of HOC values over the upper triangle (and optionally the
/// diagonal). Out-of-range values are clamped into the end bins so the total
/// count is preserved.
pub fn hoc_histogram(
    h: &HocMatrix,
    include_diag: bool,
    bins: usize,
    range: (f64, f64),
) -> Result<Vec<u64>> {
    if bins < 1 {
        return Err(CoreError::InvalidParam("bins must be >= 1".into()));
    }
    let (lo, hi) = range;
    if !(hi > lo) {
        return Err(CoreError::InvalidParam(format!(
            "degenerate histogram range [{lo}, {hi}]"
        )));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    let mut add = |v: f64| {
        let idx = ((v - lo) / width).floor();
        let idx = if idx < 0.0 {
            0
        } else if idx as usize >= bins {
            bins - 1
        } else {
            idx as usize
        };
        counts[idx] += 1;
    };
    for (_, v) in h.upper_triangle() {
        add(v);
    }
    if include_diag {
        for i in 0..h.dim() {
            add(h.values[[i, i]]);
        }
    }
    Ok(counts)
}
