//! Shared moment and correlation helpers.
//!
//! All moments use the 1/n convention so that "unit variance" agrees with
//! plain averages of squares.

use ndarray::{Array1, Array2, ArrayView1};

/// Per-column means, 1/n convention.
pub fn column_means(x: &Array2<f64>) -> Array1<f64> {
    let n = x.nrows().max(1) as f64;
    x.sum_axis(ndarray::Axis(0)) / n
}

/// Per-column variances about the column mean, 1/n convention.
pub fn column_vars(x: &Array2<f64>) -> Array1<f64> {
    let n = x.nrows().max(1) as f64;
    let means = column_means(x);
    let mut vars = Array1::zeros(x.ncols());
    for (j, col) in x.columns().into_iter().enumerate() {
        let m = means[j];
        vars[j] = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
    }
    vars
}

/// Sample covariance matrix of the columns, 1/n convention.
pub fn covariance(x: &Array2<f64>) -> Array2<f64> {
    let n = x.nrows() as f64;
    let means = column_means(x);
    let centered = x - &means.view().insert_axis(ndarray::Axis(0));
    centered.t().dot(&centered) / n
}

/// Largest absolute entry of `m - I`.
pub fn max_abs_dev_from_identity(m: &Array2<f64>) -> f64 {
    let mut dev: f64 = 0.0;
    for ((i, j), v) in m.indexed_iter() {
        let target = if i == j { 1.0 } else { 0.0 };
        dev = dev.max((v - target).abs());
    }
    dev
}

/// Standardized third moment (1/n convention) of one column.
///
/// Returns 0 for a constant column.
pub fn skewness(col: ArrayView1<f64>) -> f64 {
    let n = col.len().max(1) as f64;
    let mean = col.sum() / n;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    for v in col.iter() {
        let c = v - mean;
        m2 += c * c;
        m3 += c * c * c;
    }
    m2 /= n;
    m3 /= n;
    if m2 <= 0.0 {
        0.0
    } else {
        m3 / m2.powf(1.5)
    }
}

/// Pearson correlation. `None` when either input has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y.iter()) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        None
    } else {
        Some(sxy / (sxx * syy).sqrt())
    }
}

/// Average ranks (1-based); tied values share the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap().then(a.cmp(&b)));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        // positions i..=j (0-based) share the average 1-based rank
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &t in &idx[i..=j] {
            ranks[t] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Competition rank per index under descending order: `1 + #{v : v > value}`.
/// Ties share the better (smaller) rank.
pub fn descending_ranks(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap().then(a.cmp(&b)));
    let mut ranks = vec![0usize; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        for &t in &idx[i..=j] {
            ranks[t] = i + 1;
        }
        i = j + 1;
    }
    ranks
}
