//! Centering and PCA whitening.
//!
//! The whitening map `A` sends centered data to coordinates with identity
//! sample covariance (1/n convention), so that downstream moment formulas
//! can treat every component as zero-mean and unit-variance. The same model
//! also exposes the plain variance-sorted PCA view used for comparisons.

use ndarray::{Array1, Array2, Axis};

use crate::error::{CoreError, Result};
use crate::linalg::sym_eig_desc;
use crate::stats;

/// Fitted centering + whitening transform.
///
/// `map` is the d x k whitening matrix: `Z = (X - mean) . map` has identity
/// covariance on the training data. `basis` holds the unscaled principal
/// directions (eigenvectors of the covariance), and `eigenvalues` their
/// variances sorted descending; together they are the inverse metadata for
/// the transform (`unwhiten = diag(sqrt(eigenvalues)) . basis^T`).
#[derive(Debug, Clone, PartialEq)]
pub struct WhiteningModel {
    pub mean: Array1<f64>,
    pub map: Array2<f64>,
    pub basis: Array2<f64>,
    pub eigenvalues: Array1<f64>,
    /// Number of directions dropped by the eigenvalue floor.
    pub dropped: usize,
}

impl WhiteningModel {
    pub fn input_dim(&self) -> usize {
        self.map.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.map.ncols()
    }
}

/// Default relative eigenvalue floor.
pub const DEFAULT_EPS: f64 = 1e-10;

/// Fits a PCA whitening model on the rows of `x`.
///
/// `k` limits the retained dimension (`None` keeps everything). Directions
/// whose eigenvalue falls below `eps` times the largest are dropped with a
/// warning, reducing `k` accordingly.
pub fn fit_whitening(x: &Array2<f64>, k: Option<usize>, eps: f64) -> Result<WhiteningModel> {
    let (n, d) = (x.nrows(), x.ncols());
    if n <= 1 {
        return Err(CoreError::InvalidParam(format!(
            "need at least 2 rows to whiten, got {n}"
        )));
    }
    if eps <= 0.0 {
        return Err(CoreError::InvalidParam(format!(
            "eigenvalue floor must be positive, got {eps}"
        )));
    }
    let requested = k.unwrap_or(d);
    if requested < 1 || requested > d {
        return Err(CoreError::InvalidParam(format!(
            "retained dimension must be in 1..={d}, got {requested}"
        )));
    }
    if n <= requested {
        return Err(CoreError::InvalidParam(format!(
            "need more rows ({n}) than retained dimensions ({requested})"
        )));
    }

    let mean = stats::column_means(x);
    let centered = x - &mean.view().insert_axis(Axis(0));
    let cov = centered.t().dot(&centered) / n as f64;
    let (values, vectors) = sym_eig_desc(&cov);

    let floor = eps * values[0].max(0.0);
    let rank = values.iter().take_while(|&&v| v > floor && v > 0.0).count();
    if rank == 0 {
        return Err(CoreError::InvalidParam(
            "covariance has no eigenvalue above the floor (constant data?)".into(),
        ));
    }
    let kept = requested.min(rank);
    if kept < requested {
        log::warn!(
            "reduced retained dimension from {requested} to {kept}: \
             {} eigenvalues fell below the floor {floor:.3e}",
            d - rank
        );
    }

    let eigenvalues = values.slice(ndarray::s![..kept]).to_owned();
    let basis = vectors.slice(ndarray::s![.., ..kept]).to_owned();
    let mut map = basis.clone();
    for (j, mut col) in map.columns_mut().into_iter().enumerate() {
        let s = 1.0 / eigenvalues[j].sqrt();
        col.mapv_inplace(|v| v * s);
    }

    Ok(WhiteningModel {
        mean,
        map,
        basis,
        eigenvalues,
        dropped: requested - kept,
    })
}

/// Applies the whitening transform: `Z = (X - mean) . map`.
pub fn apply_whitening(model: &WhiteningModel, x: &Array2<f64>) -> Result<Array2<f64>> {
    check_dim(model, x)?;
    let centered = x - &model.mean.view().insert_axis(Axis(0));
    Ok(centered.dot(&model.map))
}

/// Variance-sorted PCA coordinates `(X - mean) . basis`, not rescaled to
/// unit variance.
pub fn pca_view(model: &WhiteningModel, x: &Array2<f64>) -> Result<Array2<f64>> {
    check_dim(model, x)?;
    let centered = x - &model.mean.view().insert_axis(Axis(0));
    Ok(centered.dot(&model.basis))
}

fn check_dim(model: &WhiteningModel, x: &Array2<f64>) -> Result<()> {
    if x.ncols() != model.input_dim() {
        return Err(CoreError::DimensionMismatch {
            expected: model.input_dim(),
            found: x.ncols(),
        });
    }
    Ok(())
}
