//! Symmetric fixed-point FastICA on whitened data.
//!
//! Estimates an orthogonal rotation of the whitened coordinates that makes
//! the columns maximally non-Gaussian. Components are then canonicalized:
//! each column is sign-fixed to non-negative skewness and columns are sorted
//! by descending skewness, which is the display order used everywhere
//! downstream.

use ndarray::{Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{CoreError, Result};
use crate::linalg::{inv_sqrt_sym, inverse};
use crate::stats;

/// Contrast nonlinearity for the fixed-point update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nonlinearity {
    LogCosh { alpha: f64 },
    Cube,
}

impl Nonlinearity {
    /// Applies g elementwise and returns the per-column mean of g'.
    fn evaluate(&self, y: &Array2<f64>) -> Result<(Array2<f64>, Array1<f64>)> {
        match *self {
            Nonlinearity::LogCosh { alpha } => {
                if !(1.0..=2.0).contains(&alpha) {
                    return Err(CoreError::InvalidParam(format!(
                        "logcosh alpha must be in [1, 2], got {alpha}"
                    )));
                }
                let g = y.mapv(|v| (alpha * v).tanh());
                let g_prime_mean = g
                    .mapv(|t| alpha * (1.0 - t * t))
                    .mean_axis(Axis(0))
                    .expect("nonempty");
                Ok((g, g_prime_mean))
            }
            Nonlinearity::Cube => {
                let g = y.mapv(|v| v * v * v);
                let g_prime_mean = y
                    .mapv(|v| 3.0 * v * v)
                    .mean_axis(Axis(0))
                    .expect("nonempty");
                Ok((g, g_prime_mean))
            }
        }
    }
}

/// FastICA configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcaConfig {
    pub nonlinearity: Nonlinearity,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for IcaConfig {
    fn default() -> Self {
        Self {
            nonlinearity: Nonlinearity::LogCosh { alpha: 1.0 },
            max_iter: 200,
            tol: 1e-4,
            seed: 0,
        }
    }
}

/// Estimated rotation and components.
///
/// `components = z . rotation`, with `rotation` orthogonal. After
/// [`canonicalize`], columns are in display order: `order[j]` records which
/// estimation-time column display axis `j` came from and `signs[j]` the sign
/// applied to it.
#[derive(Debug, Clone, PartialEq)]
pub struct IcaResult {
    pub rotation: Array2<f64>,
    pub components: Array2<f64>,
    pub skewness: Array1<f64>,
    pub order: Vec<usize>,
    pub signs: Vec<i8>,
    pub iterations: usize,
    pub converged: bool,
}

/// Maximum covariance deviation from identity accepted by [`fit_ica`].
pub const WHITENESS_TOLERANCE: f64 = 1e-3;

const DECORRELATION_FLOOR: f64 = 1e-12;

fn sym_decorrelate(w: &Array2<f64>) -> Array2<f64> {
    let wwt = w.dot(&w.t());
    inv_sqrt_sym(&wwt, DECORRELATION_FLOOR).dot(w)
}

/// Runs symmetric fixed-point FastICA on whitened data `z`.
///
/// The unmixing matrix is initialized from a seeded random matrix and
/// re-orthogonalized with symmetric decorrelation after every update.
/// Non-convergence within `max_iter` is reported through
/// `IcaResult::converged` rather than an error.
pub fn fit_ica(z: &Array2<f64>, cfg: &IcaConfig) -> Result<IcaResult> {
    let (n, d) = (z.nrows(), z.ncols());
    if n == 0 || d == 0 {
        return Err(CoreError::InvalidParam("empty input matrix".into()));
    }
    if cfg.max_iter < 1 {
        return Err(CoreError::InvalidParam("max_iter must be >= 1".into()));
    }
    if cfg.tol <= 0.0 {
        return Err(CoreError::InvalidParam("tol must be positive".into()));
    }
    let cov = stats::covariance(z);
    let dev = stats::max_abs_dev_from_identity(&cov);
    if dev > WHITENESS_TOLERANCE {
        return Err(CoreError::NotWhitened(format!(
            "covariance deviates from identity by {dev:.3e} (max allowed {WHITENESS_TOLERANCE:.0e}); whiten the input first"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut w = Array2::zeros((d, d));
    for v in w.iter_mut() {
        *v = rng.sample::<f64, _>(StandardNormal);
    }
    w = sym_decorrelate(&w);

    let mut iterations = 0;
    let mut converged = false;
    for _ in 0..cfg.max_iter {
        iterations += 1;
        let y = z.dot(&w.t());
        let (g, g_prime_mean) = cfg.nonlinearity.evaluate(&y)?;
        let lhs = g.t().dot(z) / n as f64;
        let rhs = &w * &g_prime_mean.view().insert_axis(Axis(1));
        let w_new = sym_decorrelate(&(lhs - rhs));

        let mut lim: f64 = 0.0;
        for (new_row, old_row) in w_new.rows().into_iter().zip(w.rows()) {
            lim = lim.max((1.0 - new_row.dot(&old_row).abs()).abs());
        }
        w = w_new;
        if lim < cfg.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("FastICA did not converge within {} iterations", cfg.max_iter);
    }

    let rotation = w.t().to_owned();
    let components = z.dot(&rotation);
    let skewness = Array1::from_iter(components.columns().into_iter().map(stats::skewness));
    Ok(IcaResult {
        rotation,
        components,
        skewness,
        order: (0..d).collect(),
        signs: vec![1; d],
        iterations,
        converged,
    })
}

/// Sign-fixes every column to non-negative skewness (zero skew keeps +1) and
/// sorts columns by descending skewness. Idempotent; `order` and `signs`
/// compose across repeated calls.
pub fn canonicalize(mut r: IcaResult) -> IcaResult {
    let d = r.components.ncols();
    // recompute so that canonicalization is self-contained
    let mut skew: Vec<f64> = r
        .components
        .columns()
        .into_iter()
        .map(stats::skewness)
        .collect();
    for j in 0..d {
        if skew[j] < 0.0 {
            skew[j] = -skew[j];
            r.signs[j] = -r.signs[j];
            r.components.column_mut(j).mapv_inplace(|v| -v);
            r.rotation.column_mut(j).mapv_inplace(|v| -v);
        }
    }
    let mut perm: Vec<usize> = (0..d).collect();
    perm.sort_by(|&a, &b| skew[b].partial_cmp(&skew[a]).unwrap().then(a.cmp(&b)));

    let components = reorder_columns(&r.components, &perm);
    let rotation = reorder_columns(&r.rotation, &perm);
    let skewness = Array1::from_iter(perm.iter().map(|&p| skew[p]));
    let order = perm.iter().map(|&p| r.order[p]).collect();
    let signs = perm.iter().map(|&p| r.signs[p]).collect();
    IcaResult {
        rotation,
        components,
        skewness,
        order,
        signs,
        iterations: r.iterations,
        converged: r.converged,
    }
}

fn reorder_columns(m: &Array2<f64>, perm: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros(m.raw_dim());
    for (dst, &src) in perm.iter().enumerate() {
        out.column_mut(dst).assign(&m.column(src));
    }
    out
}

/// Amari permutation-invariance index of `P = q^(-1) . p`; 0 exactly when
/// `P` is a scaled permutation. Normalized to [0, 1].
pub fn amari_index(p: &Array2<f64>, q: &Array2<f64>) -> Result<f64> {
    if p.nrows() != p.ncols() || q.nrows() != q.ncols() || p.nrows() != q.nrows() {
        return Err(CoreError::InvalidParam(
            "amari index needs square matrices of equal size".into(),
        ));
    }
    let prod = inverse(q)?.dot(p);
    let k = prod.nrows();
    if k < 2 {
        return Ok(0.0);
    }
    let mut row_term = 0.0;
    for i in 0..k {
        let mut sum = 0.0;
        let mut max = 0.0f64;
        for j in 0..k {
            let a = prod[[i, j]].abs();
            sum += a;
            max = max.max(a);
        }
        if max == 0.0 {
            return Err(CoreError::SingularMatrix("zero row in amari product"));
        }
        row_term += sum / max - 1.0;
    }
    let mut col_term = 0.0;
    for j in 0..k {
        let mut sum = 0.0;
        let mut max = 0.0f64;
        for i in 0..k {
            let a = prod[[i, j]].abs();
            sum += a;
            max = max.max(a);
        }
        if max == 0.0 {
            return Err(CoreError::SingularMatrix("zero column in amari product"));
        }
        col_term += sum / max - 1.0;
    }
    Ok((row_term + col_term) / (2.0 * k as f64 * (k - 1) as f64))
}
