//! Dense symmetric linear algebra on small (d x d) matrices.
//!
//! Bulk data lives in `ndarray`; eigenproblems are delegated to
//! `nalgebra::SymmetricEigen` and converted at the boundary.

use nalgebra::DMatrix;
use ndarray::{Array1, Array2};

use crate::error::{CoreError, Result};

fn to_nalgebra(m: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[[i, j]])
}

fn from_nalgebra(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Eigendecomposition of a symmetric matrix, eigenvalues sorted descending.
///
/// Each eigenvector is sign-fixed so that its largest-magnitude entry is
/// positive, which keeps decompositions reproducible across runs.
pub fn sym_eig_desc(m: &Array2<f64>) -> (Array1<f64>, Array2<f64>) {
    let d = m.nrows();
    let eig = nalgebra::SymmetricEigen::new(to_nalgebra(m));
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut values = Array1::zeros(d);
    let mut vectors = Array2::zeros((d, d));
    for (out, &src) in order.iter().enumerate() {
        values[out] = eig.eigenvalues[src];
        let col = eig.eigenvectors.column(src);
        let mut max_abs = 0.0;
        let mut max_idx = 0;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > max_abs {
                max_abs = v.abs();
                max_idx = i;
            }
        }
        let sign = if col[max_idx] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..d {
            vectors[[i, out]] = sign * col[i];
        }
    }
    (values, vectors)
}

/// `m^(-1/2)` for a symmetric positive semi-definite matrix, flooring
/// eigenvalues at `floor` before taking the inverse square root.
pub fn inv_sqrt_sym(m: &Array2<f64>, floor: f64) -> Array2<f64> {
    let (values, vectors) = sym_eig_desc(m);
    let d = m.nrows();
    let mut scaled = Array2::zeros((d, d));
    for j in 0..d {
        let lam = values[j].max(floor);
        let s = 1.0 / lam.sqrt();
        for i in 0..d {
            scaled[[i, j]] = vectors[[i, j]] * s;
        }
    }
    scaled.dot(&vectors.t())
}

/// Matrix inverse; errors when the matrix is not invertible.
pub fn inverse(m: &Array2<f64>) -> Result<Array2<f64>> {
    to_nalgebra(m)
        .try_inverse()
        .map(|inv| from_nalgebra(&inv))
        .ok_or(CoreError::SingularMatrix("matrix is not invertible"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::max_abs_dev_from_identity;
    use ndarray::array;

    #[test]
    fn eig_reconstructs_matrix() {
        let m = array![[4.0, 1.0], [1.0, 1.0]];
        let (values, vectors) = sym_eig_desc(&m);
        assert!(values[0] >= values[1]);
        let lambda = Array2::from_diag(&values);
        let rec = vectors.dot(&lambda).dot(&vectors.t());
        for ((i, j), v) in rec.indexed_iter() {
            assert!((v - m[[i, j]]).abs() < 1e-12);
        }
    }

    #[test]
    fn inv_sqrt_squares_to_inverse() {
        let m = array![[4.0, 0.0], [0.0, 9.0]];
        let r = inv_sqrt_sym(&m, 1e-12);
        let prod = r.dot(&m).dot(&r);
        assert!(max_abs_dev_from_identity(&prod) < 1e-12);
    }

    #[test]
    fn inverse_errors_on_singular() {
        let m = array![[1.0, 2.0], [2.0, 4.0]];
        assert!(inverse(&m).is_err());
    }
}
