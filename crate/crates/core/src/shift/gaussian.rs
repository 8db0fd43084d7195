//! Gaussian summaries, the symmetric PSD matrix square root, and the
//! squared 2-Wasserstein (Bures) distance between Gaussians.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Empirical Gaussian fit of a feature matrix: column means and the
/// population covariance, symmetrized.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSummary {
    pub mean: Array1<f64>,
    pub covariance: Array2<f64>,
    pub n: usize,
}

pub fn gaussian_summary(x: ArrayView2<f64>) -> Result<GaussianSummary> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 rows for a covariance, found {n}"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("features must be finite".into()));
    }
    let mean = x.mean_axis(Axis(0)).expect("n >= 2");
    let centered = &x - &mean;
    let mut covariance = centered.t().dot(&centered) / n as f64;
    // enforce exact symmetry against accumulation order
    let transposed = covariance.t().to_owned();
    covariance = (&covariance + &transposed) / 2.0;
    Ok(GaussianSummary { mean, covariance, n })
}

fn to_nalgebra(a: ArrayView2<f64>) -> DMatrix<f64> {
    DMatrix::from_row_iterator(a.nrows(), a.ncols(), a.iter().copied())
}

fn from_nalgebra(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Symmetric PSD square root via eigendecomposition, with negative
/// eigenvalues (sampling noise) clipped at zero.
pub fn spd_sqrt(a: ArrayView2<f64>) -> Result<Array2<f64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::InvalidInput("matrix must be square".into()));
    }
    let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let tol = 1e-8 * norm.max(1.0);
    for i in 0..a.nrows() {
        for j in (i + 1)..a.ncols() {
            if (a[[i, j]] - a[[j, i]]).abs() > tol {
                return Err(Error::InvalidInput(format!(
                    "matrix not symmetric at ({i},{j}): {} vs {}",
                    a[[i, j]],
                    a[[j, i]]
                )));
            }
        }
    }
    let eigen = SymmetricEigen::new(to_nalgebra(a));
    let sqrt_vals: Vec<f64> = eigen
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0).sqrt())
        .collect();
    let v = &eigen.eigenvectors;
    let scaled = v * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(sqrt_vals));
    let root = &scaled * v.transpose();
    Ok(from_nalgebra(&root))
}

/// Squared 2-Wasserstein distance between two Gaussians:
/// `||m1 - m2||^2 + tr(S1 + S2 - 2 sqrt(S1^(1/2) S2 S1^(1/2)))`.
/// The symmetric inner form is trace-equivalent to `sqrt(S1 S2)` and
/// numerically stable.
pub fn gaussian_w2(g1: &GaussianSummary, g2: &GaussianSummary) -> Result<f64> {
    if g1.mean.len() != g2.mean.len() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: {} vs {}",
            g1.mean.len(),
            g2.mean.len()
        )));
    }
    let dm = &g1.mean - &g2.mean;
    let mean_term = dm.dot(&dm);

    let s1_root = spd_sqrt(g1.covariance.view())?;
    let inner = s1_root.dot(&g2.covariance).dot(&s1_root);
    let inner_t = inner.t().to_owned();
    let inner_sym = (&inner + &inner_t) / 2.0;
    let cross = spd_sqrt(inner_sym.view())?;

    let trace = |m: &Array2<f64>| (0..m.nrows()).map(|i| m[[i, i]]).sum::<f64>();
    let cov_term =
        trace(&g1.covariance) + trace(&g2.covariance) - 2.0 * trace(&cross);
    Ok((mean_term + cov_term).max(0.0))
}

/// Frechet dataset distance: the squared 2-Wasserstein distance between
/// Gaussian fits of two embedding sets. Lower means closer domains.
pub fn fdd(emb_a: ArrayView2<f64>, emb_b: ArrayView2<f64>) -> Result<f64> {
    if emb_a.ncols() != emb_b.ncols() {
        return Err(Error::InvalidInput(format!(
            "embedding dimension mismatch: {} vs {}",
            emb_a.ncols(),
            emb_b.ncols()
        )));
    }
    gaussian_w2(&gaussian_summary(emb_a)?, &gaussian_summary(emb_b)?)
}
