//! Signal-adaptive sparsification of posterior coefficient draws.
//!
//! Each draw is soft-thresholded like an adaptive-lasso solution with
//! per-coefficient penalty `kappa_j = 1 / beta_j^2`, so weak coefficients are
//! set exactly to zero while strong ones are barely moved. Applied draw by
//! draw, the relative frequency of non-zero entries reads as a posterior
//! inclusion probability.

use nalgebra::{DMatrix, DVector};

/// `||X_j||^2` per column, computed once per dataset.
pub fn column_norms2(x: &DMatrix<f64>) -> DVector<f64> {
    super::dot_columns(x)
}

/// Soft-threshold one coefficient draw:
/// `phi_j = sign(beta_j) ||X_j||^{-2} max(|beta_j| ||X_j||^2 - 1/beta_j^2, 0)`,
/// with `beta_j = 0` mapping straight to zero.
pub fn savs_sparsify(beta: &DVector<f64>, col_norms2: &DVector<f64>) -> DVector<f64> {
    debug_assert_eq!(beta.len(), col_norms2.len());
    DVector::from_fn(beta.len(), |j, _| {
        let b = beta[j];
        if b == 0.0 {
            return 0.0;
        }
        let n2 = col_norms2[j];
        let kappa = 1.0 / (b * b);
        let thresholded = (b.abs() * n2 - kappa).max(0.0);
        b.signum() * thresholded / n2
    })
}
