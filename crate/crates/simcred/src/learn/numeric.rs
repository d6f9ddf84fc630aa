//! Shared numerical kernels: regularized least squares and the chi-square
//! quantile used by the mixture model's novelty test.

use super::LearnError;
use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, Normal};

/// Solution of a (possibly regularized) least-squares problem.
#[derive(Debug, Clone)]
pub struct LsSolution {
    pub coefficients: DVector<f64>,
    /// True when the system was rank-deficient and the minimum-norm
    /// solution was taken.
    pub rank_deficient: bool,
}

const RANK_TOLERANCE: f64 = 1e-12;

/// Minimizes `||A x - b||^2 + ridge * ||x||^2`.
///
/// With `ridge > 0` the problem is strictly convex and solved by QR on the
/// augmented system `[A; sqrt(ridge) I]`. With `ridge = 0` the SVD
/// pseudo-inverse gives the minimum-norm solution and rank deficiency is
/// reported.
pub fn least_squares_solve(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    ridge: f64,
) -> Result<LsSolution, LearnError> {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return Err(LearnError::Numeric("empty system".to_string()));
    }
    if b.len() != rows {
        return Err(LearnError::Numeric(format!(
            "dimension mismatch: {rows} rows vs {} targets",
            b.len()
        )));
    }
    if ridge.is_nan() || ridge < 0.0 {
        return Err(LearnError::Numeric(format!("bad ridge {ridge}")));
    }

    if ridge > 0.0 {
        let sqrt_ridge = ridge.sqrt();
        let mut augmented = DMatrix::zeros(rows + cols, cols);
        augmented.view_mut((0, 0), (rows, cols)).copy_from(a);
        for i in 0..cols {
            augmented[(rows + i, i)] = sqrt_ridge;
        }
        let mut rhs = DVector::zeros(rows + cols);
        rhs.rows_mut(0, rows).copy_from(b);
        // Thin-QR least squares: x = R^-1 (Q^T rhs)[..cols]. The ridge rows
        // make the augmented matrix full column rank.
        let qr = augmented.qr();
        qr.q_tr_mul(&mut rhs);
        let r = qr.r();
        let top = rhs.rows(0, cols).into_owned();
        let coefficients = r
            .solve_upper_triangular(&top)
            .ok_or_else(|| LearnError::Numeric("triangular solve failed".to_string()))?;
        Ok(LsSolution {
            coefficients,
            rank_deficient: false,
        })
    } else {
        let svd = a.clone().svd(true, true);
        let max_sv = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let rank = svd
            .singular_values
            .iter()
            .filter(|&&s| s > max_sv * RANK_TOLERANCE)
            .count();
        let coefficients = svd
            .solve(b, max_sv * RANK_TOLERANCE)
            .map_err(|e| LearnError::Numeric(e.to_string()))?;
        Ok(LsSolution {
            coefficients,
            rank_deficient: rank < cols.min(rows),
        })
    }
}

/// Inverse CDF of the chi-square distribution via the Wilson-Hilferty cube
/// approximation. Relative error stays under 1% down to one degree of
/// freedom for central probabilities.
pub fn chi_square_quantile(dof: usize, p: f64) -> Result<f64, LearnError> {
    if dof == 0 {
        return Err(LearnError::Numeric("chi-square needs dof >= 1".to_string()));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(LearnError::Numeric(format!(
            "chi-square probability must be in (0,1), got {p}"
        )));
    }
    let d = dof as f64;
    let z = standard_normal_quantile(p);
    let term = 1.0 - 2.0 / (9.0 * d) + z * (2.0 / (9.0 * d)).sqrt();
    Ok(d * term.powi(3).max(0.0))
}

fn standard_normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}
