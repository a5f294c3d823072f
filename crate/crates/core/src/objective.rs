//! Evaluators for the three decomposition objectives.
//!
//! All three share the data-fit term `(1/λ)‖Y − X − S‖²_F` and differ in the
//! penalty on `(X, S)`:
//!
//! | objective  | penalty                                           |
//! |------------|---------------------------------------------------|
//! | ideal      | `n·rank(X) + ‖S‖₀`                                 |
//! | PCP        | `√n·‖X‖_* + ‖S‖₁`                                  |
//! | MAP        | `n·log det(XXᵀ + εI) + 2·Σ log(|s_ij| + ε)`        |

use crate::error::{Error, Result};
use crate::linalg::singular_values;
use crate::matrix::DenseMatrix;

/// Parameters of the objective evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveParams {
    /// Noise variance `λ`.
    pub lambda: f64,
    /// Relative singular-value threshold used to count rank.
    pub rank_tol: f64,
    /// Relative magnitude threshold used to count nonzeros.
    pub sparse_tol: f64,
    /// `ε` inside the logarithms of the MAP objective.
    pub log_floor: f64,
}

impl Default for ObjectiveParams {
    fn default() -> Self {
        Self {
            lambda: 1e-6,
            rank_tol: 1e-6,
            sparse_tol: 1e-6,
            log_floor: 1e-12,
        }
    }
}

impl ObjectiveParams {
    pub fn with_lambda(lambda: f64) -> Self {
        Self {
            lambda,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all_positive = [self.lambda, self.rank_tol, self.sparse_tol, self.log_floor]
            .iter()
            .all(|&v| v > 0.0 && v.is_finite());
        if !all_positive {
            return Err(Error::InvalidParameter(format!(
                "objective parameters must be positive: {self:?}"
            )));
        }
        if self.rank_tol > 1.0 || self.sparse_tol > 1.0 {
            return Err(Error::InvalidParameter(
                "rank_tol and sparse_tol must be <= 1".into(),
            ));
        }
        Ok(())
    }
}

fn residual_sq(y: &DenseMatrix, x: &DenseMatrix, s: &DenseMatrix) -> Result<f64> {
    x.ensure_shape(y.shape())?;
    s.ensure_shape(y.shape())?;
    Ok((y.as_mat() - x.as_mat() - s.as_mat()).norm_squared())
}

/// Number of entries with `|s_ij| > rel_tol · max|s|`.
pub fn count_nonzeros(s: &DenseMatrix, rel_tol: f64) -> usize {
    let peak = s.as_mat().amax();
    if peak == 0.0 {
        return 0;
    }
    let cut = rel_tol * peak;
    s.as_mat().iter().filter(|v| v.abs() > cut).count()
}

/// `(1/λ)‖Y−X−S‖²_F + n·rank_ε(X) + nnz_ε(S)`.
pub fn ideal_objective(
    y: &DenseMatrix,
    x: &DenseMatrix,
    s: &DenseMatrix,
    p: &ObjectiveParams,
) -> Result<f64> {
    p.validate()?;
    let fit = residual_sq(y, x, s)? / p.lambda;
    let rank = crate::metrics::numerical_rank(x, p.rank_tol);
    let nnz = count_nonzeros(s, p.sparse_tol);
    Ok(fit + (y.cols() * rank) as f64 + nnz as f64)
}

/// `(1/λ)‖Y−X−S‖²_F + √n·‖X‖_* + ‖S‖₁`.
pub fn pcp_objective(y: &DenseMatrix, x: &DenseMatrix, s: &DenseMatrix, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    let fit = residual_sq(y, x, s)? / lambda;
    let nuclear: f64 = singular_values(x.as_mat()).iter().sum();
    let l1: f64 = s.as_mat().iter().map(|v| v.abs()).sum();
    Ok(fit + (y.cols() as f64).sqrt() * nuclear + l1)
}

/// `(1/λ)‖Y−X−S‖²_F + n·log det(XXᵀ + εI) + 2·Σ log(|s_ij| + ε)`.
///
/// The log-determinant is taken from the singular values of `X`
/// (`Σ log(σ_i² + ε)` over all `m` rows), which stays finite for
/// rank-deficient `X`.
pub fn map_objective(
    y: &DenseMatrix,
    x: &DenseMatrix,
    s: &DenseMatrix,
    p: &ObjectiveParams,
) -> Result<f64> {
    p.validate()?;
    let fit = residual_sq(y, x, s)? / p.lambda;
    let eps = p.log_floor;
    let sv = singular_values(x.as_mat());
    let zero_modes = x.rows().saturating_sub(sv.len());
    let log_det: f64 =
        sv.iter().take(x.rows()).map(|s| (s * s + eps).ln()).sum::<f64>() + zero_modes as f64 * eps.ln();
    let log_s: f64 = s.as_mat().iter().map(|v| (v.abs() + eps).ln()).sum();
    Ok(fit + y.cols() as f64 * log_det + 2.0 * log_s)
}
