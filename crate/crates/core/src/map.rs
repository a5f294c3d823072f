//! MAP baseline: the empirical-Bayes sweep with the posterior covariance
//! terms removed, which reduces to
//!
//! ```text
//! x_j = Ψ M_j⁻¹ y_j,  s_j = Γ̄_j M_j⁻¹ y_j,  Ψ ← (1/n) X Xᵀ,  γ_ij ← s_ij²
//! ```
//!
//! This locally minimizes the log-det / log-magnitude objective
//! [`map_objective`]. Zeros in `Γ` and null directions of `Ψ` are absorbing:
//! once reached they are never left.

use crate::eb::{check_wide, eb_iterate_with, init_state, run_loop, Decomposition, EbState, PosteriorTerms, SolverConfig};
use crate::error::Result;
use crate::matrix::DenseMatrix;
use crate::objective::{map_objective, ObjectiveParams};

pub fn map_iterate(state: &EbState, y: &DenseMatrix) -> Result<EbState> {
    eb_iterate_with(state, y, PosteriorTerms::Zeroed)
}

/// Objective tracked by [`solve_map`], evaluated at the state's `(X, S)`.
pub fn map_state_cost(state: &EbState, y: &DenseMatrix, params: &ObjectiveParams) -> Result<f64> {
    let x = DenseMatrix::new(state.x.clone())?;
    let s = DenseMatrix::new(state.s.clone())?;
    map_objective(y, &x, &s, params)
}

/// Same loop as [`crate::eb::solve_eb`] with [`map_iterate`]; `cost_trace`
/// holds [`map_objective`] with the default `ε` and the configured `λ`.
pub fn solve_map(y: &DenseMatrix, config: &SolverConfig) -> Result<Decomposition> {
    check_wide(y)?;
    let state = init_state(y, config)?;
    let params = ObjectiveParams::with_lambda(config.lambda);
    let (d, _) = run_loop(
        y,
        config,
        state,
        |st| map_iterate(st, y),
        |st| map_state_cost(st, y, &params),
    )?;
    Ok(d)
}
