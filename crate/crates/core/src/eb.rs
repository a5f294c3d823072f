//! Empirical-Bayes low-rank plus sparse decomposition.
//!
//! Column `y_j` of the observation is modelled as Gaussian with covariance
//! `Σ_j = Ψ + Γ̄_j + λI`, where `Ψ` (m×m, PSD) is shared by all columns and
//! `Γ̄_j = diag(γ_j)` holds per-entry variances of the sparse part. The
//! hyperparameters minimize
//!
//! ```text
//! L(Ψ, Γ) = Σ_j [ y_jᵀ Σ_j⁻¹ y_j + log det Σ_j ]
//! ```
//!
//! by majorization-minimization. One sweep reads the current `(Ψ, Γ)` and
//! computes, for every column with `M_j = Ψ + Γ̄_j + λI`,
//!
//! ```text
//! x_j = Ψ M_j⁻¹ y_j           U_j = Ψ − Ψ M_j⁻¹ Ψ
//! s_j = Γ̄_j M_j⁻¹ y_j         V_j = Γ̄_j − Γ̄_j M_j⁻¹ Γ̄_j
//! ```
//!
//! and then replaces `Ψ ← (1/n) Σ_j (x_j x_jᵀ + U_j)` and
//! `γ_ij ← s_ij² + [V_j]_ii`. Every sweep leaves `L` unchanged or lower.
//! The posterior means `x_j`, `s_j` are the estimates.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::SpdWork;
use crate::matrix::DenseMatrix;

/// Solver knobs shared by the empirical-Bayes and MAP iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Noise variance `λ`.
    pub lambda: f64,
    pub max_iterations: usize,
    /// Stop once `|cost_prev − cost| ≤ rel_cost_tol · |cost_prev|`.
    pub rel_cost_tol: f64,
    /// Unobserved entries in completion mode get `γ = completion_gamma · κ`.
    pub completion_gamma: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-6,
            max_iterations: 100,
            rel_cost_tol: 1e-8,
            completion_gamma: 1e12,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be >= 1".into()));
        }
        if !(self.rel_cost_tol >= 0.0) {
            return Err(Error::InvalidParameter("rel_cost_tol must be >= 0".into()));
        }
        if !(self.completion_gamma > 0.0 && self.completion_gamma.is_finite()) {
            return Err(Error::InvalidParameter("completion_gamma must be positive".into()));
        }
        Ok(())
    }
}

/// Hyperparameters and current posterior means.
#[derive(Debug, Clone, PartialEq)]
pub struct EbState {
    /// `Ψ`, m×m symmetric PSD.
    pub psi: DMatrix<f64>,
    /// `Γ`, m×n nonnegative; column `j` is the diagonal of `Γ̄_j`.
    pub gamma: DMatrix<f64>,
    pub x: DMatrix<f64>,
    pub s: DMatrix<f64>,
    pub lambda: f64,
    pub iteration: usize,
}

impl EbState {
    pub fn shape(&self) -> (usize, usize) {
        self.gamma.shape()
    }

    fn ensure_matches(&self, y: &DenseMatrix) -> Result<()> {
        let (m, n) = y.shape();
        let checks = [
            (self.psi.shape(), (m, m)),
            (self.gamma.shape(), (m, n)),
            (self.x.shape(), (m, n)),
            (self.s.shape(), (m, n)),
        ];
        for (found, expected) in checks {
            if found != expected {
                return Err(Error::ShapeMismatch { expected, found });
            }
        }
        Ok(())
    }
}

/// Result of a solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub x_hat: DenseMatrix,
    pub s_hat: DenseMatrix,
    /// Objective value after each iteration.
    pub cost_trace: Vec<f64>,
    pub iterations_used: usize,
    pub wall_time: Duration,
    /// Whether the solver's own stopping criterion fired before the
    /// iteration cap.
    pub converged: bool,
}

impl Decomposition {
    pub fn wall_time_ms(&self) -> f64 {
        self.wall_time.as_secs_f64() * 1e3
    }
}

/// Which variational covariance terms enter the `(Ψ, Γ)` update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PosteriorTerms {
    /// Empirical Bayes: keep `U_j` and `V_j`.
    Full,
    /// MAP: force `U_j = V_j = 0`.
    Zeroed,
}

pub(crate) fn check_wide(y: &DenseMatrix) -> Result<()> {
    if y.cols() < y.rows() {
        return Err(Error::TallInput {
            rows: y.rows(),
            cols: y.cols(),
        });
    }
    Ok(())
}

/// Mean of `y²` over observed entries (all entries when `observed` is None).
fn kappa(y: &DenseMatrix, observed: Option<&DMatrix<bool>>) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for (k, v) in y.as_mat().iter().enumerate() {
        if observed.is_none_or(|mask| mask.as_slice()[k]) {
            sum += v * v;
            count += 1;
        }
    }
    sum / count as f64
}

fn init_with_kappa(y: &DenseMatrix, lambda: f64, kappa: f64) -> Result<EbState> {
    if kappa == 0.0 {
        return Err(Error::ZeroData);
    }
    let (m, n) = y.shape();
    Ok(EbState {
        psi: DMatrix::identity(m, m) * kappa,
        gamma: DMatrix::from_element(m, n, kappa),
        x: DMatrix::zeros(m, n),
        s: DMatrix::zeros(m, n),
        lambda,
        iteration: 0,
    })
}

/// `Ψ = κI`, `γ_ij = κ`, `X = S = 0` with `κ = ‖Y‖²_F / (nm)`.
pub fn init_state(y: &DenseMatrix, config: &SolverConfig) -> Result<EbState> {
    config.validate()?;
    check_wide(y)?;
    init_with_kappa(y, config.lambda, kappa(y, None))
}

/// `Σ_j [ y_jᵀ Σ_j⁻¹ y_j + log det Σ_j ]` with `Σ_j = Ψ + Γ̄_j + λI`.
///
/// A covariance that fails Cholesky factorization is reported as
/// [`Error::SingularCovariance`]; no regularization is added here.
pub fn eb_cost(state: &EbState, y: &DenseMatrix) -> Result<f64> {
    state.ensure_matches(y)?;
    let (m, n) = y.shape();
    let ym = y.as_mat();
    let mut work = SpdWork::new(m);
    let mut total = 0.0;
    for j in 0..n {
        let ok = work.factor_lower(|a, b| column_cov(state, j, a, b));
        if !ok {
            return Err(Error::SingularCovariance { column: j });
        }
        let col = ym.column(j);
        total += work.quad_form(|i| col[i]) + 2.0 * work.half_log_det();
    }
    Ok(total)
}

#[inline]
fn column_cov(state: &EbState, j: usize, a: usize, b: usize) -> f64 {
    let mut v = state.psi[(a, b)];
    if a == b {
        v += state.gamma[(a, j)] + state.lambda;
    }
    v
}

/// One empirical-Bayes sweep.
pub fn eb_iterate(state: &EbState, y: &DenseMatrix) -> Result<EbState> {
    eb_iterate_with(state, y, PosteriorTerms::Full)
}

/// One sweep with a choice of posterior covariance terms. The MAP iteration
/// is `eb_iterate_with(.., PosteriorTerms::Zeroed)`.
///
/// All column quantities read the incoming `(Ψ, Γ)`; `(Ψ, Γ)` are replaced
/// once at the end. If `M_j` fails to factor, it is retried once with
/// `1e-12 · trace(M_j)/m` added to its diagonal.
pub fn eb_iterate_with(state: &EbState, y: &DenseMatrix, terms: PosteriorTerms) -> Result<EbState> {
    state.ensure_matches(y)?;
    let (m, n) = y.shape();
    let ym = y.as_mat();
    let psi = &state.psi;
    let keep = terms == PosteriorTerms::Full;

    let mut work = SpdWork::new(m);
    let mut minv = DMatrix::zeros(m, m);
    let mut minv_d_sum = DMatrix::zeros(m, m);
    let mut w = vec![0.0; m];
    let mut x = DMatrix::zeros(m, n);
    let mut s = DMatrix::zeros(m, n);
    let mut gamma = DMatrix::zeros(m, n);

    for j in 0..n {
        if !work.factor_lower(|a, b| column_cov(state, j, a, b)) {
            let trace: f64 = (0..m).map(|i| column_cov(state, j, i, i)).sum();
            let jitter = 1e-12 * trace / m as f64;
            let ok = work.factor_lower(|a, b| {
                column_cov(state, j, a, b) + if a == b { jitter } else { 0.0 }
            });
            if !ok {
                return Err(Error::SingularCovariance { column: j });
            }
        }
        work.inverse_into(&mut minv);

        let yj = ym.column(j);
        work.solve_into(|i| yj[i], &mut w);
        for i in 0..m {
            let mut acc = 0.0;
            for (k, wk) in w.iter().enumerate() {
                acc += psi[(i, k)] * wk;
            }
            x[(i, j)] = acc;
            let g = state.gamma[(i, j)];
            let sij = g * w[i];
            s[(i, j)] = sij;
            // V_ii = γ − γ²(M⁻¹)_ii, written as γ·[M⁻¹(Ψ + λI)]_ii to avoid
            // cancellation when γ dominates M.
            let v_ii = if keep {
                let row: f64 = (0..m).map(|k| minv[(i, k)] * psi[(k, i)]).sum();
                (g * (row + state.lambda * minv[(i, i)])).max(0.0)
            } else {
                0.0
            };
            gamma[(i, j)] = sij * sij + v_ii;
        }
        if keep {
            for k in 0..m {
                let d = state.gamma[(k, j)] + state.lambda;
                for (acc, v) in minv_d_sum.column_mut(k).iter_mut().zip(minv.column(k).iter()) {
                    *acc += v * d;
                }
            }
        }
    }

    // Σ_j U_j = Σ_j (Ψ − Ψ M_j⁻¹ Ψ) = Ψ Σ_j M_j⁻¹ (Γ̄_j + λI), which has no
    // cancellation.
    let mut psi_new = &x * x.transpose();
    if keep {
        psi_new += psi * &minv_d_sum;
    }
    psi_new /= n as f64;
    let psi_new = (&psi_new + psi_new.transpose()) * 0.5;

    for mat in [&x, &s, &gamma, &psi_new] {
        if let Some(k) = mat.iter().position(|v| !v.is_finite()) {
            let rows = mat.nrows();
            return Err(Error::NonFinite { row: k % rows, col: k / rows });
        }
    }

    Ok(EbState {
        psi: psi_new,
        gamma,
        x,
        s,
        lambda: state.lambda,
        iteration: state.iteration + 1,
    })
}

/// Shared outer loop: iterate, record the cost after each step, stop early
/// on small relative change.
pub(crate) fn run_loop(
    y: &DenseMatrix,
    config: &SolverConfig,
    mut state: EbState,
    mut step: impl FnMut(&EbState) -> Result<EbState>,
    mut cost: impl FnMut(&EbState) -> Result<f64>,
) -> Result<(Decomposition, EbState)> {
    let start = Instant::now();
    let mut prev = cost(&state)?;
    let mut trace = Vec::with_capacity(config.max_iterations);
    let mut converged = false;
    for _ in 0..config.max_iterations {
        state = step(&state)?;
        let c = cost(&state)?;
        trace.push(c);
        if (prev - c).abs() <= config.rel_cost_tol * prev.abs() {
            converged = true;
            break;
        }
        prev = c;
    }
    let decomposition = Decomposition {
        x_hat: DenseMatrix::new(state.x.clone())?,
        s_hat: DenseMatrix::new(state.s.clone())?,
        iterations_used: trace.len(),
        cost_trace: trace,
        wall_time: start.elapsed(),
        converged,
    };
    debug_assert_eq!(decomposition.x_hat.shape(), y.shape());
    Ok((decomposition, state))
}

/// Runs [`init_state`] then [`eb_iterate`] until the cost settles or the
/// iteration cap is hit.
pub fn solve_eb(y: &DenseMatrix, config: &SolverConfig) -> Result<Decomposition> {
    solve_eb_with_state(y, config).map(|(d, _)| d)
}

/// [`solve_eb`], also returning the final hyperparameters.
pub fn solve_eb_with_state(y: &DenseMatrix, config: &SolverConfig) -> Result<(Decomposition, EbState)> {
    let state = init_state(y, config)?;
    run_loop(
        y,
        config,
        state,
        |st| eb_iterate(st, y),
        |st| eb_cost(st, y),
    )
}

/// Matrix completion: entries with `observed[(i, j)] == false` have their
/// `γ_ij` held at `completion_gamma · κ` for the whole run, so `Ŝ` absorbs
/// whatever `Y` holds there and `X̂` fills them in. `κ` is the mean square
/// over observed entries.
pub fn solve_completion(
    y: &DenseMatrix,
    observed: &DMatrix<bool>,
    config: &SolverConfig,
) -> Result<Decomposition> {
    config.validate()?;
    check_wide(y)?;
    if observed.shape() != y.shape() {
        return Err(Error::ShapeMismatch {
            expected: y.shape(),
            found: observed.shape(),
        });
    }
    if let Some(column) = (0..y.cols()).find(|&j| observed.column(j).iter().all(|&o| !o)) {
        return Err(Error::UnobservedColumn { column });
    }
    let k = kappa(y, Some(observed));
    let pinned = config.completion_gamma * k;
    let pin = |st: &mut EbState| {
        for (g, &o) in st.gamma.iter_mut().zip(observed.iter()) {
            if !o {
                *g = pinned;
            }
        }
    };
    let mut state = init_with_kappa(y, config.lambda, k)?;
    pin(&mut state);
    let (d, _) = run_loop(
        y,
        config,
        state,
        |st| {
            let mut next = eb_iterate(st, y)?;
            pin(&mut next);
            Ok(next)
        },
        |st| eb_cost(st, y),
    )?;
    Ok(d)
}
