//! Principal component pursuit by the inexact augmented Lagrangian method.
//!
//! Solves `min ‖X‖_* + w‖S‖₁  s.t.  X + S = Y` with the iteration
//!
//! ```text
//! X ← svt(Y − S + Λ/μ, 1/μ)
//! S ← soft_threshold(Y − X + Λ/μ, w/μ)
//! Λ ← Λ + μ(Y − X − S)
//! μ ← min(μ·growth, μ_max)
//! ```
//!
//! starting from `S = 0` and `Λ = Y / max(‖Y‖₂, ‖Y‖_∞ / w)`.

use std::time::Instant;

use nalgebra::DMatrix;

use crate::eb::Decomposition;
use crate::error::{Error, Result};
use crate::linalg::{singular_values, thin_svd};
use crate::matrix::DenseMatrix;

/// Settings for [`solve_pcp`]. `None` fields are derived from the data:
/// `l1_weight = 1/√max(m, n)`, `mu_initial = 1.25/σ_max(Y)`,
/// `mu_max = mu_initial · 1e7`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcpConfig {
    pub l1_weight: Option<f64>,
    pub mu_initial: Option<f64>,
    pub mu_growth: f64,
    pub mu_max: Option<f64>,
    pub residual_tol: f64,
    pub max_iterations: usize,
}

impl Default for PcpConfig {
    fn default() -> Self {
        Self {
            l1_weight: None,
            mu_initial: None,
            mu_growth: 1.5,
            mu_max: None,
            residual_tol: 1e-7,
            max_iterations: 500,
        }
    }
}

impl PcpConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: Option<f64>| v.is_none_or(|v| v > 0.0 && v.is_finite());
        if !(positive(self.l1_weight) && positive(self.mu_initial) && positive(self.mu_max)) {
            return Err(Error::InvalidParameter(
                "l1_weight, mu_initial and mu_max must be positive".into(),
            ));
        }
        if !(self.mu_growth > 1.0) {
            return Err(Error::InvalidParameter("mu_growth must exceed 1".into()));
        }
        if !(self.residual_tol > 0.0 && self.residual_tol < 1.0) {
            return Err(Error::InvalidParameter("residual_tol must lie in (0, 1)".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be >= 1".into()));
        }
        Ok(())
    }
}

fn shrink(v: f64, tau: f64) -> f64 {
    v.signum() * (v.abs() - tau).max(0.0)
}

fn soft_threshold_mat(m: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    m.map(|v| shrink(v, tau))
}

/// Entrywise `sign(v)·max(|v| − tau, 0)`.
pub fn soft_threshold(m: &DenseMatrix, tau: f64) -> Result<DenseMatrix> {
    check_tau(tau)?;
    DenseMatrix::new(soft_threshold_mat(m.as_mat(), tau))
}

/// Singular value thresholding: `U · max(Σ − tau, 0) · Vᵀ`.
pub fn svt(m: &DenseMatrix, tau: f64) -> Result<DenseMatrix> {
    check_tau(tau)?;
    DenseMatrix::new(svt_mat(m.as_mat(), tau).0)
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!("threshold must be >= 0, got {tau}")));
    }
    Ok(())
}

/// Returns the thresholded matrix and its nuclear norm.
fn svt_mat(m: &DMatrix<f64>, tau: f64) -> (DMatrix<f64>, f64) {
    let svd = thin_svd(m);
    let mut out = DMatrix::zeros(m.nrows(), m.ncols());
    let mut nuclear = 0.0;
    for (k, &sigma) in svd.s.iter().enumerate() {
        let shrunk = sigma - tau;
        if shrunk <= 0.0 {
            break;
        }
        nuclear += shrunk;
        out.ger(shrunk, &svd.u.column(k), &svd.vt.row(k).transpose(), 1.0);
    }
    (out, nuclear)
}

/// Inexact-ALM principal component pursuit.
///
/// `cost_trace` records `‖X‖_* + w‖S‖₁` after each iteration. Hitting the
/// iteration cap is not an error: the result comes back with
/// `converged == false`.
pub fn solve_pcp(y: &DenseMatrix, config: &PcpConfig) -> Result<Decomposition> {
    config.validate()?;
    let start = Instant::now();
    let ym = y.as_mat();
    let y_norm = ym.norm();
    if y_norm == 0.0 {
        return Err(Error::ZeroData);
    }
    let (m, n) = y.shape();
    let weight = config.l1_weight.unwrap_or(1.0 / (m.max(n) as f64).sqrt());
    let spectral = singular_values(ym)[0];
    let mut mu = config.mu_initial.unwrap_or(1.25 / spectral);
    let mu_max = config.mu_max.unwrap_or(mu * 1e7);

    let mut dual = ym / spectral.max(ym.amax() / weight);
    let mut x = DMatrix::zeros(m, n);
    let mut s = DMatrix::zeros(m, n);
    let mut trace = Vec::new();
    let mut converged = false;

    for _ in 0..config.max_iterations {
        let (x_new, nuclear) = svt_mat(&(ym - &s + &dual / mu), 1.0 / mu);
        x = x_new;
        s = soft_threshold_mat(&(ym - &x + &dual / mu), weight / mu);
        let residual = ym - &x - &s;
        dual += &residual * mu;
        mu = (mu * config.mu_growth).min(mu_max);
        trace.push(nuclear + weight * s.iter().map(|v| v.abs()).sum::<f64>());
        if residual.norm() / y_norm < config.residual_tol {
            converged = true;
            break;
        }
    }

    Ok(Decomposition {
        x_hat: DenseMatrix::new(x)?,
        s_hat: DenseMatrix::new(s)?,
        iterations_used: trace.len(),
        cost_trace: trace,
        wall_time: start.elapsed(),
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: usize, cols: usize, v: &[f64]) -> DenseMatrix {
        DenseMatrix::from_row_slice(rows, cols, v).unwrap()
    }

    #[test]
    fn soft_threshold_examples() {
        let a = m(1, 3, &[3.0, -0.5, -4.0]);
        assert_eq!(soft_threshold(&a, 1.0).unwrap(), m(1, 3, &[2.0, 0.0, -3.0]));
        assert_eq!(soft_threshold(&a, 0.0).unwrap(), a);
        assert!(soft_threshold(&a, -1.0).is_err());
    }

    #[test]
    fn svt_examples() {
        let d = m(2, 2, &[3.0, 0.0, 0.0, 1.0]);
        let out = svt(&d, 2.0).unwrap();
        assert!((out.as_mat() - m(2, 2, &[1.0, 0.0, 0.0, 0.0]).as_mat()).norm() < 1e-14);

        let a = m(2, 3, &[1.0, -2.0, 0.5, 3.0, 0.1, -1.0]);
        assert!((svt(&a, 0.0).unwrap().as_mat() - a.as_mat()).norm() < 1e-10);

        let u = nalgebra::DVector::from_vec(vec![0.6, 0.8]);
        let v = nalgebra::DVector::from_vec(vec![0.0, 1.0, 0.0]);
        let r1 = DenseMatrix::new(&u * v.transpose() * 5.0).unwrap();
        let expect = &u * v.transpose() * 3.0;
        assert!((svt(&r1, 2.0).unwrap().as_mat() - expect).norm() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(PcpConfig::default().validate().is_ok());
        assert!(PcpConfig { mu_growth: 1.0, ..PcpConfig::default() }.validate().is_err());
        assert!(PcpConfig { residual_tol: 1.0, ..PcpConfig::default() }.validate().is_err());
        assert!(PcpConfig { l1_weight: Some(-1.0), ..PcpConfig::default() }.validate().is_err());
        let z = DenseMatrix::zeros(2, 2).unwrap();
        assert_eq!(solve_pcp(&z, &PcpConfig::default()), Err(Error::ZeroData));
    }

    #[test]
    fn cap_reached_is_flagged_not_error() {
        let y = m(2, 3, &[1.0, -2.0, 0.5, 3.0, 0.1, -1.0]);
        let cfg = PcpConfig { max_iterations: 1, ..PcpConfig::default() };
        let out = solve_pcp(&y, &cfg).unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations_used, 1);
    }

    fn arb(rows: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
        proptest::collection::vec(-3.0f64..3.0, rows * cols)
            .prop_map(move |v| DMatrix::from_row_slice(rows, cols, &v))
    }

    proptest! {
        #[test]
        fn prox_operators_are_non_expansive(a in arb(3, 4), b in arb(3, 4), tau in 0.0f64..2.0) {
            let d_in = (&a - &b).norm();
            let d_soft = (soft_threshold_mat(&a, tau) - soft_threshold_mat(&b, tau)).norm();
            let d_svt = (svt_mat(&a, tau).0 - svt_mat(&b, tau).0).norm();
            prop_assert!(d_soft <= d_in + 1e-12);
            prop_assert!(d_svt <= d_in + 1e-10);
        }

        #[test]
        fn svt_commutes_with_orthogonal_maps(a in arb(3, 4), q in arb(3, 3), tau in 0.0f64..2.0) {
            let qr = q.qr();
            let qmat = qr.q();
            prop_assume!(qr.r().diagonal().iter().all(|d| d.abs() > 1e-6));
            let lhs = svt_mat(&(&qmat * &a), tau).0;
            let rhs = &qmat * svt_mat(&a, tau).0;
            prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + a.norm()));
        }
    }
}
