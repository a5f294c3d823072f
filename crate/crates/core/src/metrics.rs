//! Recovery metrics for comparing an estimate against a planted matrix.

use crate::error::{Error, Result};
use crate::linalg::{left_singular_basis, rank_floor, singular_values};
use crate::matrix::DenseMatrix;

/// `‖x_true − x_hat‖²_F / ‖x_true‖²_F` for a single trial.
pub fn normalized_mse(x_true: &DenseMatrix, x_hat: &DenseMatrix) -> Result<f64> {
    x_hat.ensure_shape(x_true.shape())?;
    let denom = x_true.as_mat().norm_squared();
    if denom == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((x_true.as_mat() - x_hat.as_mat()).norm_squared() / denom)
}

/// Principal angles, in degrees and ascending, between the top-`r` left
/// singular subspaces of `a` and `b`.
///
/// Both matrices need the same number of rows and at least `r` singular
/// values above roundoff (`σ_max · ε · max(m, n)`).
pub fn subspace_angles(a: &DenseMatrix, b: &DenseMatrix, r: usize) -> Result<Vec<f64>> {
    if a.rows() != b.rows() {
        return Err(Error::ShapeMismatch {
            expected: (a.rows(), b.cols()),
            found: b.shape(),
        });
    }
    if r == 0 || r > a.rows() {
        return Err(Error::InvalidParameter(format!(
            "subspace dimension {r} outside 1..={}",
            a.rows()
        )));
    }
    let ua = leading_basis(a, r)?;
    let ub = leading_basis(b, r)?;
    let overlap = ua.transpose() * ub;
    let mut angles: Vec<f64> = singular_values(&overlap)
        .into_iter()
        .map(|c| c.clamp(0.0, 1.0).acos().to_degrees())
        .collect();
    angles.sort_by(f64::total_cmp);
    Ok(angles)
}

/// Arithmetic mean of [`subspace_angles`]; the scalar reported by the
/// benchmarks.
pub fn mean_subspace_angle(a: &DenseMatrix, b: &DenseMatrix, r: usize) -> Result<f64> {
    let angles = subspace_angles(a, b, r)?;
    Ok(angles.iter().sum::<f64>() / angles.len() as f64)
}

fn leading_basis(a: &DenseMatrix, r: usize) -> Result<nalgebra::DMatrix<f64>> {
    let (basis, sv) = left_singular_basis(a.as_mat(), r);
    let floor = rank_floor(sv[0], a.shape());
    let found = sv.iter().filter(|&&s| s > floor).count();
    if found < r {
        return Err(Error::RankDeficient { needed: r, found });
    }
    Ok(basis)
}

/// Number of singular values strictly greater than `rel_tol · σ_max`.
///
/// # Panics
///
/// If `rel_tol` is outside `(0, 1]`.
pub fn numerical_rank(x: &DenseMatrix, rel_tol: f64) -> usize {
    assert!(
        rel_tol > 0.0 && rel_tol <= 1.0,
        "rel_tol must lie in (0, 1], got {rel_tol}"
    );
    let sv = singular_values(x.as_mat());
    let cut = rel_tol * sv[0];
    sv.iter().filter(|&&s| s > cut).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn m(rows: usize, cols: usize, v: &[f64]) -> DenseMatrix {
        DenseMatrix::from_row_slice(rows, cols, v).unwrap()
    }

    #[test]
    fn mse_examples() {
        let x = m(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(normalized_mse(&x, &x).unwrap(), 0.0);
        assert_eq!(normalized_mse(&x, &DenseMatrix::zeros(2, 2).unwrap()).unwrap(), 1.0);
        let hat = m(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        assert_eq!(normalized_mse(&x, &hat).unwrap(), 1.0);
    }

    #[test]
    fn mse_errors() {
        let z = DenseMatrix::zeros(2, 2).unwrap();
        assert_eq!(normalized_mse(&z, &z), Err(Error::ZeroNorm));
        let x = m(1, 2, &[1.0, 2.0]);
        assert!(matches!(normalized_mse(&x, &z), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn angle_examples() {
        let e1 = m(2, 2, &[1.0, 3.0, 0.0, 0.0]);
        let e2 = m(2, 2, &[0.0, 0.0, 2.0, -1.0]);
        let diag = m(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(subspace_angles(&e1, &e1, 1).unwrap(), vec![0.0]);
        let a = subspace_angles(&e1, &e2, 1).unwrap();
        assert!((a[0] - 90.0).abs() < 1e-12);
        let a = subspace_angles(&e1, &diag, 1).unwrap();
        assert!((a[0] - 45.0).abs() < 1e-9);

        let full = m(3, 4, &[1., 2., 0., 1., 0., 1., 3., 1., 2., 0., 1., 1.]);
        let angles = subspace_angles(&full, &full, 3).unwrap();
        assert!(angles.iter().all(|&t| t.abs() < 1e-6), "{angles:?}");
    }

    #[test]
    fn angle_rank_deficiency() {
        let e1 = m(2, 2, &[1.0, 3.0, 0.0, 0.0]);
        assert_eq!(
            subspace_angles(&e1, &e1, 2),
            Err(Error::RankDeficient { needed: 2, found: 1 })
        );
        let z = DenseMatrix::zeros(2, 3).unwrap();
        assert!(matches!(
            subspace_angles(&z, &e1, 1),
            Err(Error::RankDeficient { found: 0, .. })
        ));
        assert!(matches!(
            subspace_angles(&e1, &e1, 3),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(numerical_rank(&DenseMatrix::zeros(3, 3).unwrap(), 0.5), 0);
        assert_eq!(numerical_rank(&DenseMatrix::identity(3).unwrap(), 0.5), 3);
        let d = DenseMatrix::new(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            10.0, 1.0, 0.001,
        ])))
        .unwrap();
        assert_eq!(numerical_rank(&d, 0.01), 2);
    }
}
