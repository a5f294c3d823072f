//! Small dense kernels used in the solver inner loops.

use nalgebra::DMatrix;

/// Cholesky factor of a symmetric positive-definite matrix plus the explicit
/// inverse, computed in reusable buffers.
///
/// The lower factor is stored row-major in `chol`; the columns of `L⁻¹` are
/// stored contiguously in `linv` so that `(L⁻¹)ᵀ L⁻¹` is a sequence of
/// contiguous dot products.
pub(crate) struct SpdWork {
    m: usize,
    chol: Vec<f64>,
    linv: Vec<f64>,
    tmp: Vec<f64>,
}

impl SpdWork {
    pub fn new(m: usize) -> Self {
        Self {
            m,
            chol: vec![0.0; m * m],
            linv: vec![0.0; m * m],
            tmp: vec![0.0; m],
        }
    }

    /// Factors the symmetric matrix whose lower triangle is given by
    /// `entry(i, j)`, `j <= i`. Returns `false` if a pivot is not strictly
    /// positive and finite.
    pub fn factor_lower(&mut self, mut entry: impl FnMut(usize, usize) -> f64) -> bool {
        let m = self.m;
        let l = &mut self.chol;
        for i in 0..m {
            for j in 0..=i {
                let a = entry(i, j);
                let (upper, lower) = l.split_at_mut(i * m);
                let row_i = &mut lower[..m];
                if j == i {
                    let d = a - dot(&row_i[..j], &row_i[..j]);
                    if !(d > 0.0) || !d.is_finite() {
                        return false;
                    }
                    row_i[i] = d.sqrt();
                } else {
                    let row_j = &upper[j * m..j * m + m];
                    let v = (a - dot(&row_i[..j], &row_j[..j])) / row_j[j];
                    row_i[j] = v;
                }
            }
        }
        true
    }

    /// `Σ log L_ii`, i.e. half the log-determinant.
    pub fn half_log_det(&self) -> f64 {
        (0..self.m).map(|i| self.chol[i * self.m + i].ln()).sum()
    }

    /// `‖L⁻¹ y‖²`, i.e. `yᵀ A⁻¹ y`, by forward substitution.
    pub fn quad_form(&mut self, y: impl Fn(usize) -> f64) -> f64 {
        let m = self.m;
        for i in 0..m {
            let row = &self.chol[i * m..i * m + m];
            self.tmp[i] = (y(i) - dot(&row[..i], &self.tmp[..i])) / row[i];
        }
        dot(&self.tmp, &self.tmp)
    }

    /// Solves `A z = y` by forward and back substitution.
    pub fn solve_into(&mut self, y: impl Fn(usize) -> f64, z: &mut [f64]) {
        let m = self.m;
        for i in 0..m {
            let row = &self.chol[i * m..i * m + m];
            self.tmp[i] = (y(i) - dot(&row[..i], &self.tmp[..i])) / row[i];
        }
        for i in (0..m).rev() {
            let mut acc = self.tmp[i];
            for k in i + 1..m {
                acc -= self.chol[k * m + i] * z[k];
            }
            z[i] = acc / self.chol[i * m + i];
        }
    }

    /// Writes the full symmetric inverse into `out` (column-major `m × m`).
    pub fn inverse_into(&mut self, out: &mut DMatrix<f64>) {
        let m = self.m;
        // Column c of L⁻¹ solves L t = e_c; entries above c are zero.
        for c in 0..m {
            let col = &mut self.linv[c * m..c * m + m];
            col[..c].fill(0.0);
            for i in c..m {
                let row = &self.chol[i * m..i * m + m];
                let rhs = if i == c { 1.0 } else { 0.0 };
                let s = dot(&row[c..i], &col[c..i]);
                col[i] = (rhs - s) / row[i];
            }
        }
        // A⁻¹[a][b] = Σ_k L⁻¹[k][a] L⁻¹[k][b], nonzero only for k >= max(a, b).
        for b in 0..m {
            for a in b..m {
                let ca = &self.linv[a * m..a * m + m];
                let cb = &self.linv[b * m..b * m + m];
                let v = dot(&ca[a..], &cb[a..]);
                out[(a, b)] = v;
                out[(b, a)] = v;
            }
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for k in 0..chunks {
        let i = 4 * k;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// Thin SVD `A = U diag(s) Vt` with `s` in descending order.
pub(crate) struct Svd {
    pub u: DMatrix<f64>,
    pub s: Vec<f64>,
    pub vt: DMatrix<f64>,
}

fn to_faer(a: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

// nalgebra's bidiagonal SVD can return wrong factors for exactly
// rank-deficient inputs, so all decompositions go through faer.
pub(crate) fn thin_svd(a: &DMatrix<f64>) -> Svd {
    let svd = to_faer(a).thin_svd().expect("svd of a finite matrix");
    let (u, v, s) = (svd.U(), svd.V(), svd.S().column_vector());
    Svd {
        u: DMatrix::from_fn(u.nrows(), u.ncols(), |i, k| u[(i, k)]),
        s: (0..s.nrows()).map(|k| s[k]).collect(),
        vt: DMatrix::from_fn(v.ncols(), v.nrows(), |k, j| v[(j, k)]),
    }
}

/// Singular values in descending order.
pub(crate) fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    to_faer(a).singular_values().expect("svd of a finite matrix")
}

/// Leading `r` left singular vectors (as columns) and all singular values in
/// descending order.
pub(crate) fn left_singular_basis(a: &DMatrix<f64>, r: usize) -> (DMatrix<f64>, Vec<f64>) {
    let svd = thin_svd(a);
    let r = r.min(svd.s.len());
    (svd.u.columns(0, r).into_owned(), svd.s)
}

/// Tolerance below which a singular value is treated as exactly zero.
pub(crate) fn rank_floor(sv_max: f64, shape: (usize, usize)) -> f64 {
    sv_max * f64::EPSILON * shape.0.max(shape.1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd(m: usize) -> DMatrix<f64> {
        let b = DMatrix::from_fn(m, m, |i, j| ((i * 7 + j * 3) % 11) as f64 - 5.0);
        &b * b.transpose() + DMatrix::identity(m, m) * 0.5
    }

    #[test]
    fn inverse_matches_nalgebra() {
        for m in [1, 2, 5, 13] {
            let a = spd(m);
            let mut work = SpdWork::new(m);
            assert!(work.factor_lower(|i, j| a[(i, j)]));
            let mut inv = DMatrix::zeros(m, m);
            work.inverse_into(&mut inv);
            let reference = a.clone().cholesky().unwrap().inverse();
            assert!((&inv - &reference).norm() <= 1e-9 * reference.norm());
            let logdet = 2.0 * work.half_log_det();
            assert!((logdet - a.determinant().ln()).abs() < 1e-9 * logdet.abs().max(1.0));
            let y: Vec<f64> = (0..m).map(|i| i as f64 - 1.5).collect();
            let yv = nalgebra::DVector::from_vec(y.clone());
            let q = work.quad_form(|i| y[i]);
            let q_ref = (yv.transpose() * &reference * &yv)[(0, 0)];
            assert!((q - q_ref).abs() < 1e-9 * q_ref.abs().max(1.0));
        }
    }

    #[test]
    fn rejects_indefinite() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let mut work = SpdWork::new(2);
        assert!(!work.factor_lower(|i, j| a[(i, j)]));
    }

    #[test]
    fn singular_values_sorted() {
        let a = DMatrix::from_row_slice(2, 3, &[0.0, 1.0, 0.0, 3.0, 0.0, 0.0]);
        let sv = singular_values(&a);
        assert!((sv[0] - 3.0).abs() < 1e-14 && (sv[1] - 1.0).abs() < 1e-14);
        let (u, sv) = left_singular_basis(&a, 1);
        assert_eq!(sv.len(), 2);
        assert!((u[(1, 0)].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_low_rank_factors_reconstruct() {
        let mut rng = crate::rng::SplitMix64::new(1);
        for (m, n, r) in [(50, 50, 1), (10, 100, 1), (20, 20, 1), (8, 30, 2)] {
            let a = DMatrix::from_fn(m, r, |_, _| rng.normal());
            let b = DMatrix::from_fn(r, n, |_, _| rng.normal());
            let x = a * b;
            let svd = thin_svd(&x);
            let recon = &svd.u * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(svd.s.clone())) * &svd.vt;
            assert!((recon - &x).norm() <= 1e-12 * x.norm(), "{m}x{n} rank {r}");
            let gram = svd.u.transpose() * &svd.u;
            assert!((gram - DMatrix::identity(svd.s.len(), svd.s.len())).norm() < 1e-12);
            assert!(svd.s.windows(2).all(|w| w[0] >= w[1]));
        }
    }
}
