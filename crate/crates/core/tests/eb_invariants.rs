use nalgebra::DMatrix;
use proptest::prelude::*;
use rpca_core::eb::{eb_cost, eb_iterate, init_state};
use rpca_core::map::{map_iterate, map_state_cost};
use rpca_core::{DenseMatrix, EbState, ObjectiveParams, SolverConfig};

fn wide_matrix() -> impl Strategy<Value = DenseMatrix> {
    (1usize..5, 0usize..8).prop_flat_map(|(m, extra)| {
        let n = m + extra;
        proptest::collection::vec(-5.0f64..5.0, m * n)
            .prop_map(move |v| DenseMatrix::from_row_slice(m, n, &v).unwrap())
    })
}

fn start(y: &DenseMatrix, lambda: f64) -> EbState {
    init_state(y, &SolverConfig { lambda, ..SolverConfig::default() }).unwrap()
}

fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn permute(a: &DMatrix<f64>, perm: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, perm[j])])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eb_cost_never_increases(y in wide_matrix(), lambda in 0.01f64..1.0) {
        let mut st = start(&y, lambda);
        let mut prev = eb_cost(&st, &y).unwrap();
        for _ in 0..30 {
            st = eb_iterate(&st, &y).unwrap();
            let cost = eb_cost(&st, &y).unwrap();
            prop_assert!(cost <= prev + 1e-9 * prev.abs().max(1.0), "{prev} -> {cost}");
            prev = cost;
        }
    }

    #[test]
    fn map_cost_never_increases_after_first_step(y in wide_matrix(), lambda in 0.01f64..1.0) {
        let params = ObjectiveParams::with_lambda(lambda);
        let mut st = map_iterate(&start(&y, lambda), &y).unwrap();
        let mut prev = map_state_cost(&st, &y, &params).unwrap();
        for _ in 0..30 {
            st = map_iterate(&st, &y).unwrap();
            let cost = map_state_cost(&st, &y, &params).unwrap();
            prop_assert!(cost <= prev + 1e-9 * prev.abs().max(1.0), "{prev} -> {cost}");
            prev = cost;
        }
    }

    #[test]
    fn hyperparameters_stay_feasible(y in wide_matrix(), lambda in 0.01f64..1.0) {
        let mut st = start(&y, lambda);
        for _ in 0..20 {
            st = eb_iterate(&st, &y).unwrap();
            prop_assert!(st.gamma.iter().all(|&g| g >= 0.0));
            prop_assert_eq!(&st.psi, &st.psi.transpose());
            let min_eig = st.psi.symmetric_eigenvalues().min();
            prop_assert!(min_eig >= -1e-10 * st.psi.norm().max(1e-300));
        }
    }

    #[test]
    fn means_are_a_shrinkage_of_the_data(y in wide_matrix(), lambda in 0.01f64..1.0, steps in 0usize..6) {
        let mut st = start(&y, lambda);
        for _ in 0..steps {
            st = eb_iterate(&st, &y).unwrap();
        }
        let next = eb_iterate(&st, &y).unwrap();
        let m = y.rows();
        for j in 0..y.cols() {
            let a = &st.psi + DMatrix::from_diagonal(&st.gamma.column(j).into_owned());
            let cov = &a + DMatrix::identity(m, m) * lambda;
            let yj = y.as_mat().column(j).into_owned();
            let expect = &a * cov.cholesky().unwrap().solve(&yj);
            let got = next.x.column(j) + next.s.column(j);
            prop_assert!((&got - &expect).norm() <= 1e-9 * yj.norm().max(1e-12));
            prop_assert!(got.norm() <= yj.norm() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn iteration_commutes_with_scaling(y in wide_matrix(), lambda in 0.01f64..1.0, c in 0.1f64..10.0) {
        let yc = y.scale(c).unwrap();
        let mut a = start(&y, lambda);
        let mut b = start(&yc, lambda * c * c);
        for _ in 0..20 {
            a = eb_iterate(&a, &y).unwrap();
            b = eb_iterate(&b, &yc).unwrap();
            prop_assert!(rel(&b.x, &(&a.x * c)) <= 1e-9 || a.x.norm() == 0.0);
            prop_assert!(rel(&b.psi, &(&a.psi * (c * c))) <= 1e-9);
            prop_assert!(rel(&b.gamma, &(&a.gamma * (c * c))) <= 1e-9);
        }
    }

    #[test]
    fn iteration_commutes_with_column_permutation(y in wide_matrix(), lambda in 0.01f64..1.0, key in any::<u64>()) {
        let n = y.cols();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut k = key;
        for i in (1..n).rev() {
            perm.swap(i, (k % (i as u64 + 1)) as usize);
            k = k.rotate_left(7) ^ 0x9e37_79b9_7f4a_7c15;
        }
        let yp = DenseMatrix::new(permute(y.as_mat(), &perm)).unwrap();
        let mut a = start(&y, lambda);
        let mut b = start(&yp, lambda);
        for _ in 0..20 {
            a = eb_iterate(&a, &y).unwrap();
            b = eb_iterate(&b, &yp).unwrap();
        }
        prop_assert!(rel(&b.psi, &a.psi) <= 1e-9);
        prop_assert!((&b.x - permute(&a.x, &perm)).norm() <= 1e-9 * y.frobenius_norm());
        prop_assert!((&b.s - permute(&a.s, &perm)).norm() <= 1e-9 * y.frobenius_norm());
    }
}

#[test]
fn scalar_fixed_point_beats_a_fine_grid() {
    // m = 1, n = 3: the cost depends on (ψ, γ₁, γ₂, γ₃); each γ_j has a
    // closed-form minimizer given ψ, so a 1-D scan over ψ is exhaustive.
    let y = [1.5, -0.8, 3.0];
    let lambda = 0.1;
    let data = DenseMatrix::from_row_slice(1, 3, &y).unwrap();
    let cfg = SolverConfig {
        lambda,
        max_iterations: 20_000,
        rel_cost_tol: 1e-15,
        ..SolverConfig::default()
    };
    let mut st = init_state(&data, &cfg).unwrap();
    for _ in 0..cfg.max_iterations {
        st = eb_iterate(&st, &data).unwrap();
    }
    let fitted = eb_cost(&st, &data).unwrap();

    let profile = |psi: f64| -> f64 {
        y.iter()
            .map(|&v| {
                let var = (v * v).max(psi + lambda);
                v * v / var + var.ln()
            })
            .sum()
    };
    let best = (0..=200_000)
        .map(|k| profile(10.0 * k as f64 / 200_000.0))
        .fold(f64::INFINITY, f64::min);
    assert!(fitted <= best + 1e-6, "fitted {fitted}, grid {best}");
}
