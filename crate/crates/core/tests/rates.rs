use proptest::prelude::*;
use spheresos_core::gegenbauer::GegenbauerBasis;
use spheresos_core::rho::{kernel_lambdas, rate_row, rate_table, rho2, rho4, rho_tilde, KernelSpec, DEFAULT_THETA_GRID};
use spheresos_core::toeplitz::{build, gegenbauer_roots, Multiplier};

#[test]
fn rho2_is_top_eigenvalue_of_t_squared() {
    // λ₂ = eᵀT[(d t² − 1)/(d − 1)]e, maximized by the top eigenvector of T[t²]
    for d in 3..=6 {
        let basis = GegenbauerBasis::new(d, 30).unwrap();
        for ell in [2, 5, 10, 20] {
            let (_, spec) = rho2(d, ell).unwrap();
            let (top, _) = build(&basis, ell, &Multiplier::Monomial(vec![0.0, 0.0, 1.0])).unwrap().lambda_max().unwrap();
            let lambda2 = (d as f64 * top - 1.0) / (d as f64 - 1.0);
            assert!((spec.lambdas[0] - lambda2).abs() < 1e-10, "d={d} ell={ell}");
        }
    }
}

#[test]
fn quartic_rate_beats_surrogate() {
    for d in [3, 4, 5] {
        for ell in [4 * d, 6 * d] {
            let (r4, spec) = rho4(d, ell, DEFAULT_THETA_GRID).unwrap();
            let (t, _) = rho_tilde(d, ell, 2).unwrap();
            assert!(r4 <= t / (1.0 - t) + 1e-12);
            let again = KernelSpec::from_vector(d, ell, 2, &spec.e).unwrap();
            assert!((again.rho_value - r4).abs() < 1e-12);
        }
    }
}

#[test]
fn table_is_sorted_and_consistent() {
    let rows = rate_table(&[4, 3], &[12, 8], &[2, 1]).unwrap();
    let keys: Vec<_> = rows.iter().map(|r| (r.d, r.ell, r.n)).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    for r in &rows {
        assert_eq!(r.spec.n, r.n);
        let b = r.rho_bound.unwrap();
        assert!(b <= r.rho2.or(r.rho4).unwrap_or(f64::INFINITY) + 1e-15);
    }
}

#[test]
fn spectrum_of_t_matches_roots() {
    let basis = GegenbauerBasis::new(5, 12).unwrap();
    let eig = build(&basis, 11, &Multiplier::t()).unwrap().eigenvalues().unwrap();
    for (a, r) in eig.iter().zip(gegenbauer_roots(&basis, 12).unwrap()) {
        assert!((a - r).abs() < 1e-12);
        assert!(basis.eval(12, *a).unwrap().abs() < 1e-8 * basis.endpoint_value(12).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rho2_decreases_in_ell(d in 3usize..9, ell in 1usize..40) {
        let (a, _) = rho2(d, ell).unwrap();
        let (b, _) = rho2(d, ell + 1).unwrap();
        prop_assert!(b < a);
    }

    #[test]
    fn optimum_beats_random_kernels(d in 3usize..7, ell in 2usize..12, e in prop::collection::vec(-1.0f64..1.0, 13)) {
        let e = &e[..=ell];
        prop_assume!(e.iter().any(|x| x.abs() > 1e-3));
        let spec = KernelSpec::from_vector(d, ell, 1, e).unwrap();
        let norm = e.iter().map(|x| x * x).sum::<f64>().sqrt();
        let unit: Vec<f64> = e.iter().map(|x| x / norm).collect();
        prop_assert!((kernel_lambdas(d, ell, 1, &unit).unwrap()[0] - spec.lambdas[0]).abs() < 1e-12);
        let (best, _) = rho2(d, ell).unwrap();
        prop_assert!(best <= spec.rho_value + 1e-12);
    }

    #[test]
    fn bound_never_exceeds_direct(d in 3usize..6, mult in 2usize..6, n in 1usize..3) {
        let ell = mult * d * n;
        let row = rate_row(d, ell, n).unwrap();
        let direct = row.rho2.or(row.rho4).unwrap();
        prop_assert!(row.rho_bound.unwrap() <= direct);
        prop_assert!(row.rho_tilde >= 0.0);
    }
}
