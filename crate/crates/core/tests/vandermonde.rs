use mechsim::vandermonde::{
    abs_moment, binomial_exact, integrate, limit_cdf, limit_density, norm_const, norm_const_beta,
    BinomialTable, KahanSum, VandermondeDist,
};
use num_bigint::BigUint;
use proptest::prelude::*;

#[test]
fn identity_holds_exactly_for_mid_sized_kappa() {
    let table = BinomialTable::new(101);
    for kappa in 1..=50 {
        for rho in 0..=kappa {
            assert!(table.vandermonde_identity(kappa, rho), "({kappa}, {rho})");
        }
    }
    // Independent of the table: direct products of exact binomials.
    let (kappa, rho) = (37u64, 11u64);
    let lhs: BigUint = (-(kappa as i64)..=kappa as i64)
        .map(|i| {
            binomial_exact((kappa as i64 - i) as u64, rho)
                * binomial_exact((kappa as i64 + i) as u64, rho)
        })
        .sum();
    assert_eq!(lhs, binomial_exact(2 * kappa + 1, 2 * rho + 1));
}

proptest! {
    #[test]
    fn pmf_is_symmetric_with_zero_mean(kappa in 1u64..400, frac in 0.0..=1.0f64) {
        let rho = ((kappa as f64) * frac) as u64;
        let d = VandermondeDist::new(kappa, rho).unwrap();
        let k = kappa as i64;
        let mut mean = KahanSum::default();
        let mut total = KahanSum::default();
        for i in -k..=k {
            let p = d.pmf(i).unwrap();
            prop_assert_eq!(p, d.pmf(-i).unwrap());
            mean.add(p * i as f64 / kappa as f64);
            total.add(p);
        }
        prop_assert!(mean.total().abs() <= 1e-12);
        prop_assert!((total.total() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn cdf_is_monotone(kappa in 1u64..200, rho_frac in 0.0..=1.0f64) {
        let rho = ((kappa as f64) * rho_frac) as u64;
        let d = VandermondeDist::new(kappa, rho).unwrap();
        let mut prev = 0.0;
        for j in -40..=40 {
            let x = j as f64 / 40.0;
            let c = d.cdf(x);
            prop_assert!(c + 1e-15 >= prev);
            prev = c;
        }
        prop_assert!((prev - 1.0).abs() < 1e-12);
    }
}

#[test]
fn normalising_constants_agree() {
    for rho in 0..=500 {
        let a = norm_const(rho);
        let b = norm_const_beta(rho);
        assert!(((a - b) / a).abs() <= 1e-12, "rho={rho}: {a} vs {b}");
    }
}

#[test]
fn moments_match_quadrature() {
    for rho in [0u64, 1, 2, 5, 10, 25, 50, 75, 100] {
        for j in 1..=4u32 {
            let q = 2.0
                * integrate(
                    |t| t.powi(j as i32) * limit_density(rho, t),
                    0.0,
                    1.0,
                    1e-13,
                );
            let m = abs_moment(rho, j).unwrap();
            assert!((q - m).abs() <= 1e-8, "rho={rho} j={j}: {q} vs {m}");
        }
    }
}

#[test]
fn markov_bound_on_limit_tails() {
    for rho in [1u64, 5, 10, 40, 100, 400] {
        let m = abs_moment(rho, 1).unwrap();
        for eps in [0.01, 0.05, 0.1, 0.2, 0.5, 0.9] {
            let tail = limit_cdf(rho, -eps).unwrap() + 1.0 - limit_cdf(rho, eps).unwrap();
            assert!(tail <= m / eps + 1e-12, "rho={rho} eps={eps}");
        }
    }
}

#[test]
fn expected_rank_converges_in_kappa() {
    for rho in [10, 20, 30, 40, 50] {
        let limit = abs_moment(rho, 1).unwrap();
        let gaps: Vec<f64> = [100, 1000, 5000]
            .iter()
            .map(|&k| (VandermondeDist::new(k, rho).unwrap().expected_abs_rank() - limit).abs())
            .collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
        assert!(gaps[2] <= 1e-3);
    }
}

#[test]
fn distance_is_half_l1_and_bounded() {
    let d = VandermondeDist::new(300, 12).unwrap();
    let q = d.discretized_limit();
    assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!((2.0 * d.tv_distance() - d.l1_distance()).abs() < 1e-15);
    assert!(d.tv_distance() > 0.0 && d.tv_distance() < 1.0);
}
