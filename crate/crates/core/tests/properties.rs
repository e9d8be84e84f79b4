use proptest::prelude::*;
use weva_core::cfr::regret_match;
use weva_core::evaluation::{midranks, spearman_rho};

proptest! {
    #[test]
    fn regret_matching_is_a_distribution(r in prop::collection::vec(-10.0f64..10.0, 1..8)) {
        let s = regret_match(&r);
        prop_assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (p, x) in s.iter().zip(&r) {
            prop_assert!(*p >= 0.0);
            if *x <= 0.0 && r.iter().any(|&v| v > 0.0) {
                prop_assert_eq!(*p, 0.0);
            }
        }
    }

    #[test]
    fn spearman_ignores_monotone_maps(x in prop::collection::vec(-5.0f64..5.0, 3..40), y in prop::collection::vec(-5.0f64..5.0, 40)) {
        let y = &y[..x.len()];
        prop_assume!(midranks(&x).iter().any(|&r| r != midranks(&x)[0]));
        prop_assume!(midranks(y).iter().any(|&r| r != midranks(y)[0]));
        let rho = spearman_rho(&x, y).unwrap();
        let mapped: Vec<f64> = x.iter().map(|v| v.exp() * 2.0 + 1.0).collect();
        prop_assert!((spearman_rho(&mapped, y).unwrap() - rho).abs() < 1e-12);
        prop_assert!((spearman_rho(y, &x).unwrap() - rho).abs() < 1e-12);
        prop_assert!(rho.abs() <= 1.0 + 1e-12);
        prop_assert!((spearman_rho(&x, &x).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn midranks_sum_is_triangular(x in prop::collection::vec(0u8..5, 1..30)) {
        let v: Vec<f64> = x.iter().map(|&b| b as f64).collect();
        let n = v.len() as f64;
        prop_assert!((midranks(&v).iter().sum::<f64>() - n * (n + 1.0) / 2.0).abs() < 1e-9);
    }
}
