mod common;

use imm_core::imm::{
    conservative_gamma, gamma_condition, gamma_search, lambda_prime, lambda_star, run_detailed, sampling,
};
use imm_core::{Exec, ImmParams, RRSequence, Variant};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn lambda_star_relaxation(n in 2u64..2_000_000, kf in 0.0f64..1.0, eps in 0.001f64..0.999, ell in 0.01f64..10.0) {
        let k = 1 + ((n - 1) as f64 * kf) as u64;
        let ls = lambda_star(n, k, eps, ell).unwrap();
        let bound = 8.0 * n as f64 * (k as f64 + ell + 1.0) * (n as f64).ln() / (eps * eps) - 1.0;
        prop_assert!(ls <= bound, "n={n} k={k} eps={eps} ell={ell}: {ls} > {bound}");
        prop_assert!(ls > 0.0);
    }

    #[test]
    fn lambda_star_monotone(n in 4u64..100_000, kf in 0.0f64..0.99, eps in 0.01f64..0.99, ell in 0.1f64..5.0) {
        let k = 1 + ((n - 2) as f64 * kf) as u64;
        let base = lambda_star(n, k, eps, ell).unwrap();
        prop_assert!(lambda_star(n, k, eps, ell + 0.01).unwrap() > base);
        // ln C(n, k) only grows up to k = n/2
        if k < n / 2 {
            prop_assert!(lambda_star(n, k + 1, eps, ell).unwrap() > base);
        }
    }

    #[test]
    fn lambda_prime_positive_and_increasing(n in 4u64..100_000, kf in 0.0f64..0.5, eps in 0.01f64..0.99, ell in 0.1f64..5.0) {
        let k = 1 + ((n / 2 - 1) as f64 * kf) as u64;
        let ep = imm_core::imm::eps_prime(eps);
        let lp = lambda_prime(n, k, ep, ell).unwrap();
        prop_assert!(lp > 0.0);
        if k < n / 2 {
            prop_assert!(lambda_prime(n, k + 1, ep, ell).unwrap() > lp);
        }
    }

    #[test]
    fn conservative_gamma_suffices(n in 16u64..5_000_000, kf in 0.0f64..1.0, epsf in 0.0f64..1.0, ell in 0.1f64..5.0) {
        let gamma = conservative_gamma(n);
        let eps = (1.0 / n as f64).max(0.01) + epsf * (0.99 - (1.0 / n as f64).max(0.01));
        let k_max = (n as f64 - ell - gamma - 1.0).floor();
        prop_assume!(k_max >= 1.0);
        let k = 1 + ((k_max - 1.0) * kf) as u64;
        prop_assert!(gamma_condition(n, k, eps, ell, gamma).unwrap());
    }
}

#[test]
fn gamma_search_verifies_both_sides() {
    for (n, k) in [(16, 2), (100, 5), (15233, 50), (100_000, 200)] {
        let r = gamma_search(n, k, 0.1, 1.0).unwrap();
        assert!(r.lambda_ceil <= r.n_pow_gamma);
        assert!(!gamma_condition(n, k, 0.1, 1.0, r.gamma - 1e-3).unwrap());
        // union-bound arithmetic at the returned gamma
        let lhs = r.lambda_ceil / (n as f64).powf(1.0 + r.gamma);
        assert!(lhs <= 1.0 / n as f64 * (1.0 + 1e-12));
    }
}

#[test]
fn sampling_trace_invariants() {
    for seed in 0..20u64 {
        let g = common::random_graph(seed, 32, 70);
        let params = ImmParams::new(32, 3, 0.5, 1.0, Variant::Imm).unwrap();
        let mut seq = RRSequence::new(&g, seed);
        let trace = sampling(&params, &mut seq).unwrap();
        assert!(trace.lb >= 1.0);
        assert!(trace.theta_tilde <= params.max_theta());
        assert_eq!(trace.theta_tilde, (params.lambda_star / trace.lb).ceil() as usize);
        assert!(trace.iterations.len() as u32 <= params.sampling_rounds());
        for (j, it) in trace.iterations.iter().enumerate() {
            assert_eq!(it.i as usize, j + 1);
            assert_eq!(it.x, 32.0 / 2f64.powi(it.i as i32));
            assert_eq!(it.theta, (params.lambda_prime.unwrap() / it.x).ceil() as usize);
            assert_eq!(it.passed, 32.0 * it.coverage >= (1.0 + params.eps_prime) * it.x);
        }
        // only the last iteration may pass
        let passes = trace.iterations.iter().filter(|r| r.passed).count();
        assert!(passes <= 1);
        if passes == 1 {
            assert!(trace.iterations.last().unwrap().passed);
        } else {
            assert_eq!(trace.lb, 1.0);
        }
    }
}

#[test]
fn variants_share_sampling_and_differ_in_final_sequence() {
    let g = common::random_graph(5, 24, 50);
    for seed in 0..10u64 {
        let imm_p = ImmParams::new(24, 2, 0.4, 1.0, Variant::Imm).unwrap();
        let w1_p = ImmParams::new(24, 2, 0.4, 1.0, Variant::W1).unwrap();
        let w2_p = ImmParams::new(24, 2, 0.4, 1.0, Variant::W2).unwrap();
        let (imm, imm_seqs) = run_detailed(&g, &imm_p, seed, Exec::default()).unwrap();
        let (w1, w1_seqs) = run_detailed(&g, &w1_p, seed, Exec::default()).unwrap();
        let (w2, _) = run_detailed(&g, &w2_p, seed, Exec::default()).unwrap();

        assert_eq!(imm.trace, w1.trace);
        assert_eq!(imm.final_seed, seed);
        assert_ne!(w1.final_seed, seed);

        let theta = imm.trace.theta_tilde;
        let sampling_prefix = &imm_seqs.sampling.materialized()[..theta];
        assert_eq!(imm_seqs.final_prefix(theta), sampling_prefix);
        assert_ne!(w1_seqs.final_prefix(theta), &w1_seqs.sampling.materialized()[..theta.min(w1_seqs.sampling.len())][..]);

        assert!(w1.rr_sets_total <= 2 * w1.params.max_theta());
        assert!(w1.rr_sets_total <= 2 * imm.rr_sets_total + theta);
        assert!(w2.params.lambda_star > imm.params.lambda_star);
        for out in [&imm, &w1, &w2] {
            assert!(out.trace.theta_tilde <= out.params.max_theta());
            assert_eq!(out.result.theta, out.trace.theta_tilde);
            assert_eq!(out.result.seeds.len(), 2);
        }
    }
}

#[test]
fn run_is_deterministic_across_exec() {
    let g = common::random_graph(6, 40, 90);
    let p = ImmParams::new(40, 4, 0.3, 1.0, Variant::W1).unwrap();
    let (a, _) = run_detailed(&g, &p, 77, Exec::Sequential).unwrap();
    let (b, _) = run_detailed(&g, &p, 77, Exec::Parallel).unwrap();
    assert_eq!(a.result, b.result);
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.rr_sets_total, b.rr_sets_total);
}

#[test]
fn params_must_match_graph() {
    let g = common::random_graph(6, 10, 10);
    let p = ImmParams::new(11, 2, 0.3, 1.0, Variant::Imm).unwrap();
    assert!(imm_core::imm::run(&g, &p, 0).is_err());
}
