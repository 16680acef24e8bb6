use msgdp_core::mdp::random::random_mdp;
use msgdp_core::mdp::{
    bellman_optimal, bellman_policy, evaluate_policy, oracle_optimal, q_values, sup_distance, DetPolicy, TIE_TOL,
};
use msgdp_core::operators::{
    h_greedy, kappa_greedy_set, kappa_weighted_return, lambda_from_bar, t_kappa, t_kappa_policy,
    t_lambda_bar_kappa_policy, t_lambda_bar_kappa_series, t_lambda_policy, t_power, td_surrogate_mdp, xi_coefficient,
    KappaParams,
};
use proptest::prelude::*;

fn case() -> impl Strategy<Value = (u64, Vec<usize>, Vec<f64>)> {
    (
        any::<u64>(),
        proptest::collection::vec(0usize..3, 5),
        proptest::collection::vec(-5.0f64..5.0, 5),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kappa_backup_contracts_by_xi(
        seed in any::<u64>(),
        kappa in 0.0f64..=1.0,
        v in proptest::collection::vec(-5.0f64..5.0, 5),
        w in proptest::collection::vec(-5.0f64..5.0, 5),
    ) {
        let mdp = random_mdp(5, 3, 0.9, seed);
        let p = KappaParams::exact(kappa);
        let tv = t_kappa(&mdp, &v, &p).unwrap().value;
        let tw = t_kappa(&mdp, &w, &p).unwrap().value;
        prop_assert!(tv.sup_distance(&tw) <= xi_coefficient(kappa, 0.9) * sup_distance(&v, &w) + 1e-9);
    }

    #[test]
    fn kappa_policy_closed_forms_agree((seed, pi, v) in case(), kappa in 0.0f64..=1.0) {
        let mdp = random_mdp(5, 3, 0.9, seed);
        let pi = DetPolicy::new(pi);
        let direct = t_kappa_policy(&mdp, &pi, &v, kappa).unwrap();
        // v + (I - kappa gamma P)^{-1} (T^pi v - v), the inverse applied as a Neumann series.
        let tv = bellman_policy(&mdp, &pi, &v);
        let mut term: Vec<f64> = tv.iter().zip(&v).map(|(a, b)| a - b).collect();
        let mut acc = term.clone();
        for _ in 0..2000 {
            term = (0..5).map(|s| kappa * 0.9 * mdp.expected(s, pi[s], &term)).collect();
            for (x, t) in acc.iter_mut().zip(&term) {
                *x += t;
            }
        }
        let via_td: Vec<f64> = v.iter().zip(&acc).map(|(a, b)| a + b).collect();
        prop_assert!(direct.sup_distance(&via_td) < 1e-9);
    }

    #[test]
    fn lambda_operators_commute((seed, pi, v) in case(), l1 in 0.0f64..=1.0, l2 in 0.0f64..=1.0) {
        let mdp = random_mdp(5, 3, 0.9, seed);
        let pi = DetPolicy::new(pi);
        let a = t_lambda_policy(&mdp, &pi, &t_lambda_policy(&mdp, &pi, &v, l2).unwrap(), l1).unwrap();
        let b = t_lambda_policy(&mdp, &pi, &t_lambda_policy(&mdp, &pi, &v, l1).unwrap(), l2).unwrap();
        prop_assert!(a.sup_distance(&b) < 1e-9);
    }

    #[test]
    fn lambda_operator_balance_relation((seed, pi, v) in case(), lambda in 0.0f64..=1.0) {
        let mdp = random_mdp(5, 3, 0.9, seed);
        let pi = DetPolicy::new(pi);
        let tl = t_lambda_policy(&mdp, &pi, &v, lambda).unwrap();
        let t_tl = bellman_policy(&mdp, &pi, &tl);
        let tv = bellman_policy(&mdp, &pi, &v);
        for s in 0..5 {
            prop_assert!((tl[s] - lambda * t_tl[s] - (1.0 - lambda) * tv[s]).abs() < 1e-9);
        }
    }

    #[test]
    fn mixed_lambda_matches_its_series((seed, pi, v) in case(), kappa in 0.0f64..=1.0, lambda_bar in 0.0f64..0.95) {
        let mdp = random_mdp(5, 3, 0.9, seed);
        let pi = DetPolicy::new(pi);
        let closed = t_lambda_bar_kappa_policy(&mdp, &pi, &v, lambda_bar, kappa).unwrap();
        let series = t_lambda_bar_kappa_series(&mdp, &pi, &v, lambda_bar, kappa).unwrap();
        prop_assert!(closed.sup_distance(&series) < 1e-6);
    }

    #[test]
    fn kappa_backup_fixes_policy_values((seed, pi, _v) in case(), kappa in 0.0f64..=1.0) {
        let mdp = random_mdp(5, 3, 0.9, seed);
        let pi = DetPolicy::new(pi);
        let vpi = evaluate_policy(&mdp, &pi).unwrap();
        prop_assert!(t_kappa_policy(&mdp, &pi, &vpi, kappa).unwrap().sup_distance(&vpi) < 1e-8);
    }
}

#[test]
fn kappa_backup_fixes_the_optimum_and_keeps_its_greedy_set() {
    for seed in 0..30 {
        let mdp = random_mdp(5, 3, 0.9, seed);
        let star = oracle_optimal(&mdp).unwrap().value;
        let one_step = q_values(&mdp, &star).tie_sets(TIE_TOL);
        for kappa in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let g = t_kappa(&mdp, &star, &KappaParams::exact(kappa)).unwrap();
            assert!(g.value.sup_distance(&star) < 1e-8);
            assert_eq!(kappa_greedy_set(&mdp, &star, kappa).unwrap(), one_step);
        }
    }
}

#[test]
fn kappa_endpoints() {
    for seed in 0..30 {
        let mdp = random_mdp(5, 3, 0.9, 100 + seed);
        let v: Vec<f64> = (0..5).map(|s| (s as f64 * 1.3).sin()).collect();
        let zero = t_kappa(&mdp, &v, &KappaParams::exact(0.0)).unwrap();
        let backup = bellman_optimal(&mdp, &v);
        assert_eq!(zero.policy, backup.policy);
        assert!(zero.value.sup_distance(&backup.value) < 1e-12);
        let star = oracle_optimal(&mdp).unwrap().value;
        assert!(
            t_kappa(&mdp, &v, &KappaParams::exact(1.0))
                .unwrap()
                .value
                .sup_distance(&star)
                < 1e-8
        );
    }
}

#[test]
fn exact_and_swept_kappa_backups_agree() {
    for seed in 0..30 {
        let mdp = random_mdp(6, 3, 0.9, 300 + seed);
        let v: Vec<f64> = (0..6).map(|s| (s as f64).cos()).collect();
        for kappa in [0.3, 0.7] {
            let exact = t_kappa(&mdp, &v, &KappaParams::exact(kappa)).unwrap();
            let swept = t_kappa(&mdp, &v, &KappaParams::vi(kappa, 1e-11)).unwrap();
            let xi_inner = kappa * 0.9;
            assert!(exact.value.sup_distance(&swept.value) <= 1e-11 * xi_inner / (1.0 - xi_inner) + 1e-12);
            assert_eq!(exact.value, t_kappa_policy(&mdp, &exact.policy, &v, kappa).unwrap());
        }
    }
}

#[test]
fn deep_lookahead_finds_the_optimal_policy() {
    for seed in 0..20 {
        let mdp = random_mdp(5, 3, 0.6, 40 + seed);
        let oracle = oracle_optimal(&mdp).unwrap();
        let g = h_greedy(&mdp, &[0.0; 5], 30).unwrap();
        assert_eq!(g.policy, oracle.policy);
        assert!(g.value.sup_distance(&t_power(&mdp, &[0.0; 5], 30).unwrap()) == 0.0);
    }
}

#[test]
fn h_greedy_action_attains_the_lookahead_maximum() {
    for seed in 0..30 {
        let mdp = random_mdp(6, 4, 0.9, 700 + seed);
        let v: Vec<f64> = (0..6).map(|s| 2.0 * (s as f64 * 0.7).sin()).collect();
        for h in [1, 2, 5] {
            let g = h_greedy(&mdp, &v, h).unwrap();
            let base = if h == 1 {
                v.clone()
            } else {
                t_power(&mdp, &v, h - 1).unwrap().into_inner()
            };
            let q = q_values(&mdp, &base);
            for s in 0..6 {
                let best = q.row(s).iter().copied().fold(f64::NEG_INFINITY, f64::max);
                assert!(q.get(s, g.policy[s]) >= best - TIE_TOL);
            }
        }
    }
}

#[test]
fn td_surrogate_shares_the_greedy_set_and_shifts_the_value() {
    for seed in 0..40 {
        let mdp = random_mdp(5, 3, 0.9, 1_000 + seed);
        let v: Vec<f64> = (0..5)
            .map(|s| 3.0 * ((s + seed as usize) as f64 * 0.37).sin())
            .collect();
        for kappa in [0.3, 0.7] {
            let td = td_surrogate_mdp(&mdp, &v, kappa).unwrap();
            let td_star = oracle_optimal(&td).unwrap().value;
            let tk = t_kappa(&mdp, &v, &KappaParams::exact(kappa)).unwrap().value;
            for s in 0..5 {
                assert!((td_star[s] - (tk[s] - v[s])).abs() < 1e-8);
            }
            assert_eq!(
                q_values(&td, &td_star).tie_sets(TIE_TOL),
                kappa_greedy_set(&mdp, &v, kappa).unwrap()
            );
        }
    }
}

#[test]
fn weighted_return_matches_kappa_policy_backup() {
    for seed in 0..40 {
        let mdp = random_mdp(5, 3, 0.9, 2_000 + seed);
        let pi = DetPolicy::new((0..5).map(|s| (s + seed as usize) % 3).collect());
        let v: Vec<f64> = (0..5).map(|s| s as f64 - 2.0).collect();
        for kappa in [0.3, 0.7] {
            let lhs = kappa_weighted_return(&mdp, &pi, &v, kappa).unwrap();
            let rhs = t_kappa_policy(&mdp, &pi, &v, kappa).unwrap();
            assert!(lhs.sup_distance(&rhs) < 1e-8);
        }
    }
}

#[test]
fn mixed_lambda_reductions() {
    assert_eq!(lambda_from_bar(0.4, 0.0), 0.4);
    assert_eq!(lambda_from_bar(1.0, 0.3), 1.0);
    assert_eq!(lambda_from_bar(0.5, 0.5), 0.75);
    let mdp = random_mdp(4, 2, 0.9, 8);
    let pi = DetPolicy::new(vec![1, 0, 0, 1]);
    let v = [1.0, -1.0, 0.5, 0.0];
    let full = t_lambda_bar_kappa_policy(&mdp, &pi, &v, 1.0, 0.4).unwrap();
    assert!(full.sup_distance(&evaluate_policy(&mdp, &pi).unwrap()) < 1e-10);
}
