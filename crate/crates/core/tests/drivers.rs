use msgdp_core::algorithms::{
    h_pi, iteration_bound_h, iteration_bound_kappa, kappa_lambda_pi, kappa_pi, kappa_vi, lambda_pi, noise_bound,
    NoiseSpec, RunConfig, RunTrace,
};
use msgdp_core::mdp::random::random_mdp;
use msgdp_core::mdp::{argmax_lowest, bellman_policy, evaluate_policy, oracle_optimal, q_values, DetPolicy, ValueFn};
use msgdp_core::operators::xi_coefficient;

fn start(n: usize, seed: u64) -> ValueFn {
    ValueFn::new((0..n).map(|s| ((s as u64 * 7 + seed) % 11) as f64 - 5.0).collect())
}

fn policy_values(mdp: &msgdp_core::TabularMdp, trace: &RunTrace) -> Vec<ValueFn> {
    trace.policies().map(|pi| evaluate_policy(mdp, pi).unwrap()).collect()
}

fn assert_monotone(values: &[ValueFn]) {
    for pair in values.windows(2) {
        for (prev, next) in pair[0].iter().zip(pair[1].iter()) {
            assert!(*next >= prev - 1e-10);
        }
    }
}

#[test]
fn pi_family_reaches_the_optimum_monotonically_and_within_bounds() {
    for seed in 0..25 {
        let mdp = random_mdp(6, 3, 0.9, seed);
        let star = oracle_optimal(&mdp).unwrap().value;
        let cfg = RunConfig::default().with_optimum(star.clone());
        let v0 = start(6, seed);
        for h in [1, 2, 4] {
            let t = h_pi(&mdp, h, &v0, &cfg).unwrap();
            assert!(t.converged);
            assert!(t.final_value().unwrap().sup_distance(&star) <= 1e-8);
            assert!(t.improvement_steps() as u64 <= iteration_bound_h(6, 3, 0.9, h));
            assert_monotone(&policy_values(&mdp, &t));
            let rate = 0.9f64.powi(h as i32);
            let errs: Vec<f64> = t.errors().into_iter().map(Option::unwrap).collect();
            for e in errs.windows(2) {
                assert!(e[1] <= rate * e[0] + 1e-9);
            }
        }
        for kappa in [0.0, 0.4, 0.8, 1.0] {
            let t = kappa_pi(&mdp, kappa, &v0, &cfg).unwrap();
            assert!(t.converged);
            assert!(t.final_value().unwrap().sup_distance(&star) <= 1e-8);
            assert!(t.improvement_steps() as u64 <= iteration_bound_kappa(6, 3, 0.9, kappa));
            assert_monotone(&policy_values(&mdp, &t));
            let xi = xi_coefficient(kappa, 0.9);
            let errs: Vec<f64> = t.errors().into_iter().map(Option::unwrap).collect();
            for e in errs.windows(2) {
                assert!(e[1] <= xi * e[0] + 1e-9);
            }
            if kappa == 1.0 {
                assert_eq!(t.improvement_steps(), 1);
                assert!(t.iterations[0].error_inf.unwrap() <= 1e-8);
            }
        }
    }
}

#[test]
fn kappa_zero_retraces_classical_pi() {
    for seed in 0..20 {
        let mdp = random_mdp(6, 3, 0.9, 50 + seed);
        let v0 = start(6, seed);
        let a = h_pi(&mdp, 1, &v0, &RunConfig::default()).unwrap();
        let b = kappa_pi(&mdp, 0.0, &v0, &RunConfig::default()).unwrap();
        let c = kappa_lambda_pi(&mdp, 0.0, 1.0, &v0, &RunConfig::default(), None).unwrap();
        let pa: Vec<_> = a.policies().collect();
        assert_eq!(pa, b.policies().collect::<Vec<_>>());
        assert_eq!(pa, c.policies().collect::<Vec<_>>());
    }
}

#[test]
fn full_evaluation_reproduces_kappa_pi_policies() {
    for seed in 0..20 {
        let mdp = random_mdp(6, 3, 0.9, 80 + seed);
        let v0 = start(6, seed);
        for kappa in [0.3, 0.7] {
            let a = kappa_pi(&mdp, kappa, &v0, &RunConfig::default()).unwrap();
            let b = kappa_lambda_pi(&mdp, kappa, 1.0, &v0, &RunConfig::default(), None).unwrap();
            assert_eq!(a.policies().collect::<Vec<_>>(), b.policies().collect::<Vec<_>>());
        }
    }
}

#[test]
fn kappa_vi_matches_kappa_lambda_pi_with_lambda_equal_kappa() {
    for seed in 0..20 {
        let mdp = random_mdp(6, 3, 0.9, 120 + seed);
        let v0 = start(6, seed);
        for kappa in [0.0, 0.5, 0.9] {
            let cfg = RunConfig {
                max_outer_iters: 60,
                ..RunConfig::default()
            };
            let vi = kappa_vi(&mdp, kappa, &v0, 1e-300, &cfg).unwrap();
            let klpi = kappa_lambda_pi(&mdp, kappa, kappa, &v0, &cfg, None).unwrap();
            let n = vi.n_iterations().min(klpi.n_iterations());
            assert!(n >= 10);
            for (a, b) in vi.values().zip(klpi.values()).take(n) {
                assert!(a.sup_distance(b) <= 1e-9);
            }
        }
    }
}

/// Independent lambda-PI: greedy by argmax of Q, evaluation by the
/// truncated geometric series of policy backups.
fn reference_lambda_pi(mdp: &msgdp_core::TabularMdp, lambda: f64, v0: &ValueFn, iters: usize) -> Vec<f64> {
    let n = mdp.n_states();
    let mut v = v0.to_vec();
    for _ in 0..iters {
        let q = q_values(mdp, &v);
        let pi = DetPolicy::new((0..n).map(|s| argmax_lowest(q.row(s)).0).collect());
        let mut power = v.clone();
        let mut acc = vec![0.0; n];
        let mut w = 1.0 - lambda;
        for _ in 0..3000 {
            power = bellman_policy(mdp, &pi, &power).into_inner();
            for (a, p) in acc.iter_mut().zip(&power) {
                *a += w * p;
            }
            w *= lambda;
        }
        v = acc;
    }
    v
}

#[test]
fn lambda_pi_matches_an_independent_reference() {
    for seed in 0..10 {
        let mdp = random_mdp(5, 3, 0.9, 200 + seed);
        let v0 = start(5, seed);
        for lambda in [0.3, 0.8] {
            let cfg = RunConfig {
                max_outer_iters: 15,
                ..RunConfig::default()
            };
            let t = lambda_pi(&mdp, lambda, &v0, &cfg).unwrap();
            let k = t.n_iterations();
            let reference = reference_lambda_pi(&mdp, lambda, &v0, k);
            assert!(
                t.final_value().unwrap().sup_distance(&reference) < 1e-8,
                "seed {seed} lambda {lambda}"
            );
        }
    }
}

#[test]
fn noiseless_kappa_lambda_pi_converges() {
    for seed in 0..20 {
        let mdp = random_mdp(6, 3, 0.9, 300 + seed);
        let star = oracle_optimal(&mdp).unwrap().value;
        for lambda in [0.5, 0.75, 1.0] {
            let t = kappa_lambda_pi(&mdp, 0.5, lambda, &start(6, seed), &RunConfig::default(), None).unwrap();
            assert!(t.converged);
            assert!(t.final_value().unwrap().sup_distance(&star) <= 1e-8);
        }
        let silent = NoiseSpec::new(0.0, 0.0, 9);
        let a = kappa_lambda_pi(&mdp, 0.5, 0.75, &start(6, seed), &RunConfig::default(), None).unwrap();
        let b = kappa_lambda_pi(&mdp, 0.5, 0.75, &start(6, seed), &RunConfig::default(), Some(&silent)).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn noisy_runs_stay_inside_the_error_bound() {
    for seed in 0..5 {
        let mdp = random_mdp(6, 3, 0.9, 400 + seed);
        let star = oracle_optimal(&mdp).unwrap().value;
        let cfg = RunConfig {
            max_outer_iters: 200,
            ..RunConfig::default().with_optimum(star)
        };
        for (kappa, eps, delta) in [(0.0, 0.05, 0.05), (0.5, 0.05, 0.0), (0.5, 0.01, 0.05)] {
            let noise = NoiseSpec::new(eps, delta, seed);
            let t = kappa_lambda_pi(&mdp, kappa, 1.0, &start(6, seed), &cfg, Some(&noise)).unwrap();
            let tail = t.errors()[150..].iter().map(|e| e.unwrap()).fold(0.0, f64::max);
            assert!(tail <= noise_bound(eps, delta, kappa, 0.9));
        }
    }
}

#[test]
fn converged_trace_value_is_its_policy_value() {
    for seed in 0..20 {
        let mdp = random_mdp(7, 2, 0.95, 500 + seed);
        let t = kappa_pi(&mdp, 0.6, &start(7, seed), &RunConfig::default()).unwrap();
        let last = t.last().unwrap();
        assert!(evaluate_policy(&mdp, &last.policy).unwrap().sup_distance(&last.value) <= 1e-9);
    }
}
