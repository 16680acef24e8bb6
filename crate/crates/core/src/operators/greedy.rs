use crate::error::{MdpError, Result};
use crate::mdp::{bellman_optimal, bellman_policy, DetPolicy, TabularMdp, ValueFn};

/// Work done by an inner solver.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InnerStats {
    pub sweeps: usize,
    pub backups: usize,
    pub residual: f64,
}

/// A greedy policy together with the operator image it was read from.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyResult {
    pub policy: DetPolicy,
    pub value: ValueFn,
    pub inner_stats: InnerStats,
}

/// `T^n v`.
pub fn t_power(mdp: &TabularMdp, v: &[f64], n: usize) -> Result<ValueFn> {
    if n == 0 {
        return Err(MdpError::InvalidParam("power must be at least 1".into()));
    }
    let mut w = ValueFn::new(v.to_vec());
    for _ in 0..n {
        w = bellman_optimal(mdp, &w).value;
    }
    Ok(w)
}

/// First action of the h-horizon control problem with terminal value `v`,
/// computed as the one-step greedy policy w.r.t. `T^{h-1} v`.
pub fn h_greedy(mdp: &TabularMdp, v: &[f64], h: usize) -> Result<GreedyResult> {
    if h == 0 {
        return Err(MdpError::InvalidParam("h must be at least 1".into()));
    }
    let lookahead = if h == 1 {
        ValueFn::new(v.to_vec())
    } else {
        t_power(mdp, v, h - 1)?
    };
    let backup = bellman_optimal(mdp, &lookahead);
    Ok(GreedyResult {
        policy: backup.policy,
        value: backup.value,
        inner_stats: InnerStats {
            sweeps: h,
            backups: h * mdp.n_states() * mdp.n_actions(),
            residual: 0.0,
        },
    })
}

/// `T_h^pi v = T^pi T^{h-1} v`.
pub fn t_h_policy(mdp: &TabularMdp, pi: &DetPolicy, v: &[f64], h: usize) -> Result<ValueFn> {
    if h == 0 {
        return Err(MdpError::InvalidParam("h must be at least 1".into()));
    }
    if h == 1 {
        return Ok(bellman_policy(mdp, pi, v));
    }
    Ok(bellman_policy(mdp, pi, &t_power(mdp, v, h - 1)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::fixtures::{two_chain, CHAIN_A, CHAIN_B};
    use crate::mdp::random::random_mdp;
    use crate::mdp::{oracle_optimal, q_values, TIE_TOL};

    #[test]
    fn t_power_examples() {
        let chain = two_chain();
        let v0 = [0.0, 0.0];
        assert_eq!(t_power(&chain, &v0, 1).unwrap(), bellman_optimal(&chain, &v0).value);
        let t2 = t_power(&chain, &v0, 2).unwrap();
        assert!((t2[0] - 0.5).abs() < 1e-15 && (t2[1] - 1.5).abs() < 1e-15);
        let star = oracle_optimal(&chain).unwrap().value;
        assert!(t_power(&chain, &star, 7).unwrap().sup_distance(&star) < 1e-10);
        assert!(t_power(&chain, &v0, 0).is_err());
    }

    #[test]
    fn h_greedy_on_two_chain() {
        let chain = two_chain();
        let one = h_greedy(&chain, &[0.0, 0.0], 1).unwrap();
        assert_eq!(one.policy[0], CHAIN_A);
        let b = bellman_optimal(&chain, &[0.0, 0.0]);
        assert_eq!(one.policy, b.policy);
        assert_eq!(one.value, b.value);
        let two = h_greedy(&chain, &[0.0, 0.0], 2).unwrap();
        assert_eq!(two.policy[0], CHAIN_B);
        assert_eq!(two.inner_stats.sweeps, 2);
        assert_eq!(two.inner_stats.backups, 8);
    }

    #[test]
    fn long_lookahead_finds_the_optimal_policy() {
        for seed in 0..20 {
            let mdp = random_mdp(5, 3, 0.6, seed);
            let star = oracle_optimal(&mdp).unwrap();
            let g = h_greedy(&mdp, &[0.0; 5], 30).unwrap();
            let ties = q_values(&mdp, &star.value).tie_sets(TIE_TOL);
            assert!(ties.contains(&g.policy), "seed {seed}");
        }
    }

    #[test]
    fn t_h_policy_examples() {
        let chain = two_chain();
        let pi = DetPolicy::new(vec![CHAIN_B, CHAIN_A]);
        let v = t_h_policy(&chain, &pi, &[0.0, 0.0], 2).unwrap();
        assert!((v[0] - 0.5).abs() < 1e-15 && (v[1] - 1.5).abs() < 1e-15);
        assert_eq!(
            t_h_policy(&chain, &pi, &[0.3, 0.1], 1).unwrap(),
            bellman_policy(&chain, &pi, &[0.3, 0.1])
        );
    }

    #[test]
    fn h_greedy_policy_attains_t_h() {
        for seed in 0..20 {
            let mdp = random_mdp(6, 3, 0.9, 100 + seed);
            let v: Vec<f64> = (0..6).map(|s| (s as f64 * 0.7).sin()).collect();
            for h in 1..5 {
                let g = h_greedy(&mdp, &v, h).unwrap();
                let th = t_h_policy(&mdp, &g.policy, &v, h).unwrap();
                assert!(th.sup_distance(&t_power(&mdp, &v, h).unwrap()) < 1e-10);
            }
        }
    }
}
