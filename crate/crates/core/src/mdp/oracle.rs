//! Ground-truth optimal values for small instances.

use crate::error::{MdpError, Result};

use super::{bellman_optimal, evaluate_policy, DetPolicy, TabularMdp, ValueFn};

/// Largest policy count the oracle is willing to enumerate by default.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

const VI_RESIDUAL: f64 = 1e-12;
const VI_MAX_SWEEPS: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleBackend {
    /// Every deterministic stationary policy was evaluated exactly.
    Enumeration { policies: u64 },
    /// Value iteration run to a `1e-12` fixed-point residual.
    ValueIteration { sweeps: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub value: ValueFn,
    pub policy: DetPolicy,
    pub backend: OracleBackend,
}

pub fn oracle_optimal(mdp: &TabularMdp) -> Result<OracleResult> {
    oracle_optimal_with_cap(mdp, DEFAULT_ENUMERATION_CAP)
}

/// Optimal value by brute force when `n_actions^n_states <= cap`, otherwise
/// by value iteration.
pub fn oracle_optimal_with_cap(mdp: &TabularMdp, cap: u64) -> Result<OracleResult> {
    match policy_count(mdp, cap) {
        Some(count) => enumerate(mdp, count),
        None => value_iteration(mdp),
    }
}

fn policy_count(mdp: &TabularMdp, cap: u64) -> Option<u64> {
    let mut count: u64 = 1;
    for _ in 0..mdp.n_states() {
        count = count.checked_mul(mdp.n_actions() as u64)?;
        if count > cap {
            return None;
        }
    }
    Some(count)
}

fn enumerate(mdp: &TabularMdp, count: u64) -> Result<OracleResult> {
    let (n, m) = (mdp.n_states(), mdp.n_actions());
    let mut best = vec![f64::NEG_INFINITY; n];
    let mut best_policy = DetPolicy::uniform(n, 0);
    let mut best_sum = f64::NEG_INFINITY;
    let mut digits = vec![0usize; n];
    for _ in 0..count {
        let pi = DetPolicy::new(digits.clone());
        let v = evaluate_policy(mdp, &pi)?;
        for (b, x) in best.iter_mut().zip(v.iter()) {
            *b = b.max(*x);
        }
        // An optimal policy dominates every other one, so it also maximises the sum.
        let sum: f64 = v.iter().sum();
        if sum > best_sum {
            best_sum = sum;
            best_policy = pi;
        }
        for d in digits.iter_mut() {
            *d += 1;
            if *d < m {
                break;
            }
            *d = 0;
        }
    }
    Ok(OracleResult {
        value: ValueFn(best),
        policy: best_policy,
        backend: OracleBackend::Enumeration { policies: count },
    })
}

fn value_iteration(mdp: &TabularMdp) -> Result<OracleResult> {
    let mut v = ValueFn::zeros(mdp.n_states());
    for sweep in 1..=VI_MAX_SWEEPS {
        let backup = bellman_optimal(mdp, &v);
        let change = backup.value.sup_distance(&v);
        v = backup.value;
        if change < VI_RESIDUAL {
            let policy = bellman_optimal(mdp, &v).policy;
            return Ok(OracleResult {
                value: v,
                policy,
                backend: OracleBackend::ValueIteration { sweeps: sweep },
            });
        }
    }
    Err(MdpError::NonConvergence {
        sweeps: VI_MAX_SWEEPS,
        residual: bellman_optimal(mdp, &v).value.sup_distance(&v),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::fixtures::{single_state, two_chain, CHAIN_B};
    use crate::mdp::random::random_mdp;

    #[test]
    fn two_chain_by_enumeration() {
        let res = oracle_optimal(&two_chain()).unwrap();
        assert_eq!(res.backend, OracleBackend::Enumeration { policies: 4 });
        assert!((res.value[0] - 1.0).abs() < 1e-12 && (res.value[1] - 2.0).abs() < 1e-12);
        assert_eq!(res.policy[0], CHAIN_B);
    }

    #[test]
    fn single_state_closed_form() {
        let res = oracle_optimal(&single_state(&[0.2, 0.7, -0.1], 0.8)).unwrap();
        assert!((res.value[0] - 0.7 / 0.2).abs() < 1e-12);
        assert_eq!(res.policy[0], 1);
    }

    #[test]
    fn enumeration_agrees_with_value_iteration() {
        for seed in 0..10 {
            let mdp = random_mdp(5, 3, 0.9, seed);
            let en = oracle_optimal(&mdp).unwrap();
            let vi = oracle_optimal_with_cap(&mdp, 0).unwrap();
            assert!(matches!(vi.backend, OracleBackend::ValueIteration { .. }));
            assert!(en.value.sup_distance(&vi.value) < 1e-8);
            let pv = evaluate_policy(&mdp, &en.policy).unwrap();
            assert!(pv.sup_distance(&en.value) < 1e-10);
        }
    }

    #[test]
    fn optimum_dominates_every_policy() {
        let mdp = random_mdp(3, 2, 0.7, 3);
        let best = oracle_optimal(&mdp).unwrap();
        for code in 0..8usize {
            let pi = DetPolicy::new((0..3).map(|s| (code >> s) & 1).collect());
            let v = evaluate_policy(&mdp, &pi).unwrap();
            assert!(v.iter().zip(best.value.iter()).all(|(x, b)| *x <= *b + 1e-12));
        }
    }
}
