//! Greedy steps and evaluation that touch the model only through
//! simulator queries, one query per (state, action) backup.

use crate::error::{MdpError, Result};
use crate::mdp::{argmax_lowest, sup_distance, DetPolicy, ValueFn};

use super::simulator::GenerativeSimulator;

/// One full backup sweep: returns the new value and the greedy policy.
/// `shaping` adds `shaping_weight * E[shaping(s')]` to every reward.
fn sweep(
    sim: &mut GenerativeSimulator<'_>,
    u: &[f64],
    discount: f64,
    shaping: Option<(&[f64], f64)>,
    q_row: &mut Vec<f64>,
) -> (Vec<f64>, Vec<usize>) {
    let (n, m) = (sim.n_states(), sim.n_actions());
    let mut value = Vec::with_capacity(n);
    let mut policy = Vec::with_capacity(n);
    for s in 0..n {
        q_row.clear();
        for a in 0..m {
            let resp = sim.query(s, a);
            let reward = match shaping {
                Some((v, w)) => resp.reward + w * resp.expected(v),
                None => resp.reward,
            };
            q_row.push(reward + discount * resp.expected(u));
        }
        let (a, best) = argmax_lowest(q_row);
        value.push(best);
        policy.push(a);
    }
    (value, policy)
}

/// h-greedy policy by `h` backward-induction sweeps from `v`: the greedy
/// policy of the last sweep, i.e. one-step greedy w.r.t. `T^{h-1} v`.
/// Costs exactly `h * |S| * |A|` queries.
pub fn sim_h_greedy(sim: &mut GenerativeSimulator<'_>, v: &[f64], h: usize) -> Result<DetPolicy> {
    if h == 0 {
        return Err(MdpError::InvalidParam("h must be at least 1".into()));
    }
    let gamma = sim.gamma();
    let mut q_row = Vec::with_capacity(sim.n_actions());
    let mut u = v.to_vec();
    let mut policy = Vec::new();
    for _ in 0..h {
        (u, policy) = sweep(sim, &u, gamma, None, &mut q_row);
    }
    Ok(DetPolicy::new(policy))
}

/// kappa-greedy policy by value iteration on the surrogate MDP (reward
/// `r + (1-kappa) gamma E[v(s')]`, discount `kappa gamma`), started from `v`
/// and stopped when a sweep changes the value by less than `inner_tol`.
/// A zero surrogate discount needs a single sweep.
///
/// Returns the greedy policy of the final sweep and the number of sweeps.
pub fn sim_kappa_greedy(
    sim: &mut GenerativeSimulator<'_>,
    v: &[f64],
    kappa: f64,
    inner_tol: f64,
    max_sweeps: usize,
) -> Result<(DetPolicy, usize)> {
    if !(0.0..=1.0).contains(&kappa) {
        return Err(MdpError::InvalidParam(format!("kappa must be in [0, 1], got {kappa}")));
    }
    if !(inner_tol > 0.0) {
        return Err(MdpError::InvalidParam("inner tolerance must be positive".into()));
    }
    let gamma = sim.gamma();
    let discount = kappa * gamma;
    let shaping = (v, (1.0 - kappa) * gamma);
    let mut q_row = Vec::with_capacity(sim.n_actions());
    let mut u = v.to_vec();
    let mut change = f64::INFINITY;
    for sweeps in 1..=max_sweeps {
        let (next, policy) = sweep(sim, &u, discount, Some(shaping), &mut q_row);
        if discount == 0.0 {
            return Ok((DetPolicy::new(policy), 1));
        }
        change = sup_distance(&next, &u);
        u = next;
        if change < inner_tol {
            return Ok((DetPolicy::new(policy), sweeps));
        }
    }
    Err(MdpError::NonConvergence {
        sweeps: max_sweeps,
        residual: change,
    })
}

/// Iterative evaluation of `T_lambda^pi` through the simulator: sweeps of
/// `u <- r^pi + (1-lambda) gamma P^pi v + lambda gamma P^pi u` from `u = v`
/// until the change drops below `tol`. Each sweep costs `|S|` queries.
/// With `lambda = 1` this is plain iterative policy evaluation.
pub fn sim_evaluate(
    sim: &mut GenerativeSimulator<'_>,
    pi: &DetPolicy,
    v: &[f64],
    lambda: f64,
    tol: f64,
    max_sweeps: usize,
) -> Result<(ValueFn, usize)> {
    let gamma = sim.gamma();
    let discount = lambda * gamma;
    let shaping = (1.0 - lambda) * gamma;
    let mut u = v.to_vec();
    let mut change = f64::INFINITY;
    for sweeps in 1..=max_sweeps {
        let next: Vec<f64> = pi
            .iter()
            .enumerate()
            .map(|(s, &a)| {
                let resp = sim.query(s, a);
                resp.reward + shaping * resp.expected(v) + discount * resp.expected(&u)
            })
            .collect();
        if discount == 0.0 {
            return Ok((ValueFn::new(next), 1));
        }
        change = sup_distance(&next, &u);
        u = next;
        if change < tol {
            return Ok((ValueFn::new(u), sweeps));
        }
    }
    Err(MdpError::NonConvergence {
        sweeps: max_sweeps,
        residual: change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::fixtures::{two_chain, CHAIN_B};
    use crate::mdp::random::random_mdp;
    use crate::mdp::{bellman_optimal, evaluate_policy};
    use crate::operators::{h_greedy, t_kappa, KappaParams};

    #[test]
    fn one_step_matches_bellman_optimal() {
        let mdp = random_mdp(6, 3, 0.9, 2);
        let v = [0.3, -1.0, 0.0, 2.0, 0.5, 0.1];
        let mut sim = GenerativeSimulator::new(&mdp);
        let pi = sim_h_greedy(&mut sim, &v, 1).unwrap();
        assert_eq!(pi, bellman_optimal(&mdp, &v).policy);
        assert_eq!(sim.call_count(), 18);
    }

    #[test]
    fn two_chain_lookahead_and_count() {
        let mdp = two_chain();
        let mut sim = GenerativeSimulator::new(&mdp);
        let pi = sim_h_greedy(&mut sim, &[0.0, 0.0], 2).unwrap();
        assert_eq!(pi[0], CHAIN_B);
        assert_eq!(sim.call_count(), 8);
    }

    #[test]
    fn agrees_with_model_based_h_greedy() {
        for seed in 0..50 {
            let mdp = random_mdp(6, 3, 0.9, seed);
            let v: Vec<f64> = (0..6).map(|s| ((s + seed as usize) as f64).sin()).collect();
            for h in [1, 2, 4] {
                let mut sim = GenerativeSimulator::new(&mdp);
                let pi = sim_h_greedy(&mut sim, &v, h).unwrap();
                assert_eq!(pi, h_greedy(&mdp, &v, h).unwrap().policy);
                assert_eq!(sim.call_count(), (h * 18) as u64);
            }
        }
    }

    #[test]
    fn kappa_zero_is_one_sweep() {
        let mdp = random_mdp(5, 4, 0.9, 1);
        let v = [1.0, 0.0, -1.0, 0.5, 0.2];
        let mut sim = GenerativeSimulator::new(&mdp);
        let (pi, sweeps) = sim_kappa_greedy(&mut sim, &v, 0.0, 1e-5, 100).unwrap();
        assert_eq!(sweeps, 1);
        assert_eq!(sim.call_count(), 20);
        assert_eq!(pi, bellman_optimal(&mdp, &v).policy);
    }

    #[test]
    fn agrees_with_model_based_kappa_greedy() {
        for seed in 0..50 {
            let mdp = random_mdp(6, 3, 0.9, 500 + seed);
            let v: Vec<f64> = (0..6).map(|s| 2.0 * ((s * 3 + seed as usize) as f64).cos()).collect();
            for kappa in [0.3, 0.7] {
                let mut sim = GenerativeSimulator::new(&mdp);
                let (pi, sweeps) = sim_kappa_greedy(&mut sim, &v, kappa, 1e-5, 1_000_000).unwrap();
                let model = t_kappa(&mdp, &v, &KappaParams::vi(kappa, 1e-5)).unwrap();
                assert_eq!(pi, model.policy);
                assert_eq!(sweeps, model.inner_stats.sweeps);
                assert_eq!(sim.call_count(), (sweeps * 18) as u64);
            }
        }
    }

    #[test]
    fn kappa_one_solves_two_chain() {
        let mdp = two_chain();
        let mut sim = GenerativeSimulator::new(&mdp);
        let (pi, sweeps) = sim_kappa_greedy(&mut sim, &[0.0, 0.0], 1.0, 1e-5, 10_000).unwrap();
        assert_eq!(pi[0], CHAIN_B);
        // Sweep-to-sweep change shrinks like 0.5^t from 1.
        let expect = (1e-5f64).ln() / 0.5f64.ln();
        assert!((sweeps as f64 - expect).abs() <= 2.0, "{sweeps} vs {expect}");
    }

    #[test]
    fn iterative_evaluation_converges() {
        let mdp = random_mdp(5, 2, 0.9, 4);
        let pi = DetPolicy::new(vec![0, 1, 0, 1, 1]);
        let mut sim = GenerativeSimulator::new(&mdp);
        let (v, sweeps) = sim_evaluate(&mut sim, &pi, &[0.0; 5], 1.0, 1e-10, 100_000).unwrap();
        assert!(v.sup_distance(&evaluate_policy(&mdp, &pi).unwrap()) < 1e-8);
        assert_eq!(sim.call_count(), 5 * sweeps as u64);
    }
}
