use crate::error::Result;
use crate::linalg::solve_policy_system;

use super::{DetPolicy, QFn, TabularMdp, ValueFn};

/// `Q(s,a) = r(s,a) + gamma * E[v(s') | s,a]` for every pair.
pub fn q_values(mdp: &TabularMdp, v: &[f64]) -> QFn {
    let (n, m) = (mdp.n_states(), mdp.n_actions());
    let gamma = mdp.gamma();
    let mut q = Vec::with_capacity(n * m);
    for s in 0..n {
        for a in 0..m {
            q.push(mdp.reward(s, a) + gamma * mdp.expected(s, a, v));
        }
    }
    QFn {
        n_actions: m,
        values: q,
    }
}

/// `T^pi v = r^pi + gamma P^pi v`.
pub fn bellman_policy(mdp: &TabularMdp, pi: &DetPolicy, v: &[f64]) -> ValueFn {
    let gamma = mdp.gamma();
    ValueFn(
        pi.iter()
            .enumerate()
            .map(|(s, &a)| mdp.reward(s, a) + gamma * mdp.expected(s, a, v))
            .collect(),
    )
}

/// Result of one optimal backup.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalBackup {
    /// `T v`.
    pub value: ValueFn,
    /// Canonical member of `G(v)`.
    pub policy: DetPolicy,
    pub q: QFn,
}

/// Applies the optimal Bellman operator and returns its greedy policy.
pub fn bellman_optimal(mdp: &TabularMdp, v: &[f64]) -> OptimalBackup {
    let q = q_values(mdp, v);
    let (value, policy) = q.greedy();
    OptimalBackup { value, policy, q }
}

/// Exact `v^pi = (I - gamma P^pi)^{-1} r^pi`.
pub fn evaluate_policy(mdp: &TabularMdp, pi: &DetPolicy) -> Result<ValueFn> {
    mdp.check_policy(pi)?;
    let r: Vec<f64> = pi.iter().enumerate().map(|(s, &a)| mdp.reward(s, a)).collect();
    solve_policy_system(mdp, pi, &r, mdp.gamma()).map(ValueFn)
}
