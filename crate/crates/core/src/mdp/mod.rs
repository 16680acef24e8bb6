//! Finite discounted MDPs, value functions, deterministic policies and the
//! one-step Bellman machinery built on them.

mod bellman;
pub mod fixtures;
pub mod io;
mod oracle;
pub mod random;

use std::ops::{Deref, DerefMut};
use std::sync::Arc;

use crate::error::{MdpError, Result};

pub use bellman::{bellman_optimal, bellman_policy, evaluate_policy, q_values, OptimalBackup};
pub use oracle::{oracle_optimal, oracle_optimal_with_cap, OracleBackend, OracleResult, DEFAULT_ENUMERATION_CAP};

/// Absolute tolerance under which two Q-values count as tied.
pub const TIE_TOL: f64 = 1e-9;

/// Tolerance on each transition row sum enforced at construction.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Sparse storage of P(s'|s,a): one row per (s, a) pair, zero entries dropped.
#[derive(Debug)]
struct Kernel {
    offsets: Vec<usize>,
    entries: Vec<(usize, f64)>,
}

impl Kernel {
    fn row(&self, idx: usize) -> &[(usize, f64)] {
        &self.entries[self.offsets[idx]..self.offsets[idx + 1]]
    }
}

/// A finite-state, finite-action discounted MDP.
///
/// Transitions are shared between an MDP and the surrogates derived from it;
/// rewards are always owned.
#[derive(Debug, Clone)]
pub struct TabularMdp {
    n_states: usize,
    n_actions: usize,
    gamma: f64,
    reward: Vec<f64>,
    kernel: Arc<Kernel>,
}

impl TabularMdp {
    /// Builds an MDP from a dense `n_states x n_actions x n_states` transition
    /// tensor (row-major) and an `n_states x n_actions` reward table.
    pub fn from_dense(
        n_states: usize,
        n_actions: usize,
        transition: &[f64],
        reward: Vec<f64>,
        gamma: f64,
    ) -> Result<Self> {
        if transition.len() != n_states * n_actions * n_states {
            return Err(MdpError::Shape(format!(
                "transition tensor has {} entries, expected {}",
                transition.len(),
                n_states * n_actions * n_states
            )));
        }
        let rows = transition
            .chunks(n_states.max(1))
            .map(|row| row.iter().copied().enumerate().collect::<Vec<_>>())
            .collect();
        Self::from_rows(n_states, n_actions, rows, reward, gamma)
    }

    /// Builds an MDP from sparse rows: `rows[s * n_actions + a]` lists
    /// `(next_state, probability)` pairs.
    pub fn from_rows(
        n_states: usize,
        n_actions: usize,
        rows: Vec<Vec<(usize, f64)>>,
        reward: Vec<f64>,
        gamma: f64,
    ) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(MdpError::InvalidGamma(gamma));
        }
        Self::build(n_states, n_actions, rows, reward, gamma)
    }

    fn build(
        n_states: usize,
        n_actions: usize,
        rows: Vec<Vec<(usize, f64)>>,
        reward: Vec<f64>,
        gamma: f64,
    ) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return Err(MdpError::Shape("need at least one state and one action".into()));
        }
        if rows.len() != n_states * n_actions {
            return Err(MdpError::Shape(format!(
                "{} transition rows, expected {}",
                rows.len(),
                n_states * n_actions
            )));
        }
        if reward.len() != n_states * n_actions {
            return Err(MdpError::Shape(format!(
                "{} rewards, expected {}",
                reward.len(),
                n_states * n_actions
            )));
        }
        if reward.iter().any(|r| !r.is_finite()) {
            return Err(MdpError::NonFinite("reward"));
        }
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        let mut entries = Vec::new();
        offsets.push(0);
        for (idx, row) in rows.into_iter().enumerate() {
            let (state, action) = (idx / n_actions, idx % n_actions);
            let bad = |reason: String| MdpError::BadRow { state, action, reason };
            let mut sum = 0.0;
            for &(next, p) in &row {
                if next >= n_states {
                    return Err(bad(format!("successor {next} out of range")));
                }
                if !p.is_finite() || p < 0.0 {
                    return Err(bad(format!("probability {p} is not a non-negative number")));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(bad(format!("probabilities sum to {sum}")));
            }
            entries.extend(row.into_iter().filter(|&(_, p)| p > 0.0));
            offsets.push(entries.len());
        }
        Ok(Self {
            n_states,
            n_actions,
            gamma,
            reward,
            kernel: Arc::new(Kernel { offsets, entries }),
        })
    }

    /// Same dynamics, new reward table and discount. The discount may be 0
    /// here (a bandit surrogate) but must stay below 1.
    pub fn with_reward_and_discount(&self, reward: Vec<f64>, discount: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&discount) {
            return Err(MdpError::InvalidGamma(discount));
        }
        if reward.len() != self.reward.len() {
            return Err(MdpError::Shape("surrogate reward table has the wrong size".into()));
        }
        if reward.iter().any(|r| !r.is_finite()) {
            return Err(MdpError::NonFinite("reward"));
        }
        Ok(Self {
            n_states: self.n_states,
            n_actions: self.n_actions,
            gamma: discount,
            reward,
            kernel: Arc::clone(&self.kernel),
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    /// Discount factor. Surrogate MDPs may report 0.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.reward[s * self.n_actions + a]
    }

    /// Reward table, row-major over (state, action).
    pub fn rewards(&self) -> &[f64] {
        &self.reward
    }

    /// Non-zero entries of P(.|s,a).
    pub fn successors(&self, s: usize, a: usize) -> &[(usize, f64)] {
        self.kernel.row(s * self.n_actions + a)
    }

    pub fn transition_prob(&self, s: usize, a: usize, next: usize) -> f64 {
        self.successors(s, a)
            .iter()
            .filter(|&&(n, _)| n == next)
            .map(|&(_, p)| p)
            .sum()
    }

    /// E[v(s') | s, a].
    #[inline]
    pub fn expected(&self, s: usize, a: usize, v: &[f64]) -> f64 {
        self.successors(s, a).iter().map(|&(n, p)| p * v[n]).sum()
    }

    /// True when every row of P is one-hot.
    pub fn is_deterministic(&self) -> bool {
        (0..self.n_states * self.n_actions).all(|i| {
            let row = self.kernel.row(i);
            row.len() == 1 && row[0].1 == 1.0
        })
    }

    pub(crate) fn check_policy(&self, pi: &DetPolicy) -> Result<()> {
        if pi.len() != self.n_states {
            return Err(MdpError::Shape(format!(
                "policy has {} entries for {} states",
                pi.len(),
                self.n_states
            )));
        }
        if let Some((s, &a)) = pi.iter().enumerate().find(|(_, &a)| a >= self.n_actions) {
            return Err(MdpError::Shape(format!("policy picks action {a} at state {s}")));
        }
        Ok(())
    }

    pub(crate) fn check_value(&self, v: &ValueFn) -> Result<()> {
        if v.len() != self.n_states {
            return Err(MdpError::Shape(format!(
                "value has {} entries for {} states",
                v.len(),
                self.n_states
            )));
        }
        Ok(())
    }

    /// The policy-restricted transition matrix and reward vector.
    pub fn policy_matrices(&self, pi: &DetPolicy) -> PolicyModel {
        let n = self.n_states;
        let mut transition = vec![0.0; n * n];
        let mut reward = Vec::with_capacity(n);
        for (s, &a) in pi.iter().enumerate() {
            for &(next, p) in self.successors(s, a) {
                transition[s * n + next] += p;
            }
            reward.push(self.reward(s, a));
        }
        PolicyModel { n, transition, reward }
    }
}

/// Dense view of `(P^pi, r^pi)` for one policy.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyModel {
    pub n: usize,
    /// Row-major `n x n`.
    pub transition: Vec<f64>,
    pub reward: Vec<f64>,
}

impl PolicyModel {
    pub fn p(&self, s: usize, next: usize) -> f64 {
        self.transition[s * self.n + next]
    }
}

/// A value estimate indexed by state.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueFn(Vec<f64>);

impl ValueFn {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self(vec![c; n])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn sup_norm(&self) -> f64 {
        sup_norm(&self.0)
    }

    /// `max_s |self(s) - other(s)|`.
    pub fn sup_distance(&self, other: &[f64]) -> f64 {
        sup_distance(&self.0, other)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self(self.0.iter().map(|&x| f(x)).collect())
    }

    pub fn zip_with(&self, other: &[f64], f: impl Fn(f64, f64) -> f64) -> Self {
        Self(self.0.iter().zip(other).map(|(&x, &y)| f(x, y)).collect())
    }
}

impl Deref for ValueFn {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for ValueFn {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for ValueFn {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

pub fn sup_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn sup_distance(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
}

/// A deterministic stationary policy: one action index per state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DetPolicy(Vec<usize>);

impl DetPolicy {
    pub fn new(actions: Vec<usize>) -> Self {
        Self(actions)
    }

    pub fn uniform(n_states: usize, action: usize) -> Self {
        Self(vec![action; n_states])
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

impl Deref for DetPolicy {
    type Target = [usize];
    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for DetPolicy {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

/// State-action values, row-major over (state, action).
#[derive(Debug, Clone, PartialEq)]
pub struct QFn {
    n_actions: usize,
    values: Vec<f64>,
}

impl QFn {
    pub fn new(n_states: usize, n_actions: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n_states * n_actions {
            return Err(MdpError::Shape("Q table has the wrong size".into()));
        }
        Ok(Self { n_actions, values })
    }

    pub fn n_states(&self) -> usize {
        self.values.len() / self.n_actions
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.values[s * self.n_actions + a]
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.values[s * self.n_actions..(s + 1) * self.n_actions]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// State-wise max and the canonical greedy policy (lowest index tied
    /// with the max within [`TIE_TOL`]).
    pub fn greedy(&self) -> (ValueFn, DetPolicy) {
        let n = self.n_states();
        let mut value = Vec::with_capacity(n);
        let mut policy = Vec::with_capacity(n);
        for s in 0..n {
            let (a, m) = argmax_lowest(self.row(s));
            value.push(m);
            policy.push(a);
        }
        (ValueFn(value), DetPolicy(policy))
    }

    /// Per-state actions within `tol` of the state maximum.
    pub fn tie_sets(&self, tol: f64) -> TieSets {
        TieSets(
            (0..self.n_states())
                .map(|s| {
                    let row = self.row(s);
                    let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    (0..row.len()).filter(|&a| row[a] >= m - tol).collect()
                })
                .collect(),
        )
    }
}

/// Returns `(action, max)` where `action` is the lowest index whose value is
/// within [`TIE_TOL`] of the row maximum.
pub fn argmax_lowest(row: &[f64]) -> (usize, f64) {
    let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let a = row.iter().position(|&q| q >= m - TIE_TOL).unwrap_or(0);
    (a, m)
}

/// A greedy set in factored form: the allowed actions at each state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TieSets(pub Vec<Vec<usize>>);

impl TieSets {
    pub fn contains(&self, pi: &DetPolicy) -> bool {
        self.0.len() == pi.len() && self.0.iter().zip(pi.iter()).all(|(set, a)| set.contains(a))
    }

    /// Lowest-index member.
    pub fn canonical(&self) -> DetPolicy {
        DetPolicy(self.0.iter().map(|set| set[0]).collect())
    }

    /// Number of states with more than one tied action.
    pub fn n_tied_states(&self) -> usize {
        self.0.iter().filter(|set| set.len() > 1).count()
    }
}
