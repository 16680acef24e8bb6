use crate::error::{MdpError, Result};
use crate::linalg::solve_policy_system;
use crate::mdp::{bellman_optimal, evaluate_policy, q_values, DetPolicy, TabularMdp, TieSets, ValueFn, TIE_TOL};

use super::check_unit;
use super::greedy::{GreedyResult, InnerStats};

pub const DEFAULT_INNER_TOL: f64 = 1e-5;
pub const DEFAULT_INNER_MAX_SWEEPS: usize = 1_000_000;

/// How the surrogate MDP behind `T_kappa` is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InnerBackend {
    /// Policy iteration with exact linear solves.
    #[default]
    Exact,
    /// Value iteration from `v`, stopped once a sweep changes the value by
    /// less than `inner_tol` in max norm.
    Vi,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaParams {
    pub kappa: f64,
    pub inner_tol: f64,
    /// Sweep cap for the VI backend, iteration cap for the exact backend.
    pub inner_max_sweeps: usize,
    pub backend: InnerBackend,
}

impl KappaParams {
    pub fn exact(kappa: f64) -> Self {
        Self {
            kappa,
            inner_tol: DEFAULT_INNER_TOL,
            inner_max_sweeps: DEFAULT_INNER_MAX_SWEEPS,
            backend: InnerBackend::Exact,
        }
    }

    pub fn vi(kappa: f64, inner_tol: f64) -> Self {
        Self {
            inner_tol,
            backend: InnerBackend::Vi,
            ..Self::exact(kappa)
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_unit("kappa", self.kappa)?;
        if !(self.inner_tol > 0.0) {
            return Err(MdpError::InvalidParam(format!(
                "inner tolerance must be positive, got {}",
                self.inner_tol
            )));
        }
        if self.inner_max_sweeps == 0 {
            return Err(MdpError::InvalidParam("inner sweep cap must be positive".into()));
        }
        Ok(())
    }
}

/// `xi = (1 - kappa) gamma / (1 - gamma kappa)`, the contraction coefficient
/// of `T_kappa^pi` and `T_kappa`.
pub fn xi_coefficient(kappa: f64, gamma: f64) -> f64 {
    (1.0 - kappa) * gamma / (1.0 - gamma * kappa)
}

fn shaped_rewards(mdp: &TabularMdp, v: &[f64], weight: f64, subtract_v: bool) -> Vec<f64> {
    let m = mdp.n_actions();
    let mut r = Vec::with_capacity(mdp.n_states() * m);
    for s in 0..mdp.n_states() {
        for a in 0..m {
            let mut x = mdp.reward(s, a) + weight * mdp.expected(s, a, v);
            if subtract_v {
                x -= v[s];
            }
            r.push(x);
        }
    }
    r
}

/// Same dynamics, reward `r + (1-kappa) gamma P v`, discount `kappa gamma`.
pub fn surrogate_mdp(mdp: &TabularMdp, v: &[f64], kappa: f64) -> Result<TabularMdp> {
    check_unit("kappa", kappa)?;
    mdp.check_value(&ValueFn::new(v.to_vec()))?;
    let gamma = mdp.gamma();
    let reward = shaped_rewards(mdp, v, (1.0 - kappa) * gamma, false);
    mdp.with_reward_and_discount(reward, kappa * gamma)
}

/// Same dynamics, reward `r + gamma P v - v(s)` (the TD error of `v`),
/// discount `kappa gamma`.
pub fn td_surrogate_mdp(mdp: &TabularMdp, v: &[f64], kappa: f64) -> Result<TabularMdp> {
    check_unit("kappa", kappa)?;
    mdp.check_value(&ValueFn::new(v.to_vec()))?;
    let reward = shaped_rewards(mdp, v, mdp.gamma(), true);
    mdp.with_reward_and_discount(reward, kappa * mdp.gamma())
}

/// `T_kappa^pi v = (I - kappa gamma P^pi)^{-1} (r^pi + (1-kappa) gamma P^pi v)`.
pub fn t_kappa_policy(mdp: &TabularMdp, pi: &DetPolicy, v: &[f64], kappa: f64) -> Result<ValueFn> {
    check_unit("kappa", kappa)?;
    mdp.check_policy(pi)?;
    mdp.check_value(&ValueFn::new(v.to_vec()))?;
    let gamma = mdp.gamma();
    let rhs: Vec<f64> = pi
        .iter()
        .enumerate()
        .map(|(s, &a)| mdp.reward(s, a) + (1.0 - kappa) * gamma * mdp.expected(s, a, v))
        .collect();
    solve_policy_system(mdp, pi, &rhs, kappa * gamma).map(ValueFn::new)
}

/// Applies `T_kappa` by solving the surrogate MDP and returns the
/// kappa-greedy policy alongside `T_kappa v`.
pub fn t_kappa(mdp: &TabularMdp, v: &[f64], params: &KappaParams) -> Result<GreedyResult> {
    params.validate()?;
    let surrogate = surrogate_mdp(mdp, v, params.kappa)?;
    let cells = mdp.n_states() * mdp.n_actions();
    if surrogate.gamma() == 0.0 {
        let (value, policy) = q_values(&surrogate, v).greedy();
        return Ok(GreedyResult {
            policy,
            value,
            inner_stats: InnerStats {
                sweeps: 1,
                backups: cells,
                residual: 0.0,
            },
        });
    }
    match params.backend {
        InnerBackend::Exact => solve_exact(&surrogate, v, params.inner_max_sweeps),
        InnerBackend::Vi => solve_vi(&surrogate, v, params.inner_tol, params.inner_max_sweeps),
    }
}

fn solve_exact(surrogate: &TabularMdp, v: &[f64], max_iters: usize) -> Result<GreedyResult> {
    let cells = surrogate.n_states() * surrogate.n_actions();
    let mut policy = bellman_optimal(surrogate, v).policy;
    for iter in 1..=max_iters {
        let value = evaluate_policy(surrogate, &policy)?;
        let backup = bellman_optimal(surrogate, &value);
        let residual = backup.value.sup_distance(&value);
        // Stop at a repeated policy, or when the current one is already
        // greedy up to ties (guards against cycling between tied actions).
        let settled = backup.policy == policy
            || policy
                .iter()
                .enumerate()
                .all(|(s, &a)| backup.q.get(s, a) >= backup.value[s] - TIE_TOL);
        if settled {
            let (policy, value) = if backup.policy == policy {
                (policy, value)
            } else {
                let v = evaluate_policy(surrogate, &backup.policy)?;
                (backup.policy, v)
            };
            return Ok(GreedyResult {
                policy,
                value,
                inner_stats: InnerStats {
                    sweeps: iter,
                    backups: iter * cells,
                    residual,
                },
            });
        }
        policy = backup.policy;
    }
    let value = evaluate_policy(surrogate, &policy)?;
    Err(MdpError::NonConvergence {
        sweeps: max_iters,
        residual: bellman_optimal(surrogate, &value).value.sup_distance(&value),
    })
}

fn solve_vi(surrogate: &TabularMdp, v: &[f64], tol: f64, max_sweeps: usize) -> Result<GreedyResult> {
    let cells = surrogate.n_states() * surrogate.n_actions();
    let mut u = ValueFn::new(v.to_vec());
    let mut change = f64::INFINITY;
    for sweep in 1..=max_sweeps {
        let backup = bellman_optimal(surrogate, &u);
        change = backup.value.sup_distance(&u);
        u = backup.value;
        if change < tol {
            return Ok(GreedyResult {
                policy: backup.policy,
                value: u,
                inner_stats: InnerStats {
                    sweeps: sweep,
                    backups: sweep * cells,
                    residual: change,
                },
            });
        }
    }
    Err(MdpError::NonConvergence {
        sweeps: max_sweeps,
        residual: change,
    })
}

/// The set `G_kappa(v)` in factored form: per-state actions whose surrogate
/// Q-value at `T_kappa v` is within [`TIE_TOL`] of the maximum.
pub fn kappa_greedy_set(mdp: &TabularMdp, v: &[f64], kappa: f64) -> Result<TieSets> {
    let image = t_kappa(mdp, v, &KappaParams::exact(kappa))?;
    let surrogate = surrogate_mdp(mdp, v, kappa)?;
    Ok(q_values(&surrogate, &image.value).tie_sets(TIE_TOL))
}
