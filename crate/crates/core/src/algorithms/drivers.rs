use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{MdpError, Result};
use crate::mdp::{evaluate_policy, oracle_optimal, DetPolicy, TabularMdp, ValueFn};
use crate::operators::{h_greedy, t_kappa, t_lambda_policy, GreedyResult};

use super::config::RunConfig;
use super::noise::{noisy_kappa_greedy, NoiseSpec};
use super::trace::{IterRecord, RunTrace};

fn check_start(mdp: &TabularMdp, v0: &ValueFn, cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    if v0.len() != mdp.n_states() {
        return Err(MdpError::Shape(format!(
            "initial value has {} entries for {} states",
            v0.len(),
            mdp.n_states()
        )));
    }
    if !v0.is_finite() {
        return Err(MdpError::NonFinite("initial value"));
    }
    Ok(())
}

fn optimum_for(mdp: &TabularMdp, cfg: &RunConfig) -> Result<Option<ValueFn>> {
    if !cfg.record_errors {
        return Ok(None);
    }
    match &cfg.known_optimum {
        Some(v) => Ok(Some(v.clone())),
        None => oracle_optimal(mdp).map(|o| Some(o.value)),
    }
}

/// Shared loop for the drivers whose evaluation step is exact: improve with
/// `improve`, then set `v = v^pi`.
fn exact_pi_loop(
    mdp: &TabularMdp,
    v0: &ValueFn,
    cfg: &RunConfig,
    mut improve: impl FnMut(&ValueFn) -> Result<GreedyResult>,
) -> Result<RunTrace> {
    check_start(mdp, v0, cfg)?;
    let optimum = optimum_for(mdp, cfg)?;
    let mut trace = RunTrace::default();
    let mut v = v0.clone();
    let mut prev: Option<DetPolicy> = None;
    for k in 1..=cfg.max_outer_iters {
        let g = improve(&v)?;
        let next = evaluate_policy(mdp, &g.policy)?;
        let change = next.sup_distance(&v);
        let repeated = prev.as_ref() == Some(&g.policy);
        trace.push(IterRecord {
            k,
            policy: g.policy.clone(),
            error_inf: optimum.as_ref().map(|o| o.sup_distance(&next)),
            value: next.clone(),
            inner_sweeps: g.inner_stats.sweeps,
            backups: g.inner_stats.backups,
            value_change_inf: change,
        });
        v = next;
        prev = Some(g.policy);
        if repeated || change < cfg.stop_tol() {
            trace.converged = true;
            break;
        }
    }
    Ok(trace)
}

/// h-PI: `pi <- h-greedy(v)`, `v <- v^pi`, until the value stops changing.
pub fn h_pi(mdp: &TabularMdp, h: usize, v0: &ValueFn, cfg: &RunConfig) -> Result<RunTrace> {
    if h == 0 {
        return Err(MdpError::InvalidParam("h must be at least 1".into()));
    }
    exact_pi_loop(mdp, v0, cfg, |v| h_greedy(mdp, v, h))
}

/// kappa-PI: `pi <- kappa-greedy(v)`, `v <- v^pi`, until the value stops changing.
pub fn kappa_pi(mdp: &TabularMdp, kappa: f64, v0: &ValueFn, cfg: &RunConfig) -> Result<RunTrace> {
    let params = cfg.kappa_params(kappa);
    params.validate()?;
    exact_pi_loop(mdp, v0, cfg, |v| t_kappa(mdp, v, &params))
}

/// kappa-VI: `v <- T_kappa v` until a step moves `v` by less than `tol`.
///
/// Each record carries the kappa-greedy policy read off that step and, when
/// errors are recorded, `||v* - v^{pi_k}||`.
pub fn kappa_vi(mdp: &TabularMdp, kappa: f64, v0: &ValueFn, tol: f64, cfg: &RunConfig) -> Result<RunTrace> {
    let params = cfg.kappa_params(kappa);
    params.validate()?;
    if !(tol > 0.0) {
        return Err(MdpError::InvalidParam(format!("tolerance must be positive, got {tol}")));
    }
    check_start(mdp, v0, cfg)?;
    let optimum = optimum_for(mdp, cfg)?;
    let mut trace = RunTrace::default();
    let mut v = v0.clone();
    for k in 1..=cfg.max_outer_iters {
        let g = t_kappa(mdp, &v, &params)?;
        let change = g.value.sup_distance(&v);
        let error_inf = match &optimum {
            Some(o) => Some(o.sup_distance(&evaluate_policy(mdp, &g.policy)?)),
            None => None,
        };
        trace.push(IterRecord {
            k,
            policy: g.policy,
            value: g.value.clone(),
            error_inf,
            inner_sweeps: g.inner_stats.sweeps,
            backups: g.inner_stats.backups,
            value_change_inf: change,
        });
        v = g.value;
        if change < tol {
            trace.converged = true;
            break;
        }
    }
    Ok(trace)
}

/// kappa-lambda-PI: `pi <- kappa-greedy(v)`, `v <- T_lambda^pi v`, with
/// `lambda` in `[kappa, 1]`.
///
/// With `noise`, the greedy step is delta-suboptimal and the evaluation is
/// perturbed by uniform noise of amplitude epsilon; noisy runs never stop
/// early and always execute `max_outer_iters` iterations.
pub fn kappa_lambda_pi(
    mdp: &TabularMdp,
    kappa: f64,
    lambda: f64,
    v0: &ValueFn,
    cfg: &RunConfig,
    noise: Option<&NoiseSpec>,
) -> Result<RunTrace> {
    let params = cfg.kappa_params(kappa);
    params.validate()?;
    if !(lambda >= kappa && lambda <= 1.0) {
        return Err(MdpError::InvalidParam(format!(
            "lambda must be in [kappa, 1] (kappa {kappa}, lambda {lambda})"
        )));
    }
    if let Some(n) = noise {
        n.validate()?;
    }
    check_start(mdp, v0, cfg)?;
    let optimum = optimum_for(mdp, cfg)?;
    let noise = noise.filter(|n| !n.is_silent());
    let mut rng = ChaCha8Rng::seed_from_u64(noise.map_or(cfg.seed, |n| n.seed));

    let mut trace = RunTrace::default();
    let mut v = v0.clone();
    let mut prev: Option<DetPolicy> = None;
    for k in 1..=cfg.max_outer_iters {
        let (policy, sweeps, backups) = match noise {
            Some(n) if n.delta > 0.0 => {
                let pi = noisy_kappa_greedy(mdp, &v, kappa, n.delta, &mut rng)?;
                (pi, 0, 0)
            }
            _ => {
                let g = t_kappa(mdp, &v, &params)?;
                (g.policy, g.inner_stats.sweeps, g.inner_stats.backups)
            }
        };
        let mut next = t_lambda_policy(mdp, &policy, &v, lambda)?;
        if let Some(n) = noise.filter(|n| n.epsilon > 0.0) {
            for x in next.iter_mut() {
                *x += rng.random_range(-n.epsilon..=n.epsilon);
            }
        }
        let change = next.sup_distance(&v);
        let error_inf = match &optimum {
            Some(o) if lambda == 1.0 && noise.is_none() => Some(o.sup_distance(&next)),
            Some(o) => Some(o.sup_distance(&evaluate_policy(mdp, &policy)?)),
            None => None,
        };
        let repeated = lambda == 1.0 && prev.as_ref() == Some(&policy);
        trace.push(IterRecord {
            k,
            policy: policy.clone(),
            value: next.clone(),
            error_inf,
            inner_sweeps: sweeps,
            backups,
            value_change_inf: change,
        });
        v = next;
        prev = Some(policy);
        if noise.is_none() && (repeated || change < cfg.stop_tol()) {
            trace.converged = true;
            break;
        }
    }
    Ok(trace)
}

/// lambda-PI: one-step greedy improvement with `T_lambda^pi` evaluation.
pub fn lambda_pi(mdp: &TabularMdp, lambda: f64, v0: &ValueFn, cfg: &RunConfig) -> Result<RunTrace> {
    kappa_lambda_pi(mdp, 0.0, lambda, v0, cfg, None)
}
