use crate::error::{MdpError, Result};
use crate::mdp::{bellman_policy, DetPolicy, TabularMdp, ValueFn};

use super::check_unit;
use super::kappa::t_kappa_policy;

/// Truncated series stop once the geometric weight drops below this.
pub const SERIES_CUTOFF: f64 = 1e-12;
pub const SERIES_MAX_TERMS: usize = 10_000;

/// `T_lambda^pi v`: the same closed form as `T_kappa^pi` with `lambda` in
/// place of `kappa`.
pub fn t_lambda_policy(mdp: &TabularMdp, pi: &DetPolicy, v: &[f64], lambda: f64) -> Result<ValueFn> {
    check_unit("lambda", lambda)?;
    t_kappa_policy(mdp, pi, v, lambda)
}

/// `lambda = kappa + lambda_bar (1 - kappa)`.
pub fn lambda_from_bar(lambda_bar: f64, kappa: f64) -> f64 {
    kappa + lambda_bar * (1.0 - kappa)
}

/// Geometric mixture of `T_kappa^pi` powers, evaluated through the
/// equivalent single `T_lambda^pi`.
pub fn t_lambda_bar_kappa_policy(
    mdp: &TabularMdp,
    pi: &DetPolicy,
    v: &[f64],
    lambda_bar: f64,
    kappa: f64,
) -> Result<ValueFn> {
    check_unit("lambda_bar", lambda_bar)?;
    check_unit("kappa", kappa)?;
    t_lambda_policy(mdp, pi, v, lambda_from_bar(lambda_bar, kappa))
}

/// Number of series terms: smallest `H` with `weight^H < 1e-12`, capped.
pub fn series_horizon(weight: f64) -> usize {
    if weight <= 0.0 {
        return 1;
    }
    let mut h = 1;
    let mut w = weight;
    while w >= SERIES_CUTOFF && h < SERIES_MAX_TERMS {
        w *= weight;
        h += 1;
    }
    h
}

/// `(1 - w) sum_{j < H} w^j op^{j+1}(v)` for a caller-supplied operator.
fn truncated_series(v: &[f64], weight: f64, mut op: impl FnMut(&[f64]) -> Result<ValueFn>) -> Result<ValueFn> {
    if !(0.0..1.0).contains(&weight) {
        return Err(MdpError::InvalidParam(format!(
            "series weight must be in [0, 1), got {weight}"
        )));
    }
    let terms = series_horizon(weight);
    let mut power = ValueFn::new(v.to_vec());
    let mut acc = vec![0.0; v.len()];
    let mut w = 1.0;
    for _ in 0..terms {
        power = op(&power)?;
        for (a, p) in acc.iter_mut().zip(power.iter()) {
            *a += w * p;
        }
        w *= weight;
    }
    Ok(ValueFn::new(acc.into_iter().map(|a| (1.0 - weight) * a).collect()))
}

/// Direct truncated evaluation of `(1 - w) sum_j w^j (T^pi)^{j+1} v`.
pub fn policy_geometric_series(mdp: &TabularMdp, pi: &DetPolicy, v: &[f64], weight: f64) -> Result<ValueFn> {
    mdp.check_policy(pi)?;
    truncated_series(v, weight, |x| Ok(bellman_policy(mdp, pi, x)))
}

/// Direct truncated evaluation of
/// `(1 - lambda_bar) sum_j lambda_bar^j (T_kappa^pi)^{j+1} v`.
pub fn t_lambda_bar_kappa_series(
    mdp: &TabularMdp,
    pi: &DetPolicy,
    v: &[f64],
    lambda_bar: f64,
    kappa: f64,
) -> Result<ValueFn> {
    check_unit("kappa", kappa)?;
    truncated_series(v, lambda_bar, |x| t_kappa_policy(mdp, pi, x, kappa))
}

/// Expected kappa-weighted average of the h-step returns
/// `sum_{t<h} gamma^t r_t + gamma^h v(s_h)` under `pi`, in closed form:
/// `(1 - kappa) sum_h kappa^h (T^pi)^{h+1} v`.
pub fn kappa_weighted_return(mdp: &TabularMdp, pi: &DetPolicy, v: &[f64], kappa: f64) -> Result<ValueFn> {
    policy_geometric_series(mdp, pi, v, kappa)
}
