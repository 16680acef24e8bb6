//! Multi-step greedy operators: `T^h`, `T_h^pi`, the h-greedy step, the
//! kappa-surrogate MDP with `T_kappa^pi`, `T_kappa` and the kappa-greedy
//! step, the geometric evaluation operator `T_lambda^pi`, and the TD-error
//! surrogate.

mod greedy;
mod kappa;
mod lambda;

pub use greedy::{h_greedy, t_h_policy, t_power, GreedyResult, InnerStats};
pub use kappa::{
    kappa_greedy_set, surrogate_mdp, t_kappa, t_kappa_policy, td_surrogate_mdp, xi_coefficient, InnerBackend,
    KappaParams, DEFAULT_INNER_MAX_SWEEPS, DEFAULT_INNER_TOL,
};
pub use lambda::{
    kappa_weighted_return, lambda_from_bar, policy_geometric_series, series_horizon, t_lambda_bar_kappa_policy,
    t_lambda_bar_kappa_series, t_lambda_policy, SERIES_CUTOFF, SERIES_MAX_TERMS,
};

use crate::error::{MdpError, Result};

pub(crate) fn check_unit(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(MdpError::InvalidParam(format!("{name} must be in [0, 1], got {x}")))
    }
}
