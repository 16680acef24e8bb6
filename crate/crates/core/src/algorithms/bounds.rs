//! Closed-form guarantees for the PI family.

use crate::operators::xi_coefficient;

/// Nudge applied before taking a ceiling so exact integers are not rounded up.
const CEIL_NUDGE: f64 = 1e-12;

fn ceil_nudged(x: f64) -> u64 {
    (x - CEIL_NUDGE).ceil().max(0.0) as u64
}

/// Worst-case outer iterations of h-PI:
/// `|S| (|A| - 1) ceil(log(1 / (1 - gamma)) / (h log(1 / gamma)))`.
pub fn iteration_bound_h(n_states: usize, n_actions: usize, gamma: f64, h: usize) -> u64 {
    let per = ceil_nudged((1.0 / (1.0 - gamma)).ln() / (h as f64 * (1.0 / gamma).ln()));
    (n_states * n_actions.saturating_sub(1)) as u64 * per
}

/// Worst-case outer iterations of kappa-PI, with coefficient
/// `1 / log((1 - kappa gamma) / ((1 - kappa) gamma))`. `kappa = 1` returns 1.
pub fn iteration_bound_kappa(n_states: usize, n_actions: usize, gamma: f64, kappa: f64) -> u64 {
    if kappa >= 1.0 {
        return 1;
    }
    let rate = ((1.0 - kappa * gamma) / ((1.0 - kappa) * gamma)).ln();
    let per = ceil_nudged((1.0 / (1.0 - gamma)).ln() / rate);
    (n_states * n_actions.saturating_sub(1)) as u64 * per
}

/// Asymptotic bound `(2 xi eps + delta) / (1 - xi)^2` on
/// `||v* - v^{pi_k}||` for noisy kappa-lambda-PI.
pub fn noise_bound(epsilon: f64, delta: f64, kappa: f64, gamma: f64) -> f64 {
    let xi = xi_coefficient(kappa, gamma);
    (2.0 * xi * epsilon + delta) / ((1.0 - xi) * (1.0 - xi))
}

/// The same bound written without `xi`:
/// `(2 gamma (1-kappa)(1-kappa gamma) eps + (1-kappa gamma)^2 delta) / (1-gamma)^2`.
pub fn noise_bound_expanded(epsilon: f64, delta: f64, kappa: f64, gamma: f64) -> f64 {
    let kg = 1.0 - kappa * gamma;
    (2.0 * gamma * (1.0 - kappa) * kg * epsilon + kg * kg * delta) / ((1.0 - gamma) * (1.0 - gamma))
}
