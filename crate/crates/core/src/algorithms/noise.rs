use rand::seq::IndexedRandom;
use rand::Rng;

use crate::error::{MdpError, Result};
use crate::mdp::{q_values, DetPolicy, TabularMdp};
use crate::operators::{surrogate_mdp, t_kappa, KappaParams};

/// Bounded perturbations of both kappa-lambda-PI steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Evaluation noise: each state gets an independent uniform draw on
    /// `[-epsilon, epsilon]` per iteration.
    pub epsilon: f64,
    /// Greedy suboptimality: the chosen policy satisfies
    /// `T_kappa^pi v >= T_kappa v - delta`.
    pub delta: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(epsilon: f64, delta: f64, seed: u64) -> Self {
        Self { epsilon, delta, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.delta >= 0.0) || !self.epsilon.is_finite() || !self.delta.is_finite() {
            return Err(MdpError::InvalidParam(format!(
                "noise bounds must be finite and non-negative (epsilon {}, delta {})",
                self.epsilon, self.delta
            )));
        }
        Ok(())
    }

    pub fn is_silent(&self) -> bool {
        self.epsilon == 0.0 && self.delta == 0.0
    }
}

/// Picks, independently per state, a uniformly random action among those
/// whose surrogate Q-value at `T_kappa v` lies within `delta (1 - kappa gamma)`
/// of the state maximum.
///
/// A per-state Q slack of `d` costs at most `d / (1 - kappa gamma)` in the
/// surrogate value of the policy, so the scaled threshold keeps
/// `T_kappa^pi v >= T_kappa v - delta` component-wise.
pub fn noisy_kappa_greedy<R: Rng>(
    mdp: &TabularMdp,
    v: &[f64],
    kappa: f64,
    delta: f64,
    rng: &mut R,
) -> Result<DetPolicy> {
    let exact = t_kappa(mdp, v, &KappaParams::exact(kappa))?;
    if delta == 0.0 {
        return Ok(exact.policy);
    }
    let surrogate = surrogate_mdp(mdp, v, kappa)?;
    let q = q_values(&surrogate, &exact.value);
    let slack = delta * (1.0 - kappa * mdp.gamma());
    let mut actions = Vec::with_capacity(mdp.n_states());
    let mut candidates = Vec::with_capacity(mdp.n_actions());
    for s in 0..mdp.n_states() {
        let row = q.row(s);
        let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        candidates.clear();
        candidates.extend((0..row.len()).filter(|&a| row[a] >= best - slack));
        actions.push(*candidates.choose(rng).expect("the maximiser is always a candidate"));
    }
    Ok(DetPolicy::new(actions))
}
