//! Seeded random MDP instances for tests and verification batches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TabularMdp;

/// Random MDP with rewards uniform on `[-1, 1]` and sparse random
/// transition rows (each successor kept with probability 1/2, at least one).
pub fn random_mdp(n_states: usize, n_actions: usize, gamma: f64, seed: u64) -> TabularMdp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_mdp_with(n_states, n_actions, gamma, &mut rng)
}

pub fn random_mdp_with<R: Rng>(n_states: usize, n_actions: usize, gamma: f64, rng: &mut R) -> TabularMdp {
    let mut rows = Vec::with_capacity(n_states * n_actions);
    for _ in 0..n_states * n_actions {
        let mut weights: Vec<(usize, f64)> = Vec::new();
        for t in 0..n_states {
            if rng.random_bool(0.5) {
                weights.push((t, rng.random_range(0.05..1.0)));
            }
        }
        if weights.is_empty() {
            weights.push((rng.random_range(0..n_states), 1.0));
        }
        let total: f64 = weights.iter().map(|w| w.1).sum();
        for w in &mut weights {
            w.1 /= total;
        }
        // Push the rounding residue into the first entry so rows sum to 1.
        let drift = 1.0 - weights.iter().map(|w| w.1).sum::<f64>();
        weights[0].1 += drift;
        rows.push(weights);
    }
    let reward = (0..n_states * n_actions)
        .map(|_| rng.random_range(-1.0..=1.0))
        .collect();
    TabularMdp::from_rows(n_states, n_actions, rows, reward, gamma).expect("random rows are stochastic")
}
