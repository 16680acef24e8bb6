use crate::mdp::TabularMdp;

/// Answer to one `(s, a)` query.
#[derive(Debug, Clone, Copy)]
pub struct SimResponse<'a> {
    pub reward: f64,
    /// `(next_state, probability)` pairs; one-hot for deterministic models.
    pub successors: &'a [(usize, f64)],
}

impl SimResponse<'_> {
    /// `E[v(s')]` under the returned successor distribution.
    #[inline]
    pub fn expected(&self, v: &[f64]) -> f64 {
        self.successors.iter().map(|&(n, p)| p * v[n]).sum()
    }
}

/// Generative model over a fixed MDP that counts every query.
#[derive(Debug)]
pub struct GenerativeSimulator<'a> {
    mdp: &'a TabularMdp,
    calls: u64,
}

impl<'a> GenerativeSimulator<'a> {
    pub fn new(mdp: &'a TabularMdp) -> Self {
        Self { mdp, calls: 0 }
    }

    #[inline]
    pub fn query(&mut self, s: usize, a: usize) -> SimResponse<'a> {
        self.calls += 1;
        SimResponse {
            reward: self.mdp.reward(s, a),
            successors: self.mdp.successors(s, a),
        }
    }

    pub fn call_count(&self) -> u64 {
        self.calls
    }

    pub fn n_states(&self) -> usize {
        self.mdp.n_states()
    }

    pub fn n_actions(&self) -> usize {
        self.mdp.n_actions()
    }

    pub fn gamma(&self) -> f64 {
        self.mdp.gamma()
    }

    /// The wrapped model, for model-based steps that are not charged.
    pub fn model(&self) -> &'a TabularMdp {
        self.mdp
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::fixtures::two_chain;

    #[test]
    fn counts_and_repeats() {
        let mdp = two_chain();
        let mut sim = GenerativeSimulator::new(&mdp);
        let a = sim.query(0, 1);
        let b = sim.query(0, 1);
        assert_eq!(a.reward, b.reward);
        assert_eq!(a.successors, b.successors);
        assert_eq!(a.expected(&[3.0, 5.0]), 5.0);
        assert_eq!(sim.call_count(), 2);
    }
}
