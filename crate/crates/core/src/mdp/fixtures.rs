//! Small hand-checkable MDPs.

use super::TabularMdp;

/// Action `a` of [`two_chain`]: self-loop.
pub const CHAIN_A: usize = 0;
/// Action `b` of [`two_chain`]: moves state 0 to state 1.
pub const CHAIN_B: usize = 1;

/// Two states, two actions, discount 0.5. In state 0, `a` loops and `b`
/// moves to state 1, both with reward 0. State 1 loops under both actions
/// with reward 1. Optimal value is `(1, 2)`.
pub fn two_chain() -> TabularMdp {
    let rows = vec![vec![(0, 1.0)], vec![(1, 1.0)], vec![(1, 1.0)], vec![(1, 1.0)]];
    TabularMdp::from_rows(2, 2, rows, vec![0.0, 0.0, 1.0, 1.0], 0.5).expect("valid fixture")
}

/// One state that loops to itself under every action.
pub fn single_state(rewards: &[f64], gamma: f64) -> TabularMdp {
    let rows = vec![vec![(0, 1.0)]; rewards.len()];
    TabularMdp::from_rows(1, rewards.len(), rows, rewards.to_vec(), gamma).expect("valid fixture")
}
