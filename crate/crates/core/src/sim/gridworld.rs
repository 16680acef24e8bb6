use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{MdpError, Result};
use crate::mdp::{TabularMdp, ValueFn};

/// Grid actions, in action-index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridAction {
    Up,
    Down,
    Right,
    Left,
    Stay,
}

impl GridAction {
    pub const ALL: [GridAction; 5] = [
        GridAction::Up,
        GridAction::Down,
        GridAction::Right,
        GridAction::Left,
        GridAction::Stay,
    ];

    fn delta(self) -> (isize, isize) {
        match self {
            GridAction::Up => (-1, 0),
            GridAction::Down => (1, 0),
            GridAction::Right => (0, 1),
            GridAction::Left => (0, -1),
            GridAction::Stay => (0, 0),
        }
    }
}

/// Random stream ids derived from one seed.
const STREAM_MODEL: u64 = 0;
const STREAM_INIT_VALUE: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridworldSpec {
    /// Side length; the world has `n * n` states.
    pub n: usize,
    pub gamma: f64,
    /// Goal reward.
    pub r_g: f64,
    /// Non-goal rewards are uniform on `[-noise_frac r_g, noise_frac r_g]`.
    pub noise_frac: f64,
    pub seed: u64,
}

impl GridworldSpec {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            gamma: 0.97,
            r_g: 1.0,
            noise_frac: 0.1,
            seed,
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(MdpError::InvalidParam(format!(
                "grid side must be at least 2, got {}",
                self.n
            )));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(MdpError::InvalidGamma(self.gamma));
        }
        if !self.r_g.is_finite() || !(self.noise_frac >= 0.0) || !self.noise_frac.is_finite() {
            return Err(MdpError::InvalidParam(
                "goal reward and noise fraction must be finite, noise >= 0".into(),
            ));
        }
        Ok(())
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

/// Deterministic N x N grid with walls that clamp: a move off the grid
/// leaves the agent in place. One goal cell, chosen uniformly, pays `r_g`
/// under every action; every other (state, action) pays a uniform draw from
/// `[-noise_frac r_g, noise_frac r_g]`. No terminal state.
pub fn make_gridworld(spec: &GridworldSpec) -> Result<TabularMdp> {
    spec.validate()?;
    let n = spec.n;
    let n_states = n * n;
    let n_actions = GridAction::ALL.len();
    let mut rng = spec.rng(STREAM_MODEL);
    let goal = rng.random_range(0..n_states);
    let half_width = (spec.noise_frac * spec.r_g).abs();

    let mut rows = Vec::with_capacity(n_states * n_actions);
    let mut reward = Vec::with_capacity(n_states * n_actions);
    for s in 0..n_states {
        let (row, col) = ((s / n) as isize, (s % n) as isize);
        for action in GridAction::ALL {
            let (dr, dc) = action.delta();
            let (r2, c2) = (row + dr, col + dc);
            let next = if (0..n as isize).contains(&r2) && (0..n as isize).contains(&c2) {
                r2 as usize * n + c2 as usize
            } else {
                s
            };
            rows.push(vec![(next, 1.0)]);
            reward.push(if s == goal {
                spec.r_g
            } else if half_width > 0.0 {
                rng.random_range(-half_width..=half_width)
            } else {
                0.0
            });
        }
    }
    TabularMdp::from_rows(n_states, n_actions, rows, reward, spec.gamma)
}

/// I.i.d. `N(0, r_g^2)` initial values drawn from the seed's own stream.
pub fn initial_value(spec: &GridworldSpec, seed: u64) -> ValueFn {
    let n_states = spec.n * spec.n;
    let scale = spec.r_g.abs();
    if scale == 0.0 {
        return ValueFn::zeros(n_states);
    }
    let mut rng = spec.with_seed(seed).rng(STREAM_INIT_VALUE);
    let normal = Normal::new(0.0, scale).expect("finite positive scale");
    ValueFn::new((0..n_states).map(|_| normal.sample(&mut rng)).collect())
}
