//! Planning-cost benchmark: a call-counting generative simulator, the
//! N x N grid world, simulator-backed greedy steps, and parameter sweeps that
//! measure total simulator queries until convergence.

mod gridworld;
mod simulator;
mod solvers;
mod sweep;

pub use gridworld::{initial_value, make_gridworld, GridAction, GridworldSpec};
pub use simulator::{GenerativeSimulator, SimResponse};
pub use solvers::{sim_evaluate, sim_h_greedy, sim_kappa_greedy};
pub use sweep::{
    aggregate, h_eff, run_cell, run_sweep, AggregateRow, EvalCost, SweepAlgorithm, SweepOptions, SweepResult, SweepRow,
    AGGREGATE_CSV_HEADER, RUNS_CSV_HEADER,
};
