use msgdp_core::mdp::random::random_mdp;
use msgdp_core::sim::{
    initial_value, make_gridworld, run_cell, run_sweep, sim_h_greedy, sim_kappa_greedy, EvalCost, GenerativeSimulator,
    GridworldSpec, SweepAlgorithm, SweepOptions,
};
use msgdp_core::{mdp::io::format_mdp, operators::h_greedy};

#[test]
fn gridworld_transitions_are_one_hot_and_reproducible() {
    for seed in 0..10 {
        let spec = GridworldSpec::new(3 + seed as usize, seed);
        let mdp = make_gridworld(&spec).unwrap();
        for s in 0..mdp.n_states() {
            for a in 0..mdp.n_actions() {
                let row = mdp.successors(s, a);
                assert_eq!(row.len(), 1);
                assert_eq!(row[0].1, 1.0);
            }
        }
        assert_eq!(format_mdp(&mdp), format_mdp(&make_gridworld(&spec).unwrap()));
        assert_eq!(initial_value(&spec, seed), initial_value(&spec, seed));
    }
}

#[test]
fn simulator_counts_match_sweeps() {
    for seed in 0..20 {
        let mdp = random_mdp(7, 3, 0.95, seed);
        let v = vec![0.5; 7];
        let mut sim = GenerativeSimulator::new(&mdp);
        let before = sim.call_count();
        let pi = sim_h_greedy(&mut sim, &v, 3).unwrap();
        assert_eq!(sim.call_count() - before, 3 * 21);
        assert_eq!(pi, h_greedy(&mdp, &v, 3).unwrap().policy);
        let before = sim.call_count();
        let (_, sweeps) = sim_kappa_greedy(&mut sim, &v, 0.6, 1e-5, 1_000_000).unwrap();
        assert_eq!(sim.call_count() - before, (sweeps * 21) as u64);
    }
}

#[test]
fn sweep_rows_cover_the_grid_and_replay_identically() {
    let spec = GridworldSpec::new(8, 0);
    let opts = SweepOptions::default();
    let params = [0.0, 0.5, 1.0];
    let seeds = [1, 2, 3];
    let a = run_sweep(&spec, SweepAlgorithm::KappaPi, &params, &seeds, &opts).unwrap();
    assert_eq!(a.rows.len(), 9);
    assert_eq!(a.aggregate().len(), 3);
    assert!(a.rows.iter().all(|r| r.converged && r.total_calls > 0));
    let b = run_sweep(&spec, SweepAlgorithm::KappaPi, &params, &seeds, &opts).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.aggregate_csv(), b.aggregate_csv());
    for r in a.rows.iter().filter(|r| r.param == 1.0) {
        assert_eq!(r.outer_iters, 1);
    }
}

#[test]
fn cell_matches_its_sweep_row() {
    let spec = GridworldSpec::new(7, 0);
    let free = SweepOptions {
        eval: EvalCost::Free,
        ..SweepOptions::default()
    };
    for opts in [SweepOptions::default(), free] {
        let res = run_sweep(&spec, SweepAlgorithm::LambdaPi, &[0.6], &[4], &opts).unwrap();
        let cell = run_cell(&spec, SweepAlgorithm::LambdaPi, 0.6, 4, &opts).unwrap();
        assert_eq!(res.rows[0], cell);
    }
}
