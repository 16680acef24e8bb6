//! Named invariant checks over a seeded batch of random MDPs.
//!
//! Every check reports the number of cases, the violations, and the worst
//! slack (tolerance minus observed error, over all cases). A failing check
//! names the case seed that reproduces it.

use std::cell::OnceCell;
use std::fmt::Write as _;

use msgdp_core::algorithms::{
    h_pi, iteration_bound_h, iteration_bound_kappa, kappa_lambda_pi, kappa_pi, kappa_vi, noise_bound, NoiseSpec,
    RunConfig, RunTrace,
};
use msgdp_core::linalg::solve_policy_system;
use msgdp_core::mdp::random::random_mdp;
use msgdp_core::mdp::{
    bellman_optimal, bellman_policy, evaluate_policy, oracle_optimal, oracle_optimal_with_cap, q_values, sup_distance,
    DetPolicy, OracleBackend, TIE_TOL,
};
use msgdp_core::operators::{
    h_greedy, kappa_greedy_set, kappa_weighted_return, t_kappa, t_kappa_policy, t_lambda_bar_kappa_policy,
    t_lambda_bar_kappa_series, t_lambda_policy, t_power, td_surrogate_mdp, xi_coefficient, KappaParams,
};
use msgdp_core::sim::{make_gridworld, sim_h_greedy, sim_kappa_greedy, GenerativeSimulator, GridworldSpec};
use msgdp_core::{TabularMdp, ValueFn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const REPORT_CSV_HEADER: &str = "invariant,cases,violations,borderline,worst_slack,status";

/// Runs checked against the error bound for noisy runs are flagged, not
/// failed, when they come within this fraction of the bound.
const BORDERLINE_FRACTION: f64 = 0.01;
const NOISE_CASES: usize = 20;
const NOISE_ITERS: usize = 500;
const NOISE_WINDOW: usize = 100;

pub struct Case {
    pub seed: u64,
    pub mdp: TabularMdp,
    star: OnceCell<ValueFn>,
}

impl Case {
    fn star(&self) -> &ValueFn {
        self.star
            .get_or_init(|| oracle_optimal(&self.mdp).expect("oracle on a valid MDP").value)
    }

    fn n(&self) -> usize {
        self.mdp.n_states()
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream + 1);
        rng
    }
}

fn random_value(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-5.0..5.0)).collect()
}

fn random_policy(rng: &mut impl Rng, mdp: &TabularMdp) -> DetPolicy {
    DetPolicy::new(
        (0..mdp.n_states())
            .map(|_| rng.random_range(0..mdp.n_actions()))
            .collect(),
    )
}

pub struct Batch {
    pub cases: Vec<Case>,
}

impl Batch {
    /// Case `i` is `random_mdp(S, A, gamma, seed_i)`; sizes and discount are
    /// drawn from the case seed itself, so one seed reproduces one case.
    pub fn new(base_seed: u64, count: usize, max_states: usize, max_actions: usize) -> Self {
        let cases = (0..count as u64)
            .map(|i| {
                let seed = base_seed.wrapping_mul(1_000_003).wrapping_add(i);
                let (s, a, gamma) = case_shape(seed, max_states, max_actions);
                Case {
                    seed,
                    mdp: random_mdp(s, a, gamma, seed),
                    star: OnceCell::new(),
                }
            })
            .collect();
        Self { cases }
    }
}

/// `(states, actions, gamma)` of the case generated from `seed`.
pub fn case_shape(seed: u64, max_states: usize, max_actions: usize) -> (usize, usize, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = rng.random_range(2..=max_states.max(2));
    let a = rng.random_range(2..=max_actions.max(2));
    let gamma = (rng.random_range(0.5..0.95) * 100.0f64).round() / 100.0;
    (s, a, gamma)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub cases: usize,
    pub violations: usize,
    pub borderline: usize,
    pub worst_slack: f64,
    pub first_failure: Option<u64>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Default)]
struct Tally {
    cases: usize,
    violations: usize,
    borderline: usize,
    worst_slack: Option<f64>,
    first_failure: Option<u64>,
}

impl Tally {
    /// Records `error <= tol` for the case with `seed`.
    fn check(&mut self, seed: u64, error: f64, tol: f64) {
        let slack = tol - error;
        if !(slack >= 0.0) {
            self.violations += 1;
            self.first_failure.get_or_insert(seed);
        }
        let slack = if slack.is_nan() { f64::NEG_INFINITY } else { slack };
        self.worst_slack = Some(self.worst_slack.map_or(slack, |w| w.min(slack)));
    }

    fn truth(&mut self, seed: u64, ok: bool) {
        self.check(seed, if ok { 0.0 } else { 1.0 }, 0.0);
    }

    fn case_done(&mut self) {
        self.cases += 1;
    }

    fn finish(self) -> Outcome {
        Outcome {
            cases: self.cases,
            violations: self.violations,
            borderline: self.borderline,
            worst_slack: self.worst_slack.unwrap_or(0.0),
            first_failure: self.first_failure,
        }
    }
}

fn each_case(batch: &Batch, limit: usize, mut f: impl FnMut(&Case, &mut Tally)) -> Outcome {
    let mut t = Tally::default();
    for case in batch.cases.iter().take(limit) {
        f(case, &mut t);
        t.case_done();
    }
    t.finish()
}

fn below(lower: &[f64], upper: &[f64]) -> f64 {
    lower
        .iter()
        .zip(upper)
        .map(|(l, u)| (l - u).max(0.0))
        .fold(0.0, f64::max)
}

pub struct Invariant {
    pub name: &'static str,
    pub about: &'static str,
    run: fn(&Batch) -> Outcome,
}

impl Invariant {
    pub fn run(&self, batch: &Batch) -> Outcome {
        (self.run)(batch)
    }
}

const KAPPA_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

fn pi_traces(case: &Case) -> Vec<(String, f64, RunTrace)> {
    let cfg = RunConfig::default().with_optimum(case.star().clone());
    let v0 = ValueFn::zeros(case.n());
    let mut out = Vec::new();
    for h in [1usize, 2, 3, 5] {
        let t = h_pi(&case.mdp, h, &v0, &cfg).expect("h-pi run");
        out.push(("h".to_string(), h as f64, t));
    }
    for kappa in [0.0, 0.3, 0.7, 0.9, 1.0] {
        let t = kappa_pi(&case.mdp, kappa, &v0, &cfg).expect("kappa-pi run");
        out.push(("kappa".to_string(), kappa, t));
    }
    out
}

pub fn registry() -> Vec<Invariant> {
    vec![
        Invariant {
            name: "policy-fixed-point",
            about: "T^pi v^pi = v^pi (1e-10)",
            run: |b| {
                each_case(b, usize::MAX, |c, t| {
                    let pi = random_policy(&mut c.rng(0), &c.mdp);
                    let v = evaluate_policy(&c.mdp, &pi).unwrap();
                    t.check(c.seed, bellman_policy(&c.mdp, &pi, &v).sup_distance(&v), 1e-10);
                })
            },
        },
        Invariant {
            name: "optimal-fixed-point",
            about: "T v* = v* (1e-10)",
            run: |b| {
                each_case(b, usize::MAX, |c, t| {
                    t.check(
                        c.seed,
                        bellman_optimal(&c.mdp, c.star()).value.sup_distance(c.star()),
                        1e-10,
                    );
                })
            },
        },
        Invariant {
            name: "greedy-at-optimum-is-optimal",
            about: "the greedy policy at v* has value v* (1e-8)",
            run: |b| {
                each_case(b, usize::MAX, |c, t| {
                    let pi = bellman_optimal(&c.mdp, c.star()).policy;
                    t.check(
                        c.seed,
                        evaluate_policy(&c.mdp, &pi).unwrap().sup_distance(c.star()),
                        1e-8,
                    );
                })
            },
        },
        Invariant {
            name: "oracle-cross-check",
            about: "policy enumeration and value iteration agree on v* (1e-8)",
            run: |b| {
                each_case(b, usize::MAX, |c, t| {
                    let vi = oracle_optimal_with_cap(&c.mdp, 0).unwrap();
                    t.truth(c.seed, matches!(vi.backend, OracleBackend::ValueIteration { .. }));
                    t.check(c.seed, vi.value.sup_distance(c.star()), 1e-8);
                })
            },
        },
        Invariant {
            name: "bellman-monotone",
            about: "v <= w implies T v <= T w and T^pi v <= T^pi w",
            run: |b| {
                each_case(b, usize::MAX, |c, t| {
                    let mut rng = c.rng(1);
                    let v = random_value(&mut rng, c.n());
                    let w: Vec<f64> = v.iter().map(|x| x + rng.random_range(0.0..3.0)).collect();
                    let pi = random_policy(&mut rng, &c.mdp);
                    t.check(
                        c.seed,
                        below(&bellman_optimal(&c.mdp, &v).value, &bellman_optimal(&c.mdp, &w).value),
                        1e-12,
                    );
                    t.check(
                        c.seed,
                        below(&bellman_policy(&c.mdp, &pi, &v), &bellman_policy(&c.mdp, &pi, &w)),
                        1e-12,
                    );
                })
            },
        },
        Invariant {
            name: "bellman-contraction",
            about: "||T v - T w|| <= gamma ||v - w||",
            run: |b| {
                each_case(b, usize::MAX, |c, t| {
                    let mut rng = c.rng(2);
                    let (v, w) = (random_value(&mut rng, c.n()), random_value(&mut rng, c.n()));
                    let lhs = sup_distance(&bellman_optimal(&c.mdp, &v).value, &bellman_optimal(&c.mdp, &w).value);
                    t.check(c.seed, lhs - c.mdp.gamma() * sup_distance(&v, &w), 1e-12);
                })
            },
        },
        Invariant {
            name: "policy-backup-affine",
            about: "T^pi of a convex combination is the combination of images (1e-10)",
            run: |b| {
                each_case(b, usize::MAX, |c, t| {
                    let mut rng = c.rng(3);
                    let pi = random_policy(&mut rng, &c.mdp);
                    let vs: Vec<Vec<f64>> = (0..3).map(|_| random_value(&mut rng, c.n())).collect();
                    let raw: Vec<f64> = (0..3).map(|_| rng.random_range(0.01..1.0)).collect();
                    let total: f64 = raw.iter().sum();
                    let w: Vec<f64> = raw.iter().map(|x| x / total).collect();
                    let mix: Vec<f64> = (0..c.n()).map(|s| (0..3).map(|j| w[j] * vs[j][s]).sum()).collect();
                    let imgs: Vec<_> = vs.iter().map(|v| bellman_policy(&c.mdp, &pi, v)).collect();
                    let rhs: Vec<f64> = (0..c.n()).map(|s| (0..3).map(|j| w[j] * imgs[j][s]).sum()).collect();
                    t.check(c.seed, bellman_policy(&c.mdp, &pi, &mix).sup_distance(&rhs), 1e-10);
                })
            },
        },
        Invariant {
            name: "h-greedy-attains-max",
            about: "the h-greedy action maximises the one-step lookahead on T^(h-1) v",
            run: |b| {
                each_case(b, usize::MAX, |c, t| {
                    let v = random_value(&mut c.rng(4), c.n());
                    for h in [1, 2, 3, 5] {
                        let g = h_greedy(&c.mdp, &v, h).unwrap();
                        let base = if h == 1 {
                            ValueFn::new(v.clone())
                        } else {
                            t_power(&c.mdp, &v, h - 1).unwrap()
                        };
                        let q = q_values(&c.mdp, &base);
                        for s in 0..c.n() {
                            let best = q.row(s).iter().copied().fold(f64::NEG_INFINITY, f64::max);
                            t.check(c.seed, best - q.get(s, g.policy[s]), TIE_TOL);
                        }
                    }
                })
            },
        },
        Invariant {
            name: "kappa-fixed-points",
            about: "T_kappa^pi v^pi = v^pi and T_kappa v* = v* on a kappa grid (1e-8)",
            run: |b| {
                each_case(b, usize::MAX, |c, t| {
                    let pi = random_policy(&mut c.rng(5), &c.mdp);
                    let vpi = evaluate_policy(&c.mdp, &pi).unwrap();
                    for kappa in KAPPA_GRID {
                        t.check(
                            c.seed,
                            t_kappa_policy(&c.mdp, &pi, &vpi, kappa).unwrap().sup_distance(&vpi),
                            1e-8,
                        );
                        let g = t_kappa(&c.mdp, c.star(), &KappaParams::exact(kappa)).unwrap();
                        t.check(c.seed, g.value.sup_distance(c.star()), 1e-8);
                    }
                })
            },
        },
        Invariant {
            name: "kappa-contraction",
            about: "||T_kappa v - T_kappa w|| <= xi ||v - w|| + 1e-9",
            run: |b| {
                each_case(b, usize::MAX, |c, t| {
                    let mut rng = c.rng(6);
                    let (v, w) = (random_value(&mut rng, c.n()), random_value(&mut rng, c.n()));
                    for kappa in KAPPA_GRID {
                        let p = KappaParams::exact(kappa);
                        let lhs = t_kappa(&c.mdp, &v, &p)
                            .unwrap()
                            .value
                            .sup_distance(&t_kappa(&c.mdp, &w, &p).unwrap().value);
                        t.check(
                            c.seed,
                            lhs - xi_coefficient(kappa, c.mdp.gamma()) * sup_distance(&v, &w),
                            1e-9,
                        );
                    }
                })
            },
        },
        Invariant {
            name: "kappa-greedy-set-at-optimum",
            about: "kappa-greedy and one-step greedy tie sets coincide at v*",
            run: |b| {
                each_case(b, usize::MAX, |c, t| {
                    let one_step = q_values(&c.mdp, c.star()).tie_sets(TIE_TOL);
                    for kappa in KAPPA_GRID {
                        t.truth(c.seed, kappa_greedy_set(&c.mdp, c.star(), kappa).unwrap() == one_step);
                    }
                })
            },
        },
        Invariant {
            name: "kappa-closed-forms",
            about: "the two closed forms of T_kappa^pi agree (1e-9)",
            run: |b| {
                each_case(b, usize::MAX, |c, t| {
                    let mut rng = c.rng(7);
                    let pi = random_policy(&mut rng, &c.mdp);
                    let v = random_value(&mut rng, c.n());
                    let tv = bellman_policy(&c.mdp, &pi, &v);
                    let td: Vec<f64> = tv.iter().zip(&v).map(|(a, b)| a - b).collect();
                    for kappa in KAPPA_GRID {
                        let corr = solve_policy_system(&c.mdp, &pi, &td, kappa * c.mdp.gamma()).unwrap();
                        let alt: Vec<f64> = v.iter().zip(&corr).map(|(a, b)| a + b).collect();
                        t.check(
                            c.seed,
                            t_kappa_policy(&c.mdp, &pi, &v, kappa).unwrap().sup_distance(&alt),
                            1e-9,
                        );
                    }
                })
            },
        },
        Invariant {
            name: "mixed-lambda-series",
            about: "mixed kappa/lambda-bar operator equals its truncated series (1e-6)",
            run: |b| {
                each_case(b, usize::MAX, |c, t| {
                    let mut rng = c.rng(8);
                    let pi = random_policy(&mut rng, &c.mdp);
                    let v = random_value(&mut rng, c.n());
                    for kappa in [0.0, 0.3, 0.7] {
                        for lambda_bar in [0.0, 0.5, 0.9] {
                            let a = t_lambda_bar_kappa_policy(&c.mdp, &pi, &v, lambda_bar, kappa).unwrap();
                            let s = t_lambda_bar_kappa_series(&c.mdp, &pi, &v, lambda_bar, kappa).unwrap();
                            t.check(c.seed, a.sup_distance(&s), 1e-6);
                        }
                    }
                })
            },
        },
        Invariant {
            name: "lambda-commute",
            about: "T_l1^pi T_l2^pi = T_l2^pi T_l1^pi (1e-9)",
            run: |b| {
                each_case(b, usize::MAX, |c, t| {
                    let mut rng = c.rng(9);
                    let pi = random_policy(&mut rng, &c.mdp);
                    let v = random_value(&mut rng, c.n());
                    let op = |l: f64, x: &[f64]| t_lambda_policy(&c.mdp, &pi, x, l).unwrap();
                    for (l1, l2) in [(0.2, 0.7), (0.7, 0.2), (0.2, 0.2), (0.7, 0.7)] {
                        t.check(c.seed, op(l1, &op(l2, &v)).sup_distance(&op(l2, &op(l1, &v))), 1e-9);
                    }
                })
            },
        },
        Invariant {
            name: "lambda-balance-relation",
            about: "T_l^pi v - l T^pi T_l^pi v = (1 - l) T^pi v (1e-9)",
            run: |b| {
                each_case(b, usize::MAX, |c, t| {
                    let mut rng = c.rng(10);
                    let pi = random_policy(&mut rng, &c.mdp);
                    let v = random_value(&mut rng, c.n());
                    let tv = bellman_policy(&c.mdp, &pi, &v);
                    for l in [0.0, 0.2, 0.5, 0.7, 1.0] {
                        let tl = t_lambda_policy(&c.mdp, &pi, &v, l).unwrap();
                        let ttl = bellman_policy(&c.mdp, &pi, &tl);
                        let err = (0..c.n())
                            .map(|s| (tl[s] - l * ttl[s] - (1.0 - l) * tv[s]).abs())
                            .fold(0.0, f64::max);
                        t.check(c.seed, err, 1e-9);
                    }
                })
            },
        },
        Invariant {
            name: "td-surrogate-greedy-set",
            about: "TD-reward surrogate: optimal tie set = kappa-greedy set, optimal value = T_kappa v - v (1e-8)",
            run: |b| {
                each_case(b, usize::MAX, |c, t| {
                    let v = random_value(&mut c.rng(11), c.n());
                    for kappa in [0.3, 0.7] {
                        let td = td_surrogate_mdp(&c.mdp, &v, kappa).unwrap();
                        let td_star = oracle_optimal(&td).unwrap().value;
                        let tk = t_kappa(&c.mdp, &v, &KappaParams::exact(kappa)).unwrap().value;
                        let shifted: Vec<f64> = tk.iter().zip(&v).map(|(a, b)| a - b).collect();
                        t.check(c.seed, td_star.sup_distance(&shifted), 1e-8);
                        let same =
                            q_values(&td, &td_star).tie_sets(TIE_TOL) == kappa_greedy_set(&c.mdp, &v, kappa).unwrap();
                        t.truth(c.seed, same);
                    }
                })
            },
        },
        Invariant {
            name: "weighted-return",
            about: "kappa-weighted h-step return equals T_kappa^pi v (1e-8)",
            run: |b| {
                each_case(b, usize::MAX, |c, t| {
                    let mut rng = c.rng(12);
                    let pi = random_policy(&mut rng, &c.mdp);
                    let v = random_value(&mut rng, c.n());
                    for kappa in [0.3, 0.7] {
                        let lhs = kappa_weighted_return(&c.mdp, &pi, &v, kappa).unwrap();
                        t.check(
                            c.seed,
                            lhs.sup_distance(&t_kappa_policy(&c.mdp, &pi, &v, kappa).unwrap()),
                            1e-8,
                        );
                    }
                })
            },
        },
        Invariant {
            name: "pi-oracle-convergence",
            about: "h-PI, kappa-PI, kappa-VI and kappa-lambda-PI reach v* (1e-8)",
            run: |b| {
                each_case(b, usize::MAX, |c, t| {
                    for (_, _, tr) in pi_traces(c) {
                        t.truth(c.seed, tr.converged);
                        t.check(c.seed, tr.final_value().unwrap().sup_distance(c.star()), 1e-8);
                    }
                    let cfg = RunConfig::default();
                    let v0 = ValueFn::zeros(c.n());
                    for kappa in [0.0, 0.5] {
                        let tr = kappa_vi(&c.mdp, kappa, &v0, 1e-11, &cfg).unwrap();
                        t.truth(c.seed, tr.converged);
                        t.check(c.seed, tr.final_value().unwrap().sup_distance(c.star()), 1e-8);
                    }
                    for lambda in [0.5, 0.75, 1.0] {
                        let tr = kappa_lambda_pi(&c.mdp, 0.5, lambda, &v0, &cfg, None).unwrap();
                        t.truth(c.seed, tr.converged);
                        t.check(c.seed, tr.final_value().unwrap().sup_distance(c.star()), 1e-8);
                    }
                })
            },
        },
        Invariant {
            name: "pi-monotone-improvement",
            about: "policy values never decrease along h-PI and kappa-PI traces (1e-10)",
            run: |b| {
                each_case(b, usize::MAX, |c, t| {
                    for (_, _, tr) in pi_traces(c) {
                        let vals: Vec<ValueFn> = tr.policies().map(|p| evaluate_policy(&c.mdp, p).unwrap()).collect();
                        for w in vals.windows(2) {
                            t.check(c.seed, below(&w[0], &w[1]), 1e-10);
                        }
                    }
                })
            },
        },
        Invariant {
            name: "h-pi-contraction",
            about: "h-PI errors shrink by gamma^h per iteration (+1e-9)",
            run: |b| {
                each_case(b, usize::MAX, |c, t| {
                    for (kind, p, tr) in pi_traces(c) {
                        if kind != "h" {
                            continue;
                        }
                        let rate = c.mdp.gamma().powi(p as i32);
                        let errs: Vec<f64> = tr.errors().into_iter().flatten().collect();
                        for e in errs.windows(2) {
                            t.check(c.seed, e[1] - rate * e[0], 1e-9);
                        }
                    }
                })
            },
        },
        Invariant {
            name: "kappa-pi-contraction",
            about: "kappa-PI errors shrink by xi per iteration (+1e-9)",
            run: |b| {
                each_case(b, usize::MAX, |c, t| {
                    for (kind, p, tr) in pi_traces(c) {
                        if kind != "kappa" {
                            continue;
                        }
                        let rate = xi_coefficient(p, c.mdp.gamma());
                        let errs: Vec<f64> = tr.errors().into_iter().flatten().collect();
                        for e in errs.windows(2) {
                            t.check(c.seed, e[1] - rate * e[0], 1e-9);
                        }
                    }
                })
            },
        },
        Invariant {
            name: "pi-iteration-bounds",
            about: "h-PI and kappa-PI improvement steps stay within the iteration bounds",
            run: |b| {
                each_case(b, usize::MAX, |c, t| {
                    let (s, a, g) = (c.mdp.n_states(), c.mdp.n_actions(), c.mdp.gamma());
                    for (kind, p, tr) in pi_traces(c) {
                        let bound = if kind == "h" {
                            iteration_bound_h(s, a, g, p as usize)
                        } else {
                            iteration_bound_kappa(s, a, g, p)
                        };
                        t.check(c.seed, tr.improvement_steps() as f64, bound as f64);
                    }
                })
            },
        },
        Invariant {
            name: "kappa-vi-equivalence",
            about: "kappa-VI and kappa-lambda-PI with lambda = kappa give the same values (1e-9)",
            run: |b| {
                each_case(b, usize::MAX, |c, t| {
                    let cfg = RunConfig {
                        max_outer_iters: 50,
                        ..RunConfig::default()
                    };
                    let v0 = ValueFn::new(random_value(&mut c.rng(13), c.n()));
                    for kappa in [0.0, 0.5, 0.9] {
                        let a = kappa_vi(&c.mdp, kappa, &v0, 1e-13, &cfg).unwrap();
                        let b = kappa_lambda_pi(&c.mdp, kappa, kappa, &v0, &cfg, None).unwrap();
                        for (x, y) in a.values().zip(b.values()) {
                            t.check(c.seed, x.sup_distance(y), 1e-9);
                        }
                    }
                })
            },
        },
        Invariant {
            name: "noise-error-bound",
            about: "noisy kappa-PI stays within (2 xi eps + delta)/(1 - xi)^2 over its last 100 of 500 iterations",
            run: |b| {
                let mut t = Tally::default();
                for c in b.cases.iter().take(NOISE_CASES) {
                    let cfg = RunConfig {
                        max_outer_iters: NOISE_ITERS,
                        ..RunConfig::default().with_optimum(c.star().clone())
                    };
                    let v0 = ValueFn::zeros(c.n());
                    for kappa in [0.0, 0.5] {
                        for eps in [0.01, 0.05] {
                            for delta in [0.0, 0.05] {
                                let noise = NoiseSpec::new(eps, delta, c.seed);
                                let tr = kappa_lambda_pi(&c.mdp, kappa, 1.0, &v0, &cfg, Some(&noise)).unwrap();
                                let tail = tr.errors()[NOISE_ITERS - NOISE_WINDOW..]
                                    .iter()
                                    .map(|e| e.unwrap())
                                    .fold(0.0, f64::max);
                                let bound = noise_bound(eps, delta, kappa, c.mdp.gamma());
                                if tail <= bound && tail > bound * (1.0 - BORDERLINE_FRACTION) {
                                    t.borderline += 1;
                                }
                                t.check(c.seed, tail, bound);
                            }
                        }
                    }
                    t.case_done();
                }
                t.finish()
            },
        },
        Invariant {
            name: "sim-greedy-agreement",
            about: "simulator-backed greedy steps pick the model-based policies",
            run: |b| {
                each_case(b, 50, |c, t| {
                    let v = random_value(&mut c.rng(14), c.n());
                    for h in [1, 2, 4] {
                        let mut sim = GenerativeSimulator::new(&c.mdp);
                        let pi = sim_h_greedy(&mut sim, &v, h).unwrap();
                        t.truth(c.seed, pi == h_greedy(&c.mdp, &v, h).unwrap().policy);
                    }
                    for kappa in [0.0, 0.3, 0.7] {
                        let mut sim = GenerativeSimulator::new(&c.mdp);
                        let (pi, _) = sim_kappa_greedy(&mut sim, &v, kappa, 1e-5, 1_000_000).unwrap();
                        t.truth(
                            c.seed,
                            pi == t_kappa(&c.mdp, &v, &KappaParams::vi(kappa, 1e-5)).unwrap().policy,
                        );
                    }
                })
            },
        },
        Invariant {
            name: "sim-call-counting",
            about: "each greedy sweep costs exactly |S||A| simulator calls",
            run: |b| {
                each_case(b, usize::MAX, |c, t| {
                    let v = random_value(&mut c.rng(15), c.n());
                    let pairs = (c.mdp.n_states() * c.mdp.n_actions()) as u64;
                    let mut sim = GenerativeSimulator::new(&c.mdp);
                    sim_h_greedy(&mut sim, &v, 3).unwrap();
                    t.truth(c.seed, sim.call_count() == 3 * pairs);
                    let before = sim.call_count();
                    let (_, sweeps) = sim_kappa_greedy(&mut sim, &v, 0.5, 1e-5, 1_000_000).unwrap();
                    t.truth(c.seed, sim.call_count() - before == sweeps as u64 * pairs);
                })
            },
        },
        Invariant {
            name: "gridworld-one-hot",
            about: "every grid-world transition row is deterministic",
            run: |b| {
                each_case(b, 20, |c, t| {
                    let n = 2 + (c.seed % 9) as usize;
                    let mdp = make_gridworld(&GridworldSpec::new(n, c.seed)).unwrap();
                    t.truth(c.seed, mdp.is_deterministic());
                })
            },
        },
    ]
}

pub struct Report {
    pub rows: Vec<(&'static str, Outcome)>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.1.passed())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(REPORT_CSV_HEADER);
        out.push('\n');
        for (name, o) in &self.rows {
            let status = if o.passed() { "pass" } else { "fail" };
            writeln!(
                out,
                "{name},{},{},{},{:e},{status}",
                o.cases, o.violations, o.borderline, o.worst_slack
            )
            .unwrap();
        }
        out
    }

    pub fn lines(&self) -> String {
        let width = self.rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (name, o) in &self.rows {
            let status = if o.passed() { "PASS" } else { "FAIL" };
            write!(
                out,
                "{status}  {name:<width$}  cases={:<4} violations={:<3} worst_slack={:.3e}",
                o.cases, o.violations, o.worst_slack
            )
            .unwrap();
            if o.borderline > 0 {
                write!(out, " borderline={}", o.borderline).unwrap();
            }
            if let Some(seed) = o.first_failure {
                write!(out, " repro_case_seed={seed}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Runs the selected invariants (all when `only` is empty).
pub fn run_suite(batch: &Batch, only: &[String]) -> Result<Report, String> {
    let all = registry();
    for name in only {
        if !all.iter().any(|i| i.name == name) {
            return Err(format!("unknown invariant `{name}` (see verify --list)"));
        }
    }
    let rows = all
        .iter()
        .filter(|i| only.is_empty() || only.iter().any(|n| n == i.name))
        .map(|i| (i.name, i.run(batch)))
        .collect();
    Ok(Report { rows })
}
