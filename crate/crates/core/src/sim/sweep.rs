use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{MdpError, Result};
use crate::mdp::{evaluate_policy, DetPolicy, TabularMdp, ValueFn};
use crate::operators::t_lambda_policy;

use super::gridworld::{initial_value, make_gridworld, GridworldSpec};
use super::simulator::GenerativeSimulator;
use super::solvers::{sim_evaluate, sim_h_greedy, sim_kappa_greedy};

pub const RUNS_CSV_HEADER: &str = "algorithm,param,n,seed,total_calls,outer_iters,converged";
pub const AGGREGATE_CSV_HEADER: &str = "param,mean_calls,std_calls";

/// Effective planning horizon of a kappa-greedy step, `1 / (1 - gamma kappa)`.
pub fn h_eff(kappa: f64, gamma: f64) -> f64 {
    1.0 / (1.0 - gamma * kappa)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepAlgorithm {
    /// h-greedy improvement (`param` = h), full policy evaluation.
    HPi,
    /// kappa-greedy improvement (`param` = kappa), full policy evaluation.
    KappaPi,
    /// 1-step greedy improvement with `T_lambda^pi` evaluation (`param` = lambda).
    LambdaPi,
}

impl SweepAlgorithm {
    pub fn name(self) -> &'static str {
        match self {
            SweepAlgorithm::HPi => "h-pi",
            SweepAlgorithm::KappaPi => "kappa-pi",
            SweepAlgorithm::LambdaPi => "lambda-pi",
        }
    }

    fn check_param(self, param: f64) -> Result<()> {
        let ok = match self {
            SweepAlgorithm::HPi => param >= 1.0 && param.fract() == 0.0,
            SweepAlgorithm::KappaPi | SweepAlgorithm::LambdaPi => (0.0..=1.0).contains(&param),
        };
        if ok {
            Ok(())
        } else {
            let want = match self {
                SweepAlgorithm::HPi => "a positive integer",
                _ => "in [0, 1]",
            };
            Err(MdpError::InvalidParam(format!(
                "{} parameter must be {want}, got {param}",
                self.name()
            )))
        }
    }
}

impl fmt::Display for SweepAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAlgorithm {
    type Err = MdpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "h-pi" => Ok(SweepAlgorithm::HPi),
            "kappa-pi" => Ok(SweepAlgorithm::KappaPi),
            "lambda-pi" => Ok(SweepAlgorithm::LambdaPi),
            other => Err(MdpError::InvalidParam(format!(
                "unknown sweep algorithm '{other}' (expected h-pi, kappa-pi or lambda-pi)"
            ))),
        }
    }
}

/// How the evaluation step between improvements is charged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvalCost {
    /// Closed-form, model-based evaluation; no simulator calls.
    Free,
    /// Iterative evaluation through the simulator, warm-started from the
    /// current value and run until a sweep changes it by less than `tol`;
    /// `|S|` calls per sweep.
    Iterative { tol: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub inner_tol: f64,
    pub inner_max_sweeps: usize,
    /// Stop once an outer step moves the value by less than this.
    pub outer_tol: f64,
    pub max_outer_iters: usize,
    pub eval: EvalCost,
    /// Worker threads; 0 uses the rayon default.
    pub jobs: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            inner_tol: 1e-5,
            inner_max_sweeps: 1_000_000,
            outer_tol: 1e-5,
            max_outer_iters: 10_000,
            eval: EvalCost::Iterative { tol: 1e-5 },
            jobs: 0,
        }
    }
}

impl SweepOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.inner_tol > 0.0) || !(self.outer_tol > 0.0) {
            return Err(MdpError::InvalidParam("sweep tolerances must be positive".into()));
        }
        if let EvalCost::Iterative { tol } = self.eval {
            if !(tol > 0.0) {
                return Err(MdpError::InvalidParam("evaluation tolerance must be positive".into()));
            }
        }
        if self.max_outer_iters == 0 || self.inner_max_sweeps == 0 {
            return Err(MdpError::InvalidParam("iteration caps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub algorithm: SweepAlgorithm,
    pub param: f64,
    pub n: usize,
    pub seed: u64,
    pub total_calls: u64,
    /// Improvement steps before the one that confirmed convergence.
    pub outer_iters: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub param: f64,
    pub mean_calls: f64,
    /// Sample standard deviation across seeds (0 for a single seed).
    pub std_calls: f64,
    pub runs: usize,
    pub all_converged: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(RUNS_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.algorithm, r.param, r.n, r.seed, r.total_calls, r.outer_iters, r.converged
            )
            .unwrap();
        }
        out
    }

    pub fn aggregate(&self) -> Vec<AggregateRow> {
        aggregate(&self.rows)
    }

    pub fn aggregate_csv(&self) -> String {
        let mut out = String::from(AGGREGATE_CSV_HEADER);
        out.push('\n');
        for r in self.aggregate() {
            writeln!(out, "{},{},{}", r.param, r.mean_calls, r.std_calls).unwrap();
        }
        out
    }

    /// Parameter with the smallest mean calls (first one on exact ties).
    pub fn argmin(&self) -> Option<AggregateRow> {
        self.aggregate()
            .into_iter()
            .fold(None, |best: Option<AggregateRow>, r| match best {
                Some(b) if b.mean_calls <= r.mean_calls => Some(b),
                _ => Some(r),
            })
    }

    /// Plain-text listing of the call-minimizing parameter per grid size.
    pub fn summary(&self) -> String {
        let mut sizes: Vec<usize> = self.rows.iter().map(|r| r.n).collect();
        sizes.sort_unstable();
        sizes.dedup();
        let mut out = String::new();
        for n in sizes {
            let sub = SweepResult {
                rows: self.rows.iter().filter(|r| r.n == n).cloned().collect(),
            };
            let alg = sub.rows[0].algorithm;
            let unconverged = sub.rows.iter().filter(|r| !r.converged).count();
            if let Some(best) = sub.argmin() {
                writeln!(
                    out,
                    "{alg} n={n}: argmin param {} with mean calls {:.6e} (std {:.3e}); {} runs, {unconverged} unconverged",
                    best.param,
                    best.mean_calls,
                    best.std_calls,
                    sub.rows.len()
                )
                .unwrap();
            }
        }
        out
    }
}

/// Per-parameter mean and sample standard deviation of `total_calls`, in
/// order of first appearance.
pub fn aggregate(rows: &[SweepRow]) -> Vec<AggregateRow> {
    let mut params: Vec<f64> = Vec::new();
    for r in rows {
        if !params.contains(&r.param) {
            params.push(r.param);
        }
    }
    params
        .into_iter()
        .map(|param| {
            let group: Vec<&SweepRow> = rows.iter().filter(|r| r.param == param).collect();
            let calls: Vec<f64> = group.iter().map(|r| r.total_calls as f64).collect();
            let n = calls.len() as f64;
            let mean = calls.iter().sum::<f64>() / n;
            let std = if calls.len() > 1 {
                (calls.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            AggregateRow {
                param,
                mean_calls: mean,
                std_calls: std,
                runs: group.len(),
                all_converged: group.iter().all(|r| r.converged),
            }
        })
        .collect()
}

fn improve(
    sim: &mut GenerativeSimulator<'_>,
    algorithm: SweepAlgorithm,
    param: f64,
    v: &[f64],
    opts: &SweepOptions,
) -> Result<DetPolicy> {
    match algorithm {
        SweepAlgorithm::HPi => sim_h_greedy(sim, v, param as usize),
        SweepAlgorithm::KappaPi => sim_kappa_greedy(sim, v, param, opts.inner_tol, opts.inner_max_sweeps).map(|r| r.0),
        SweepAlgorithm::LambdaPi => sim_h_greedy(sim, v, 1),
    }
}

fn evaluate(
    sim: &mut GenerativeSimulator<'_>,
    mdp: &TabularMdp,
    pi: &DetPolicy,
    v: &[f64],
    lambda: f64,
    opts: &SweepOptions,
) -> Result<ValueFn> {
    match opts.eval {
        EvalCost::Free if lambda == 1.0 => evaluate_policy(mdp, pi),
        EvalCost::Free => t_lambda_policy(mdp, pi, v, lambda),
        EvalCost::Iterative { tol } => sim_evaluate(sim, pi, v, lambda, tol, opts.inner_max_sweeps).map(|r| r.0),
    }
}

fn run_on(
    mdp: &TabularMdp,
    v0: &ValueFn,
    algorithm: SweepAlgorithm,
    param: f64,
    n: usize,
    seed: u64,
    opts: &SweepOptions,
) -> Result<SweepRow> {
    let lambda = if algorithm == SweepAlgorithm::LambdaPi {
        param
    } else {
        1.0
    };
    let mut sim = GenerativeSimulator::new(mdp);
    let mut v = v0.clone();
    let mut prev: Option<DetPolicy> = None;
    let mut row = SweepRow {
        algorithm,
        param,
        n,
        seed,
        total_calls: 0,
        outer_iters: 0,
        converged: false,
    };
    for k in 1..=opts.max_outer_iters {
        let step = improve(&mut sim, algorithm, param, &v, opts)
            .and_then(|pi| evaluate(&mut sim, mdp, &pi, &v, lambda, opts).map(|next| (pi, next)));
        let (pi, next) = match step {
            Ok(x) => x,
            // An inner solve that hits its cap ends the run unconverged.
            Err(MdpError::NonConvergence { .. }) => break,
            Err(e) => return Err(e),
        };
        let change = next.sup_distance(&v);
        let repeated = lambda == 1.0 && prev.as_ref() == Some(&pi);
        v = next;
        prev = Some(pi);
        if repeated || change < opts.outer_tol {
            row.outer_iters = k - 1;
            row.converged = true;
            break;
        }
        row.outer_iters = k;
    }
    row.total_calls = sim.call_count();
    Ok(row)
}

/// One (parameter, seed) cell on a freshly generated grid world.
pub fn run_cell(
    spec: &GridworldSpec,
    algorithm: SweepAlgorithm,
    param: f64,
    seed: u64,
    opts: &SweepOptions,
) -> Result<SweepRow> {
    opts.validate()?;
    algorithm.check_param(param)?;
    let spec = spec.with_seed(seed);
    let mdp = make_gridworld(&spec)?;
    let v0 = initial_value(&spec, seed);
    run_on(&mdp, &v0, algorithm, param, spec.n, seed, opts)
}

/// Every (parameter, seed) cell, rows ordered by parameter then seed
/// regardless of how cells are scheduled. Each seed's grid world and
/// initial value are shared by all parameters.
pub fn run_sweep(
    spec: &GridworldSpec,
    algorithm: SweepAlgorithm,
    params: &[f64],
    seeds: &[u64],
    opts: &SweepOptions,
) -> Result<SweepResult> {
    opts.validate()?;
    spec.validate()?;
    for &p in params {
        algorithm.check_param(p)?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| MdpError::InvalidParam(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        let instances: Vec<(TabularMdp, ValueFn)> = seeds
            .par_iter()
            .map(|&seed| {
                let spec = spec.with_seed(seed);
                Ok((make_gridworld(&spec)?, initial_value(&spec, seed)))
            })
            .collect::<Result<_>>()?;
        let cells: Vec<(f64, usize)> = params
            .iter()
            .flat_map(|&p| (0..seeds.len()).map(move |i| (p, i)))
            .collect();
        let rows = cells
            .par_iter()
            .map(|&(param, i)| {
                let (mdp, v0) = &instances[i];
                run_on(mdp, v0, algorithm, param, spec.n, seeds[i], opts)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SweepResult { rows })
    })
}
