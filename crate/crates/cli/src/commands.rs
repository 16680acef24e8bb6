use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use msgdp_core::algorithms::{
    h_pi, iteration_bound_h, iteration_bound_kappa, kappa_lambda_pi, kappa_pi, kappa_vi, lambda_pi, noise_bound,
    NoiseSpec, RunConfig, RunTrace,
};
use msgdp_core::mdp::io::{format_mdp, load_mdp};
use msgdp_core::mdp::oracle_optimal;
use msgdp_core::operators::{xi_coefficient, InnerBackend};
use msgdp_core::sim::{h_eff, make_gridworld, run_sweep, EvalCost, GridworldSpec, SweepAlgorithm, SweepOptions};
use msgdp_core::TabularMdp;

use crate::args::{Algorithm, Backend, BoundsArgs, EvalMode, GridworldArgs, SolveArgs, SweepAlg, SweepArgs};
use crate::grid::parse_grid;
use crate::{CliError, CliResult, Config, EXIT_NONCONVERGED, EXIT_OK};

/// Errors are only computed against an oracle when it is cheap.
const ORACLE_PAIR_LIMIT: usize = 100_000;

/// Share of sweep cells that must converge for a zero exit code.
const SWEEP_CONVERGED_SHARE: f64 = 0.95;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn check_unit(name: &str, x: f64) -> Result<(), CliError> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(usage(format!("{name} must be in [0, 1], got {x}")))
    }
}

fn check_gamma(gamma: f64) -> Result<(), CliError> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(usage(format!("gamma must be in (0, 1), got {gamma}")))
    }
}

fn fmt_values(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(" ")
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------- solve

struct SolvePlan {
    label: String,
    file_stem: String,
    noisy: bool,
}

fn plan_solve(a: &SolveArgs) -> Result<SolvePlan, CliError> {
    let need = |name: &str, x: Option<f64>| x.ok_or_else(|| usage(format!("--{name} is required for this algorithm")));
    let noisy = a.epsilon.is_some() || a.delta.is_some();
    if noisy && a.alg != Algorithm::KappaLambdaPi {
        return Err(usage("--epsilon/--delta apply to kappa-lambda-pi only"));
    }
    let (label, mut stem) = match a.alg {
        Algorithm::HPi => {
            let h = a.h.ok_or_else(|| usage("--h is required for h-pi"))?;
            if h == 0 {
                return Err(usage("h must be at least 1"));
            }
            (format!("h-pi (h={h})"), format!("h-pi_h{h}"))
        }
        Algorithm::KappaPi | Algorithm::KappaVi => {
            let k = need("kappa", a.kappa)?;
            check_unit("kappa", k)?;
            let name = if a.alg == Algorithm::KappaPi {
                "kappa-pi"
            } else {
                "kappa-vi"
            };
            (format!("{name} (kappa={k})"), format!("{name}_kappa{k}"))
        }
        Algorithm::KappaLambdaPi => {
            let (k, l) = (need("kappa", a.kappa)?, need("lambda", a.lambda)?);
            check_unit("kappa", k)?;
            check_unit("lambda", l)?;
            if l < k {
                return Err(usage(format!("lambda must be in [kappa, 1] (kappa {k}, lambda {l})")));
            }
            (
                format!("kappa-lambda-pi (kappa={k}, lambda={l})"),
                format!("kappa-lambda-pi_kappa{k}_lambda{l}"),
            )
        }
        Algorithm::LambdaPi => {
            let l = need("lambda", a.lambda)?;
            check_unit("lambda", l)?;
            (format!("lambda-pi (lambda={l})"), format!("lambda-pi_lambda{l}"))
        }
    };
    if noisy {
        let (e, d) = (a.epsilon.unwrap_or(0.0), a.delta.unwrap_or(0.0));
        if !(e >= 0.0 && d >= 0.0 && e.is_finite() && d.is_finite()) {
            return Err(usage("--epsilon and --delta must be finite and non-negative"));
        }
        stem.push_str(&format!("_eps{e}_delta{d}_seed{}", a.seed));
    }
    if a.max_iters == 0 {
        return Err(usage("--max-iters must be at least 1"));
    }
    if !(a.inner_tol > 0.0) || !(a.tol > 0.0) || !(a.outer_tol >= 0.0) {
        return Err(usage("tolerances must be positive (--outer-tol may be 0)"));
    }
    Ok(SolvePlan {
        label,
        file_stem: stem,
        noisy,
    })
}

fn load_source(a: &SolveArgs) -> Result<(TabularMdp, String), CliError> {
    match (&a.mdp, a.gridworld) {
        (Some(path), None) => Ok((load_mdp(path)?, path.display().to_string())),
        (None, Some(n)) => {
            let spec = GridworldSpec::new(n, a.seed);
            Ok((make_gridworld(&spec)?, format!("gridworld n={n} seed={}", a.seed)))
        }
        _ => Err(usage("give exactly one of --mdp FILE or --gridworld N")),
    }
}

pub fn solve_config(a: &SolveArgs) -> Config {
    let opt = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| v.to_string());
    vec![
        ("command".into(), "solve".into()),
        ("alg".into(), format!("{:?}", a.alg)),
        (
            "mdp".into(),
            a.mdp.as_ref().map_or("-".into(), |p| p.display().to_string()),
        ),
        ("gridworld".into(), a.gridworld.map_or("-".into(), |n| n.to_string())),
        ("h".into(), a.h.map_or("-".into(), |h| h.to_string())),
        ("kappa".into(), opt(a.kappa)),
        ("lambda".into(), opt(a.lambda)),
        ("tol".into(), a.tol.to_string()),
        ("backend".into(), format!("{:?}", a.backend)),
        ("inner_tol".into(), a.inner_tol.to_string()),
        ("max_iters".into(), a.max_iters.to_string()),
        ("outer_tol".into(), a.outer_tol.to_string()),
        ("epsilon".into(), opt(a.epsilon)),
        ("delta".into(), opt(a.delta)),
        ("seed".into(), a.seed.to_string()),
        ("out".into(), a.out.display().to_string()),
    ]
}

pub fn cmd_solve(a: &SolveArgs, out: &mut dyn Write) -> CliResult {
    let plan = plan_solve(a)?;
    let (mdp, source) = load_source(a)?;
    let mut cfg = RunConfig {
        max_outer_iters: a.max_iters,
        outer_tol: a.outer_tol,
        backend: match a.backend {
            Backend::Exact => InnerBackend::Exact,
            Backend::Vi => InnerBackend::Vi,
        },
        inner_tol: a.inner_tol,
        seed: a.seed,
        ..RunConfig::default()
    };
    let optimum = if mdp.n_states() * mdp.n_actions() <= ORACLE_PAIR_LIMIT {
        Some(oracle_optimal(&mdp)?.value)
    } else {
        None
    };
    if let Some(v) = &optimum {
        cfg = cfg.with_optimum(v.clone());
    }
    let v0 = msgdp_core::ValueFn::zeros(mdp.n_states());
    let noise = plan
        .noisy
        .then(|| NoiseSpec::new(a.epsilon.unwrap_or(0.0), a.delta.unwrap_or(0.0), a.seed));
    let trace: RunTrace = match a.alg {
        Algorithm::HPi => h_pi(&mdp, a.h.unwrap_or(1), &v0, &cfg)?,
        Algorithm::KappaPi => kappa_pi(&mdp, a.kappa.unwrap_or(0.0), &v0, &cfg)?,
        Algorithm::KappaVi => kappa_vi(&mdp, a.kappa.unwrap_or(0.0), &v0, a.tol, &cfg)?,
        Algorithm::KappaLambdaPi => kappa_lambda_pi(
            &mdp,
            a.kappa.unwrap_or(0.0),
            a.lambda.unwrap_or(1.0),
            &v0,
            &cfg,
            noise.as_ref(),
        )?,
        Algorithm::LambdaPi => lambda_pi(&mdp, a.lambda.unwrap_or(1.0), &v0, &cfg)?,
    };

    let path = a.out.join(format!("{}.csv", plan.file_stem));
    write_file(&path, &trace.to_csv())?;

    let last = trace.last().expect("at least one iteration");
    writeln!(out, "algorithm: {}", plan.label)?;
    writeln!(
        out,
        "mdp: {source} ({} states, {} actions, gamma {})",
        mdp.n_states(),
        mdp.n_actions(),
        mdp.gamma()
    )?;
    writeln!(out, "converged: {}", trace.converged)?;
    writeln!(out, "iterations: {}", trace.n_iterations())?;
    writeln!(out, "total backups: {}", trace.total_backups)?;
    if mdp.n_states() <= 32 {
        writeln!(out, "final value: {}", fmt_values(&last.value))?;
        let pi: Vec<String> = last.policy.iter().map(|a| a.to_string()).collect();
        writeln!(out, "final policy: {}", pi.join(" "))?;
    }
    if let Some(star) = &optimum {
        writeln!(out, "final error vs optimum: {:.3e}", star.sup_distance(&last.value))?;
    }
    writeln!(out, "trace: {}", path.display())?;
    Ok(if trace.converged || plan.noisy {
        EXIT_OK
    } else {
        EXIT_NONCONVERGED
    })
}

// ---------------------------------------------------------------- sweep

fn sweep_params(a: &SweepArgs) -> Result<Vec<f64>, CliError> {
    let (own, default, others) = match a.alg {
        SweepAlg::HPi => (&a.hs, "1:1:20", [&a.kappas, &a.lambdas]),
        SweepAlg::KappaPi => (&a.kappas, "0:0.05:1", [&a.hs, &a.lambdas]),
        SweepAlg::LambdaPi => (&a.lambdas, "0:0.05:1", [&a.hs, &a.kappas]),
    };
    if others.iter().any(|g| g.is_some()) {
        return Err(usage(
            "give only the grid that matches --alg (--hs, --kappas or --lambdas)",
        ));
    }
    let params = parse_grid(own.as_deref().unwrap_or(default)).map_err(usage)?;
    if params.is_empty() {
        return Err(usage("parameter grid is empty"));
    }
    Ok(params)
}

fn sweep_options(a: &SweepArgs) -> SweepOptions {
    SweepOptions {
        inner_tol: a.inner_tol,
        outer_tol: a.outer_tol,
        max_outer_iters: a.max_iters,
        eval: match a.eval {
            EvalMode::Free => EvalCost::Free,
            EvalMode::Iterative => EvalCost::Iterative { tol: a.eval_tol },
        },
        jobs: a.jobs,
        ..SweepOptions::default()
    }
}

pub fn sweep_config(a: &SweepArgs) -> Config {
    let params = sweep_params(a).map(|p| p.iter().map(f64::to_string).collect::<Vec<_>>().join(","));
    vec![
        ("command".into(), "sweep".into()),
        ("alg".into(), format!("{:?}", a.alg)),
        (
            "n".into(),
            a.sizes.iter().map(usize::to_string).collect::<Vec<_>>().join(","),
        ),
        ("params".into(), params.unwrap_or_else(|e| format!("<{e}>"))),
        ("seeds".into(), format!("{}..{}", a.seed, a.seed + a.seeds)),
        ("gamma".into(), a.gamma.to_string()),
        ("inner_tol".into(), a.inner_tol.to_string()),
        ("outer_tol".into(), a.outer_tol.to_string()),
        ("eval".into(), format!("{:?}", a.eval)),
        ("eval_tol".into(), a.eval_tol.to_string()),
        ("max_iters".into(), a.max_iters.to_string()),
        ("jobs".into(), a.jobs.to_string()),
        ("out".into(), a.out.display().to_string()),
    ]
}

fn sweep_alg(a: SweepAlg) -> SweepAlgorithm {
    match a {
        SweepAlg::HPi => SweepAlgorithm::HPi,
        SweepAlg::KappaPi => SweepAlgorithm::KappaPi,
        SweepAlg::LambdaPi => SweepAlgorithm::LambdaPi,
    }
}

pub fn sweep_paths(out: &Path, alg: SweepAlgorithm, sizes: &[usize]) -> (PathBuf, Vec<PathBuf>) {
    let runs = out.join(format!("sweep_{alg}_runs.csv"));
    let aggs = sizes
        .iter()
        .map(|n| out.join(format!("sweep_{alg}_n{n}_aggregate.csv")))
        .collect();
    (runs, aggs)
}

pub fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> CliResult {
    let params = sweep_params(a)?;
    check_gamma(a.gamma)?;
    if a.seeds == 0 {
        return Err(usage("--seeds must be at least 1"));
    }
    let mut sizes = a.sizes.clone();
    sizes.dedup();
    let alg = sweep_alg(a.alg);
    let opts = sweep_options(a);
    let seeds: Vec<u64> = (a.seed..a.seed + a.seeds).collect();

    let mut all = msgdp_core::sim::SweepResult::default();
    let (runs_path, agg_paths) = sweep_paths(&a.out, alg, &sizes);
    for (&n, agg_path) in sizes.iter().zip(&agg_paths) {
        let spec = GridworldSpec {
            gamma: a.gamma,
            ..GridworldSpec::new(n, 0)
        };
        let res = run_sweep(&spec, alg, &params, &seeds, &opts)?;
        write_file(agg_path, &res.aggregate_csv())?;
        write!(out, "{}", res.summary())?;
        if alg == SweepAlgorithm::KappaPi {
            if let Some(best) = res.argmin() {
                writeln!(out, "  effective horizon at argmin: {:.4}", h_eff(best.param, a.gamma))?;
            }
        }
        writeln!(out, "  aggregate: {}", agg_path.display())?;
        all.rows.extend(res.rows);
    }
    write_file(&runs_path, &all.to_csv())?;
    writeln!(out, "runs: {}", runs_path.display())?;

    let converged = all.rows.iter().filter(|r| r.converged).count();
    let share = converged as f64 / all.rows.len() as f64;
    writeln!(out, "converged cells: {converged}/{}", all.rows.len())?;
    Ok(if share >= SWEEP_CONVERGED_SHARE {
        EXIT_OK
    } else {
        EXIT_NONCONVERGED
    })
}

// ---------------------------------------------------------------- bounds

pub fn bounds_config(a: &BoundsArgs) -> Config {
    vec![
        ("command".into(), "bounds".into()),
        ("gamma".into(), a.gamma.to_string()),
        ("kappa".into(), a.kappa.map_or("-".into(), |k| k.to_string())),
        ("h".into(), a.h.map_or("-".into(), |h| h.to_string())),
        ("S".into(), a.n_states.to_string()),
        ("A".into(), a.n_actions.to_string()),
        ("epsilon".into(), a.epsilon.to_string()),
        ("delta".into(), a.delta.to_string()),
    ]
}

pub fn cmd_bounds(a: &BoundsArgs, out: &mut dyn Write) -> CliResult {
    check_gamma(a.gamma)?;
    if let Some(k) = a.kappa {
        check_unit("kappa", k)?;
    }
    if a.h == Some(0) {
        return Err(usage("h must be at least 1"));
    }
    if a.n_states == 0 || a.n_actions == 0 {
        return Err(usage("--S and --A must be at least 1"));
    }
    if !(a.epsilon >= 0.0 && a.delta >= 0.0 && a.epsilon.is_finite() && a.delta.is_finite()) {
        return Err(usage("--epsilon and --delta must be finite and non-negative"));
    }
    let (s, m, g) = (a.n_states, a.n_actions, a.gamma);
    let mut rows: Vec<(String, String)> = Vec::new();
    if let Some(h) = a.h {
        rows.push((
            format!("h-pi iteration bound (h={h})"),
            iteration_bound_h(s, m, g, h).to_string(),
        ));
    }
    let kappa = a.kappa.unwrap_or(0.0);
    if a.kappa.is_some() || a.h.is_none() {
        rows.push((
            format!("kappa-pi iteration bound (kappa={kappa})"),
            iteration_bound_kappa(s, m, g, kappa).to_string(),
        ));
        rows.push(("xi".into(), format!("{:.6}", xi_coefficient(kappa, g))));
        rows.push(("effective horizon".into(), format!("{:.4}", h_eff(kappa, g))));
    }
    if a.kappa.is_some() || a.epsilon > 0.0 || a.delta > 0.0 {
        rows.push((
            format!("noise bound (epsilon={}, delta={})", a.epsilon, a.delta),
            format!("{:.6}", noise_bound(a.epsilon, a.delta, kappa, g)),
        ));
    }
    writeln!(out, "gamma={g} kappa={kappa} S={s} A={m}")?;
    let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    for (name, value) in rows {
        writeln!(out, "{name:<width$}  {value}")?;
    }
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------- gridworld

pub fn gridworld_config(a: &GridworldArgs) -> Config {
    vec![
        ("command".into(), "gridworld".into()),
        ("n".into(), a.size.to_string()),
        ("seed".into(), a.seed.to_string()),
        ("gamma".into(), a.gamma.to_string()),
        (
            "out".into(),
            a.out.as_ref().map_or("-".into(), |p| p.display().to_string()),
        ),
    ]
}

pub fn cmd_gridworld(a: &GridworldArgs, out: &mut dyn Write) -> CliResult {
    check_gamma(a.gamma)?;
    let spec = GridworldSpec {
        gamma: a.gamma,
        ..GridworldSpec::new(a.size, a.seed)
    };
    let text = format_mdp(&make_gridworld(&spec)?);
    match &a.out {
        Some(path) => {
            write_file(path, &text)?;
            writeln!(out, "wrote {}", path.display())?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(EXIT_OK)
}
