use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use msgdp_core::mdp::fixtures::two_chain;
use msgdp_core::mdp::io::format_mdp;

fn msgdp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msgdp"))
        .args(args)
        .env_remove("MSGDP_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn chain_file(dir: &Path) -> String {
    let path = dir.join("chain2.mdp");
    fs::write(&path, format_mdp(&two_chain())).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn solve_two_chain_reaches_its_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let mdp = chain_file(dir.path());
    let out = dir.path().to_str().unwrap();
    let o = msgdp(&[
        "solve", "--alg", "kappa-pi", "--kappa", "0.9", "--mdp", &mdp, "--out", out,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("converged: true"), "{text}");
    assert!(text.contains("final value: 1.000000 2.000000"), "{text}");
    let trace = fs::read_to_string(dir.path().join("kappa-pi_kappa0.9.csv")).unwrap();
    assert!(trace.starts_with("k,error_inf,inner_sweeps,backups,value_change_inf\n"));

    let o = msgdp(&["solve", "--alg", "h-pi", "--h", "1", "--mdp", &mdp, "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("final value: 1.000000 2.000000"));
}

#[test]
fn lambda_below_kappa_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let mdp = chain_file(dir.path());
    let o = msgdp(&[
        "solve",
        "--alg",
        "kappa-lambda-pi",
        "--kappa",
        "0.5",
        "--lambda",
        "0.3",
        "--mdp",
        &mdp,
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("lambda must be in [kappa, 1]"), "{}", stderr(&o));
}

#[test]
fn malformed_mdp_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.mdp");
    fs::write(&path, "mdp 2 1 0.9\n0 0 1.0 0.5 0.4\n1 0 0.0 0 1\n").unwrap();
    let o = msgdp(&["solve", "--alg", "h-pi", "--h", "1", "--mdp", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn bounds_examples() {
    let o = msgdp(&["bounds", "--gamma", "0.97", "--kappa", "0.82"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("0.853372"), "{text}");
    assert!(text.contains("4.8876"), "{text}");

    let text = stdout(&msgdp(&[
        "bounds", "--gamma", "0.5", "--h", "1", "--S", "2", "--A", "2",
    ]));
    let line = text.lines().find(|l| l.starts_with("h-pi iteration bound")).unwrap();
    assert_eq!(line.split_whitespace().last(), Some("2"));

    let text = stdout(&msgdp(&[
        "bounds",
        "--kappa",
        "1",
        "--epsilon",
        "0.1",
        "--delta",
        "0.2",
    ]));
    let line = text.lines().find(|l| l.starts_with("noise bound")).unwrap();
    assert_eq!(line.split_whitespace().last(), Some("0.200000"));

    assert_eq!(msgdp(&["bounds", "--gamma", "1.5"]).status.code(), Some(1));
}

#[test]
fn sweep_writes_one_aggregate_row_per_parameter() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = msgdp(&[
        "sweep", "--alg", "kappa-pi", "--n", "5", "--kappas", "0:0.05:1", "--seeds", "2", "--out", out,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("argmin"));
    let agg = fs::read_to_string(dir.path().join("sweep_kappa-pi_n5_aggregate.csv")).unwrap();
    assert_eq!(agg.lines().count(), 1 + 21);
    let runs = fs::read_to_string(dir.path().join("sweep_kappa-pi_runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 1 + 21 * 2);
}

#[test]
fn sweep_rejects_a_grid_for_another_algorithm() {
    let o = msgdp(&["sweep", "--alg", "h-pi", "--n", "5", "--kappas", "0:0.5:1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_filters_and_lists() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = msgdp(&["verify", "--only", "h-pi-contraction", "--mdps", "10", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = fs::read_to_string(dir.path().join("verify_report.csv")).unwrap();
    assert_eq!(report.lines().count(), 2);
    assert!(report.lines().nth(1).unwrap().starts_with("h-pi-contraction,10,0,"));

    let o = msgdp(&["verify", "--only", "no-such-check"]);
    assert_eq!(o.status.code(), Some(1));

    let listed = stdout(&msgdp(&["verify", "--list"]));
    assert!(listed.lines().count() > 20);
}

#[test]
fn verify_report_is_byte_identical_for_a_seed() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let o = msgdp(&[
            "verify",
            "--seed",
            "42",
            "--mdps",
            "15",
            "--out",
            d.path().to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    let read = |d: &tempfile::TempDir| fs::read(d.path().join("verify_report.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn seed_comes_from_the_environment() {
    let global_flag = Command::new(env!("CARGO_BIN_EXE_msgdp"))
        .args(["--dump-config", "bounds"])
        .output()
        .unwrap();
    assert!(stdout(&global_flag).contains("command=bounds"));

    let o = Command::new(env!("CARGO_BIN_EXE_msgdp"))
        .args(["gridworld", "--n", "4", "--dump-config"])
        .env("MSGDP_SEED", "17")
        .output()
        .unwrap();
    let text = stdout(&o);
    assert!(text.contains("seed=17"), "{text}");
    let explicit = stdout(&msgdp(&["gridworld", "--n", "4", "--seed", "17"]));
    assert!(text.ends_with(&explicit));
}

#[test]
fn dump_config_lists_resolved_settings() {
    let text = stdout(&msgdp(&[
        "--dump-config",
        "bounds",
        "--gamma",
        "0.97",
        "--kappa",
        "0.82",
    ]));
    let keys: Vec<&str> = text
        .lines()
        .take_while(|l| l.contains('='))
        .map(|l| l.split('=').next().unwrap())
        .collect();
    assert!(keys.contains(&"gamma") && keys.contains(&"kappa"), "{text}");
}
