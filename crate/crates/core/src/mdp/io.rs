//! Plain-text MDP files.
//!
//! ```text
//! mdp <n_states> <n_actions> <gamma>
//! <s> <a> <r(s,a)> <p(0|s,a)> ... <p(n_states-1|s,a)>
//! ```
//!
//! One line per (s, a) pair in any order. Blank lines and lines starting
//! with `#` are ignored.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{MdpError, Result};

use super::{TabularMdp, ROW_SUM_TOL};

/// Loader tolerance on each row sum.
pub const FILE_ROW_SUM_TOL: f64 = 1e-9;

pub fn parse_mdp(text: &str) -> Result<TabularMdp> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or(MdpError::Parse {
        line: 1,
        msg: "empty file, expected `mdp <n_states> <n_actions> <gamma>`".into(),
    })?;
    let err = |line: usize, msg: String| MdpError::Parse { line, msg };
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != "mdp" {
        return Err(err(
            hline,
            "expected header `mdp <n_states> <n_actions> <gamma>`".into(),
        ));
    }
    let n_states: usize = fields[1]
        .parse()
        .map_err(|_| err(hline, format!("bad state count `{}`", fields[1])))?;
    let n_actions: usize = fields[2]
        .parse()
        .map_err(|_| err(hline, format!("bad action count `{}`", fields[2])))?;
    let gamma: f64 = fields[3]
        .parse()
        .map_err(|_| err(hline, format!("bad discount `{}`", fields[3])))?;
    if n_states == 0 || n_actions == 0 {
        return Err(err(hline, "state and action counts must be positive".into()));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(err(hline, format!("discount {gamma} must lie strictly inside (0, 1)")));
    }

    let mut rows: Vec<Option<Vec<(usize, f64)>>> = vec![None; n_states * n_actions];
    let mut reward = vec![0.0; n_states * n_actions];
    let mut last_line = hline;
    for (line, text) in lines {
        last_line = line;
        let toks: Vec<&str> = text.split_whitespace().collect();
        if toks.len() != 3 + n_states {
            return Err(err(
                line,
                format!("expected {} fields, found {}", 3 + n_states, toks.len()),
            ));
        }
        let s: usize = toks[0]
            .parse()
            .map_err(|_| err(line, format!("bad state `{}`", toks[0])))?;
        let a: usize = toks[1]
            .parse()
            .map_err(|_| err(line, format!("bad action `{}`", toks[1])))?;
        if s >= n_states || a >= n_actions {
            return Err(err(line, format!("pair ({s}, {a}) out of range")));
        }
        let idx = s * n_actions + a;
        if rows[idx].is_some() {
            return Err(err(line, format!("duplicate pair ({s}, {a})")));
        }
        let r: f64 = toks[2]
            .parse()
            .map_err(|_| err(line, format!("bad reward `{}`", toks[2])))?;
        if !r.is_finite() {
            return Err(err(line, "reward must be finite".into()));
        }
        let mut probs = Vec::with_capacity(n_states);
        for (next, tok) in toks[3..].iter().enumerate() {
            let p: f64 = tok.parse().map_err(|_| err(line, format!("bad probability `{tok}`")))?;
            if !p.is_finite() || p < 0.0 {
                return Err(err(line, format!("probability `{tok}` must be non-negative")));
            }
            if p > 0.0 {
                probs.push((next, p));
            }
        }
        let sum: f64 = probs.iter().map(|x| x.1).sum();
        if (sum - 1.0).abs() > FILE_ROW_SUM_TOL {
            return Err(err(line, format!("probabilities sum to {sum}, expected 1")));
        }
        // Rows already stochastic to model precision are kept bit-exact.
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            for p in &mut probs {
                p.1 /= sum;
            }
        }
        reward[idx] = r;
        rows[idx] = Some(probs);
    }

    let rows = rows
        .into_iter()
        .enumerate()
        .map(|(idx, row)| {
            row.ok_or_else(|| {
                err(
                    last_line,
                    format!("missing line for pair ({}, {})", idx / n_actions, idx % n_actions),
                )
            })
        })
        .collect::<Result<Vec<_>>>()?;
    TabularMdp::from_rows(n_states, n_actions, rows, reward, gamma)
}

/// Serialises in the same format; floats use the shortest round-trip form.
pub fn format_mdp(mdp: &TabularMdp) -> String {
    let n = mdp.n_states();
    let mut out = String::new();
    writeln!(out, "mdp {} {} {}", n, mdp.n_actions(), mdp.gamma()).unwrap();
    let mut dense = vec![0.0; n];
    for s in 0..n {
        for a in 0..mdp.n_actions() {
            dense.iter_mut().for_each(|p| *p = 0.0);
            for &(next, p) in mdp.successors(s, a) {
                dense[next] += p;
            }
            write!(out, "{} {} {}", s, a, mdp.reward(s, a)).unwrap();
            for p in &dense {
                write!(out, " {p}").unwrap();
            }
            out.push('\n');
        }
    }
    out
}

pub fn load_mdp(path: impl AsRef<Path>) -> Result<TabularMdp> {
    parse_mdp(&std::fs::read_to_string(path)?)
}

pub fn save_mdp(mdp: &TabularMdp, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_mdp(mdp))?;
    Ok(())
}
