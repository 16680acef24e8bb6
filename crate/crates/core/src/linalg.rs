//! Direct solves of `(I - d P^pi) x = b` for a fixed deterministic policy.
//!
//! Dense LU with partial pivoting is the general path. When every row of
//! `P^pi` is one-hot the chain is a functional graph and the system is solved
//! exactly by walking each path to its cycle. Both paths are checked against
//! the residual tolerance afterwards.

use nalgebra::{DMatrix, DVector};

use crate::error::{MdpError, Result};
use crate::mdp::{sup_norm, DetPolicy, TabularMdp};

/// Maximum number of iterative-refinement passes on the dense path.
const MAX_REFINEMENTS: usize = 3;

pub(crate) fn residual_tolerance(rhs: &[f64]) -> f64 {
    1e-10 * (1.0 + sup_norm(rhs))
}

/// `x - d P^pi x - rhs`.
pub(crate) fn residual(mdp: &TabularMdp, pi: &DetPolicy, discount: f64, rhs: &[f64], x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|s| x[s] - discount * mdp.expected(s, pi[s], x) - rhs[s])
        .collect()
}

/// Solves `(I - discount * P^pi) x = rhs`, with `discount` in `[0, 1)`.
pub fn solve_policy_system(mdp: &TabularMdp, pi: &DetPolicy, rhs: &[f64], discount: f64) -> Result<Vec<f64>> {
    mdp.check_policy(pi)?;
    if rhs.len() != mdp.n_states() {
        return Err(MdpError::Shape("right-hand side has the wrong length".into()));
    }
    if !(0.0..1.0).contains(&discount) {
        return Err(MdpError::InvalidParam(format!("discount {discount} outside [0, 1)")));
    }
    if discount == 0.0 {
        return Ok(rhs.to_vec());
    }
    let tol = residual_tolerance(rhs);
    let x = match functional_successors(mdp, pi) {
        Some(next) => solve_functional(&next, rhs, discount),
        None => return solve_dense(mdp, pi, rhs, discount, tol),
    };
    let res = sup_norm(&residual(mdp, pi, discount, rhs, &x));
    if res > tol || !res.is_finite() {
        // Unusually long cycles can lose precision in the geometric sum.
        return solve_dense(mdp, pi, rhs, discount, tol);
    }
    Ok(x)
}

fn functional_successors(mdp: &TabularMdp, pi: &DetPolicy) -> Option<Vec<usize>> {
    pi.iter()
        .enumerate()
        .map(|(s, &a)| match mdp.successors(s, a) {
            [(next, p)] if *p == 1.0 => Some(*next),
            _ => None,
        })
        .collect()
}

fn solve_functional(next: &[usize], rhs: &[f64], d: f64) -> Vec<f64> {
    const UNSEEN: u8 = 0;
    const ON_PATH: u8 = 1;
    const DONE: u8 = 2;
    let n = next.len();
    let mut x = vec![0.0; n];
    let mut mark = vec![UNSEEN; n];
    let mut path = Vec::new();
    for start in 0..n {
        if mark[start] != UNSEEN {
            continue;
        }
        path.clear();
        let mut s = start;
        while mark[s] == UNSEEN {
            mark[s] = ON_PATH;
            path.push(s);
            s = next[s];
        }
        let mut tail_len = path.len();
        if mark[s] == ON_PATH {
            // s closes a cycle that starts at its position in the path.
            let begin = path.iter().position(|&p| p == s).unwrap();
            let cycle = &path[begin..];
            let mut acc = 0.0;
            let mut w = 1.0;
            for &c in cycle {
                acc += w * rhs[c];
                w *= d;
            }
            x[cycle[0]] = acc / (1.0 - w);
            for i in (1..cycle.len()).rev() {
                let c = cycle[i];
                let succ = if i + 1 == cycle.len() { cycle[0] } else { cycle[i + 1] };
                x[c] = rhs[c] + d * x[succ];
            }
            for &c in cycle {
                mark[c] = DONE;
            }
            tail_len = begin;
        }
        for &p in path[..tail_len].iter().rev() {
            x[p] = rhs[p] + d * x[next[p]];
            mark[p] = DONE;
        }
    }
    x
}

fn solve_dense(mdp: &TabularMdp, pi: &DetPolicy, rhs: &[f64], d: f64, tol: f64) -> Result<Vec<f64>> {
    let n = mdp.n_states();
    let mut a = DMatrix::<f64>::identity(n, n);
    for (s, &act) in pi.iter().enumerate() {
        for &(next, p) in mdp.successors(s, act) {
            a[(s, next)] -= d * p;
        }
    }
    let lu = a.lu();
    let b = DVector::from_column_slice(rhs);
    let mut x = lu.solve(&b).ok_or(MdpError::SolveFailed {
        residual: f64::INFINITY,
        tolerance: tol,
    })?;
    let mut res = residual(mdp, pi, d, rhs, x.as_slice());
    let mut norm = sup_norm(&res);
    for _ in 0..MAX_REFINEMENTS {
        if norm <= tol {
            break;
        }
        // A x = b, r = A x - b, so the correction solves A e = r.
        let r = DVector::from_vec(res);
        let Some(e) = lu.solve(&r) else { break };
        x -= e;
        res = residual(mdp, pi, d, rhs, x.as_slice());
        norm = sup_norm(&res);
    }
    if !(norm <= tol) {
        return Err(MdpError::SolveFailed {
            residual: norm,
            tolerance: tol,
        });
    }
    Ok(x.as_slice().to_vec())
}
