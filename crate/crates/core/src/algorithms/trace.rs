use std::fmt::Write as _;

use crate::mdp::{DetPolicy, ValueFn};

pub const TRACE_CSV_HEADER: &str = "k,error_inf,inner_sweeps,backups,value_change_inf";

/// One outer iteration: improvement to `policy`, then evaluation to `value`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterRecord {
    /// 1-based iteration index.
    pub k: usize,
    pub policy: DetPolicy,
    pub value: ValueFn,
    /// `||v* - v^{policy}||_inf`, when errors are recorded.
    pub error_inf: Option<f64>,
    pub inner_sweeps: usize,
    pub backups: usize,
    /// `||value - previous value||_inf`.
    pub value_change_inf: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunTrace {
    pub iterations: Vec<IterRecord>,
    pub converged: bool,
    pub total_backups: usize,
}

impl RunTrace {
    pub(crate) fn push(&mut self, rec: IterRecord) {
        self.total_backups += rec.backups;
        self.iterations.push(rec);
    }

    pub fn n_iterations(&self) -> usize {
        self.iterations.len()
    }

    pub fn last(&self) -> Option<&IterRecord> {
        self.iterations.last()
    }

    pub fn final_value(&self) -> Option<&ValueFn> {
        self.last().map(|r| &r.value)
    }

    pub fn final_policy(&self) -> Option<&DetPolicy> {
        self.last().map(|r| &r.policy)
    }

    pub fn values(&self) -> impl Iterator<Item = &ValueFn> {
        self.iterations.iter().map(|r| &r.value)
    }

    pub fn policies(&self) -> impl Iterator<Item = &DetPolicy> {
        self.iterations.iter().map(|r| &r.policy)
    }

    /// Iterations up to the first record of the final run of identical
    /// policies: the step that reached the limit policy. Later records only
    /// confirm it. Equals `n_iterations()` for unconverged traces.
    pub fn improvement_steps(&self) -> usize {
        if !self.converged {
            return self.n_iterations();
        }
        let Some(last) = self.final_policy() else {
            return 0;
        };
        let tail = self.iterations.iter().rev().take_while(|r| &r.policy == last).count();
        self.n_iterations() - tail + 1
    }

    pub fn errors(&self) -> Vec<Option<f64>> {
        self.iterations.iter().map(|r| r.error_inf).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(TRACE_CSV_HEADER);
        out.push('\n');
        for r in &self.iterations {
            let err = r.error_inf.map(|e| format!("{e:e}")).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{:e}",
                r.k, err, r.inner_sweeps, r.backups, r.value_change_inf
            )
            .unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut trace = RunTrace::default();
        trace.push(IterRecord {
            k: 1,
            policy: DetPolicy::new(vec![0]),
            value: ValueFn::new(vec![1.0]),
            error_inf: Some(0.5),
            inner_sweeps: 2,
            backups: 4,
            value_change_inf: 1.0,
        });
        trace.push(IterRecord {
            k: 2,
            policy: DetPolicy::new(vec![0]),
            value: ValueFn::new(vec![1.0]),
            error_inf: None,
            inner_sweeps: 1,
            backups: 2,
            value_change_inf: 0.0,
        });
        assert_eq!(trace.total_backups, 6);
        assert_eq!(
            trace.to_csv(),
            "k,error_inf,inner_sweeps,backups,value_change_inf\n1,5e-1,2,4,1e0\n2,,1,2,0e0\n"
        );
    }

    #[test]
    fn improvement_steps_skip_confirmations() {
        let rec = |k, a| IterRecord {
            k,
            policy: DetPolicy::new(vec![a]),
            value: ValueFn::zeros(1),
            error_inf: None,
            inner_sweeps: 0,
            backups: 0,
            value_change_inf: 0.0,
        };
        let mut trace = RunTrace::default();
        for (k, a) in [(1, 0), (2, 1), (3, 1), (4, 1)] {
            trace.push(rec(k, a));
        }
        assert_eq!(trace.improvement_steps(), 4);
        trace.converged = true;
        assert_eq!(trace.improvement_steps(), 2);
    }
}
