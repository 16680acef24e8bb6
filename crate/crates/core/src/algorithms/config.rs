use crate::error::{MdpError, Result};
use crate::mdp::ValueFn;
use crate::operators::{InnerBackend, KappaParams, DEFAULT_INNER_MAX_SWEEPS, DEFAULT_INNER_TOL};

/// Outer-loop settings shared by every driver.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub max_outer_iters: usize,
    /// Stop once an iteration moves the value by less than this. `0` means
    /// exact stopping (repeated policy, or change below `1e-12`).
    pub outer_tol: f64,
    pub backend: InnerBackend,
    pub inner_tol: f64,
    pub inner_max_sweeps: usize,
    /// Record `||v* - v^{pi_k}||` per iteration.
    pub record_errors: bool,
    /// Reuse a known optimum instead of calling the oracle.
    pub known_optimum: Option<ValueFn>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            max_outer_iters: 10_000,
            outer_tol: 0.0,
            backend: InnerBackend::Exact,
            inner_tol: DEFAULT_INNER_TOL,
            inner_max_sweeps: DEFAULT_INNER_MAX_SWEEPS,
            record_errors: false,
            known_optimum: None,
            seed: 0,
        }
    }
}

/// Floor under which a value change counts as "no change".
pub(crate) const EXACT_STOP_TOL: f64 = 1e-12;

impl RunConfig {
    pub fn with_errors(mut self) -> Self {
        self.record_errors = true;
        self
    }

    pub fn with_optimum(mut self, optimum: ValueFn) -> Self {
        self.record_errors = true;
        self.known_optimum = Some(optimum);
        self
    }

    pub fn kappa_params(&self, kappa: f64) -> KappaParams {
        KappaParams {
            kappa,
            inner_tol: self.inner_tol,
            inner_max_sweeps: self.inner_max_sweeps,
            backend: self.backend,
        }
    }

    pub(crate) fn stop_tol(&self) -> f64 {
        self.outer_tol.max(EXACT_STOP_TOL)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_outer_iters == 0 {
            return Err(MdpError::InvalidParam("max_outer_iters must be at least 1".into()));
        }
        if !(self.outer_tol >= 0.0) {
            return Err(MdpError::InvalidParam("outer_tol must be non-negative".into()));
        }
        Ok(())
    }
}
