//! Policy-iteration family drivers and their guarantees.
//!
//! * [`h_pi`]: h-greedy improvement, exact evaluation.
//! * [`kappa_pi`]: kappa-greedy improvement, exact evaluation.
//! * [`kappa_vi`]: repeated application of `T_kappa`.
//! * [`kappa_lambda_pi`]: kappa-greedy improvement with `T_lambda^pi`
//!   evaluation, optionally with bounded noise in both steps.
//!
//! [`bounds`] holds the closed-form iteration counts and asymptotic error
//! bound these runs are checked against.

pub mod bounds;
mod config;
mod drivers;
mod noise;
mod trace;

pub use bounds::{iteration_bound_h, iteration_bound_kappa, noise_bound, noise_bound_expanded};
pub use config::RunConfig;
pub use drivers::{h_pi, kappa_lambda_pi, kappa_pi, kappa_vi, lambda_pi};
pub use noise::{noisy_kappa_greedy, NoiseSpec};
pub use trace::{IterRecord, RunTrace, TRACE_CSV_HEADER};
