//! Tabular dynamic programming with multiple-step greedy policy improvement.
//!
//! The crate provides exact one-step Bellman machinery on finite MDPs
//! ([`mdp`]), the h-greedy and kappa-greedy operator family ([`operators`]),
//! the h-PI / kappa-PI / kappa-VI / kappa-lambda-PI drivers with their
//! iteration and error bounds ([`algorithms`]), and a call-counting
//! grid-world benchmark ([`sim`]).

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod error;
pub mod linalg;
pub mod mdp;
pub mod operators;
pub mod sim;

pub use error::{MdpError, Result};
pub use mdp::{DetPolicy, QFn, TabularMdp, ValueFn};
