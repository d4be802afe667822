//! Change detection for phase-type change times.
//!
//! A Markov chain starts in transient states and is eventually absorbed into
//! state 1; the absorption time is phase-type distributed. The crate provides
//! the belief filters, stochastic orders used to check structural
//! assumptions, grid value iteration for several stopping-cost families,
//! linear threshold policies tuned by stochastic approximation, a simulator
//! and a command-line front end.

pub mod cli;
pub mod dp;
pub mod error;
pub mod filters;
pub mod model;
pub mod orders;
pub mod policy;
pub mod sim;

pub use error::{Error, Result};
