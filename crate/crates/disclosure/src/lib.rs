//! Optimal timed information disclosure against a Bayesian
//! quickest-change detector.
//!
//! A principal privately watches a two-state Markov chain that starts
//! good and may fall into an absorbing bad state. A detector, who sees
//! only the principal's recommendations, wants to declare the jump as
//! accurately as possible: a false alarm costs her one unit, every period
//! of delay costs `c`. The principal commits upfront to a recommendation
//! policy and earns one unit for every period the detector stays silent.
//!
//! This crate computes the principal's optimal commitment — silence up to
//! a threshold period, a single randomized period, truthful disclosure
//! after — together with the detector's dynamic-programming best
//! response, closed-form benchmark mechanisms, exhaustive certification
//! oracles, a reproducible Monte-Carlo simulator, and the parameter-sweep
//! experiments built on top. See the crate examples for a runnable tour
//! of each capability.

pub mod benchmarks;
pub mod detector;
pub mod error;
pub mod experiments;
pub mod mechanisms;
pub mod model;
pub mod oracle;
pub mod report;
pub mod sim;
pub mod solver;

pub use error::{Error, Result};
pub use mechanisms::{SilentPathPolicy, TbpMechanism};
pub use model::ModelParams;
pub use solver::{solve, solve_fast, SolveResult};
