//! Certified value approximation for Markov chains and Markov decision
//! processes with weighted-reachability and stochastic-shortest-path
//! objectives.
//!
//! The crate provides three solver families over one explicit-state model
//! type:
//!
//! - plain value iteration ([`vi::value_iteration`]), fast but with an
//!   uncertified stopping rule;
//! - interval iteration ([`vi::interval_iteration`]), simultaneous lower and
//!   upper iteration with a certified two-sided interval;
//! - guessing value iteration ([`guess::pick_verify`] and, for the
//!   chain-only recursive variant, [`guess::solve_mc`]), which accelerates
//!   interval iteration by guessing state values, verifying each guess
//!   through one-sided Bellman tests on the original model, and recursing
//!   into reduced models where the guessed state is frozen as a target.
//!
//! Supporting machinery: graph preprocessing (BFS levels, qualitative
//! reachability, end-component collapsing, guess-set selection) in
//! [`graph`], an exact oracle (extended-precision linear solves and
//! positional-strategy enumeration) in [`oracle`], hard-instance and random
//! generators in [`generators`], an explicit model file format in
//! [`explicit`], and a deterministic benchmark runner in [`bench`].
//!
//! Start with the runnable examples:
//!
//! ```text
//! cargo run --example solve_reachability
//! cargo run --example interval_iteration
//! cargo run --example guessing_vs_interval
//! cargo run --example exact_oracle
//! cargo run --example preprocessing
//! cargo run --example mark_to_guess
//! cargo run --example model_files
//! cargo run --example benchmark
//! ```
//!
//! or with the `guessvi` binary: `guessvi solve --model m.gvi --algo gvi
//! --epsilon 1e-6`.

pub mod bench;
mod dd;
pub mod explicit;
pub mod generators;
pub mod graph;
pub mod guess;
pub mod model;
pub mod oracle;
pub mod solve;
pub mod vi;

pub use model::{Model, ModelKind, Objective, ObjectiveKind, StateId, StateKind, Strategy};
pub use solve::{solve, Algo, SolveOptions};
pub use vi::{Bounds, SolveReport};
