//! Randomized parent search for causal bandits whose graph is unknown.
//!
//! The crate bundles graph primitives and generators, categorical SCMs with
//! a scalar reward, the parent search in oracle, statistical, permutation and
//! multi-parent forms, exact calculators for its expected cost together with
//! brute-force cross-checks, a UCB-based regret harness, and a deterministic
//! experiment runner.

pub mod bandit;
pub mod dag;
pub mod edgelist;
mod error;
pub mod exec;
pub mod gen;
pub mod harness;
pub mod nodeset;
pub mod rng;
pub mod scm;
pub mod search;
pub mod theory;

pub use dag::{Dag, ParentSpec};
pub use error::{Error, Result};
pub use nodeset::NodeSet;
