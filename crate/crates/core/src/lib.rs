//! Constrained, dynamic multi-objective optimization for ranking
//! parameter search.
//!
//! The crate covers Pareto machinery (dominance, non-dominated sorting,
//! crowding), variation operators, problem definitions with constraints and
//! time-varying schedules, a KNN surrogate of article engagement, the
//! NSGA-II variant with hypermutation, a grid-search baseline, and the
//! quality metrics used to compare them.

pub mod algorithms;
pub mod cli;
pub mod error;
pub mod metrics;
pub mod operators;
pub mod pareto;
pub mod problems;
pub mod rng;
pub mod surrogate;
pub mod types;

pub use error::{Error, Result};
pub use types::{canonicalize, DesignVector, ObjectiveSense, ObjectiveVector, Solution};
