//! Decision trees for the discrete function evaluation problem.
//!
//! An [`Instance`] describes a set of objects partitioned into classes, a
//! complete set of tests with outcome-dependent costs, and a prior over the
//! objects. A [`DecisionTree`] identifies the class of an unknown object by
//! applying tests adaptively; its quality is measured by the worst and the
//! expected cost of the root-to-leaf paths.
//!
//! The crate provides:
//!
//! - [`model`]: instances, trees, cost evaluation, pair counting, restriction.
//! - [`greedy`]: the pair-dividing greedy construction for worst-case cost,
//!   including its per-node lower bound.
//! - [`combine`]: splicing an expected-cost tree with a worst-cost tree to get
//!   a tree that is good under both measures.
//! - [`oracle`]: exact dynamic programs for the optimal worst cost, the optimal
//!   expected cost, the budgeted expected cost and the trade-off frontier.
//! - [`harness`]: random instance generation, JSON files, DOT export and the
//!   bound-checking experiment runner used by the `dfep` binary.
//!
//! All costs and probabilities are exact rationals.

pub mod combine;
pub mod error;
pub mod greedy;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod rational;

pub use error::{Error, Result};
pub use model::{
    ClassId, CostReport, DecisionTree, Instance, InstanceViolation, ObjectId, ObjectSet, Outcome, Test, TestId,
    TreeViolation,
};
pub use rational::Rational;
