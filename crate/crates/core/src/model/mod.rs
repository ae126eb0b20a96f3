//! Instances, decision trees and the quantities measured on them.

mod cost;
mod instance;
mod pairs;
mod restrict;
mod tree;

pub use cost::{evaluate, CostReport};
pub use instance::{validate_instance, Instance, InstanceViolation, Test};
pub use pairs::{pair_count, partition, separated_pairs};
pub use restrict::restrict_tree;
pub use tree::{validate_tree, DecisionTree, NodePath, TreeViolation};

use std::collections::BTreeSet;

pub type ObjectId = usize;
pub type TestId = usize;
pub type ClassId = usize;
/// Test outcomes are `1..=num_outcomes`.
pub type Outcome = u32;
pub type ObjectSet = BTreeSet<ObjectId>;
