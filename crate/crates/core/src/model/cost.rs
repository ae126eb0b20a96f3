use std::collections::BTreeMap;

use super::{DecisionTree, Instance, ObjectId};
use crate::error::{Error, Result};
use crate::rational::{zero, Rational};

/// Path costs of a tree on an instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostReport {
    pub worst: Rational,
    pub expected: Rational,
    pub per_object: BTreeMap<ObjectId, Rational>,
}

/// Sums the branch costs `c^i(t)` along every root-to-leaf path.
///
/// A single leaf costs nothing. Fails if the tree mentions a test, outcome or
/// object the instance does not have, or holds an object in two leaves.
pub fn evaluate(tree: &DecisionTree, inst: &Instance) -> Result<CostReport> {
    let mut per_object = BTreeMap::new();
    walk(tree, inst, zero(), &mut per_object)?;
    let worst = per_object.values().max().cloned().unwrap_or_else(zero);
    let expected = per_object.iter().map(|(&s, cost)| cost * inst.prior(s)).sum();
    Ok(CostReport {
        worst,
        expected,
        per_object,
    })
}

fn walk(node: &DecisionTree, inst: &Instance, cost: Rational, out: &mut BTreeMap<ObjectId, Rational>) -> Result<()> {
    match node {
        DecisionTree::Leaf { objects, .. } => {
            for &s in objects {
                if !inst.contains(s) {
                    return Err(Error::UnknownObject(s));
                }
                if out.insert(s, cost.clone()).is_some() {
                    return Err(Error::DuplicateObject(s));
                }
            }
            Ok(())
        }
        DecisionTree::Internal { test, children } => {
            for (&outcome, child) in children {
                let edge = inst.checked_cost(*test, outcome)?;
                walk(child, inst, &cost + edge, out)?;
            }
            Ok(())
        }
    }
}
