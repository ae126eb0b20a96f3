use std::collections::BTreeMap;

use super::{DecisionTree, Instance, ObjectSet};
use crate::error::{Error, Result};

/// Restricts `tree` to the objects in `keep`.
///
/// Excluded objects are dropped from the leaves, emptied subtrees vanish, an
/// internal node left with one child is replaced by that child, and any
/// subtree whose remaining objects share a class becomes a leaf. No kept
/// object's path cost increases.
pub fn restrict_tree(tree: &DecisionTree, keep: &ObjectSet, inst: &Instance) -> Result<DecisionTree> {
    if keep.is_empty() || !keep.is_subset(&tree.objects()) {
        return Err(Error::BadRestriction);
    }
    inst.check_objects(keep)?;
    Ok(restrict(tree, keep, inst).expect("keep is a nonempty subset of the tree's objects"))
}

fn restrict(node: &DecisionTree, keep: &ObjectSet, inst: &Instance) -> Option<DecisionTree> {
    match node {
        DecisionTree::Leaf { class, objects } => {
            let kept: ObjectSet = objects.intersection(keep).copied().collect();
            (!kept.is_empty()).then(|| DecisionTree::leaf(*class, kept))
        }
        DecisionTree::Internal { test, children } => {
            let mut kept: BTreeMap<_, _> = children
                .iter()
                .filter_map(|(&outcome, child)| Some((outcome, restrict(child, keep, inst)?)))
                .collect();
            match kept.len() {
                0 => None,
                1 => kept.pop_first().map(|(_, child)| child),
                _ => {
                    let tree = DecisionTree::internal(*test, kept);
                    let objects = tree.objects();
                    if inst.is_homogeneous(&objects) {
                        let class = inst.class_of(*objects.first()?);
                        Some(DecisionTree::leaf(class, objects))
                    } else {
                        Some(tree)
                    }
                }
            }
        }
    }
}
