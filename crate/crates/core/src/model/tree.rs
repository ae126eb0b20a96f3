use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{partition, ClassId, Instance, ObjectSet, Outcome, TestId};

/// Outcomes followed from the root to reach a node. The root is `[]`.
pub type NodePath = Vec<Outcome>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecisionTree {
    Leaf {
        class: ClassId,
        objects: ObjectSet,
    },
    Internal {
        test: TestId,
        children: BTreeMap<Outcome, DecisionTree>,
    },
}

impl DecisionTree {
    pub fn leaf(class: ClassId, objects: ObjectSet) -> Self {
        DecisionTree::Leaf { class, objects }
    }

    pub fn internal(test: TestId, children: BTreeMap<Outcome, DecisionTree>) -> Self {
        DecisionTree::Internal { test, children }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, DecisionTree::Leaf { .. })
    }

    /// Union of the objects stored in the leaves below this node.
    pub fn objects(&self) -> ObjectSet {
        let mut out = ObjectSet::new();
        self.collect_objects(&mut out);
        out
    }

    fn collect_objects(&self, out: &mut ObjectSet) {
        match self {
            DecisionTree::Leaf { objects, .. } => out.extend(objects.iter().copied()),
            DecisionTree::Internal { children, .. } => {
                for child in children.values() {
                    child.collect_objects(out);
                }
            }
        }
    }

    /// Total number of object slots over all leaves (counts repeats).
    pub fn leaf_object_count(&self) -> usize {
        match self {
            DecisionTree::Leaf { objects, .. } => objects.len(),
            DecisionTree::Internal { children, .. } => children.values().map(DecisionTree::leaf_object_count).sum(),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            DecisionTree::Leaf { .. } => 1,
            DecisionTree::Internal { children, .. } => {
                1 + children.values().map(DecisionTree::node_count).sum::<usize>()
            }
        }
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        match self {
            DecisionTree::Leaf { .. } => 0,
            DecisionTree::Internal { children, .. } => {
                1 + children.values().map(DecisionTree::height).max().unwrap_or(0)
            }
        }
    }

    pub fn node(&self, path: &[Outcome]) -> Option<&DecisionTree> {
        match path.split_first() {
            None => Some(self),
            Some((first, rest)) => match self {
                DecisionTree::Internal { children, .. } => children.get(first)?.node(rest),
                DecisionTree::Leaf { .. } => None,
            },
        }
    }

    pub fn node_mut(&mut self, path: &[Outcome]) -> Option<&mut DecisionTree> {
        match path.split_first() {
            None => Some(self),
            Some((first, rest)) => match self {
                DecisionTree::Internal { children, .. } => children.get_mut(first)?.node_mut(rest),
                DecisionTree::Leaf { .. } => None,
            },
        }
    }

    /// Leaves in pre-order with their paths.
    pub fn leaves(&self) -> Vec<(NodePath, &DecisionTree)> {
        let mut out = Vec::new();
        self.walk_leaves(&mut Vec::new(), &mut out);
        out
    }

    fn walk_leaves<'a>(&'a self, path: &mut NodePath, out: &mut Vec<(NodePath, &'a DecisionTree)>) {
        match self {
            DecisionTree::Leaf { .. } => out.push((path.clone(), self)),
            DecisionTree::Internal { children, .. } => {
                for (&outcome, child) in children {
                    path.push(outcome);
                    child.walk_leaves(path, out);
                    path.pop();
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeViolation {
    UnknownObject(usize),
    UnknownTest {
        path: NodePath,
        test: TestId,
    },
    EmptyLeaf {
        path: NodePath,
    },
    LeafNotHomogeneous {
        path: NodePath,
        classes: BTreeSet<ClassId>,
    },
    LeafClassMismatch {
        path: NodePath,
        declared: ClassId,
        actual: ClassId,
    },
    /// The leaf holds `unexpected` objects that the tests on its path send
    /// elsewhere, or lacks `missing` objects that they send here.
    LeafObjects {
        path: NodePath,
        missing: ObjectSet,
        unexpected: ObjectSet,
    },
    TooFewChildren {
        path: NodePath,
        count: usize,
    },
    /// Objects reach this node with outcome `outcome` but there is no branch.
    MissingBranch {
        path: NodePath,
        outcome: Outcome,
        objects: ObjectSet,
    },
}

impl fmt::Display for TreeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use TreeViolation::*;
        match self {
            UnknownObject(s) => write!(f, "object {s} is not in the instance"),
            UnknownTest { path, test } => write!(f, "node {path:?}: no such test {test}"),
            EmptyLeaf { path } => write!(f, "leaf {path:?} is empty"),
            LeafNotHomogeneous { path, classes } => {
                write!(f, "leaf {path:?} not homogeneous (classes {classes:?})")
            }
            LeafClassMismatch { path, declared, actual } => {
                write!(f, "leaf {path:?} labelled class {declared} but holds class {actual}")
            }
            LeafObjects {
                path,
                missing,
                unexpected,
            } => write!(
                f,
                "leaf {path:?} disagrees with partition: missing {missing:?}, unexpected {unexpected:?}"
            ),
            TooFewChildren { path, count } => {
                write!(f, "internal node {path:?} has {count} child(ren), need at least 2")
            }
            MissingBranch { path, outcome, objects } => {
                write!(f, "node {path:?} has no branch {outcome} for objects {objects:?}")
            }
        }
    }
}

/// Checks that `tree` is a valid decision tree for `objects`: every leaf is a
/// nonempty homogeneous set, every internal node has at least two children
/// and its children hold exactly the partition of the node's objects by its
/// test. Empty means valid.
pub fn validate_tree(tree: &DecisionTree, objects: &ObjectSet, inst: &Instance) -> Vec<TreeViolation> {
    let mut violations = Vec::new();
    let unknown: Vec<_> = objects.iter().filter(|&&s| !inst.contains(s)).collect();
    if !unknown.is_empty() {
        violations.extend(unknown.into_iter().map(|&s| TreeViolation::UnknownObject(s)));
        return violations;
    }
    check_node(tree, objects, inst, &mut Vec::new(), &mut violations);
    violations
}

fn check_node(
    node: &DecisionTree,
    expected: &ObjectSet,
    inst: &Instance,
    path: &mut NodePath,
    out: &mut Vec<TreeViolation>,
) {
    match node {
        DecisionTree::Leaf { class, objects } => {
            if objects.is_empty() {
                out.push(TreeViolation::EmptyLeaf { path: path.clone() });
                return;
            }
            let missing: ObjectSet = expected.difference(objects).copied().collect();
            let unexpected: ObjectSet = objects.difference(expected).copied().collect();
            if !missing.is_empty() || !unexpected.is_empty() {
                out.push(TreeViolation::LeafObjects {
                    path: path.clone(),
                    missing,
                    unexpected,
                });
            }
            let classes: BTreeSet<ClassId> = objects
                .iter()
                .filter(|&&s| inst.contains(s))
                .map(|&s| inst.class_of(s))
                .collect();
            if classes.len() > 1 {
                out.push(TreeViolation::LeafNotHomogeneous {
                    path: path.clone(),
                    classes,
                });
            } else if let Some(&actual) = classes.iter().next() {
                if actual != *class {
                    out.push(TreeViolation::LeafClassMismatch {
                        path: path.clone(),
                        declared: *class,
                        actual,
                    });
                }
            }
        }
        DecisionTree::Internal { test, children } => {
            let Ok(parts) = partition(expected, *test, inst) else {
                out.push(TreeViolation::UnknownTest {
                    path: path.clone(),
                    test: *test,
                });
                return;
            };
            if children.len() < 2 {
                out.push(TreeViolation::TooFewChildren {
                    path: path.clone(),
                    count: children.len(),
                });
            }
            for (outcome, part) in &parts {
                if !children.contains_key(outcome) {
                    out.push(TreeViolation::MissingBranch {
                        path: path.clone(),
                        outcome: *outcome,
                        objects: part.clone(),
                    });
                }
            }
            let empty = ObjectSet::new();
            for (outcome, child) in children {
                path.push(*outcome);
                check_node(child, parts.get(outcome).unwrap_or(&empty), inst, path, out);
                path.pop();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Test;
    use crate::rational::{int, ratio};

    fn inst() -> Instance {
        // objects 0,1 class 0; object 2 class 1
        Instance::new(
            2,
            vec![0, 0, 1],
            vec![ratio(1, 3); 3],
            vec![
                Test::new(vec![1, 1, 2], vec![int(1), int(1)]),
                Test::new(vec![1, 2, 2], vec![int(1), int(1)]),
            ],
        )
        .unwrap()
    }

    fn set(items: &[usize]) -> ObjectSet {
        items.iter().copied().collect()
    }

    #[test]
    fn homogeneous_leaf_is_valid() {
        let i = inst();
        let t = DecisionTree::leaf(0, set(&[0, 1]));
        assert!(validate_tree(&t, &set(&[0, 1]), &i).is_empty());
    }

    #[test]
    fn mixed_leaf_is_reported() {
        let i = inst();
        let t = DecisionTree::leaf(0, set(&[0, 2]));
        let v = validate_tree(&t, &set(&[0, 2]), &i);
        assert!(matches!(v.as_slice(), [TreeViolation::LeafNotHomogeneous { .. }]));
    }

    #[test]
    fn children_disagreeing_with_partition_name_the_object() {
        let i = inst();
        // test 0 sends 1 to outcome 1, but the tree files it under outcome 2
        let t = DecisionTree::internal(
            0,
            BTreeMap::from([
                (1, DecisionTree::leaf(0, set(&[0]))),
                (2, DecisionTree::leaf(1, set(&[1, 2]))),
            ]),
        );
        let v = validate_tree(&t, &i.objects(), &i);
        assert!(v.contains(&TreeViolation::LeafObjects {
            path: vec![1],
            missing: set(&[1]),
            unexpected: set(&[]),
        }));
        assert!(v.contains(&TreeViolation::LeafObjects {
            path: vec![2],
            missing: set(&[]),
            unexpected: set(&[1]),
        }));
    }

    #[test]
    fn single_child_internal_is_rejected() {
        let i = inst();
        let t = DecisionTree::internal(1, BTreeMap::from([(2, DecisionTree::leaf(0, set(&[1])))]));
        let v = validate_tree(&t, &set(&[1]), &i);
        assert_eq!(v, vec![TreeViolation::TooFewChildren { path: vec![], count: 1 }]);
    }

    #[test]
    fn missing_branch_is_reported() {
        let i = inst();
        let t = DecisionTree::internal(0, BTreeMap::from([(1, DecisionTree::leaf(0, set(&[0, 1])))]));
        let v = validate_tree(&t, &i.objects(), &i);
        assert!(v.contains(&TreeViolation::MissingBranch {
            path: vec![],
            outcome: 2,
            objects: set(&[2]),
        }));
    }

    #[test]
    fn node_lookup_and_leaves() {
        let t = DecisionTree::internal(
            0,
            BTreeMap::from([
                (1, DecisionTree::leaf(0, set(&[0, 1]))),
                (2, DecisionTree::leaf(1, set(&[2]))),
            ]),
        );
        assert_eq!(t.node(&[2]), Some(&DecisionTree::leaf(1, set(&[2]))));
        assert_eq!(t.node(&[3]), None);
        assert_eq!(t.leaves().len(), 2);
        assert_eq!(t.objects(), set(&[0, 1, 2]));
        assert_eq!(t.height(), 1);
        assert_eq!(t.node_count(), 3);
    }
}
