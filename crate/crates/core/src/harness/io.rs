//! JSON documents for instances, trees and greedy traces.
//!
//! Instance document:
//!
//! ```json
//! {
//!   "name": "optional",
//!   "num_outcomes": 2,
//!   "objects": [{"id": 0, "class": 0, "prior": "1/4"}, ...],
//!   "tests": [{"id": 0, "costs": ["2", "5"], "outcomes": [1, 2, ...]}, ...]
//! }
//! ```
//!
//! `outcomes[k]` is the outcome on object `k`. Rationals are `"p/q"` strings;
//! plain integers are accepted as well. Tree documents nest
//! `{"test": t, "children": {"1": ..., "2": ...}}` down to
//! `{"leaf_class": c, "objects": [...]}`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greedy::GreedyTrace;
use crate::model::{DecisionTree, Instance, Outcome, Test};
use crate::rational::{serde_text, Rational};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    num_outcomes: u32,
    objects: Vec<ObjectDoc>,
    tests: Vec<TestDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectDoc {
    id: usize,
    class: usize,
    #[serde(with = "serde_text")]
    prior: Rational,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TestDoc {
    id: usize,
    #[serde(with = "serde_text::vec")]
    costs: Vec<Rational>,
    outcomes: Vec<Outcome>,
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
enum TreeDoc {
    Internal {
        test: usize,
        children: BTreeMap<Outcome, TreeDoc>,
    },
    Leaf {
        leaf_class: usize,
        objects: Vec<usize>,
    },
}

fn instance_doc(inst: &Instance) -> InstanceDoc {
    InstanceDoc {
        name: inst.name().map(str::to_owned),
        num_outcomes: inst.num_outcomes(),
        objects: (0..inst.num_objects())
            .map(|id| ObjectDoc {
                id,
                class: inst.class_of(id),
                prior: inst.prior(id).clone(),
            })
            .collect(),
        tests: inst
            .tests()
            .iter()
            .enumerate()
            .map(|(id, t)| TestDoc {
                id,
                costs: t.costs.clone(),
                outcomes: t.outcomes.clone(),
            })
            .collect(),
    }
}

pub fn instance_to_value(inst: &Instance) -> serde_json::Value {
    serde_json::to_value(instance_doc(inst)).expect("instance documents serialize")
}

pub fn instance_from_value(value: serde_json::Value) -> Result<Instance> {
    instance_from_json(&value.to_string())
}

pub fn instance_to_json(inst: &Instance) -> String {
    let mut text = serde_json::to_string_pretty(&instance_doc(inst)).expect("instance documents serialize");
    text.push('\n');
    text
}

/// Parses and validates an instance document.
pub fn instance_from_json(text: &str) -> Result<Instance> {
    let mut doc: InstanceDoc = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    doc.objects.sort_by_key(|o| o.id);
    for (expected, object) in doc.objects.iter().enumerate() {
        if object.id != expected {
            return Err(Error::Format(format!(
                "objects: ids must be 0..{} without gaps or repeats, found id {} at position {expected}",
                doc.objects.len(),
                object.id
            )));
        }
    }
    doc.tests.sort_by_key(|t| t.id);
    for (expected, test) in doc.tests.iter().enumerate() {
        if test.id != expected {
            return Err(Error::Format(format!(
                "tests: ids must be 0..{} without gaps or repeats, found id {} at position {expected}",
                doc.tests.len(),
                test.id
            )));
        }
    }
    let (class_of, prior) = doc.objects.into_iter().map(|o| (o.class, o.prior)).unzip();
    let tests = doc.tests.into_iter().map(|t| Test::new(t.outcomes, t.costs)).collect();
    let inst = Instance::new(doc.num_outcomes, class_of, prior, tests)?;
    Ok(match doc.name {
        Some(name) => inst.with_name(name),
        None => inst,
    })
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance> {
    instance_from_json(&fs::read_to_string(path)?)
}

pub fn write_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, instance_to_json(inst))?;
    Ok(())
}

fn tree_doc(tree: &DecisionTree) -> TreeDoc {
    match tree {
        DecisionTree::Leaf { class, objects } => TreeDoc::Leaf {
            leaf_class: *class,
            objects: objects.iter().copied().collect(),
        },
        DecisionTree::Internal { test, children } => TreeDoc::Internal {
            test: *test,
            children: children.iter().map(|(&o, c)| (o, tree_doc(c))).collect(),
        },
    }
}

fn tree_from_value_at(value: &serde_json::Value, path: &str) -> Result<DecisionTree> {
    let bad = |msg: &str| Error::Format(format!("tree node {path}: {msg}"));
    let node = value.as_object().ok_or_else(|| bad("expected an object"))?;
    let index = |key: &str| -> Result<usize> {
        node.get(key)
            .and_then(serde_json::Value::as_u64)
            .map(|v| v as usize)
            .ok_or_else(|| bad(&format!("`{key}` must be a non-negative integer")))
    };
    if node.contains_key("leaf_class") {
        let objects = node
            .get("objects")
            .and_then(serde_json::Value::as_array)
            .ok_or_else(|| bad("`objects` must be a list"))?
            .iter()
            .map(|o| {
                o.as_u64()
                    .map(|o| o as usize)
                    .ok_or_else(|| bad("object ids must be integers"))
            })
            .collect::<Result<_>>()?;
        return Ok(DecisionTree::leaf(index("leaf_class")?, objects));
    }
    if !node.contains_key("test") {
        return Err(bad("expected `test` and `children`, or `leaf_class` and `objects`"));
    }
    let test = index("test")?;
    let children = node
        .get("children")
        .and_then(serde_json::Value::as_object)
        .ok_or_else(|| bad("`children` must be an object keyed by outcome"))?
        .iter()
        .map(|(key, child)| {
            let outcome: Outcome = key
                .parse()
                .map_err(|_| bad(&format!("child key {key:?} is not an outcome")))?;
            Ok((outcome, tree_from_value_at(child, &format!("{path}/{outcome}"))?))
        })
        .collect::<Result<_>>()?;
    Ok(DecisionTree::internal(test, children))
}

pub fn tree_to_value(tree: &DecisionTree) -> serde_json::Value {
    serde_json::to_value(tree_doc(tree)).expect("tree documents serialize")
}

pub fn tree_from_value(value: serde_json::Value) -> Result<DecisionTree> {
    tree_from_value_at(&value, "root")
}

pub fn tree_to_json(tree: &DecisionTree) -> String {
    let mut text = serde_json::to_string_pretty(&tree_doc(tree)).expect("tree documents serialize");
    text.push('\n');
    text
}

/// Parses a tree document. Validity against an instance is checked
/// separately with [`crate::model::validate_tree`].
pub fn tree_from_json(text: &str) -> Result<DecisionTree> {
    let value = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    tree_from_value(value)
}

pub fn read_tree(path: impl AsRef<Path>) -> Result<DecisionTree> {
    tree_from_json(&fs::read_to_string(path)?)
}

pub fn write_tree(tree: &DecisionTree, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, tree_to_json(tree))?;
    Ok(())
}

#[derive(Serialize)]
struct TraceStepDoc {
    set_size: usize,
    test: usize,
    criterion: String,
    pairs_before: u64,
    pairs_after: BTreeMap<Outcome, u64>,
}

pub fn trace_to_json(trace: &GreedyTrace) -> String {
    let steps: Vec<TraceStepDoc> = trace
        .steps
        .iter()
        .map(|s| TraceStepDoc {
            set_size: s.set_size,
            test: s.test,
            criterion: s.criterion.to_string(),
            pairs_before: s.pairs_before,
            pairs_after: s.pairs_after.iter().copied().collect(),
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&steps).expect("trace documents serialize");
    text.push('\n');
    text
}
