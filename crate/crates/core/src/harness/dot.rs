use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::Result;
use crate::model::{DecisionTree, Instance};

/// Graphviz rendering: internal nodes `t<k>`, edges `outcome=i, cost=c`,
/// leaves `class <j> {objects}`. Nodes are numbered in pre-order with
/// outcomes ascending.
pub fn to_dot(tree: &DecisionTree, inst: &Instance) -> Result<String> {
    let mut out = String::from("digraph decision_tree {\n  node [shape=box];\n");
    let mut next = 0;
    emit(tree, inst, &mut next, &mut out)?;
    out.push_str("}\n");
    Ok(out)
}

fn emit(node: &DecisionTree, inst: &Instance, next: &mut usize, out: &mut String) -> Result<usize> {
    let id = *next;
    *next += 1;
    match node {
        DecisionTree::Leaf { class, objects } => {
            let list: Vec<String> = objects.iter().map(ToString::to_string).collect();
            writeln!(out, "  n{id} [label=\"class {class} {{{}}}\"];", list.join(", ")).unwrap();
        }
        DecisionTree::Internal { test, children } => {
            writeln!(out, "  n{id} [label=\"t{test}\", shape=ellipse];").unwrap();
            for (&outcome, child) in children {
                let cost = inst.checked_cost(*test, outcome)?;
                let child_id = emit(child, inst, next, out)?;
                writeln!(
                    out,
                    "  n{id} -> n{child_id} [label=\"outcome={outcome}, cost={cost}\"];"
                )
                .unwrap();
            }
        }
    }
    Ok(id)
}

pub fn export_dot(tree: &DecisionTree, inst: &Instance, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_dot(tree, inst)?)?;
    Ok(())
}
