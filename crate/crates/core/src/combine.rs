//! Trading worst cost against expected cost.
//!
//! Given a tree `D_E` with good expected cost `E`, a tree `D_W` with good
//! worst cost `W`, and `rho > 0`, [`combine_trees`] follows `D_E` until the
//! accumulated path cost reaches `rho * W` and from there on switches to `D_W`
//! restricted to the objects still in play. With outcome-independent costs the
//! result has worst cost at most `(1 + rho) W` and expected cost at most
//! `(1 + 1/rho) E`.
//!
//! [`combine_uniform`] handles unit costs: it tries every integer threshold
//! from `L = ceil(W rho^2 / (2 rho + 2))` to `M = rho W` and keeps the
//! cheapest tree in expectation, improving the expected factor to
//! `1 + 2 / (rho^2 + 2 rho)`.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{evaluate, restrict_tree, validate_tree, DecisionTree, Instance, NodePath};
use crate::rational::{int, Rational};

/// How the switch-over points in `D_E` are chosen. Path costs are sums of
/// branch costs from the root down to a node, the root having cost 0.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReplacementRule {
    /// A node whose path cost is below the threshold is replaced when every
    /// branch out of it reaches the threshold and at least one overshoots it.
    /// Otherwise the first node on each path whose cost reaches the threshold
    /// is replaced. With outcome-independent costs this never lets a spliced
    /// path start above the threshold.
    #[default]
    Crossing,
    /// Always the first node on each path whose cost reaches the threshold.
    FirstReached,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CombineParams {
    pub rho: Rational,
    /// Worst cost of `D_W`, recomputed from the tree.
    pub worst: Rational,
    /// `rho * worst`.
    pub threshold: Rational,
}

impl CombineParams {
    pub fn new(rho: Rational, d_w: &DecisionTree, inst: &Instance) -> Result<Self> {
        if !rho.is_positive() {
            return Err(Error::NonPositiveRho(rho));
        }
        let worst = evaluate(d_w, inst)?.worst;
        let threshold = &rho * &worst;
        Ok(CombineParams { rho, worst, threshold })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Combined {
    pub tree: DecisionTree,
    pub params: CombineParams,
    /// Nodes of `D_E` whose subtrees were swapped out.
    pub replaced: Vec<NodePath>,
}

/// Nodes of `d_e` where the combined tree switches to `D_W`, in pre-order.
pub fn find_replaceable(d_e: &DecisionTree, inst: &Instance, threshold: &Rational) -> Result<Vec<NodePath>> {
    find_replaceable_with(ReplacementRule::default(), d_e, inst, threshold)
}

pub fn find_replaceable_with(
    rule: ReplacementRule,
    d_e: &DecisionTree,
    inst: &Instance,
    threshold: &Rational,
) -> Result<Vec<NodePath>> {
    let mut out = Vec::new();
    visit(rule, d_e, inst, threshold, Rational::zero(), &mut Vec::new(), &mut out)?;
    Ok(out)
}

fn visit(
    rule: ReplacementRule,
    node: &DecisionTree,
    inst: &Instance,
    threshold: &Rational,
    cost: Rational,
    path: &mut NodePath,
    out: &mut Vec<NodePath>,
) -> Result<()> {
    if cost >= *threshold {
        out.push(path.clone());
        return Ok(());
    }
    let DecisionTree::Internal { test, children } = node else {
        return Ok(());
    };
    let mut child_costs = Vec::with_capacity(children.len());
    for &outcome in children.keys() {
        child_costs.push(&cost + inst.checked_cost(*test, outcome)?);
    }
    if rule == ReplacementRule::Crossing
        && child_costs.iter().all(|c| c >= threshold)
        && child_costs.iter().any(|c| c > threshold)
    {
        out.push(path.clone());
        return Ok(());
    }
    for ((&outcome, child), child_cost) in children.iter().zip(child_costs) {
        path.push(outcome);
        visit(rule, child, inst, threshold, child_cost, path, out)?;
        path.pop();
    }
    Ok(())
}

/// Splices `d_w` into `d_e` at the replaceable nodes for threshold
/// `rho * cost_W(d_w)`.
pub fn combine_trees(d_e: &DecisionTree, d_w: &DecisionTree, rho: &Rational, inst: &Instance) -> Result<DecisionTree> {
    combine_with(ReplacementRule::default(), d_e, d_w, rho, inst).map(|c| c.tree)
}

pub fn combine_with(
    rule: ReplacementRule,
    d_e: &DecisionTree,
    d_w: &DecisionTree,
    rho: &Rational,
    inst: &Instance,
) -> Result<Combined> {
    let objects = d_e.objects();
    if objects != d_w.objects() {
        return Err(Error::MismatchedTrees);
    }
    for tree in [d_e, d_w] {
        let violations = validate_tree(tree, &objects, inst);
        if let Some(first) = violations.first() {
            return Err(Error::InvalidTree(first.to_string()));
        }
    }
    let params = CombineParams::new(rho.clone(), d_w, inst)?;
    let replaced = find_replaceable_with(rule, d_e, inst, &params.threshold)?;
    let mut tree = d_e.clone();
    for path in &replaced {
        let slot = tree.node_mut(path).expect("replaceable path exists in d_e");
        let keep = slot.objects();
        *slot = restrict_tree(d_w, &keep, inst)?;
    }
    Ok(Combined { tree, params, replaced })
}

/// `((1 + rho) W, (1 + 1/rho) E)`.
pub fn tradeoff_bounds(rho: &Rational, worst: &Rational, expected: &Rational) -> (Rational, Rational) {
    let one = Rational::one();
    ((&one + rho) * worst, (&one + rho.recip()) * expected)
}

/// `1 + 2 / (rho^2 + 2 rho)`.
pub fn uniform_expected_factor(rho: &Rational) -> Rational {
    Rational::one() + int(2) / (rho * rho + int(2) * rho)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniformCombineParams {
    /// `i` in `rho = i / W`; equal to `M`.
    pub rho_numerator: u64,
    /// Height of `D_W`.
    pub worst: u64,
    pub lower: u64,
    pub upper: u64,
}

impl UniformCombineParams {
    pub fn new(rho_numerator: u64, worst: u64) -> Result<Self> {
        let upper = rho_numerator;
        let lower = if rho_numerator == 0 || worst == 0 {
            1
        } else {
            let w = Rational::from_integer(worst.into());
            let rho = Rational::from_integer(rho_numerator.into()) / &w;
            let l = (&w * &rho * &rho / (int(2) * &rho + int(2))).ceil();
            u64::try_from(l.to_integer()).expect("L fits in u64 when M does")
        };
        if lower > upper {
            return Err(Error::RhoTooSmall { lower, upper });
        }
        Ok(UniformCombineParams {
            rho_numerator,
            worst,
            lower,
            upper,
        })
    }

    pub fn rho(&self) -> Rational {
        Rational::new(self.rho_numerator.into(), self.worst.into())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniformCombined {
    pub tree: DecisionTree,
    pub params: UniformCombineParams,
    /// The threshold `i` whose tree was kept.
    pub chosen: u64,
    /// Expected cost of every candidate `D^i`, `i = L..=M`.
    pub candidates: Vec<(u64, Rational)>,
}

/// Best of `combine_trees(d_e, d_w, i / W)` for `i = L..=M` by expected cost;
/// ties go to the smallest `i`. Requires unit costs.
pub fn combine_uniform(
    d_e: &DecisionTree,
    d_w: &DecisionTree,
    rho_numerator: u64,
    inst: &Instance,
) -> Result<UniformCombined> {
    for (test, t) in inst.tests().iter().enumerate() {
        if let Some((i, cost)) = t.costs.iter().enumerate().find(|(_, c)| !c.is_one()) {
            return Err(Error::NonUnitCosts {
                test,
                outcome: i as u32 + 1,
                cost: cost.clone(),
            });
        }
    }
    let w = evaluate(d_w, inst)?.worst;
    if !w.is_integer() || !w.is_positive() {
        return Err(Error::NonIntegralWorst(w));
    }
    let worst = u64::try_from(w.to_integer()).map_err(|_| Error::NonIntegralWorst(w.clone()))?;
    let params = UniformCombineParams::new(rho_numerator, worst)?;

    let mut best: Option<(u64, DecisionTree, Rational)> = None;
    let mut candidates = Vec::new();
    for i in params.lower..=params.upper {
        let rho = Rational::new(i.into(), worst.into());
        let tree = combine_trees(d_e, d_w, &rho, inst)?;
        let expected = evaluate(&tree, inst)?.expected;
        candidates.push((i, expected.clone()));
        if best.as_ref().is_none_or(|(_, _, e)| expected < *e) {
            best = Some((i, tree, expected));
        }
    }
    let (chosen, tree, _) = best.expect("L <= M gives at least one candidate");
    Ok(UniformCombined {
        tree,
        params,
        chosen,
        candidates,
    })
}
