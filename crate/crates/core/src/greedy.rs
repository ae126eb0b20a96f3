//! Greedy worst-cost construction for value-dependent test costs.
//!
//! At every node the greedy picks the test minimising
//!
//! ```text
//!   max over outcomes i of  c^i(t) / (P(S) - P(S_t^i))
//! ```
//!
//! where `P` counts separable pairs, splits on it, and recurses on every
//! nonempty part. For binary tests the resulting worst cost is within a factor
//! `H(P(S))` of optimal.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{evaluate, pair_count, partition, DecisionTree, Instance, ObjectSet, Outcome, TestId};
use crate::rational::Rational;

/// Which outcomes the criterion's maximum ranges over.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EmptyBranches {
    /// Every outcome `1..=l`; an empty branch contributes `c^i(t) / P(S)`.
    #[default]
    Include,
    /// Only outcomes that receive at least one object.
    Skip,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GreedyConfig {
    pub empty_branches: EmptyBranches,
}

/// One greedy decision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub set_size: usize,
    pub test: TestId,
    pub criterion: Rational,
    pub pairs_before: u64,
    /// Pair count of each nonempty branch, by ascending outcome.
    pub pairs_after: Vec<(Outcome, u64)>,
}

/// Greedy decisions in pre-order (outcomes ascending).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GreedyTrace {
    pub steps: Vec<TraceStep>,
}

/// The greedy criterion of `test` on `objects`, or `None` when the test
/// separates no separable pair there.
pub fn criterion_value(objects: &ObjectSet, test: TestId, inst: &Instance) -> Result<Option<Rational>> {
    DividePairs::default().criterion_value(objects, test, inst)
}

/// The usable test with the smallest criterion; ties go to the lowest id.
pub fn select_test(objects: &ObjectSet, inst: &Instance) -> Result<TestId> {
    DividePairs::default().select_test(objects, inst)
}

/// Builds the greedy tree for the whole instance.
pub fn divide_pairs(inst: &Instance) -> Result<(DecisionTree, GreedyTrace)> {
    DividePairs::default().build(&inst.objects(), inst)
}

/// Lower bound on the optimal worst cost of `objects` derived from the
/// greedy's first choice `tau` and its costliest branch `q`:
/// `c^q(tau) * P(S) / (P(S) - P(S_tau^q))`.
pub fn root_lower_bound(objects: &ObjectSet, inst: &Instance) -> Result<Rational> {
    DividePairs::default().root_lower_bound(objects, inst)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct DividePairs {
    pub config: GreedyConfig,
}

impl DividePairs {
    pub fn new(config: GreedyConfig) -> Self {
        DividePairs { config }
    }

    pub fn criterion_value(&self, objects: &ObjectSet, test: TestId, inst: &Instance) -> Result<Option<Rational>> {
        let total = pair_count(objects, inst);
        if total == 0 {
            return Err(Error::Homogeneous);
        }
        let parts = partition(objects, test, inst)?;
        if parts.len() < 2 {
            return Ok(None);
        }
        let remaining = |outcome: Outcome| parts.get(&outcome).map_or(0, |part| pair_count(part, inst));
        let outcomes: Vec<Outcome> = match self.config.empty_branches {
            EmptyBranches::Include => (1..=inst.num_outcomes()).collect(),
            EmptyBranches::Skip => parts.keys().copied().collect(),
        };
        let mut best: Option<Rational> = None;
        for outcome in outcomes {
            let eliminated = total - remaining(outcome);
            if eliminated == 0 {
                // every separable pair stays in one branch, so none is separated
                return Ok(None);
            }
            let value = inst.cost(test, outcome) / Rational::from_integer(eliminated.into());
            if best.as_ref().is_none_or(|b| value > *b) {
                best = Some(value);
            }
        }
        Ok(best)
    }

    pub fn select_test(&self, objects: &ObjectSet, inst: &Instance) -> Result<TestId> {
        self.select_with_value(objects, inst).map(|(test, _)| test)
    }

    fn select_with_value(&self, objects: &ObjectSet, inst: &Instance) -> Result<(TestId, Rational)> {
        let mut best: Option<(TestId, Rational)> = None;
        for test in 0..inst.num_tests() {
            if let Some(value) = self.criterion_value(objects, test, inst)? {
                if best.as_ref().is_none_or(|(_, b)| value < *b) {
                    best = Some((test, value));
                }
            }
        }
        best.ok_or(Error::IncompleteOnSubset(objects.len()))
    }

    /// Greedy tree over `objects` with the trace of every decision.
    pub fn build(&self, objects: &ObjectSet, inst: &Instance) -> Result<(DecisionTree, GreedyTrace)> {
        if objects.is_empty() {
            return Err(Error::EmptySet);
        }
        inst.check_objects(objects)?;
        let mut trace = GreedyTrace::default();
        let tree = self.grow(objects, inst, &mut trace)?;
        Ok((tree, trace))
    }

    fn grow(&self, objects: &ObjectSet, inst: &Instance, trace: &mut GreedyTrace) -> Result<DecisionTree> {
        let pairs_before = pair_count(objects, inst);
        if pairs_before == 0 {
            let class = inst.class_of(*objects.first().ok_or(Error::EmptySet)?);
            return Ok(DecisionTree::leaf(class, objects.clone()));
        }
        let (test, criterion) = self.select_with_value(objects, inst)?;
        let parts = partition(objects, test, inst)?;
        trace.steps.push(TraceStep {
            set_size: objects.len(),
            test,
            criterion,
            pairs_before,
            pairs_after: parts.iter().map(|(&o, part)| (o, pair_count(part, inst))).collect(),
        });
        let mut children = BTreeMap::new();
        for (outcome, part) in parts {
            children.insert(outcome, self.grow(&part, inst, trace)?);
        }
        Ok(DecisionTree::internal(test, children))
    }

    pub fn root_lower_bound(&self, objects: &ObjectSet, inst: &Instance) -> Result<Rational> {
        let total = pair_count(objects, inst);
        if total == 0 {
            return Err(Error::Homogeneous);
        }
        let tau = self.select_test(objects, inst)?;
        let mut worst: Option<(Outcome, Rational, u64)> = None;
        for (outcome, part) in partition(objects, tau, inst)? {
            let (subtree, _) = self.build(&part, inst)?;
            let branch = inst.cost(tau, outcome) + evaluate(&subtree, inst)?.worst;
            if worst.as_ref().is_none_or(|(_, w, _)| branch > *w) {
                worst = Some((outcome, branch, pair_count(&part, inst)));
            }
        }
        let (q, _, remaining) = worst.ok_or(Error::EmptySet)?;
        let total_r = Rational::from_integer(total.into());
        Ok(inst.cost(tau, q) * &total_r / (total_r - Rational::from_integer(remaining.into())))
    }
}

/// A mass-weighted companion heuristic aimed at expected cost: picks the
/// test minimising `sum_i mass(S_t^i) c^i(t)` per separated pair. Used only
/// to supply an expected-cost tree when the exact oracle is out of reach.
pub fn mass_greedy(inst: &Instance) -> Result<DecisionTree> {
    mass_grow(&inst.objects(), inst)
}

fn mass_grow(objects: &ObjectSet, inst: &Instance) -> Result<DecisionTree> {
    let total = pair_count(objects, inst);
    if total == 0 {
        let class = inst.class_of(*objects.first().ok_or(Error::EmptySet)?);
        return Ok(DecisionTree::leaf(class, objects.clone()));
    }
    let mut best: Option<(TestId, Rational)> = None;
    for test in 0..inst.num_tests() {
        let parts = partition(objects, test, inst)?;
        let separated = total - parts.values().map(|p| pair_count(p, inst)).sum::<u64>();
        if separated == 0 {
            continue;
        }
        let spend: Rational = parts.iter().map(|(&o, p)| inst.mass(p) * inst.cost(test, o)).sum();
        let value = spend / Rational::from_integer(separated.into());
        if best.as_ref().is_none_or(|(_, b)| value < *b) {
            best = Some((test, value));
        }
    }
    let (test, _) = best.ok_or(Error::IncompleteOnSubset(objects.len()))?;
    let mut children = BTreeMap::new();
    for (outcome, part) in partition(objects, test, inst)? {
        children.insert(outcome, mass_grow(&part, inst)?);
    }
    Ok(DecisionTree::internal(test, children))
}
