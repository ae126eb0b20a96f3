//! Exact solvers by dynamic programming over object subsets.
//!
//! Subsets are bitmasks over the queried objects, so a query may cover at
//! most 64 objects; the default cap is far lower because the number of
//! reachable subsets grows exponentially.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::model::{DecisionTree, Instance, ObjectId, ObjectSet, Outcome, TestId};
use crate::rational::{zero, Rational};

pub const DEFAULT_CAP: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleConfig {
    pub max_objects: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_objects: DEFAULT_CAP,
        }
    }
}

/// An optimal value with a tree attaining it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub value: Rational,
    pub tree: DecisionTree,
    /// Memoised subproblems at the time the result was produced.
    pub explored: usize,
}

/// Minimum expected cost among trees whose worst cost is at most `budget`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrontierPoint {
    pub budget: Rational,
    pub expected: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Budget {
    Unbounded,
    AtMost(Rational),
}

pub fn opt_worst(objects: &ObjectSet, inst: &Instance) -> Result<OracleResult> {
    ExactSolver::new(inst, objects, OracleConfig::default())?.opt_worst()
}

pub fn opt_expected(objects: &ObjectSet, inst: &Instance) -> Result<OracleResult> {
    ExactSolver::new(inst, objects, OracleConfig::default())?.opt_expected()
}

/// `None` when no tree fits the budget, i.e. when `budget < opt_worst`.
pub fn opt_expected_under_budget(
    objects: &ObjectSet,
    budget: &Budget,
    inst: &Instance,
) -> Result<Option<OracleResult>> {
    ExactSolver::new(inst, objects, OracleConfig::default())?.opt_expected_under_budget(budget)
}

pub fn pareto_frontier(inst: &Instance) -> Result<Vec<FrontierPoint>> {
    ExactSolver::new(inst, &inst.objects(), OracleConfig::default())?.pareto_frontier()
}

/// `H(k) = 1 + 1/2 + ... + 1/k`, with `H(0) = 0`.
pub fn harmonic(k: u64) -> Rational {
    (1..=k).map(|i| Rational::new(1.into(), i.into())).sum()
}

/// The smallest expected cost the frontier allows at worst cost `worst`, or
/// `None` when `worst` is below every budget.
pub fn frontier_expected_at<'a>(frontier: &'a [FrontierPoint], worst: &Rational) -> Option<&'a Rational> {
    frontier
        .iter()
        .take_while(|p| p.budget <= *worst)
        .last()
        .map(|p| &p.expected)
}

type Mask = u64;
type Choice = Option<TestId>;

/// Memoised solver for one instance and one object set. Tables persist
/// across queries on the same solver.
pub struct ExactSolver<'a> {
    inst: &'a Instance,
    objects: Vec<ObjectId>,
    full: Mask,
    /// Per test, the nonempty outcome classes over all queried objects.
    outcome_masks: Vec<Vec<(Outcome, Mask)>>,
    class_masks: Vec<Mask>,
    masses: HashMap<Mask, Rational>,
    worst: HashMap<Mask, (Rational, Choice)>,
    expected: HashMap<Mask, (Rational, Choice)>,
    budgeted: HashMap<(Mask, Rational), Option<(Rational, Choice)>>,
    achievable: HashMap<Mask, Rc<BTreeSet<Rational>>>,
}

impl<'a> ExactSolver<'a> {
    pub fn new(inst: &'a Instance, objects: &ObjectSet, config: OracleConfig) -> Result<Self> {
        if objects.is_empty() {
            return Err(Error::EmptySet);
        }
        let cap = config.max_objects.min(Mask::BITS as usize);
        if objects.len() > cap {
            return Err(Error::TooLarge {
                size: objects.len(),
                cap,
            });
        }
        inst.check_objects(objects)?;
        let objects: Vec<ObjectId> = objects.iter().copied().collect();
        let full = if objects.len() == 64 {
            Mask::MAX
        } else {
            (1 << objects.len()) - 1
        };

        let outcome_masks = inst
            .tests()
            .iter()
            .map(|t| {
                let mut by_outcome: BTreeMap<Outcome, Mask> = BTreeMap::new();
                for (bit, &s) in objects.iter().enumerate() {
                    *by_outcome.entry(t.outcomes[s]).or_default() |= 1 << bit;
                }
                by_outcome.into_iter().collect()
            })
            .collect();

        let mut by_class: BTreeMap<usize, Mask> = BTreeMap::new();
        for (bit, &s) in objects.iter().enumerate() {
            *by_class.entry(inst.class_of(s)).or_default() |= 1 << bit;
        }

        Ok(ExactSolver {
            inst,
            objects,
            full,
            outcome_masks,
            class_masks: by_class.into_values().collect(),
            masses: HashMap::new(),
            worst: HashMap::new(),
            expected: HashMap::new(),
            budgeted: HashMap::new(),
            achievable: HashMap::new(),
        })
    }

    pub fn explored(&self) -> usize {
        self.worst.len() + self.expected.len() + self.budgeted.len()
    }

    pub fn opt_worst(&mut self) -> Result<OracleResult> {
        let (value, _) = self.worst_of(self.full)?;
        let tree = self.rebuild(self.full, &|s, m| s.worst[&m].1);
        Ok(OracleResult {
            value,
            tree,
            explored: self.explored(),
        })
    }

    pub fn opt_expected(&mut self) -> Result<OracleResult> {
        let (value, _) = self.expected_of(self.full)?;
        let tree = self.rebuild(self.full, &|s, m| s.expected[&m].1);
        Ok(OracleResult {
            value,
            tree,
            explored: self.explored(),
        })
    }

    pub fn opt_expected_under_budget(&mut self, budget: &Budget) -> Result<Option<OracleResult>> {
        let budget = match budget {
            Budget::Unbounded => return self.opt_expected().map(Some),
            Budget::AtMost(b) => b.clone(),
        };
        let Some((value, _)) = self.budgeted_of(self.full, &budget)? else {
            return Ok(None);
        };
        let tree = self.rebuild_budgeted(self.full, budget);
        Ok(Some(OracleResult {
            value,
            tree,
            explored: self.explored(),
        }))
    }

    /// Budgets at which the constrained optimum strictly improves, from
    /// `opt_worst` up to the first budget reaching `opt_expected`.
    pub fn pareto_frontier(&mut self) -> Result<Vec<FrontierPoint>> {
        let unconstrained = self.expected_of(self.full)?.0;
        let candidates = self.achievable_worst(self.full)?;
        let mut points: Vec<FrontierPoint> = Vec::new();
        for budget in candidates.iter() {
            let Some((expected, _)) = self.budgeted_of(self.full, budget)? else {
                continue;
            };
            if points.last().is_none_or(|p| expected < p.expected) {
                points.push(FrontierPoint {
                    budget: budget.clone(),
                    expected: expected.clone(),
                });
            }
            if expected == unconstrained {
                break;
            }
        }
        Ok(points)
    }

    fn is_homogeneous(&self, mask: Mask) -> bool {
        self.class_masks.iter().any(|&c| mask & !c == 0)
    }

    fn parts(&self, mask: Mask, test: TestId) -> Vec<(Outcome, Mask)> {
        self.outcome_masks[test]
            .iter()
            .filter_map(|&(o, m)| (mask & m != 0).then_some((o, mask & m)))
            .collect()
    }

    fn mass(&mut self, mask: Mask) -> Rational {
        if let Some(m) = self.masses.get(&mask) {
            return m.clone();
        }
        let total: Rational = (0..self.objects.len())
            .filter(|bit| mask >> bit & 1 == 1)
            .map(|bit| self.inst.prior(self.objects[bit]))
            .sum();
        self.masses.insert(mask, total.clone());
        total
    }

    fn cost(&self, test: TestId, outcome: Outcome) -> &Rational {
        self.inst.cost(test, outcome)
    }

    fn worst_of(&mut self, mask: Mask) -> Result<(Rational, Choice)> {
        if let Some(hit) = self.worst.get(&mask) {
            return Ok(hit.clone());
        }
        let result = if self.is_homogeneous(mask) {
            (zero(), None)
        } else {
            let mut best: Option<(Rational, TestId)> = None;
            for test in 0..self.outcome_masks.len() {
                let parts = self.parts(mask, test);
                if parts.len() < 2 {
                    continue;
                }
                let mut value = zero();
                for (outcome, part) in parts {
                    let sub = self.worst_of(part)?.0;
                    let branch = sub + self.cost(test, outcome);
                    if branch > value {
                        value = branch;
                    }
                }
                if best.as_ref().is_none_or(|(b, _)| value < *b) {
                    best = Some((value, test));
                }
            }
            let (value, test) = best.ok_or(Error::IncompleteOnSubset(mask.count_ones() as usize))?;
            (value, Some(test))
        };
        self.worst.insert(mask, result.clone());
        Ok(result)
    }

    fn expected_of(&mut self, mask: Mask) -> Result<(Rational, Choice)> {
        if let Some(hit) = self.expected.get(&mask) {
            return Ok(hit.clone());
        }
        let result = if self.is_homogeneous(mask) {
            (zero(), None)
        } else {
            let mut best: Option<(Rational, TestId)> = None;
            for test in 0..self.outcome_masks.len() {
                let parts = self.parts(mask, test);
                if parts.len() < 2 {
                    continue;
                }
                let mut value = zero();
                for (outcome, part) in parts {
                    let sub = self.expected_of(part)?.0;
                    value += self.mass(part) * self.cost(test, outcome) + sub;
                }
                if best.as_ref().is_none_or(|(b, _)| value < *b) {
                    best = Some((value, test));
                }
            }
            let (value, test) = best.ok_or(Error::IncompleteOnSubset(mask.count_ones() as usize))?;
            (value, Some(test))
        };
        self.expected.insert(mask, result.clone());
        Ok(result)
    }

    fn budgeted_of(&mut self, mask: Mask, budget: &Rational) -> Result<Option<(Rational, Choice)>> {
        if self.worst_of(mask)?.0 > *budget {
            return Ok(None);
        }
        if self.is_homogeneous(mask) {
            return Ok(Some((zero(), None)));
        }
        let key = (mask, budget.clone());
        if let Some(hit) = self.budgeted.get(&key) {
            return Ok(hit.clone());
        }
        let mut best: Option<(Rational, TestId)> = None;
        'tests: for test in 0..self.outcome_masks.len() {
            let parts = self.parts(mask, test);
            if parts.len() < 2 {
                continue;
            }
            let mut value = zero();
            for (outcome, part) in parts {
                let cost = self.cost(test, outcome).clone();
                let Some((sub, _)) = self.budgeted_of(part, &(budget - &cost))? else {
                    continue 'tests;
                };
                value += self.mass(part) * cost + sub;
            }
            if best.as_ref().is_none_or(|(b, _)| value < *b) {
                best = Some((value, test));
            }
        }
        // budget >= opt_worst, so the worst-optimal root test is always feasible
        let result = best.map(|(value, test)| (value, Some(test)));
        self.budgeted.insert(key, result.clone());
        Ok(result)
    }

    /// Every worst cost attained by some valid tree on `mask` that never
    /// applies a test to a homogeneous set.
    fn achievable_worst(&mut self, mask: Mask) -> Result<Rc<BTreeSet<Rational>>> {
        if let Some(hit) = self.achievable.get(&mask) {
            return Ok(Rc::clone(hit));
        }
        let mut values = BTreeSet::new();
        if self.is_homogeneous(mask) {
            values.insert(zero());
        } else {
            for test in 0..self.outcome_masks.len() {
                let parts = self.parts(mask, test);
                if parts.len() < 2 {
                    continue;
                }
                // branch costs are positive, so 0 is a neutral start for max
                let mut acc: BTreeSet<Rational> = BTreeSet::from([zero()]);
                for (outcome, part) in parts {
                    let cost = self.cost(test, outcome).clone();
                    let sub = self.achievable_worst(part)?;
                    let mut next = BTreeSet::new();
                    for a in &acc {
                        for v in sub.iter() {
                            let branch = &cost + v;
                            next.insert(if *a > branch { a.clone() } else { branch });
                        }
                    }
                    acc = next;
                }
                values.extend(acc);
            }
        }
        let values = Rc::new(values);
        self.achievable.insert(mask, Rc::clone(&values));
        Ok(values)
    }

    fn leaf(&self, mask: Mask) -> DecisionTree {
        let objects: ObjectSet = (0..self.objects.len())
            .filter(|bit| mask >> bit & 1 == 1)
            .map(|bit| self.objects[bit])
            .collect();
        let class = self.inst.class_of(*objects.first().expect("nonempty mask"));
        DecisionTree::leaf(class, objects)
    }

    fn rebuild(&self, mask: Mask, choice: &dyn Fn(&Self, Mask) -> Choice) -> DecisionTree {
        match choice(self, mask) {
            None => self.leaf(mask),
            Some(test) => {
                let children = self
                    .parts(mask, test)
                    .into_iter()
                    .map(|(o, part)| (o, self.rebuild(part, choice)))
                    .collect();
                DecisionTree::internal(test, children)
            }
        }
    }

    fn rebuild_budgeted(&self, mask: Mask, budget: Rational) -> DecisionTree {
        if self.is_homogeneous(mask) {
            return self.leaf(mask);
        }
        let test = self.budgeted[&(mask, budget.clone())]
            .as_ref()
            .and_then(|(_, choice)| *choice)
            .expect("feasible subproblem has a choice");
        let children = self
            .parts(mask, test)
            .into_iter()
            .map(|(o, part)| (o, self.rebuild_budgeted(part, &budget - self.cost(test, o))))
            .collect();
        DecisionTree::internal(test, children)
    }
}
