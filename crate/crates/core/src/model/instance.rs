use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Signed};

use super::{ClassId, ObjectId, ObjectSet, Outcome, TestId};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// A single test: the outcome it produces on every object and the cost paid
/// for each outcome.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Test {
    /// `outcomes[s]` is the outcome on object `s`, in `1..=num_outcomes`.
    pub outcomes: Vec<Outcome>,
    /// `costs[i - 1]` is the cost paid when the test answers `i`.
    pub costs: Vec<Rational>,
}

impl Test {
    pub fn new(outcomes: Vec<Outcome>, costs: Vec<Rational>) -> Self {
        Test { outcomes, costs }
    }

    /// A test whose cost does not depend on the outcome.
    pub fn fixed_cost(outcomes: Vec<Outcome>, cost: Rational, num_outcomes: u32) -> Self {
        Test {
            outcomes,
            costs: vec![cost; num_outcomes as usize],
        }
    }
}

/// Objects `0..n`, their classes, a prior, and a set of tests.
///
/// Instances built through [`Instance::new`] satisfy every invariant checked
/// by [`validate_instance`]. [`Instance::new_unchecked`] exists so that broken
/// inputs can be represented and reported on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    name: Option<String>,
    num_outcomes: u32,
    class_of: Vec<ClassId>,
    prior: Vec<Rational>,
    tests: Vec<Test>,
}

impl Instance {
    pub fn new(num_outcomes: u32, class_of: Vec<ClassId>, prior: Vec<Rational>, tests: Vec<Test>) -> Result<Self> {
        let inst = Self::new_unchecked(num_outcomes, class_of, prior, tests);
        let violations = validate_instance(&inst);
        if violations.is_empty() {
            Ok(inst)
        } else {
            Err(Error::InvalidInstance(violations))
        }
    }

    pub fn new_unchecked(num_outcomes: u32, class_of: Vec<ClassId>, prior: Vec<Rational>, tests: Vec<Test>) -> Self {
        Instance {
            name: None,
            num_outcomes,
            class_of,
            prior,
            tests,
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn num_objects(&self) -> usize {
        self.class_of.len()
    }

    pub fn num_tests(&self) -> usize {
        self.tests.len()
    }

    pub fn num_outcomes(&self) -> u32 {
        self.num_outcomes
    }

    pub fn num_classes(&self) -> usize {
        self.class_of.iter().max().map_or(0, |&c| c + 1)
    }

    pub fn objects(&self) -> ObjectSet {
        (0..self.num_objects()).collect()
    }

    pub fn class_of(&self, object: ObjectId) -> ClassId {
        self.class_of[object]
    }

    pub fn classes(&self) -> &[ClassId] {
        &self.class_of
    }

    pub fn prior(&self, object: ObjectId) -> &Rational {
        &self.prior[object]
    }

    pub fn priors(&self) -> &[Rational] {
        &self.prior
    }

    pub fn tests(&self) -> &[Test] {
        &self.tests
    }

    pub fn test(&self, test: TestId) -> Result<&Test> {
        self.tests.get(test).ok_or(Error::UnknownTest(test))
    }

    pub fn outcome(&self, test: TestId, object: ObjectId) -> Outcome {
        self.tests[test].outcomes[object]
    }

    pub fn cost(&self, test: TestId, outcome: Outcome) -> &Rational {
        &self.tests[test].costs[outcome as usize - 1]
    }

    /// Cost lookup that reports unknown tests and out-of-range outcomes.
    pub fn checked_cost(&self, test: TestId, outcome: Outcome) -> Result<&Rational> {
        let t = self.test(test)?;
        if outcome == 0 || outcome > self.num_outcomes {
            return Err(Error::UnknownOutcome {
                test,
                outcome,
                num_outcomes: self.num_outcomes,
            });
        }
        t.costs.get(outcome as usize - 1).ok_or(Error::UnknownOutcome {
            test,
            outcome,
            num_outcomes: self.num_outcomes,
        })
    }

    pub fn contains(&self, object: ObjectId) -> bool {
        object < self.num_objects()
    }

    pub fn check_objects<'a>(&self, objects: impl IntoIterator<Item = &'a ObjectId>) -> Result<()> {
        match objects.into_iter().find(|&&s| !self.contains(s)) {
            Some(&s) => Err(Error::UnknownObject(s)),
            None => Ok(()),
        }
    }

    pub fn is_homogeneous(&self, objects: &ObjectSet) -> bool {
        let mut classes = objects.iter().map(|&s| self.class_of[s]);
        match classes.next() {
            Some(first) => classes.all(|c| c == first),
            None => true,
        }
    }

    pub fn mass(&self, objects: &ObjectSet) -> Rational {
        objects.iter().map(|&s| &self.prior[s]).sum()
    }

    /// True when every test charges 1 for every outcome.
    pub fn has_unit_costs(&self) -> bool {
        self.tests.iter().all(|t| t.costs.iter().all(One::is_one))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InstanceViolation {
    NoObjects,
    TooFewOutcomes(u32),
    PriorLength {
        expected: usize,
        found: usize,
    },
    NegativePrior {
        object: ObjectId,
        value: Rational,
    },
    PriorSum(Rational),
    OutcomeRowLength {
        test: TestId,
        expected: usize,
        found: usize,
    },
    OutcomeOutOfRange {
        test: TestId,
        object: ObjectId,
        outcome: Outcome,
    },
    CostRowLength {
        test: TestId,
        expected: usize,
        found: usize,
    },
    NonPositiveCost {
        test: TestId,
        outcome: Outcome,
        cost: Rational,
    },
    Inseparable {
        first: ObjectId,
        second: ObjectId,
    },
}

impl fmt::Display for InstanceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use InstanceViolation::*;
        match self {
            NoObjects => write!(f, "instance has no objects"),
            TooFewOutcomes(l) => write!(f, "num_outcomes is {l}, need at least 2"),
            PriorLength { expected, found } => {
                write!(f, "prior has {found} entries for {expected} objects")
            }
            NegativePrior { object, value } => {
                write!(f, "prior of object {object} is negative ({value})")
            }
            PriorSum(sum) => write!(f, "prior sums to {sum} ≠ 1"),
            OutcomeRowLength { test, expected, found } => {
                write!(f, "test {test} has {found} outcomes for {expected} objects")
            }
            OutcomeOutOfRange { test, object, outcome } => {
                write!(f, "test {test} gives object {object} out-of-range outcome {outcome}")
            }
            CostRowLength { test, expected, found } => {
                if found < expected {
                    write!(f, "missing cost for test {test}, outcome {}", found + 1)
                } else {
                    write!(f, "test {test} has {found} costs for {expected} outcomes")
                }
            }
            NonPositiveCost { test, outcome, cost } => {
                write!(f, "cost of test {test}, outcome {outcome} is not positive ({cost})")
            }
            Inseparable { first, second } => {
                write!(f, "completeness: pair ({first},{second}) never separated")
            }
        }
    }
}

/// Every violated instance invariant, with witnesses. Empty means valid.
pub fn validate_instance(inst: &Instance) -> Vec<InstanceViolation> {
    use InstanceViolation::*;
    let n = inst.class_of.len();
    let ell = inst.num_outcomes;
    let mut violations = Vec::new();

    if n == 0 {
        violations.push(NoObjects);
    }
    if ell < 2 {
        violations.push(TooFewOutcomes(ell));
    }

    if inst.prior.len() != n {
        violations.push(PriorLength {
            expected: n,
            found: inst.prior.len(),
        });
    }
    for (object, value) in inst.prior.iter().enumerate() {
        if value.is_negative() {
            violations.push(NegativePrior {
                object,
                value: value.clone(),
            });
        }
    }
    let sum: Rational = inst.prior.iter().sum();
    if n > 0 && !sum.is_one() {
        violations.push(PriorSum(sum));
    }

    let mut rows_ok = true;
    for (test, t) in inst.tests.iter().enumerate() {
        if t.outcomes.len() != n {
            rows_ok = false;
            violations.push(OutcomeRowLength {
                test,
                expected: n,
                found: t.outcomes.len(),
            });
        }
        for (object, &outcome) in t.outcomes.iter().enumerate() {
            if outcome == 0 || outcome > ell {
                violations.push(OutcomeOutOfRange { test, object, outcome });
            }
        }
        if t.costs.len() != ell as usize {
            violations.push(CostRowLength {
                test,
                expected: ell as usize,
                found: t.costs.len(),
            });
        }
        for (i, cost) in t.costs.iter().enumerate() {
            if !cost.is_positive() {
                violations.push(NonPositiveCost {
                    test,
                    outcome: i as Outcome + 1,
                    cost: cost.clone(),
                });
            }
        }
    }

    // Objects with identical outcome signatures are never separated.
    if rows_ok {
        let mut seen: HashMap<Vec<Outcome>, ObjectId> = HashMap::new();
        for object in 0..n {
            let signature: Vec<Outcome> = inst.tests.iter().map(|t| t.outcomes[object]).collect();
            match seen.get(&signature) {
                Some(&first) => violations.push(Inseparable { first, second: object }),
                None => {
                    seen.insert(signature, object);
                }
            }
        }
    }

    violations
}
