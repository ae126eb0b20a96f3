use thiserror::Error;

use crate::model::{InstanceViolation, ObjectId, Outcome, TestId};
use crate::rational::Rational;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no such test: {0}")]
    UnknownTest(TestId),

    #[error("no such object: {0}")]
    UnknownObject(ObjectId),

    #[error("outcome {outcome} of test {test} is outside 1..={num_outcomes}")]
    UnknownOutcome {
        test: TestId,
        outcome: Outcome,
        num_outcomes: u32,
    },

    #[error("object {0} appears in more than one leaf")]
    DuplicateObject(ObjectId),

    #[error("invalid instance: {}", join_violations(.0))]
    InvalidInstance(Vec<InstanceViolation>),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("homogeneous set has no criterion")]
    Homogeneous,

    #[error("instance incomplete on subset: no test separates a pair among {0} objects")]
    IncompleteOnSubset(usize),

    #[error("restriction set must be a nonempty subset of the tree's objects")]
    BadRestriction,

    #[error("trees cover different object sets")]
    MismatchedTrees,

    #[error("rho must be positive, got {0}")]
    NonPositiveRho(Rational),

    #[error("uniform variant requires unit costs (test {test}, outcome {outcome} costs {cost})")]
    NonUnitCosts {
        test: TestId,
        outcome: Outcome,
        cost: Rational,
    },

    #[error("uniform variant needs a positive integer worst cost, got {0}")]
    NonIntegralWorst(Rational),

    #[error("rho too small for this W (L = {lower} > M = {upper})")]
    RhoTooSmall { lower: u64, upper: u64 },

    #[error("instance too large for exact oracle: {size} objects, cap is {cap}")]
    TooLarge { size: usize, cap: usize },

    #[error("n_max = {n_max} exceeds oracle cap {cap}; lower n_max or disable oracle checks")]
    ExceedsOracleCap { n_max: usize, cap: usize },

    #[error("empty object set")]
    EmptySet,

    #[error("unsatisfiable generator spec: {0}")]
    Unsatisfiable(String),

    #[error("cannot parse rational {0:?}")]
    ParseRational(String),

    #[error("malformed document: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join_violations(violations: &[InstanceViolation]) -> String {
    violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}
