use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Instance, ObjectId, Outcome, Test};
use crate::rational::{int, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostMode {
    /// Every branch costs 1.
    Unit,
    /// One random integer per test, shared by all outcomes.
    FixedRandom,
    /// An independent random integer per (test, outcome).
    ValueDependentRandom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriorMode {
    Uniform,
    /// Random integer weights in `1..=20`, normalised.
    Random,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub n: usize,
    pub m: usize,
    pub num_tests: usize,
    pub num_outcomes: u32,
    pub cost_mode: CostMode,
    /// Inclusive integer range for random costs.
    pub cost_range: (u32, u32),
    pub prior_mode: PriorMode,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn binary(n: usize, m: usize, num_tests: usize, cost_mode: CostMode, seed: u64) -> Self {
        GeneratorSpec {
            n,
            m,
            num_tests,
            num_outcomes: 2,
            cost_mode,
            cost_range: (1, 5),
            prior_mode: PriorMode::Random,
            seed,
        }
    }
}

const PRIOR_WEIGHT_MAX: u32 = 20;

/// A random valid instance, fully determined by `spec`.
///
/// Classes are assigned so that each of the `m` classes is used. When the
/// random tests leave some pair of objects inseparable, unit-cost tests
/// isolating one object are appended until the instance is complete; the
/// instance name records how many were added.
pub fn generate(spec: &GeneratorSpec) -> Result<Instance> {
    let GeneratorSpec {
        n,
        m,
        num_tests,
        num_outcomes,
        cost_mode,
        cost_range: (cost_lo, cost_hi),
        prior_mode,
        seed,
    } = *spec;
    if n < 2 {
        return Err(Error::Unsatisfiable(format!("need at least 2 objects, got {n}")));
    }
    if m < 1 || m > n {
        return Err(Error::Unsatisfiable(format!("cannot use {m} classes on {n} objects")));
    }
    if num_outcomes < 2 {
        return Err(Error::Unsatisfiable(format!(
            "need at least 2 outcomes, got {num_outcomes}"
        )));
    }
    if cost_lo == 0 || cost_lo > cost_hi {
        return Err(Error::Unsatisfiable(format!(
            "cost range {cost_lo}..={cost_hi} must be positive and nonempty"
        )));
    }
    let distinct = (num_outcomes as u128)
        .checked_pow(num_tests as u32)
        .unwrap_or(u128::MAX);
    if distinct < n as u128 {
        return Err(Error::Unsatisfiable(format!(
            "{num_tests} tests with {num_outcomes} outcomes distinguish at most {distinct} objects, need {n}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut class_of: Vec<usize> = (0..n).map(|s| if s < m { s } else { rng.random_range(0..m) }).collect();
    class_of.shuffle(&mut rng);

    let mut tests = Vec::with_capacity(num_tests);
    for _ in 0..num_tests {
        let outcomes = (0..n).map(|_| rng.random_range(1..=num_outcomes)).collect();
        let mut draw = || int(rng.random_range(cost_lo..=cost_hi) as i64);
        let costs = match cost_mode {
            CostMode::Unit => vec![int(1); num_outcomes as usize],
            CostMode::FixedRandom => vec![draw(); num_outcomes as usize],
            CostMode::ValueDependentRandom => (0..num_outcomes).map(|_| draw()).collect(),
        };
        tests.push(Test::new(outcomes, costs));
    }

    let prior: Vec<Rational> = match prior_mode {
        PriorMode::Uniform => vec![Rational::new(1.into(), (n as i64).into()); n],
        PriorMode::Random => {
            let weights: Vec<i64> = (0..n).map(|_| rng.random_range(1..=PRIOR_WEIGHT_MAX) as i64).collect();
            let total: i64 = weights.iter().sum();
            weights
                .into_iter()
                .map(|w| Rational::new(w.into(), total.into()))
                .collect()
        }
    };

    let mut repaired = 0;
    while let Some(object) = first_inseparable(&tests, n) {
        let outcomes = (0..n).map(|s| if s == object { 2 } else { 1 }).collect();
        tests.push(Test::new(outcomes, vec![int(1); num_outcomes as usize]));
        repaired += 1;
    }

    let mut name = format!(
        "random n={n} m={m} tests={num_tests} outcomes={num_outcomes} costs={} seed={seed}",
        serde_json::to_value(cost_mode)?.as_str().unwrap_or("?")
    );
    if repaired > 0 {
        name.push_str(&format!(" repaired={repaired}"));
    }
    Ok(Instance::new(num_outcomes, class_of, prior, tests)?.with_name(name))
}

/// The second object of the first pair no test tells apart.
fn first_inseparable(tests: &[Test], n: usize) -> Option<ObjectId> {
    let mut seen: HashMap<Vec<Outcome>, ObjectId> = HashMap::new();
    for s in 0..n {
        let signature: Vec<Outcome> = tests.iter().map(|t| t.outcomes[s]).collect();
        if seen.insert(signature, s).is_some() {
            return Some(s);
        }
    }
    None
}
