//! Batch bound checking over generated instances.
//!
//! For each instance the runner builds an expected-cost tree `D_E` and a
//! worst-cost tree `D_W` (exact optima when the oracle is enabled, the greedy
//! heuristics otherwise) and checks:
//!
//! - greedy worst cost against `H(P(S)) * OPT_W` and the root lower bound
//!   against `OPT_W` (binary instances, oracle only);
//! - `combine_trees` over the rho grid against `(1 + rho) W` and
//!   `(1 + 1/rho) E`;
//! - `combine_uniform` for `i = 1..=2W` on unit-cost instances against
//!   `i + W` and `(1 + 2/(rho^2 + 2 rho)) E`;
//! - optimal costs of random subsets against those of the full set.
//!
//! Every flag is derived from the stored rationals when asked for.

use std::fmt::Write as _;
use std::path::PathBuf;

use num_traits::One;
use rand::seq::IteratorRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combine::{combine_uniform, combine_with, tradeoff_bounds, uniform_expected_factor, ReplacementRule};
use crate::error::{Error, Result};
use crate::greedy::{divide_pairs, mass_greedy, root_lower_bound};
use crate::model::{evaluate, pair_count, DecisionTree, Instance, ObjectSet};
use crate::oracle::{harmonic, ExactSolver, OracleConfig, DEFAULT_CAP};
use crate::rational::{int, serde_text, to_f64, Rational};

use super::generate::{generate, CostMode, GeneratorSpec, PriorMode};
use super::io::{instance_to_value, tree_to_value};

fn default_instances() -> usize {
    100
}
fn default_n() -> (usize, usize) {
    (2, 8)
}
fn default_m() -> (usize, usize) {
    (2, 4)
}
fn default_tests() -> (usize, usize) {
    (3, 6)
}
fn default_outcomes() -> u32 {
    2
}
fn default_cost_modes() -> Vec<CostMode> {
    vec![CostMode::Unit, CostMode::FixedRandom, CostMode::ValueDependentRandom]
}
fn default_cost_range() -> (u32, u32) {
    (1, 5)
}
fn default_prior_mode() -> PriorMode {
    PriorMode::Random
}
fn default_rhos() -> Vec<Rational> {
    vec![
        Rational::new(1.into(), 4.into()),
        Rational::new(1.into(), 2.into()),
        int(1),
        int(2),
        int(4),
    ]
}
fn default_true() -> bool {
    true
}
fn default_cap() -> usize {
    DEFAULT_CAP
}

/// Experiment settings. Every field has a default, so `{}` is a valid config.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_instances")]
    pub instances: usize,
    #[serde(default)]
    pub seed: u64,
    /// Inclusive range for the object count.
    #[serde(default = "default_n")]
    pub n: (usize, usize),
    /// Inclusive range for the class count, clipped to the object count.
    #[serde(default = "default_m")]
    pub m: (usize, usize),
    /// Inclusive range for the test count, raised when too few tests could
    /// separate the objects.
    #[serde(default = "default_tests")]
    pub tests: (usize, usize),
    #[serde(default = "default_outcomes")]
    pub num_outcomes: u32,
    /// Instance `k` uses `cost_modes[k % len]`.
    #[serde(default = "default_cost_modes")]
    pub cost_modes: Vec<CostMode>,
    #[serde(default = "default_cost_range")]
    pub cost_range: (u32, u32),
    #[serde(default = "default_prior_mode")]
    pub prior_mode: PriorMode,
    #[serde(default = "default_rhos", with = "serde_text::vec")]
    pub rhos: Vec<Rational>,
    /// Rule used by the rho-grid combinations.
    #[serde(default)]
    pub rule: ReplacementRule,
    /// Run `combine_uniform` for `i = 1..=2W` on unit-cost instances.
    #[serde(default = "default_true")]
    pub uniform: bool,
    #[serde(default = "default_true")]
    pub oracle: bool,
    #[serde(default = "default_cap")]
    pub oracle_cap: usize,
    /// Random nonempty proper subsets per instance whose optima are compared
    /// with the full set's. Needs the oracle.
    #[serde(default)]
    pub subsets: usize,
    /// Where the first violation is written.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replay: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl ExperimentConfig {
    pub fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Format(format!("experiment config: {msg}")));
        if self.n.0 < 2 || self.n.0 > self.n.1 {
            return bad(format!("n range {:?} must satisfy 2 <= lo <= hi", self.n));
        }
        if self.m.0 < 1 || self.m.0 > self.m.1 {
            return bad(format!("m range {:?} must satisfy 1 <= lo <= hi", self.m));
        }
        if self.tests.0 > self.tests.1 {
            return bad(format!("tests range {:?} is empty", self.tests));
        }
        if self.cost_modes.is_empty() {
            return bad("cost_modes is empty".into());
        }
        if self.oracle && self.n.1 > self.oracle_cap.min(64) {
            return Err(Error::ExceedsOracleCap {
                n_max: self.n.1,
                cap: self.oracle_cap.min(64),
            });
        }
        if let Some(rho) = self.rhos.iter().find(|r| **r <= int(0)) {
            return Err(Error::NonPositiveRho(rho.clone()));
        }
        Ok(())
    }

    /// The generator spec of instance `index`; a pure function of the config.
    pub fn spec_for(&self, index: usize) -> GeneratorSpec {
        let seed = self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(index as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(self.n.0..=self.n.1);
        let m = rng.random_range(self.m.0.min(n)..=self.m.1.min(n));
        let mut num_tests = rng.random_range(self.tests.0..=self.tests.1);
        while (self.num_outcomes as u128).saturating_pow(num_tests as u32) < n as u128 {
            num_tests += 1;
        }
        GeneratorSpec {
            n,
            m,
            num_tests,
            num_outcomes: self.num_outcomes,
            cost_mode: self.cost_modes[index % self.cost_modes.len()],
            cost_range: self.cost_range,
            prior_mode: self.prior_mode,
            seed: rng.random(),
        }
    }
}

/// The trees the combine checks start from.
#[derive(Clone, Debug)]
pub struct ReferenceTrees {
    pub d_e: DecisionTree,
    pub d_w: DecisionTree,
    /// Expected cost of `d_e`.
    pub expected: Rational,
    /// Worst cost of `d_w`.
    pub worst: Rational,
    /// Whether both trees are exact optima.
    pub optimal: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GreedyCheck {
    pub worst: Rational,
    pub pairs: u64,
    pub lower_bound: Rational,
    /// `OPT_W`, when the oracle ran.
    pub opt_worst: Option<Rational>,
    /// The ratio guarantee is only claimed for two outcomes per test.
    pub binary: bool,
}

impl GreedyCheck {
    pub fn ratio_bound(&self) -> Option<Rational> {
        self.opt_worst.as_ref().map(|w| harmonic(self.pairs) * w)
    }

    pub fn ratio_ok(&self) -> Option<bool> {
        self.ratio_bound().map(|b| self.worst <= b)
    }

    pub fn lower_bound_ok(&self) -> Option<bool> {
        self.opt_worst.as_ref().map(|w| self.lower_bound <= *w)
    }

    /// Greedy worst cost over `OPT_W`.
    pub fn ratio(&self) -> Option<f64> {
        self.opt_worst
            .as_ref()
            .map(|w| if *w == int(0) { 1.0 } else { to_f64(&(&self.worst / w)) })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TradeoffCheck {
    pub rho: Rational,
    pub worst: Rational,
    pub expected: Rational,
    pub worst_bound: Rational,
    pub expected_bound: Rational,
}

impl TradeoffCheck {
    pub fn worst_ok(&self) -> bool {
        self.worst <= self.worst_bound
    }

    pub fn expected_ok(&self) -> bool {
        self.expected <= self.expected_bound
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniformCheck {
    pub rho_numerator: u64,
    pub chosen: u64,
    pub worst: Rational,
    pub expected: Rational,
    pub worst_bound: Rational,
    pub expected_bound: Rational,
}

impl UniformCheck {
    pub fn worst_ok(&self) -> bool {
        self.worst <= self.worst_bound
    }

    pub fn expected_ok(&self) -> bool {
        self.expected <= self.expected_bound
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetCheck {
    pub objects: ObjectSet,
    pub worst: Rational,
    pub expected: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentRow {
    pub index: usize,
    pub spec: GeneratorSpec,
    /// Tests in the generated instance, including repairs.
    pub num_tests: usize,
    /// `E` and `W` of the reference trees.
    pub expected: Rational,
    pub worst: Rational,
    pub optimal: bool,
    pub greedy: GreedyCheck,
    pub tradeoffs: Vec<TradeoffCheck>,
    pub uniform: Vec<UniformCheck>,
    pub subsets: Vec<SubsetCheck>,
}

impl ExperimentRow {
    /// One line per violated bound.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.greedy.binary && self.greedy.ratio_ok() == Some(false) {
            out.push(format!(
                "greedy worst {} > H(P) * OPT_W = {}",
                self.greedy.worst,
                self.greedy.ratio_bound().expect("oracle ran")
            ));
        }
        if self.greedy.lower_bound_ok() == Some(false) {
            out.push(format!(
                "root lower bound {} > OPT_W = {}",
                self.greedy.lower_bound,
                self.greedy.opt_worst.as_ref().expect("oracle ran")
            ));
        }
        for c in &self.tradeoffs {
            if !c.worst_ok() {
                out.push(format!("rho={}: worst {} > {}", c.rho, c.worst, c.worst_bound));
            }
            if !c.expected_ok() {
                out.push(format!("rho={}: expected {} > {}", c.rho, c.expected, c.expected_bound));
            }
        }
        for c in &self.uniform {
            if !c.worst_ok() {
                out.push(format!(
                    "uniform i={}: worst {} > {}",
                    c.rho_numerator, c.worst, c.worst_bound
                ));
            }
            if !c.expected_ok() {
                out.push(format!(
                    "uniform i={}: expected {} > {}",
                    c.rho_numerator, c.expected, c.expected_bound
                ));
            }
        }
        for c in &self.subsets {
            if c.worst > self.worst || c.expected > self.expected {
                out.push(format!(
                    "subset {:?}: optima ({}, {}) exceed full set ({}, {})",
                    c.objects, c.worst, c.expected, self.worst, self.expected
                ));
            }
        }
        out
    }
}

/// Everything needed to reproduce a failing row.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReplayArtifact {
    pub index: usize,
    pub spec: GeneratorSpec,
    #[serde(with = "serde_text::vec")]
    pub rhos: Vec<Rational>,
    pub violations: Vec<String>,
    pub instance: serde_json::Value,
    pub d_e: serde_json::Value,
    pub d_w: serde_json::Value,
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub rows: Vec<ExperimentRow>,
    /// The first row with a violation, if any.
    pub replay: Option<ReplayArtifact>,
}

impl ExperimentReport {
    pub fn violation_count(&self) -> usize {
        self.rows.iter().map(|r| r.violations().len()).sum()
    }

    pub fn is_ok(&self) -> bool {
        self.replay.is_none()
    }

    /// Tab-separated table with one line per checked bound.
    pub fn table(&self) -> String {
        let mut out = String::from("instance\tn\tm\tcosts\tE\tW\tcheck\tparam\tachieved\tbound\tholds\n");
        for row in &self.rows {
            let mut line = |check: &str, param: String, achieved: &Rational, bound: &Rational, holds: bool| {
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{check}\t{param}\t{achieved}\t{bound}\t{holds}",
                    row.index,
                    row.spec.n,
                    row.spec.m,
                    cost_mode_name(row.spec.cost_mode),
                    row.expected,
                    row.worst,
                )
                .unwrap();
            };
            if let (Some(bound), Some(ok)) = (row.greedy.ratio_bound(), row.greedy.ratio_ok()) {
                line(
                    "greedy-ratio",
                    row.greedy.pairs.to_string(),
                    &row.greedy.worst,
                    &bound,
                    ok,
                );
            }
            if let (Some(opt), Some(ok)) = (&row.greedy.opt_worst, row.greedy.lower_bound_ok()) {
                line("lower-bound", "-".into(), &row.greedy.lower_bound, opt, ok);
            }
            for c in &row.tradeoffs {
                line(
                    "combine-worst",
                    c.rho.to_string(),
                    &c.worst,
                    &c.worst_bound,
                    c.worst_ok(),
                );
                line(
                    "combine-expected",
                    c.rho.to_string(),
                    &c.expected,
                    &c.expected_bound,
                    c.expected_ok(),
                );
            }
            for c in &row.uniform {
                let param = c.rho_numerator.to_string();
                line("uniform-worst", param.clone(), &c.worst, &c.worst_bound, c.worst_ok());
                line(
                    "uniform-expected",
                    param,
                    &c.expected,
                    &c.expected_bound,
                    c.expected_ok(),
                );
            }
        }
        out
    }
}

fn cost_mode_name(mode: CostMode) -> &'static str {
    match mode {
        CostMode::Unit => "unit",
        CostMode::FixedRandom => "fixed-random",
        CostMode::ValueDependentRandom => "value-dependent-random",
    }
}

/// `D_E` and `D_W` for `inst`: oracle witnesses, or the greedy trees when the
/// oracle is off.
pub fn reference_trees(inst: &Instance, config: &ExperimentConfig) -> Result<ReferenceTrees> {
    if config.oracle {
        let mut solver = ExactSolver::new(
            inst,
            &inst.objects(),
            OracleConfig {
                max_objects: config.oracle_cap,
            },
        )?;
        let w = solver.opt_worst()?;
        let e = solver.opt_expected()?;
        Ok(ReferenceTrees {
            d_e: e.tree,
            d_w: w.tree,
            expected: e.value,
            worst: w.value,
            optimal: true,
        })
    } else {
        let d_w = divide_pairs(inst)?.0;
        let d_e = mass_greedy(inst)?;
        let worst = evaluate(&d_w, inst)?.worst;
        let expected = evaluate(&d_e, inst)?.expected;
        Ok(ReferenceTrees {
            d_e,
            d_w,
            expected,
            worst,
            optimal: false,
        })
    }
}

/// All checks for a single instance.
pub fn check_instance(
    index: usize,
    spec: &GeneratorSpec,
    inst: &Instance,
    config: &ExperimentConfig,
) -> Result<ExperimentRow> {
    let refs = reference_trees(inst, config)?;
    let full = inst.objects();

    let (greedy_tree, _) = divide_pairs(inst)?;
    let greedy = GreedyCheck {
        worst: evaluate(&greedy_tree, inst)?.worst,
        pairs: pair_count(&full, inst),
        lower_bound: if inst.is_homogeneous(&full) {
            int(0)
        } else {
            root_lower_bound(&full, inst)?
        },
        opt_worst: refs.optimal.then(|| refs.worst.clone()),
        binary: inst.num_outcomes() == 2,
    };

    let mut tradeoffs = Vec::with_capacity(config.rhos.len());
    for rho in &config.rhos {
        let tree = combine_with(config.rule, &refs.d_e, &refs.d_w, rho, inst)?.tree;
        let report = evaluate(&tree, inst)?;
        let (worst_bound, expected_bound) = tradeoff_bounds(rho, &refs.worst, &refs.expected);
        tradeoffs.push(TradeoffCheck {
            rho: rho.clone(),
            worst: report.worst,
            expected: report.expected,
            worst_bound,
            expected_bound,
        });
    }

    let mut uniform = Vec::new();
    if config.uniform && inst.has_unit_costs() && refs.worst >= Rational::one() {
        let w = u64::try_from(refs.worst.to_integer()).expect("unit-cost height fits in u64");
        for i in 1..=2 * w {
            let combined = combine_uniform(&refs.d_e, &refs.d_w, i, inst)?;
            let report = evaluate(&combined.tree, inst)?;
            let rho = Rational::new(i.into(), w.into());
            uniform.push(UniformCheck {
                rho_numerator: i,
                chosen: combined.chosen,
                worst: report.worst,
                expected: report.expected,
                worst_bound: int((i + w) as i64),
                expected_bound: uniform_expected_factor(&rho) * &refs.expected,
            });
        }
    }

    let mut subsets = Vec::new();
    if config.oracle && config.subsets > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(1));
        let n = inst.num_objects();
        for _ in 0..config.subsets {
            let size = rng.random_range(1..=n);
            let objects: ObjectSet = (0..n).choose_multiple(&mut rng, size).into_iter().collect();
            let mut solver = ExactSolver::new(
                inst,
                &objects,
                OracleConfig {
                    max_objects: config.oracle_cap,
                },
            )?;
            subsets.push(SubsetCheck {
                worst: solver.opt_worst()?.value,
                expected: solver.opt_expected()?.value,
                objects,
            });
        }
    }

    Ok(ExperimentRow {
        index,
        spec: spec.clone(),
        num_tests: inst.num_tests(),
        expected: refs.expected,
        worst: refs.worst,
        optimal: refs.optimal,
        greedy,
        tradeoffs,
        uniform,
        subsets,
    })
}

/// Generates `config.instances` instances and checks every bound on each.
/// Rows are computed in parallel and returned in instance order. The first
/// row with a violation is packaged into a replay artifact, and written to
/// `config.replay` when that is set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.check()?;
    let rows = (0..config.instances)
        .into_par_iter()
        .map(|index| {
            let spec = config.spec_for(index);
            let inst = generate(&spec)?;
            check_instance(index, &spec, &inst, config)
        })
        .collect::<Result<Vec<_>>>()?;

    let replay = match rows.iter().find(|r| !r.violations().is_empty()) {
        None => None,
        Some(row) => {
            let inst = generate(&row.spec)?;
            let refs = reference_trees(&inst, config)?;
            Some(ReplayArtifact {
                index: row.index,
                spec: row.spec.clone(),
                rhos: config.rhos.clone(),
                violations: row.violations(),
                instance: instance_to_value(&inst),
                d_e: tree_to_value(&refs.d_e),
                d_w: tree_to_value(&refs.d_w),
            })
        }
    };
    if let (Some(artifact), Some(path)) = (&replay, &config.replay) {
        let mut text = serde_json::to_string_pretty(artifact)?;
        text.push('\n');
        std::fs::write(path, text)?;
    }
    Ok(ExperimentReport { rows, replay })
}
