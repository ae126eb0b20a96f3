//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls the library's algorithms: partitions, pair counts,
//! path costs and optima are recomputed from the raw instance tables.

#![allow(dead_code)]

use std::collections::BTreeMap;

use dfep::harness::{generate, CostMode, GeneratorSpec, PriorMode};
use dfep::{DecisionTree, Instance, ObjectId, ObjectSet, Outcome, Rational, TestId};
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Profile = BTreeMap<ObjectId, Rational>;

pub fn groups(objects: &[ObjectId], test: TestId, inst: &Instance) -> BTreeMap<Outcome, Vec<ObjectId>> {
    let mut out: BTreeMap<Outcome, Vec<ObjectId>> = BTreeMap::new();
    for &s in objects {
        out.entry(inst.outcome(test, s)).or_default().push(s);
    }
    out
}

/// Pairs of objects in different classes, counted one by one.
pub fn brute_pairs(objects: &[ObjectId], inst: &Instance) -> u64 {
    let mut count = 0;
    for (k, &a) in objects.iter().enumerate() {
        for &b in &objects[k + 1..] {
            if inst.class_of(a) != inst.class_of(b) {
                count += 1;
            }
        }
    }
    count
}

fn homogeneous(objects: &[ObjectId], inst: &Instance) -> bool {
    objects.windows(2).all(|w| inst.class_of(w[0]) == inst.class_of(w[1]))
}

/// Per-object cost profile of every tree that splits with a test of at least
/// two nonempty branches until each set is homogeneous.
pub fn all_profiles(objects: &[ObjectId], inst: &Instance) -> Vec<Profile> {
    if homogeneous(objects, inst) {
        return vec![objects.iter().map(|&s| (s, Rational::zero())).collect()];
    }
    let mut out = Vec::new();
    for test in 0..inst.num_tests() {
        let parts = groups(objects, test, inst);
        if parts.len() < 2 {
            continue;
        }
        let mut partial: Vec<Profile> = vec![Profile::new()];
        for (&outcome, part) in &parts {
            let cost = inst.cost(test, outcome);
            let sub = all_profiles(part, inst);
            let mut next = Vec::with_capacity(partial.len() * sub.len());
            for base in &partial {
                for profile in &sub {
                    let mut merged = base.clone();
                    merged.extend(profile.iter().map(|(&s, c)| (s, c + cost)));
                    next.push(merged);
                }
            }
            partial = next;
        }
        out.extend(partial);
    }
    out
}

/// Minimum worst and minimum expected cost over all enumerated trees.
pub fn brute_optima(objects: &[ObjectId], inst: &Instance) -> (Rational, Rational) {
    let profiles = all_profiles(objects, inst);
    assert!(!profiles.is_empty(), "instance incomplete on {objects:?}");
    let worst = profiles
        .iter()
        .map(|p| p.values().max().cloned().unwrap_or_else(Rational::zero))
        .min()
        .unwrap();
    let expected = profiles
        .iter()
        .map(|p| p.iter().map(|(&s, c)| inst.prior(s) * c).sum::<Rational>())
        .min()
        .unwrap();
    (worst, expected)
}

/// Per-object cost by replaying each leaf's outcome path from the root.
pub fn walk_costs(tree: &DecisionTree, inst: &Instance) -> Profile {
    let mut out = Profile::new();
    for (path, leaf) in tree.leaves() {
        let mut cost = Rational::zero();
        let mut node = tree;
        for &outcome in &path {
            match node {
                DecisionTree::Internal { test, children } => {
                    cost += inst.cost(*test, outcome);
                    node = &children[&outcome];
                }
                DecisionTree::Leaf { .. } => unreachable!("path continues below a leaf"),
            }
        }
        for s in leaf.objects() {
            out.insert(s, cost.clone());
        }
    }
    out
}

pub fn worst_of(profile: &Profile) -> Rational {
    profile.values().max().cloned().unwrap_or_else(Rational::zero)
}

pub fn expected_of(profile: &Profile, inst: &Instance) -> Rational {
    profile.iter().map(|(&s, c)| inst.prior(s) * c).sum()
}

/// A valid tree choosing a random usable test at each heterogeneous node.
pub fn random_tree(objects: &ObjectSet, inst: &Instance, rng: &mut ChaCha8Rng) -> DecisionTree {
    let list: Vec<ObjectId> = objects.iter().copied().collect();
    if homogeneous(&list, inst) {
        return DecisionTree::leaf(inst.class_of(list[0]), objects.clone());
    }
    let usable: Vec<TestId> = (0..inst.num_tests())
        .filter(|&t| groups(&list, t, inst).len() >= 2)
        .collect();
    let test = usable[rng.random_range(0..usable.len())];
    let children = groups(&list, test, inst)
        .into_iter()
        .map(|(o, part)| (o, random_tree(&part.into_iter().collect(), inst, rng)))
        .collect();
    DecisionTree::internal(test, children)
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cost_mode() -> impl Strategy<Value = CostMode> {
    prop_oneof![
        Just(CostMode::Unit),
        Just(CostMode::FixedRandom),
        Just(CostMode::ValueDependentRandom),
    ]
}

/// Generated instances with `2..=max_n` objects.
pub fn instance(
    max_n: usize,
    max_outcomes: u32,
    modes: impl Strategy<Value = CostMode>,
) -> impl Strategy<Value = Instance> {
    (
        2..=max_n,
        1usize..=4,
        2..=max_outcomes,
        modes,
        any::<u64>(),
        any::<bool>(),
    )
        .prop_map(move |(n, m, outcomes, cost_mode, seed, uniform)| {
            let mut num_tests = 2;
            while (outcomes as usize).pow(num_tests as u32) < n {
                num_tests += 1;
            }
            let spec = GeneratorSpec {
                n,
                m: m.min(n),
                num_tests: num_tests + (seed % 3) as usize,
                num_outcomes: outcomes,
                cost_mode,
                cost_range: (1, 6),
                prior_mode: if uniform { PriorMode::Uniform } else { PriorMode::Random },
                seed,
            };
            generate(&spec).expect("spec is satisfiable")
        })
}

/// A nonempty subset drawn from `seed`.
pub fn subset(inst: &Instance, seed: u64) -> ObjectSet {
    let mut rng = seeded(seed);
    loop {
        let set: ObjectSet = (0..inst.num_objects()).filter(|_| rng.random_bool(0.5)).collect();
        if !set.is_empty() {
            return set;
        }
    }
}

pub mod cli {
    use std::path::Path;
    use std::process::{Command, Output};

    pub fn dfep(dir: &Path, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_dfep"))
            .current_dir(dir)
            .args(args)
            .output()
            .expect("binary runs")
    }

    /// `(command, exit code, stdout, bytes of each file written)`.
    pub type Step = (String, i32, Vec<u8>, Vec<Vec<u8>>);

    /// Every CLI command exercised on generated inputs inside `dir`.
    pub fn session(dir: &Path) -> Vec<Step> {
        let steps: Vec<(Vec<&str>, Vec<&str>)> = vec![
            (
                vec![
                    "gen", "--n", "7", "--m", "3", "--tests", "5", "--seed", "11", "-o", "vd.json",
                ],
                vec!["vd.json"],
            ),
            (
                vec![
                    "gen",
                    "--n",
                    "6",
                    "--m",
                    "2",
                    "--tests",
                    "4",
                    "--cost-mode",
                    "unit",
                    "--seed",
                    "5",
                    "-o",
                    "unit.json",
                ],
                vec!["unit.json"],
            ),
            (
                vec!["gen", "--n", "5", "--m", "2", "--tests", "3", "--seed", "2"],
                vec![],
            ),
            (vec!["validate", "vd.json"], vec![]),
            (
                vec![
                    "solve",
                    "--algo",
                    "greedy",
                    "vd.json",
                    "-o",
                    "greedy.json",
                    "--trace",
                    "trace.json",
                ],
                vec!["greedy.json", "trace.json"],
            ),
            (
                vec!["solve", "--algo", "opt-worst", "vd.json", "-o", "dw.json"],
                vec!["dw.json"],
            ),
            (
                vec!["solve", "--algo", "opt-expected", "vd.json", "-o", "de.json"],
                vec!["de.json"],
            ),
            (vec!["solve", "--algo", "greedy-expected", "vd.json"], vec![]),
            (
                vec![
                    "combine",
                    "--rho",
                    "1/2",
                    "--de",
                    "de.json",
                    "--dw",
                    "dw.json",
                    "vd.json",
                    "-o",
                    "comb.json",
                ],
                vec!["comb.json"],
            ),
            (
                vec!["solve", "--algo", "opt-worst", "unit.json", "-o", "udw.json"],
                vec!["udw.json"],
            ),
            (
                vec!["solve", "--algo", "opt-expected", "unit.json", "-o", "ude.json"],
                vec!["ude.json"],
            ),
            (
                vec![
                    "combine-uniform",
                    "--rho-num",
                    "2",
                    "--de",
                    "ude.json",
                    "--dw",
                    "udw.json",
                    "unit.json",
                ],
                vec![],
            ),
            (vec!["eval", "comb.json", "vd.json"], vec![]),
            (vec!["frontier", "vd.json"], vec![]),
            (
                vec!["export-dot", "comb.json", "vd.json", "-o", "comb.dot"],
                vec!["comb.dot"],
            ),
            (
                vec![
                    "experiment",
                    "--config",
                    "exp.json",
                    "--table",
                    "table.tsv",
                    "--replay",
                    "replay.json",
                ],
                vec!["table.tsv", "replay.json"],
            ),
        ];
        std::fs::write(
            dir.join("exp.json"),
            r#"{"instances": 60, "seed": 3, "cost_modes": ["value-dependent-random"], "uniform": false}"#,
        )
        .unwrap();
        steps
            .into_iter()
            .map(|(args, files)| {
                let out = dfep(dir, &args);
                let written = files
                    .iter()
                    .map(|f| std::fs::read(dir.join(f)).unwrap_or_default())
                    .collect();
                (args.join(" "), out.status.code().unwrap_or(-1), out.stdout, written)
            })
            .collect()
    }
}
