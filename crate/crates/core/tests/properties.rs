mod common;

use std::collections::BTreeMap;

use dfep::combine::{combine_uniform, combine_with, find_replaceable, find_replaceable_with, ReplacementRule};
use dfep::greedy::{divide_pairs, root_lower_bound};
use dfep::harness::CostMode;
use dfep::model::{evaluate, pair_count, partition, restrict_tree, separated_pairs, validate_tree};
use dfep::oracle::{
    frontier_expected_at, opt_expected, opt_expected_under_budget, opt_worst, pareto_frontier, Budget, ExactSolver,
    OracleConfig,
};
use dfep::rational::int;
use dfep::{DecisionTree, Instance, ObjectSet, Rational, TestId};
use num_traits::{One, Zero};
use proptest::prelude::*;

use common::*;

fn fixed_modes() -> impl Strategy<Value = CostMode> {
    prop_oneof![Just(CostMode::Unit), Just(CostMode::FixedRandom)]
}

fn rho() -> impl Strategy<Value = Rational> {
    (1i64..=8, 1i64..=4).prop_map(|(p, q)| Rational::new(p.into(), q.into()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn pair_decomposition(inst in instance(10, 3, cost_mode()), seed: u64) {
        let set = subset(&inst, seed);
        for test in 0..inst.num_tests() {
            let parts = partition(&set, test, &inst).unwrap();
            let inside: u64 = parts.values().map(|p| pair_count(p, &inst)).sum();
            prop_assert_eq!(pair_count(&set, &inst), separated_pairs(&set, test, &inst).unwrap() + inside);
        }
    }

    #[test]
    fn pair_count_matches_brute_force(inst in instance(10, 3, cost_mode()), seed: u64) {
        let set = subset(&inst, seed);
        let list: Vec<_> = set.iter().copied().collect();
        prop_assert_eq!(pair_count(&set, &inst), brute_pairs(&list, &inst));
    }

    #[test]
    fn pair_counts_are_monotone(inst in instance(10, 3, cost_mode()), seed: u64) {
        let outer = subset(&inst, seed);
        let inner: ObjectSet = subset(&inst, seed ^ 1).intersection(&outer).copied().collect();
        prop_assert!(pair_count(&inner, &inst) <= pair_count(&outer, &inst));
        if !inner.is_empty() {
            for test in 0..inst.num_tests() {
                prop_assert!(separated_pairs(&inner, test, &inst).unwrap() <= separated_pairs(&outer, test, &inst).unwrap());
            }
        }
    }

    #[test]
    fn partition_is_exact(inst in instance(10, 3, cost_mode()), seed: u64) {
        let set = subset(&inst, seed);
        for test in 0..inst.num_tests() {
            let parts = partition(&set, test, &inst).unwrap();
            let union: ObjectSet = parts.values().flatten().copied().collect();
            prop_assert_eq!(&union, &set);
            prop_assert_eq!(parts.values().map(|p| p.len()).sum::<usize>(), set.len());
            for (&o, part) in &parts {
                prop_assert!(!part.is_empty());
                prop_assert!(part.iter().all(|&s| inst.outcome(test, s) == o));
            }
        }
    }

    #[test]
    fn cost_report_matches_path_walk(inst in instance(10, 3, cost_mode()), seed: u64) {
        let tree = random_tree(&inst.objects(), &inst, &mut seeded(seed));
        prop_assert!(validate_tree(&tree, &inst.objects(), &inst).is_empty());
        prop_assert_eq!(tree.leaf_object_count(), inst.num_objects());
        let report = evaluate(&tree, &inst).unwrap();
        let walked = walk_costs(&tree, &inst);
        prop_assert_eq!(&report.per_object, &walked);
        prop_assert_eq!(report.worst, worst_of(&walked));
        prop_assert_eq!(report.expected, expected_of(&walked, &inst));
    }

    #[test]
    fn restriction_never_increases_costs(inst in instance(10, 3, cost_mode()), seed: u64) {
        let tree = random_tree(&inst.objects(), &inst, &mut seeded(seed));
        let keep = subset(&inst, seed.wrapping_add(7));
        let restricted = restrict_tree(&tree, &keep, &inst).unwrap();
        prop_assert!(validate_tree(&restricted, &keep, &inst).is_empty());
        let before = evaluate(&tree, &inst).unwrap().per_object;
        let after = evaluate(&restricted, &inst).unwrap().per_object;
        prop_assert_eq!(after.keys().copied().collect::<ObjectSet>(), keep);
        for (s, cost) in &after {
            prop_assert!(cost <= &before[s]);
        }
    }

    #[test]
    fn greedy_nodes_use_separating_tests(inst in instance(10, 3, cost_mode())) {
        let (tree, trace) = divide_pairs(&inst).unwrap();
        prop_assert!(validate_tree(&tree, &inst.objects(), &inst).is_empty());
        check_greedy_node(&tree, &inst, u64::MAX)?;
        prop_assert!(trace.steps.iter().all(|s| s.pairs_after.iter().all(|&(_, p)| p < s.pairs_before)));
    }

    #[test]
    fn fixed_cost_greedy_uses_reduced_criterion(inst in instance(10, 3, fixed_modes())) {
        let (tree, _) = divide_pairs(&inst).unwrap();
        prop_assert_eq!(tree, reduced_greedy(&inst.objects(), &inst));
    }

    #[test]
    fn find_replaceable_is_an_antichain_covering_deep_leaves(
        inst in instance(10, 3, cost_mode()),
        seed: u64,
        threshold in (0i64..=12, 1i64..=3).prop_map(|(p, q)| Rational::new(p.into(), q.into())),
        literal: bool,
    ) {
        let tree = random_tree(&inst.objects(), &inst, &mut seeded(seed));
        let rule = if literal { ReplacementRule::FirstReached } else { ReplacementRule::Crossing };
        let nodes = find_replaceable_with(rule, &tree, &inst, &threshold).unwrap();
        for (k, a) in nodes.iter().enumerate() {
            for b in &nodes[k + 1..] {
                prop_assert!(!b.starts_with(a) && !a.starts_with(b));
            }
        }
        let costs = walk_costs(&tree, &inst);
        for (path, leaf) in tree.leaves() {
            let covering = nodes.iter().filter(|n| path.starts_with(n)).count();
            let s = *leaf.objects().first().unwrap();
            if costs[&s] >= threshold {
                prop_assert_eq!(covering, 1);
            }
            prop_assert!(covering <= 1);
        }
        if literal {
            for node in &nodes {
                prop_assert!(edge_cost(&tree, node, &inst) >= threshold);
            }
        }
    }

    #[test]
    fn combine_per_object_bounds(inst in instance(10, 3, cost_mode()), seeds: (u64, u64), rho in rho()) {
        let d_e = random_tree(&inst.objects(), &inst, &mut seeded(seeds.0));
        let d_w = random_tree(&inst.objects(), &inst, &mut seeded(seeds.1));
        let combined = combine_with(ReplacementRule::Crossing, &d_e, &d_w, &rho, &inst).unwrap();
        prop_assert!(validate_tree(&combined.tree, &inst.objects(), &inst).is_empty());
        let w = evaluate(&d_w, &inst).unwrap().worst;
        let before = walk_costs(&d_e, &inst);
        let after = walk_costs(&combined.tree, &inst);
        let factor = Rational::one() + rho.recip();
        for (s, cost) in &after {
            prop_assert!(*cost <= &before[s] + &w);
            let replaced = combined.replaced.iter().any(|p| d_e.node(p).unwrap().objects().contains(s));
            if replaced {
                prop_assert!(*cost <= &factor * &before[s]);
            } else {
                prop_assert_eq!(cost, &before[s]);
            }
        }
    }

    #[test]
    fn combine_meets_both_bounds_with_fixed_costs(inst in instance(10, 3, fixed_modes()), seeds: (u64, u64), rho in rho()) {
        let d_e = random_tree(&inst.objects(), &inst, &mut seeded(seeds.0));
        let d_w = random_tree(&inst.objects(), &inst, &mut seeded(seeds.1));
        let combined = combine_with(ReplacementRule::Crossing, &d_e, &d_w, &rho, &inst).unwrap();
        let w = evaluate(&d_w, &inst).unwrap().worst;
        let e = evaluate(&d_e, &inst).unwrap().expected;
        let report = evaluate(&combined.tree, &inst).unwrap();
        prop_assert!(report.worst <= (Rational::one() + &rho) * &w);
        prop_assert!(report.expected <= (Rational::one() + rho.recip()) * &e);
    }

    #[test]
    fn combine_is_identity_on_compliant_input(inst in instance(10, 3, cost_mode()), seeds: (u64, u64), rho in rho()) {
        let d_e = random_tree(&inst.objects(), &inst, &mut seeded(seeds.0));
        let d_w = random_tree(&inst.objects(), &inst, &mut seeded(seeds.1));
        let threshold = &rho * evaluate(&d_w, &inst).unwrap().worst;
        if evaluate(&d_e, &inst).unwrap().worst <= threshold {
            let combined = combine_with(ReplacementRule::Crossing, &d_e, &d_w, &rho, &inst).unwrap();
            prop_assert_eq!(combined.tree, d_e);
        }
    }

    #[test]
    fn combine_uniform_is_the_cheapest_candidate(inst in instance(9, 2, Just(CostMode::Unit)), seeds: (u64, u64), i in 1u64..=12) {
        let d_e = random_tree(&inst.objects(), &inst, &mut seeded(seeds.0));
        let d_w = random_tree(&inst.objects(), &inst, &mut seeded(seeds.1));
        let w = evaluate(&d_w, &inst).unwrap().worst;
        prop_assume!(w >= Rational::one());
        let combined = combine_uniform(&d_e, &d_w, i, &inst).unwrap();
        let report = evaluate(&combined.tree, &inst).unwrap();
        prop_assert!(combined.candidates.iter().all(|(_, e)| report.expected <= *e));
        let e = evaluate(&d_e, &inst).unwrap().expected;
        let lower = Rational::from_integer(combined.params.lower.into());
        prop_assert!(report.expected <= (Rational::one() + &w / lower) * e);
        prop_assert!(report.worst <= Rational::from_integer(i.into()) + w);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn witnesses_reproduce_values(inst in instance(8, 3, cost_mode())) {
        let objects = inst.objects();
        let w = opt_worst(&objects, &inst).unwrap();
        let e = opt_expected(&objects, &inst).unwrap();
        prop_assert!(validate_tree(&w.tree, &objects, &inst).is_empty());
        prop_assert!(validate_tree(&e.tree, &objects, &inst).is_empty());
        prop_assert_eq!(evaluate(&w.tree, &inst).unwrap().worst, w.value);
        prop_assert_eq!(evaluate(&e.tree, &inst).unwrap().expected, e.value);
    }

    #[test]
    fn optima_match_enumeration(inst in instance(6, 2, cost_mode()), seed: u64) {
        let set = subset(&inst, seed);
        let list: Vec<_> = set.iter().copied().collect();
        let (worst, expected) = brute_optima(&list, &inst);
        let mut solver = ExactSolver::new(&inst, &set, OracleConfig::default()).unwrap();
        prop_assert_eq!(solver.opt_worst().unwrap().value, worst);
        prop_assert_eq!(solver.opt_expected().unwrap().value, expected);
    }

    #[test]
    fn optima_shrink_on_subsets(inst in instance(8, 3, cost_mode()), seed: u64) {
        let full = inst.objects();
        let part = subset(&inst, seed);
        prop_assert!(opt_worst(&part, &inst).unwrap().value <= opt_worst(&full, &inst).unwrap().value);
        prop_assert!(opt_expected(&part, &inst).unwrap().value <= opt_expected(&full, &inst).unwrap().value);
    }

    #[test]
    fn root_lower_bound_is_below_optimum(inst in instance(8, 2, cost_mode())) {
        let full = inst.objects();
        prop_assume!(!inst.is_homogeneous(&full));
        prop_assert!(root_lower_bound(&full, &inst).unwrap() <= opt_worst(&full, &inst).unwrap().value);
    }

    #[test]
    fn budgeted_optimum_is_monotone(inst in instance(7, 2, cost_mode()), extra in 0i64..=6) {
        let objects = inst.objects();
        let w = opt_worst(&objects, &inst).unwrap().value;
        let e = opt_expected(&objects, &inst).unwrap().value;
        prop_assert!(opt_expected_under_budget(&objects, &Budget::AtMost(&w - Rational::new(1.into(), 2.into())), &inst).unwrap().is_none());
        let mut previous: Option<Rational> = None;
        for step in 0..=extra {
            let budget = &w + int(step);
            let result = opt_expected_under_budget(&objects, &Budget::AtMost(budget.clone()), &inst).unwrap().unwrap();
            let report = evaluate(&result.tree, &inst).unwrap();
            prop_assert!(report.worst <= budget);
            prop_assert_eq!(&report.expected, &result.value);
            prop_assert!(result.value >= e);
            if let Some(p) = &previous {
                prop_assert!(result.value <= *p);
            }
            previous = Some(result.value);
        }
        let unbounded = opt_expected_under_budget(&objects, &Budget::Unbounded, &inst).unwrap().unwrap();
        prop_assert_eq!(unbounded.value, e);
    }

    #[test]
    fn frontier_is_a_staircase_below_combined_trees(inst in instance(7, 2, cost_mode()), rho in rho()) {
        let objects = inst.objects();
        let frontier = pareto_frontier(&inst).unwrap();
        let w = opt_worst(&objects, &inst).unwrap();
        let e = opt_expected(&objects, &inst).unwrap();
        prop_assert_eq!(&frontier.first().unwrap().budget, &w.value);
        prop_assert_eq!(&frontier.last().unwrap().expected, &e.value);
        for pair in frontier.windows(2) {
            prop_assert!(pair[0].budget < pair[1].budget);
            prop_assert!(pair[0].expected > pair[1].expected);
        }
        let combined = combine_with(ReplacementRule::Crossing, &e.tree, &w.tree, &rho, &inst).unwrap();
        let report = evaluate(&combined.tree, &inst).unwrap();
        let floor = frontier_expected_at(&frontier, &report.worst).unwrap();
        prop_assert!(report.expected >= *floor);
    }
}

fn check_greedy_node(tree: &DecisionTree, inst: &Instance, parent_pairs: u64) -> Result<(), TestCaseError> {
    let objects = tree.objects();
    let list: Vec<_> = objects.iter().copied().collect();
    let pairs = brute_pairs(&list, inst);
    prop_assert!(pairs < parent_pairs);
    if let DecisionTree::Internal { test, children } = tree {
        prop_assert!(groups(&list, *test, inst).len() >= 2);
        for child in children.values() {
            check_greedy_node(child, inst, pairs)?;
        }
    }
    Ok(())
}

/// Greedy with the criterion `c(t) / (P(S) - max_i P(S_t^i))`, valid when a
/// test costs the same on every outcome.
fn reduced_greedy(objects: &ObjectSet, inst: &Instance) -> DecisionTree {
    let list: Vec<_> = objects.iter().copied().collect();
    let total = brute_pairs(&list, inst);
    if total == 0 {
        return DecisionTree::leaf(inst.class_of(list[0]), objects.clone());
    }
    let mut best: Option<(TestId, Rational)> = None;
    for test in 0..inst.num_tests() {
        let parts = groups(&list, test, inst);
        let largest = parts.values().map(|p| brute_pairs(p, inst)).max().unwrap();
        if parts.len() < 2 || largest == total {
            continue;
        }
        let value = inst.cost(test, 1) / Rational::from_integer((total - largest).into());
        if best.as_ref().is_none_or(|(_, b)| value < *b) {
            best = Some((test, value));
        }
    }
    let (test, _) = best.expect("complete instance");
    let children: BTreeMap<_, _> = groups(&list, test, inst)
        .into_iter()
        .map(|(o, part)| (o, reduced_greedy(&part.into_iter().collect(), inst)))
        .collect();
    DecisionTree::internal(test, children)
}

fn edge_cost(tree: &DecisionTree, path: &[u32], inst: &Instance) -> Rational {
    let mut cost = Rational::zero();
    let mut node = tree;
    for outcome in path {
        let DecisionTree::Internal { test, children } = node else {
            unreachable!()
        };
        cost += inst.cost(*test, *outcome);
        node = &children[outcome];
    }
    cost
}

#[test]
fn default_find_replaceable_matches_literal_rule_on_integer_unit_thresholds() {
    for seed in 0..200 {
        let inst =
            dfep::harness::generate(&dfep::harness::GeneratorSpec::binary(8, 3, 5, CostMode::Unit, seed)).unwrap();
        let tree = random_tree(&inst.objects(), &inst, &mut seeded(seed));
        for t in 0..5 {
            let threshold = int(t);
            assert_eq!(
                find_replaceable(&tree, &inst, &threshold).unwrap(),
                find_replaceable_with(ReplacementRule::FirstReached, &tree, &inst, &threshold).unwrap()
            );
        }
    }
}
