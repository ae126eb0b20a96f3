use std::collections::{BTreeMap, HashMap};

use super::{Instance, ObjectSet, Outcome, TestId};
use crate::error::Result;

/// Splits `objects` by the outcome of `test`. Empty buckets are omitted.
pub fn partition(objects: &ObjectSet, test: TestId, inst: &Instance) -> Result<BTreeMap<Outcome, ObjectSet>> {
    let t = inst.test(test)?;
    inst.check_objects(objects)?;
    let mut buckets: BTreeMap<Outcome, ObjectSet> = BTreeMap::new();
    for &s in objects {
        buckets.entry(t.outcomes[s]).or_default().insert(s);
    }
    Ok(buckets)
}

/// Number of pairs in `objects` whose members belong to different classes.
pub fn pair_count(objects: &ObjectSet, inst: &Instance) -> u64 {
    let mut per_class: HashMap<usize, u64> = HashMap::new();
    for &s in objects {
        *per_class.entry(inst.class_of(s)).or_default() += 1;
    }
    let total = objects.len() as u64;
    let same: u64 = per_class.values().map(|n| n * n).sum();
    (total * total - same) / 2
}

/// Number of separable pairs in `objects` that `test` sends to different
/// outcomes.
///
/// Counted by inclusion-exclusion over (class, outcome) cells rather than by
/// summing [`pair_count`] over the partition.
pub fn separated_pairs(objects: &ObjectSet, test: TestId, inst: &Instance) -> Result<u64> {
    let t = inst.test(test)?;
    inst.check_objects(objects)?;
    let mut by_class: HashMap<usize, u64> = HashMap::new();
    let mut by_outcome: HashMap<Outcome, u64> = HashMap::new();
    let mut by_cell: HashMap<(usize, Outcome), u64> = HashMap::new();
    for &s in objects {
        let class = inst.class_of(s);
        let outcome = t.outcomes[s];
        *by_class.entry(class).or_default() += 1;
        *by_outcome.entry(outcome).or_default() += 1;
        *by_cell.entry((class, outcome)).or_default() += 1;
    }
    let squares = |counts: &mut dyn Iterator<Item = &u64>| -> u64 { counts.map(|n| n * n).sum() };
    let total = objects.len() as u64;
    let ordered = total * total + squares(&mut by_cell.values())
        - squares(&mut by_class.values())
        - squares(&mut by_outcome.values());
    Ok(ordered / 2)
}
