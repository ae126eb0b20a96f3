"""Smoke test for the pydfep extension module.

Build and install the module first, e.g.

    maturin develop -m crates/py/Cargo.toml

or build with cargo and put the shared library on PYTHONPATH as pydfep.so.
"""

from fractions import Fraction

import pydfep

# Two objects, two classes; t0 costs (2, 4), t1 costs (3, 3).
DOC = """{
  "num_outcomes": 2,
  "objects": [{"id": 0, "class": 0, "prior": "1/4"}, {"id": 1, "class": 1, "prior": "3/4"}],
  "tests": [
    {"id": 0, "costs": ["2", "4"], "outcomes": [1, 2]},
    {"id": 1, "costs": ["3", "3"], "outcomes": [1, 2]}
  ]
}"""


def main():
    inst = pydfep.Instance.from_json(DOC)
    assert inst.num_objects == 2 and inst.num_classes == 2
    assert inst.prior(0) == Fraction(1, 4)
    assert inst.cost(0, 2) == Fraction(4)

    tree, trace = pydfep.divide_pairs(inst)
    report = pydfep.evaluate(tree, inst)
    assert report["worst"] == Fraction(3), report
    assert pydfep.root_lower_bound(inst) == Fraction(3)

    worst, d_w = pydfep.opt_worst(inst)
    expected, d_e = pydfep.opt_expected(inst)
    assert worst == 3 and expected == 3  # t0 would cost 1/4*2 + 3/4*4 = 7/2
    assert pydfep.Tree.from_json(d_w.to_json()) == d_w

    combined = pydfep.combine_trees(d_e, d_w, Fraction(1, 2), inst)
    assert combined.violations(inst) == []
    assert pydfep.evaluate(combined, inst)["worst"] <= Fraction(3, 2) * worst

    assert pydfep.harmonic(3) == Fraction(11, 6)
    assert pydfep.pair_count(inst) == 1
    assert pydfep.partition(inst, 0) == {1: [0], 2: [1]}

    unit = pydfep.Instance.generate(8, 3, 5, cost_mode="unit", seed=7)
    _, uw = pydfep.opt_worst(unit)
    _, ue = pydfep.opt_expected(unit)
    best, chosen = pydfep.combine_uniform(ue, uw, 2, unit)
    assert best.violations(unit) == [] and chosen >= 1

    frontier = pydfep.pareto_frontier(unit)
    assert frontier[0][0] == pydfep.opt_worst(unit)[0]
    assert "digraph" in best.to_dot(unit)

    try:
        pydfep.Instance.from_json(DOC.replace('"3/4"', '"1/2"'))
    except ValueError as e:
        assert "prior sums to 3/4" in str(e)
    else:
        raise AssertionError("invalid instance accepted")

    print("pydfep smoke test passed")


if __name__ == "__main__":
    main()
