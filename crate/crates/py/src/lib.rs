//! Python bindings for `dfep`. Exact rationals cross the boundary as
//! `fractions.Fraction`.

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use dfep::harness::io;
use dfep::harness::{CostMode, GeneratorSpec, PriorMode};
use dfep::Rational;

fn err(e: dfep::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn fraction<'py>(py: Python<'py>, value: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((value.to_string(),))
}

/// Accepts `Fraction`, `int` or a `"p/q"` string.
fn rational(value: &Bound<'_, PyAny>) -> PyResult<Rational> {
    dfep::rational::parse(&value.str()?.to_cow()?).map_err(err)
}

#[pyclass(name = "Instance", module = "pydfep", frozen)]
struct PyInstance {
    inner: dfep::Instance,
}

#[pymethods]
impl PyInstance {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyInstance {
            inner: io::instance_from_json(text).map_err(err)?,
        })
    }

    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        Ok(PyInstance {
            inner: io::read_instance(path).map_err(err)?,
        })
    }

    /// Random instance; `cost_mode` is `unit`, `fixed-random` or
    /// `value-dependent-random`, `prior` is `uniform` or `random`.
    #[staticmethod]
    #[pyo3(signature = (n, m, tests, outcomes = 2, cost_mode = "value-dependent-random", cost_min = 1, cost_max = 5, prior = "random", seed = 0))]
    #[allow(clippy::too_many_arguments)]
    fn generate(
        n: usize,
        m: usize,
        tests: usize,
        outcomes: u32,
        cost_mode: &str,
        cost_min: u32,
        cost_max: u32,
        prior: &str,
        seed: u64,
    ) -> PyResult<Self> {
        let cost_mode = match cost_mode {
            "unit" => CostMode::Unit,
            "fixed-random" => CostMode::FixedRandom,
            "value-dependent-random" => CostMode::ValueDependentRandom,
            other => return Err(PyValueError::new_err(format!("unknown cost mode {other:?}"))),
        };
        let prior_mode = match prior {
            "uniform" => PriorMode::Uniform,
            "random" => PriorMode::Random,
            other => return Err(PyValueError::new_err(format!("unknown prior mode {other:?}"))),
        };
        let spec = GeneratorSpec {
            n,
            m,
            num_tests: tests,
            num_outcomes: outcomes,
            cost_mode,
            cost_range: (cost_min, cost_max),
            prior_mode,
            seed,
        };
        Ok(PyInstance {
            inner: dfep::harness::generate(&spec).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        io::instance_to_json(&self.inner)
    }

    fn write(&self, path: &str) -> PyResult<()> {
        io::write_instance(&self.inner, path).map_err(err)
    }

    #[getter]
    fn name(&self) -> Option<String> {
        self.inner.name().map(str::to_owned)
    }

    #[getter]
    fn num_objects(&self) -> usize {
        self.inner.num_objects()
    }

    #[getter]
    fn num_tests(&self) -> usize {
        self.inner.num_tests()
    }

    #[getter]
    fn num_outcomes(&self) -> u32 {
        self.inner.num_outcomes()
    }

    #[getter]
    fn num_classes(&self) -> usize {
        self.inner.num_classes()
    }

    fn class_of(&self, object: usize) -> PyResult<usize> {
        self.inner.check_objects(&[object]).map_err(err)?;
        Ok(self.inner.class_of(object))
    }

    fn prior<'py>(&self, py: Python<'py>, object: usize) -> PyResult<Bound<'py, PyAny>> {
        self.inner.check_objects(&[object]).map_err(err)?;
        fraction(py, self.inner.prior(object))
    }

    fn outcome(&self, test: usize, object: usize) -> PyResult<u32> {
        self.inner.test(test).map_err(err)?;
        self.inner.check_objects(&[object]).map_err(err)?;
        Ok(self.inner.outcome(test, object))
    }

    fn cost<'py>(&self, py: Python<'py>, test: usize, outcome: u32) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, self.inner.checked_cost(test, outcome).map_err(err)?)
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(objects={}, classes={}, tests={}, outcomes={})",
            self.inner.num_objects(),
            self.inner.num_classes(),
            self.inner.num_tests(),
            self.inner.num_outcomes()
        )
    }
}

#[pyclass(name = "Tree", module = "pydfep", frozen, eq)]
#[derive(PartialEq)]
struct PyTree {
    inner: dfep::DecisionTree,
}

impl From<dfep::DecisionTree> for PyTree {
    fn from(inner: dfep::DecisionTree) -> Self {
        PyTree { inner }
    }
}

#[pymethods]
impl PyTree {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(io::tree_from_json(text).map_err(err)?.into())
    }

    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        Ok(io::read_tree(path).map_err(err)?.into())
    }

    fn to_json(&self) -> String {
        io::tree_to_json(&self.inner)
    }

    fn write(&self, path: &str) -> PyResult<()> {
        io::write_tree(&self.inner, path).map_err(err)
    }

    fn to_dot(&self, inst: &PyInstance) -> PyResult<String> {
        dfep::harness::to_dot(&self.inner, &inst.inner).map_err(err)
    }

    #[getter]
    fn is_leaf(&self) -> bool {
        self.inner.is_leaf()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    fn objects(&self) -> Vec<usize> {
        self.inner.objects().into_iter().collect()
    }

    /// Violated validity rules for `inst`; empty when the tree is valid.
    fn violations(&self, inst: &PyInstance) -> Vec<String> {
        dfep::model::validate_tree(&self.inner, &inst.inner.objects(), &inst.inner)
            .iter()
            .map(ToString::to_string)
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Tree(nodes={}, height={}, objects={})",
            self.inner.node_count(),
            self.inner.height(),
            self.inner.leaf_object_count()
        )
    }
}

/// `{"worst": Fraction, "expected": Fraction, "per_object": {id: Fraction}}`.
#[pyfunction]
fn evaluate<'py>(py: Python<'py>, tree: &PyTree, inst: &PyInstance) -> PyResult<Bound<'py, PyDict>> {
    let report = dfep::model::evaluate(&tree.inner, &inst.inner).map_err(err)?;
    let per_object = PyDict::new(py);
    for (object, cost) in &report.per_object {
        per_object.set_item(object, fraction(py, cost)?)?;
    }
    let out = PyDict::new(py);
    out.set_item("worst", fraction(py, &report.worst)?)?;
    out.set_item("expected", fraction(py, &report.expected)?)?;
    out.set_item("per_object", per_object)?;
    Ok(out)
}

/// Greedy worst-cost tree and its trace as a JSON string.
#[pyfunction]
fn divide_pairs(inst: &PyInstance) -> PyResult<(PyTree, String)> {
    let (tree, trace) = dfep::greedy::divide_pairs(&inst.inner).map_err(err)?;
    Ok((tree.into(), io::trace_to_json(&trace)))
}

#[pyfunction]
#[pyo3(signature = (inst, objects = None))]
fn root_lower_bound<'py>(
    py: Python<'py>,
    inst: &PyInstance,
    objects: Option<Vec<usize>>,
) -> PyResult<Bound<'py, PyAny>> {
    fraction(
        py,
        &dfep::greedy::root_lower_bound(&object_set(inst, objects), &inst.inner).map_err(err)?,
    )
}

fn object_set(inst: &PyInstance, objects: Option<Vec<usize>>) -> dfep::ObjectSet {
    objects.map_or_else(|| inst.inner.objects(), |o| o.into_iter().collect())
}

/// `(OPT_W, witness tree)` over `objects` (all objects by default).
#[pyfunction]
#[pyo3(signature = (inst, objects = None))]
fn opt_worst<'py>(
    py: Python<'py>,
    inst: &PyInstance,
    objects: Option<Vec<usize>>,
) -> PyResult<(Bound<'py, PyAny>, PyTree)> {
    let result = dfep::oracle::opt_worst(&object_set(inst, objects), &inst.inner).map_err(err)?;
    Ok((fraction(py, &result.value)?, result.tree.into()))
}

/// `(OPT_E, witness tree)` over `objects` (all objects by default).
#[pyfunction]
#[pyo3(signature = (inst, objects = None))]
fn opt_expected<'py>(
    py: Python<'py>,
    inst: &PyInstance,
    objects: Option<Vec<usize>>,
) -> PyResult<(Bound<'py, PyAny>, PyTree)> {
    let result = dfep::oracle::opt_expected(&object_set(inst, objects), &inst.inner).map_err(err)?;
    Ok((fraction(py, &result.value)?, result.tree.into()))
}

/// `[(budget, expected), ...]` with budgets increasing.
#[pyfunction]
fn pareto_frontier<'py>(py: Python<'py>, inst: &PyInstance) -> PyResult<Vec<(Bound<'py, PyAny>, Bound<'py, PyAny>)>> {
    dfep::oracle::pareto_frontier(&inst.inner)
        .map_err(err)?
        .iter()
        .map(|p| Ok((fraction(py, &p.budget)?, fraction(py, &p.expected)?)))
        .collect()
}

#[pyfunction]
fn combine_trees(d_e: &PyTree, d_w: &PyTree, rho: &Bound<'_, PyAny>, inst: &PyInstance) -> PyResult<PyTree> {
    let rho = rational(rho)?;
    Ok(dfep::combine::combine_trees(&d_e.inner, &d_w.inner, &rho, &inst.inner)
        .map_err(err)?
        .into())
}

/// Returns the chosen tree and the threshold `i` it was built with.
#[pyfunction]
fn combine_uniform(d_e: &PyTree, d_w: &PyTree, rho_numerator: u64, inst: &PyInstance) -> PyResult<(PyTree, u64)> {
    let combined = dfep::combine::combine_uniform(&d_e.inner, &d_w.inner, rho_numerator, &inst.inner).map_err(err)?;
    Ok((combined.tree.into(), combined.chosen))
}

#[pyfunction]
fn harmonic(py: Python<'_>, k: u64) -> PyResult<Bound<'_, PyAny>> {
    fraction(py, &dfep::oracle::harmonic(k))
}

/// Pair count of `objects` (all objects by default).
#[pyfunction]
#[pyo3(signature = (inst, objects = None))]
fn pair_count(inst: &PyInstance, objects: Option<Vec<usize>>) -> PyResult<u64> {
    let objects = object_set(inst, objects);
    inst.inner.check_objects(&objects).map_err(err)?;
    Ok(dfep::model::pair_count(&objects, &inst.inner))
}

/// Buckets of `objects` under `test`, keyed by outcome.
#[pyfunction]
#[pyo3(signature = (inst, test, objects = None))]
fn partition(inst: &PyInstance, test: usize, objects: Option<Vec<usize>>) -> PyResult<BTreeMap<u32, Vec<usize>>> {
    let parts = dfep::model::partition(&object_set(inst, objects), test, &inst.inner).map_err(err)?;
    Ok(parts
        .into_iter()
        .map(|(o, set)| (o, set.into_iter().collect()))
        .collect())
}

#[pymodule]
fn pydfep(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_class::<PyTree>()?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(divide_pairs, m)?)?;
    m.add_function(wrap_pyfunction!(root_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(opt_worst, m)?)?;
    m.add_function(wrap_pyfunction!(opt_expected, m)?)?;
    m.add_function(wrap_pyfunction!(pareto_frontier, m)?)?;
    m.add_function(wrap_pyfunction!(combine_trees, m)?)?;
    m.add_function(wrap_pyfunction!(combine_uniform, m)?)?;
    m.add_function(wrap_pyfunction!(harmonic, m)?)?;
    m.add_function(wrap_pyfunction!(pair_count, m)?)?;
    m.add_function(wrap_pyfunction!(partition, m)?)?;
    Ok(())
}
