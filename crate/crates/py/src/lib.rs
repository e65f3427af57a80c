//! Python bindings: filtrations, `φ`/`ψ`, the depth transform and the catalog.
//!
//! Rationals cross the boundary as `fractions.Fraction`; inputs may also be
//! `int` or a string such as `"17/16"`. Every library error becomes `ValueError`.

use std::collections::BTreeMap;

use herbrand_core::arith::{self, Rational};
use herbrand_core::catalog::{self, CatalogEntry, Family, VerificationReport};
use herbrand_core::depth::{Depth, DepthReport, DepthTransform};
use herbrand_core::extspec;
use herbrand_core::filtration::{RamificationFiltration, ValidationMode};
use herbrand_core::herbrand::{self as hh, PiecewiseLinear};
use num_bigint::BigUint;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyString};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// `Fraction`, `int` or `"p/q"`.
struct Q(Rational);

impl<'py> FromPyObject<'_, 'py> for Q {
    type Error = PyErr;

    fn extract(obj: Borrowed<'_, 'py, PyAny>) -> PyResult<Self> {
        if let Ok(s) = obj.cast::<PyString>() {
            let s = s.to_cow()?;
            return arith::parse_rational(&s)
                .map(Q)
                .ok_or_else(|| PyValueError::new_err(format!("not a rational number: {s:?}")));
        }
        Ok(Q(obj.extract::<Rational>()?))
    }
}

fn depth(r: Q) -> PyResult<Depth> {
    Depth::new(r.0).map_err(value_error)
}

fn mode(lenient: bool) -> ValidationMode {
    if lenient {
        ValidationMode::OrdersOnly
    } else {
        ValidationMode::Strict
    }
}

/// Lower-numbering filtration `G_{-1} ⊇ G_0 ⊇ G_1 ⊇ …` given by its group orders.
#[pyclass(module = "herbrand", name = "Filtration", frozen, eq, skip_from_py_object)]
#[derive(Clone)]
struct PyFiltration {
    inner: RamificationFiltration,
    transform: DepthTransform,
}

impl PyFiltration {
    fn wrap(inner: RamificationFiltration) -> Self {
        let transform = DepthTransform::new(&inner);
        PyFiltration { inner, transform }
    }
}

impl PartialEq for PyFiltration {
    fn eq(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

#[pymethods]
impl PyFiltration {
    #[new]
    #[pyo3(signature = (p, orders, lenient = false))]
    fn new(p: u64, orders: Vec<BigUint>, lenient: bool) -> PyResult<Self> {
        RamificationFiltration::with_mode(p, orders, mode(lenient)).map(Self::wrap).map_err(value_error)
    }

    /// Builds from `|G|` and `(index, order_after)` drops.
    #[staticmethod]
    #[pyo3(signature = (p, group_order, breaks, lenient = false))]
    fn from_breaks(p: u64, group_order: BigUint, breaks: Vec<(i64, BigUint)>, lenient: bool) -> PyResult<Self> {
        RamificationFiltration::from_breaks(p, group_order, breaks, mode(lenient))
            .map(Self::wrap)
            .map_err(value_error)
    }

    #[getter]
    fn residue_char(&self) -> u64 {
        self.inner.residue_char()
    }

    #[getter]
    fn group_order(&self) -> BigUint {
        self.inner.group_order().clone()
    }

    /// `[g_{-1}, g_0, …, g_N]`, ending in 1.
    #[getter]
    fn orders(&self) -> Vec<BigUint> {
        self.inner.orders()
    }

    /// `(index, order_after)` for every drop at index `>= 0`.
    #[getter]
    fn breaks(&self) -> PyResult<Vec<(i64, BigUint)>> {
        let drops = self.inner.break_sequence().map_err(value_error)?;
        Ok(drops.into_iter().map(|d| (d.index, d.order_after)).collect())
    }

    #[getter]
    fn ramification_index(&self) -> BigUint {
        self.inner.ramification_index()
    }

    #[getter]
    fn wild_order(&self) -> BigUint {
        self.inner.wild_order()
    }

    /// `"unramified"`, `"tame"` or `"wild"`.
    #[getter]
    fn classification(&self) -> &'static str {
        self.inner.classify().as_str()
    }

    #[getter]
    fn largest_break(&self) -> PyResult<i64> {
        self.inner.largest_break().map_err(value_error)
    }

    /// `(unramified, tame, wild)` degrees.
    fn tower_degrees(&self) -> (BigUint, BigUint, BigUint) {
        self.inner.tower_degrees()
    }

    fn order_at(&self, t: Q) -> PyResult<BigUint> {
        self.inner.group_order_at(&t.0).map_err(value_error)
    }

    fn phi(&self) -> HerbrandFunction {
        HerbrandFunction(self.transform.phi().clone())
    }

    fn psi(&self) -> PyResult<HerbrandFunction> {
        self.transform.phi().inverse().map(HerbrandFunction).map_err(value_error)
    }

    fn upper_breaks(&self) -> PyResult<Vec<Rational>> {
        hh::upper_breaks(&self.inner).map_err(value_error)
    }

    /// `φ(u)` by direct summation, for integer `u`.
    fn phi_oracle(&self, u: u64) -> Rational {
        hh::phi_integer_oracle(&self.inner, u)
    }

    fn invariant_a(&self) -> Rational {
        self.transform.invariant_a().clone()
    }

    fn tail_threshold(&self) -> Rational {
        self.transform.tail_threshold()
    }

    fn parameter_depth(&self, r: Q) -> PyResult<Rational> {
        Ok(self.transform.parameter_depth(&depth(r)?).into_inner())
    }

    fn depth_ratio(&self, r: Q) -> PyResult<Rational> {
        self.transform.depth_ratio(&depth(r)?).map_err(value_error)
    }

    fn depth_gap(&self, r: Q) -> PyResult<Rational> {
        Ok(self.transform.depth_gap(&depth(r)?))
    }

    fn is_depth_preserving(&self) -> bool {
        self.transform.is_depth_preserving()
    }

    /// Least `r >= 0` with `φ(er)/r - 1 <= eps` from `r` on; 0 when every `r > 0` qualifies.
    fn min_depth_for_ratio(&self, eps: Q) -> PyResult<Rational> {
        self.transform.min_depth_for_ratio(&eps.0).map(Depth::into_inner).map_err(value_error)
    }

    fn moy_prasad_threshold(&self, r: Q) -> PyResult<BigUint> {
        Ok(self.transform.moy_prasad_threshold(&depth(r)?))
    }

    fn report<'py>(&self, py: Python<'py>, r: Q) -> PyResult<Bound<'py, PyDict>> {
        report_dict(py, &self.transform.report(&depth(r)?))
    }

    /// Text form of the `.ext` format.
    fn to_text(&self) -> String {
        breaks_document(&self.inner).to_text()
    }

    fn __repr__(&self) -> String {
        format!("Filtration({}, {:?})", self.inner.residue_char(), self.inner.orders().iter().map(ToString::to_string).collect::<Vec<_>>())
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }
}

fn breaks_document(f: &RamificationFiltration) -> extspec::ExtensionSpecDocument {
    extspec::ExtensionSpecDocument::Breaks {
        residue_char: f.residue_char(),
        group_order: f.group_order().clone(),
        breaks: f.drops().iter().map(|d| (d.index, d.order_after.clone())).collect(),
    }
}

fn report_dict<'py>(py: Python<'py>, r: &DepthReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("chi_depth", r.chi_depth.value())?;
    d.set_item("lambda_depth", r.lambda_depth.value())?;
    d.set_item("ratio", r.ratio.as_ref())?;
    d.set_item("gap", &r.gap)?;
    d.set_item("a", &r.invariant_a)?;
    d.set_item("classification", r.classification.as_str())?;
    Ok(d)
}

/// Continuous, piecewise-linear function on `[0, ∞)` through the origin.
#[pyclass(module = "herbrand", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct HerbrandFunction(PiecewiseLinear);

#[pymethods]
impl HerbrandFunction {
    /// From `[(x, y), …]` starting at `(0, 0)` and the slope after the last point.
    #[new]
    fn new(points: Vec<(Q, Q)>, final_slope: Q) -> PyResult<Self> {
        let points = points.into_iter().map(|(x, y)| (x.0, y.0)).collect();
        PiecewiseLinear::new(points, final_slope.0).map(HerbrandFunction).map_err(value_error)
    }

    #[staticmethod]
    fn identity() -> Self {
        HerbrandFunction(PiecewiseLinear::identity())
    }

    #[getter]
    fn breakpoints(&self) -> Vec<(Rational, Rational)> {
        self.0.breakpoints().to_vec()
    }

    #[getter]
    fn final_slope(&self) -> Rational {
        self.0.final_slope().clone()
    }

    fn slopes(&self) -> Vec<Rational> {
        self.0.slopes()
    }

    fn is_concave(&self) -> bool {
        self.0.is_concave()
    }

    fn __call__(&self, u: Q) -> PyResult<Rational> {
        self.0.evaluate(&u.0).map_err(value_error)
    }

    fn inverse(&self) -> PyResult<Self> {
        self.0.inverse().map(HerbrandFunction).map_err(value_error)
    }

    /// `self ∘ inner`.
    fn compose(&self, inner: &HerbrandFunction) -> PyResult<Self> {
        PiecewiseLinear::compose(&self.0, &inner.0).map(HerbrandFunction).map_err(value_error)
    }

    fn __repr__(&self) -> String {
        format!("HerbrandFunction({})", self.0)
    }
}

/// Parses `.ext` text or JSON into a filtration.
#[pyfunction]
#[pyo3(signature = (text, lenient = false))]
fn parse(text: &str, lenient: bool) -> PyResult<PyFiltration> {
    let m = mode(lenient);
    let doc = extspec::parse_with_mode(text, m).map_err(value_error)?;
    doc.resolve_with_mode(m).map(PyFiltration::wrap).map_err(value_error)
}

#[pyfunction]
fn families() -> Vec<&'static str> {
    Family::ALL.iter().map(|f| f.name()).collect()
}

fn build_entry(name: &str, params: Option<BTreeMap<String, u64>>) -> PyResult<CatalogEntry> {
    let family = Family::from_name(name).map_err(value_error)?;
    family.build(&params.unwrap_or_else(|| family.default_params())).map_err(value_error)
}

/// The filtration of a catalog family member.
#[pyfunction]
#[pyo3(signature = (name, **params))]
fn catalog_filtration(name: &str, params: Option<BTreeMap<String, u64>>) -> PyResult<PyFiltration> {
    Ok(PyFiltration::wrap(build_entry(name, params)?.filtration))
}

/// `{quantity: (value, provenance)}` for a catalog family member.
#[pyfunction]
#[pyo3(signature = (name, **params))]
fn catalog_expected(name: &str, params: Option<BTreeMap<String, u64>>) -> PyResult<BTreeMap<&'static str, (Rational, &'static str)>> {
    let entry = build_entry(name, params)?;
    Ok(entry.expected.iter().map(|(q, v)| (q.key(), (v.value.clone(), v.provenance.tag()))).collect())
}

fn report_to_dict<'py>(py: Python<'py>, r: &VerificationReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("entry", &r.entry)?;
    d.set_item("verdict", r.overall.as_str())?;
    let quantities = PyDict::new(py);
    for c in &r.checks {
        quantities.set_item(c.quantity.key(), (&c.expected, &c.computed, c.verdict.as_str()))?;
    }
    d.set_item("quantities", quantities)?;
    d.set_item("notices", &r.notices)?;
    Ok(d)
}

/// Recomputes `e`, `b`, `φ(b)`, `a` for one catalog entry and compares with its expected values.
#[pyfunction]
#[pyo3(signature = (name, **params))]
fn verify<'py>(py: Python<'py>, name: &str, params: Option<BTreeMap<String, u64>>) -> PyResult<Bound<'py, PyDict>> {
    report_to_dict(py, &catalog::verify_entry(&build_entry(name, params)?))
}

/// [`verify`] over every family's default grid.
#[pyfunction]
fn verify_all<'py>(py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let entries = catalog::default_entries().map_err(value_error)?;
    entries.iter().map(|e| report_to_dict(py, &catalog::verify_entry(e))).collect()
}

#[pymodule]
fn herbrand(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFiltration>()?;
    m.add_class::<HerbrandFunction>()?;
    m.add_function(wrap_pyfunction!(parse, m)?)?;
    m.add_function(wrap_pyfunction!(families, m)?)?;
    m.add_function(wrap_pyfunction!(catalog_filtration, m)?)?;
    m.add_function(wrap_pyfunction!(catalog_expected, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(verify_all, m)?)?;
    Ok(())
}
