//! Python bindings: `import ffvar`.

use std::sync::Arc;

use ffvar_core::rmt::{self, McEstimate};
use ffvar_core::{
    twist_scan as scan, CharacterGroup, CoeffTable, DivisorTable, Error, FieldCtx, FieldElement, ModelSpec,
    ModulusTemplate, PolyRing, PrimeSieve, TwistTable,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

create_exception!(ffvar, FfvarError, PyValueError);

fn err(e: Error) -> PyErr {
    FfvarError::new_err(format!("{}: {e}", e.kind()))
}

fn fraction<'py>(py: Python<'py>, v: &BigRational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((v.numer().clone(), v.denom().clone()))
}

fn estimate<'py>(py: Python<'py>, e: &McEstimate) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("estimate", e.estimate)?;
    d.set_item("stderr", e.stderr)?;
    d.set_item("samples", e.samples)?;
    d.set_item("seed", e.seed)?;
    Ok(d)
}

fn ring(q: u64) -> PyResult<PolyRing> {
    Ok(PolyRing::new(Arc::new(FieldCtx::from_order(q).map_err(err)?)))
}

fn model_spec(model: &str) -> PyResult<ModelSpec> {
    model.parse().map_err(err)
}

/// The finite field GF(q), elements addressed by index.
#[pyclass(frozen)]
struct Field {
    ctx: Arc<FieldCtx>,
}

impl Field {
    fn el(&self, i: u64) -> PyResult<FieldElement> {
        FieldElement::from_index(&self.ctx, i).map_err(err)
    }
}

#[pymethods]
impl Field {
    #[new]
    fn new(q: u64) -> PyResult<Self> {
        Ok(Field { ctx: Arc::new(FieldCtx::from_order(q).map_err(err)?) })
    }

    #[getter]
    fn q(&self) -> u32 {
        self.ctx.q()
    }

    #[getter]
    fn p(&self) -> u32 {
        self.ctx.p()
    }

    #[getter]
    fn r(&self) -> u32 {
        self.ctx.r()
    }

    /// Coefficients of the defining polynomial, lowest first.
    #[getter]
    fn modulus(&self) -> Vec<u32> {
        self.ctx.modulus().to_vec()
    }

    fn add(&self, a: u64, b: u64) -> PyResult<u32> {
        Ok(self.el(a)?.add(&self.el(b)?).map_err(err)?.index())
    }

    fn sub(&self, a: u64, b: u64) -> PyResult<u32> {
        Ok(self.el(a)?.sub(&self.el(b)?).map_err(err)?.index())
    }

    fn mul(&self, a: u64, b: u64) -> PyResult<u32> {
        Ok(self.el(a)?.mul(&self.el(b)?).map_err(err)?.index())
    }

    fn inv(&self, a: u64) -> PyResult<u32> {
        Ok(self.el(a)?.inv().map_err(err)?.index())
    }

    fn pow(&self, a: u64, e: u64) -> PyResult<u32> {
        Ok(self.el(a)?.pow(e).index())
    }

    /// Base-p digits of an element index.
    fn coeffs(&self, a: u64) -> PyResult<Vec<u32>> {
        Ok(self.el(a)?.coeffs())
    }

    fn __repr__(&self) -> String {
        format!("Field(q={})", self.ctx.q())
    }
}

#[pyfunction]
#[pyo3(signature = (k, n, r))]
fn lattice_count(k: u32, n: u64, r: u32) -> BigInt {
    rmt::lattice_count(k, n, r).into()
}

#[pyfunction]
#[pyo3(signature = (k, n, r))]
fn closed_form(k: u32, n: u64, r: u32) -> Option<BigInt> {
    rmt::closed_form(k, n, r).map(Into::into)
}

#[pyfunction]
#[pyo3(signature = (k, n, r, samples = 100_000, seed = 0))]
fn haar_mc_integral(py: Python<'_>, k: u32, n: u64, r: u32, samples: u64, seed: u64) -> PyResult<Bound<'_, PyDict>> {
    let e = rmt::haar_mc_integral(k, n, r, samples, seed).map_err(err)?;
    estimate(py, &e)
}

#[pyfunction]
#[pyo3(signature = (k, c, samples = 1_000_000, seed = 0))]
fn gamma_mc(py: Python<'_>, k: u32, c: f64, samples: u64, seed: u64) -> PyResult<Bound<'_, PyDict>> {
    let e = rmt::gamma_mc(k, c, samples, seed).map_err(err)?;
    estimate(py, &e)
}

#[pyfunction]
#[pyo3(signature = (k, c, r))]
fn gamma_from_lattice(py: Python<'_>, k: u32, c: f64, r: u32) -> PyResult<Bound<'_, PyAny>> {
    fraction(py, &rmt::gamma_from_lattice(k, c, r).map_err(err)?)
}

/// Exact variance report. `modulus` is "[c0,c1,...]" or "irr<d>".
#[pyfunction]
#[pyo3(signature = (model, q, k, n, modulus, allow_large = false))]
fn variance<'py>(
    py: Python<'py>,
    model: &str,
    q: u64,
    k: u32,
    n: usize,
    modulus: &str,
    allow_large: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let template: ModulusTemplate = modulus.parse().map_err(err)?;
    let rep = ffvar_core::run_experiment(&model_spec(model)?, q, k, n, &template, allow_large).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("q", rep.q)?;
    d.set_item("p", rep.p)?;
    d.set_item("r", rep.r)?;
    d.set_item("model", rep.model.to_string())?;
    d.set_item("k", rep.k)?;
    d.set_item("n", rep.n)?;
    d.set_item("Q", rep.modulus.coeffs().to_vec())?;
    d.set_item("phi", rep.phi)?;
    d.set_item("R", rep.degree_r)?;
    d.set_item("expectation", fraction(py, &rep.expectation)?)?;
    d.set_item("variance", fraction(py, &rep.variance)?)?;
    d.set_item("normalized", fraction(py, &rep.normalized)?)?;
    d.set_item("predicted", BigInt::from(rep.predicted))?;
    d.set_item("deviation", rep.deviation)?;
    d.set_item("flags", rep.flags.iter().map(|f| f.to_string()).collect::<Vec<_>>())?;
    Ok(d)
}

/// `(f, a_f, d_k(f))` for every monic `f` of degree `n`, `f` as coefficients.
#[pyfunction]
#[pyo3(signature = (model, q, k, n))]
fn divisor_values(model: &str, q: u64, k: u32, n: usize) -> PyResult<Vec<(Vec<u32>, i128, i128)>> {
    let ring = ring(q)?;
    let model = model_spec(model)?.build(ring.clone()).map_err(err)?;
    let sieve = Arc::new(PrimeSieve::new(ring.clone(), n.max(1)));
    let coeffs = CoeffTable::build(&model, sieve, n).map_err(err)?;
    let table = DivisorTable::build(k, &coeffs).map_err(err)?;
    Ok(ring
        .monic_enumerate(n)
        .zip(coeffs.degree_values(n).iter().zip(table.degree_values(n)))
        .map(|(f, (&a, &d))| (f.coeffs().to_vec(), a, d))
        .collect())
}

/// Classifies every nontrivial character mod `modulus`.
#[pyfunction]
#[pyo3(signature = (model, q, modulus))]
fn twist_scan<'py>(py: Python<'py>, model: &str, q: u64, modulus: &str) -> PyResult<Bound<'py, PyList>> {
    let ring = ring(q)?;
    let model = model_spec(model)?.build(ring.clone()).map_err(err)?;
    let modulus = modulus.parse::<ModulusTemplate>().and_then(|t| t.instantiate(&ring)).map_err(err)?;
    let group = Arc::new(CharacterGroup::new(&ring, &modulus).map_err(err)?);
    let r = model.nominal_degree_r(&modulus) as usize;
    let table = TwistTable::new(&model, group.clone(), r + 3).map_err(err)?;
    let out = PyList::empty(py);
    for diag in scan(&table).map_err(err)? {
        let d = PyDict::new(py);
        d.set_item("chi", diag.chi)?;
        d.set_item("exponents", diag.exponents.clone())?;
        d.set_item("even", group.is_even(diag.chi))?;
        d.set_item("primitive", group.is_primitive(diag.chi))?;
        d.set_item("max_tail", diag.max_tail)?;
        d.set_item("degree", diag.degree)?;
        d.set_item("root_moduli", diag.root_moduli.clone())?;
        d.set_item("class", diag.class.to_string())?;
        out.append(d)?;
    }
    Ok(out)
}

#[pymodule]
fn ffvar(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("FfvarError", m.py().get_type::<FfvarError>())?;
    m.add_class::<Field>()?;
    m.add_function(wrap_pyfunction!(lattice_count, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(haar_mc_integral, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_mc, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_from_lattice, m)?)?;
    m.add_function(wrap_pyfunction!(variance, m)?)?;
    m.add_function(wrap_pyfunction!(divisor_values, m)?)?;
    m.add_function(wrap_pyfunction!(twist_scan, m)?)?;
    Ok(())
}
