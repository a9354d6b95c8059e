//! Python bindings: measures, transform handles, the convolutions and
//! density recovery.

use std::path::PathBuf;

use freeconv::cli::{self, Format, Job, Operation};
use freeconv::freeconv::{self as fc, AtomRule, SubordinationPair};
use freeconv::measure::{MeasureSpec, NamedSpec};
use freeconv::otherconv;
use freeconv::recovery::{self, GridSpec, RecoverOptions, Schedule};
use freeconv::semigroup::{self, PowerResult};
use freeconv::transforms::{self, TransformHandle};
use freeconv::{Complex64 as C64, Domain, Error};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    if e.is_validation() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn domain_of(name: &str) -> PyResult<Domain> {
    match name {
        "real" => Ok(Domain::Real),
        "halfline" => Ok(Domain::Halfline),
        "circle" => Ok(Domain::Circle),
        _ => Err(PyValueError::new_err(format!("unknown domain {name:?}; use real, halfline or circle"))),
    }
}

fn rule_name(r: AtomRule) -> &'static str {
    match r {
        AtomRule::SumRule => "sum_rule",
        AtomRule::ProductRule => "product_rule",
        AtomRule::ZeroRule => "zero_rule",
        AtomRule::PowerRule => "power_rule",
        AtomRule::Detected => "detected",
    }
}

/// A probability measure on the line, the half-line or the circle.
#[pyclass(name = "Measure", module = "pyfreeconv", frozen)]
#[derive(Clone)]
struct PyMeasure {
    inner: freeconv::Measure,
}

#[pymethods]
impl PyMeasure {
    /// Finitely many atoms `[(position, mass), ...]`; circle positions are angles.
    #[staticmethod]
    #[pyo3(signature = (atoms, domain = "real"))]
    fn atomic(atoms: Vec<(f64, f64)>, domain: &str) -> PyResult<Self> {
        let inner = freeconv::make_atomic(&atoms, domain_of(domain)?).map_err(py_err)?;
        Ok(PyMeasure { inner })
    }

    /// Named family: semicircle(center, radius), arcsine(a, b),
    /// uniform_interval(a, b), haar_circle(), point(p).
    #[staticmethod]
    #[pyo3(signature = (family, params = Vec::new(), domain = "real"))]
    fn named(family: &str, params: Vec<f64>, domain: &str) -> PyResult<Self> {
        let spec = MeasureSpec {
            domain: domain_of(domain)?,
            atoms: Vec::new(),
            named: Some(NamedSpec { family: family.to_string(), params, nodes: None }),
            grid: None,
        };
        Ok(PyMeasure { inner: spec.to_measure().map_err(py_err)? })
    }

    /// A measure from the JSON input format of the command-line tool.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyMeasure { inner: freeconv::Measure::from_spec_json(text).map_err(py_err)? })
    }

    #[getter]
    fn domain(&self) -> String {
        self.inner.domain().to_string()
    }

    fn atoms(&self) -> Vec<(f64, f64)> {
        self.inner.atoms().iter().map(|a| (a.position, a.mass)).collect()
    }

    fn total_mass(&self) -> f64 {
        self.inner.total_mass()
    }

    fn first_moment(&self) -> C64 {
        self.inner.first_moment()
    }

    fn cauchy(&self, z: C64) -> C64 {
        transforms::cauchy(&self.inner, z)
    }

    fn psi(&self, z: C64) -> C64 {
        transforms::psi(&self.inner, z)
    }

    fn eta(&self, z: C64) -> C64 {
        transforms::eta(&self.inner, z)
    }

    fn pushforward_affine(&self, scale: f64, shift: f64) -> PyResult<Self> {
        Ok(PyMeasure { inner: self.inner.pushforward_affine(scale, shift).map_err(py_err)? })
    }

    fn __repr__(&self) -> String {
        format!("Measure(domain={}, atoms={})", self.inner.domain(), self.inner.atoms().len())
    }
}

/// An analytic function (G, F, eta, psi or a subordination function).
#[pyclass(name = "Transform", module = "pyfreeconv", frozen)]
#[derive(Clone)]
struct PyTransform {
    inner: TransformHandle,
}

#[pymethods]
impl PyTransform {
    fn __call__(&self, py: Python<'_>, z: C64) -> PyResult<C64> {
        let h = self.inner.clone();
        py.allow_threads(move || h.eval(z)).map_err(py_err)
    }

    #[getter]
    fn kind(&self) -> String {
        format!("{:?}", self.inner.kind())
    }

    #[getter]
    fn domain(&self) -> String {
        format!("{:?}", self.inner.domain())
    }

    #[getter]
    fn provenance(&self) -> String {
        self.inner.provenance().to_string()
    }

    /// Density of the underlying measure at `x` (angle on the circle).
    fn density(&self, py: Python<'_>, x: f64) -> PyResult<f64> {
        let h = self.inner.clone();
        py.allow_threads(move || {
            let h = line_or_disk(&h)?;
            match h.domain() {
                transforms::DomainTag::UnitDisk => recovery::density_circle(&h, x, &Schedule::default()),
                _ => recovery::density_real(&h, x, &Schedule::default()),
            }
        })
        .map_err(py_err)
    }

    /// Mass of the atom at `x` (angle on the circle); 0 when there is none.
    fn atom_mass(&self, py: Python<'_>, x: f64) -> PyResult<f64> {
        let h = self.inner.clone();
        py.allow_threads(move || {
            let h = line_or_disk(&h)?;
            let s = RecoverOptions::default().atom_schedule;
            match h.domain() {
                transforms::DomainTag::UnitDisk => recovery::atom_mass_circle(&h, x, &s),
                _ => recovery::atom_mass_real(&h, x, &s),
            }
        })
        .map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("Transform({:?} on {:?}: {})", self.inner.kind(), self.inner.domain(), self.inner.provenance())
    }
}

fn line_or_disk(h: &TransformHandle) -> freeconv::Result<TransformHandle> {
    if h.domain() == transforms::DomainTag::SlitPlane {
        recovery::g_from_eta_halfline(h)
    } else {
        Ok(h.clone())
    }
}

/// Subordination functions of a free convolution and the convolved transform.
#[pyclass(name = "Subordination", module = "pyfreeconv", frozen)]
struct PySubordination {
    inner: SubordinationPair,
}

#[pymethods]
impl PySubordination {
    #[getter]
    fn omega1(&self) -> PyTransform {
        PyTransform { inner: self.inner.omega1.clone() }
    }

    #[getter]
    fn omega2(&self) -> PyTransform {
        PyTransform { inner: self.inner.omega2.clone() }
    }

    /// `F` of the sum (additive) or `eta` of the product (multiplicative).
    #[getter]
    fn convolved(&self) -> PyTransform {
        PyTransform { inner: self.inner.convolved.clone() }
    }

    fn residual(&self, py: Python<'_>, z: C64) -> PyResult<f64> {
        py.allow_threads(|| self.inner.residual(z)).map_err(py_err)
    }
}

/// A free convolution power: `omega_t` and the transform of `mu^t`.
#[pyclass(name = "Power", module = "pyfreeconv", frozen)]
struct PyPower {
    inner: PowerResult,
}

#[pymethods]
impl PyPower {
    #[getter]
    fn t(&self) -> f64 {
        self.inner.t
    }

    #[getter]
    fn omega_t(&self) -> PyTransform {
        PyTransform { inner: self.inner.omega_t.clone() }
    }

    #[getter]
    fn transformed(&self) -> PyTransform {
        PyTransform { inner: self.inner.transformed.clone() }
    }

    #[getter]
    fn branch_note(&self) -> Option<String> {
        self.inner.branch_note.clone()
    }

    fn residual(&self, py: Python<'_>, z: C64) -> PyResult<f64> {
        py.allow_threads(|| self.inner.residual(z)).map_err(py_err)
    }
}

/// Density grid, atoms and diagnostics of one operation.
#[pyclass(name = "Outcome", module = "pyfreeconv", frozen)]
struct PyOutcome {
    inner: cli::Outcome,
}

#[pymethods]
impl PyOutcome {
    #[getter]
    fn x(&self) -> Vec<f64> {
        self.inner.grid.abscissae.clone()
    }

    /// NaN at masked points, inf at singular ones.
    #[getter]
    fn density(&self) -> Vec<f64> {
        self.inner.grid.densities.clone()
    }

    /// `[(location, mass, rule), ...]`
    #[getter]
    fn atoms(&self) -> Vec<(f64, f64, &'static str)> {
        self.inner.report.atoms.iter().map(|a| (a.location, a.mass, rule_name(a.rule))).collect()
    }

    /// `(continuous_mass, atomic_mass, deficit)`
    #[getter]
    fn mass_account(&self) -> (f64, f64, f64) {
        let m = self.inner.report.mass_account;
        (m.continuous_mass, m.atomic_mass, m.deficit)
    }

    #[getter]
    fn max_residual(&self) -> f64 {
        self.inner.report.residual_diagnostics.max_residual
    }

    #[getter]
    fn branch_note(&self) -> Option<String> {
        self.inner.report.branch_note.clone()
    }

    /// The same JSON document as `--format json` on the command line.
    fn to_json(&self) -> String {
        self.inner.full_json()
    }

    fn csv(&self) -> String {
        self.inner.csv()
    }
}

fn operation_of(name: &str) -> PyResult<Operation> {
    Ok(match name.replace('_', "-").as_str() {
        "add-free" => Operation::AddFree,
        "mult-free" => Operation::MultFree,
        "add-boolean" => Operation::AddBoolean,
        "mult-boolean" => Operation::MultBoolean,
        "add-monotone" => Operation::AddMonotone,
        "mult-monotone" => Operation::MultMonotone,
        "power-add" => Operation::PowerAdd,
        "power-mult" => Operation::PowerMult,
        "psi-map" => Operation::PsiMap,
        _ => return Err(PyValueError::new_err(format!("unknown operation {name:?}"))),
    })
}

/// Runs one operation of the command-line tool on in-memory measures and
/// recovers the density on a line grid `(lo, hi, n)` or `circle = n` angles.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (operation, measures, t = None, grid = None, circle = None, tol = None, seed_height = None))]
fn convolve(
    py: Python<'_>,
    operation: &str,
    measures: Vec<PyRef<'_, PyMeasure>>,
    t: Option<f64>,
    grid: Option<(f64, f64, usize)>,
    circle: Option<usize>,
    tol: Option<f64>,
    seed_height: Option<f64>,
) -> PyResult<PyOutcome> {
    let grid = match (grid, circle) {
        (Some(_), Some(_)) => return Err(PyValueError::new_err("give either grid or circle, not both")),
        (Some((lo, hi, n)), None) => Some(GridSpec::Line { lo, hi, n }),
        (None, Some(n)) => Some(GridSpec::Circle { n }),
        (None, None) => None,
    };
    let inputs: Vec<PathBuf> = (0..measures.len()).map(|k| PathBuf::from(format!("measure{k}"))).collect();
    let job = Job {
        operation: operation_of(operation)?,
        inputs,
        t,
        grid,
        output: None,
        format: Format::Json,
        tol,
        seed_height,
    };
    let ms: Vec<freeconv::Measure> = measures.iter().map(|m| m.inner.clone()).collect();
    let inner = py.allow_threads(move || cli::run_measures(&job, &ms)).map_err(py_err)?;
    Ok(PyOutcome { inner })
}

#[pyfunction]
fn free_add(py: Python<'_>, mu: &PyMeasure, nu: &PyMeasure) -> PyResult<PySubordination> {
    let inner = py.allow_threads(|| fc::free_add(&mu.inner, &nu.inner)).map_err(py_err)?;
    Ok(PySubordination { inner })
}

/// Half-line or circle, following the measures' domain.
#[pyfunction]
fn free_mult(py: Python<'_>, mu: &PyMeasure, nu: &PyMeasure) -> PyResult<PySubordination> {
    let inner = py.allow_threads(|| fc::free_mult(&mu.inner, &nu.inner)).map_err(py_err)?;
    Ok(PySubordination { inner })
}

#[pyfunction]
fn boolean_add(mu: &PyMeasure, nu: &PyMeasure) -> PyResult<PyTransform> {
    Ok(PyTransform { inner: otherconv::boolean_add(&mu.inner, &nu.inner).map_err(py_err)? })
}

#[pyfunction]
fn boolean_mult(mu: &PyMeasure, nu: &PyMeasure) -> PyResult<PyTransform> {
    Ok(PyTransform { inner: otherconv::boolean_mult_circle(&mu.inner, &nu.inner).map_err(py_err)? })
}

#[pyfunction]
fn monotone_add(mu: &PyMeasure, nu: &PyMeasure) -> PyResult<PyTransform> {
    Ok(PyTransform { inner: otherconv::monotone_add(&mu.inner, &nu.inner).map_err(py_err)? })
}

#[pyfunction]
fn monotone_mult(mu: &PyMeasure, nu: &PyMeasure) -> PyResult<PyTransform> {
    Ok(PyTransform { inner: otherconv::monotone_mult_halfline(&mu.inner, &nu.inner).map_err(py_err)? })
}

#[pyfunction]
fn free_add_power(py: Python<'_>, mu: &PyMeasure, t: f64) -> PyResult<PyPower> {
    let inner = py
        .allow_threads(|| semigroup::free_add_power(&mu.inner.as_real()?, t))
        .map_err(py_err)?;
    Ok(PyPower { inner })
}

/// Half-line or circle, following the measure's domain.
#[pyfunction]
fn free_mult_power(py: Python<'_>, mu: &PyMeasure, t: f64) -> PyResult<PyPower> {
    let inner = py
        .allow_threads(|| match mu.inner.domain() {
            Domain::Circle => semigroup::free_mult_power_circle(&mu.inner, t),
            _ => semigroup::free_mult_power_halfline(&mu.inner, t),
        })
        .map_err(py_err)?;
    Ok(PyPower { inner })
}

/// The map `Psi_t` from boolean to free infinitely divisible laws: `F` of
/// the image for line measures, `eta` for circle measures.
#[pyfunction]
fn psi_map(py: Python<'_>, mu: &PyMeasure, t: f64) -> PyResult<PyTransform> {
    let inner = py
        .allow_threads(|| match mu.inner.domain() {
            Domain::Circle => semigroup::boolean_to_free_mult_circle(&mu.inner, t),
            _ => semigroup::boolean_to_free_add(&mu.inner.as_real()?, t),
        })
        .map_err(py_err)?;
    Ok(PyTransform { inner })
}

/// Atoms predicted by the rules: `[(location, mass, rule), ...]`.
#[pyfunction]
fn predicted_atoms(mu: &PyMeasure, nu: &PyMeasure) -> PyResult<Vec<(f64, f64, &'static str)>> {
    let report = match mu.inner.domain() {
        Domain::Real => fc::atoms_free_add(&mu.inner, &nu.inner),
        _ => fc::atoms_free_mult(&mu.inner, &nu.inner).map_err(py_err)?,
    };
    Ok(report.entries.iter().map(|a| (a.location, a.mass, rule_name(a.rule))).collect())
}

#[pyfunction]
fn g_transform(mu: &PyMeasure) -> PyResult<PyTransform> {
    Ok(PyTransform { inner: transforms::g_handle(&mu.inner).map_err(py_err)? })
}

#[pyfunction]
fn f_transform(mu: &PyMeasure) -> PyResult<PyTransform> {
    Ok(PyTransform { inner: transforms::f_handle(&mu.inner).map_err(py_err)? })
}

#[pyfunction]
fn eta_transform(mu: &PyMeasure) -> PyResult<PyTransform> {
    Ok(PyTransform { inner: transforms::eta_handle(&mu.inner).map_err(py_err)? })
}

#[pymodule]
fn pyfreeconv(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMeasure>()?;
    m.add_class::<PyTransform>()?;
    m.add_class::<PySubordination>()?;
    m.add_class::<PyPower>()?;
    m.add_class::<PyOutcome>()?;
    m.add_function(wrap_pyfunction!(convolve, m)?)?;
    m.add_function(wrap_pyfunction!(free_add, m)?)?;
    m.add_function(wrap_pyfunction!(free_mult, m)?)?;
    m.add_function(wrap_pyfunction!(boolean_add, m)?)?;
    m.add_function(wrap_pyfunction!(boolean_mult, m)?)?;
    m.add_function(wrap_pyfunction!(monotone_add, m)?)?;
    m.add_function(wrap_pyfunction!(monotone_mult, m)?)?;
    m.add_function(wrap_pyfunction!(free_add_power, m)?)?;
    m.add_function(wrap_pyfunction!(free_mult_power, m)?)?;
    m.add_function(wrap_pyfunction!(psi_map, m)?)?;
    m.add_function(wrap_pyfunction!(predicted_atoms, m)?)?;
    m.add_function(wrap_pyfunction!(g_transform, m)?)?;
    m.add_function(wrap_pyfunction!(f_transform, m)?)?;
    m.add_function(wrap_pyfunction!(eta_transform, m)?)?;
    Ok(())
}
