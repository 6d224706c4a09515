//! Python bindings for `hardy-core`.
//!
//! Structured results (bound tables, quotient results, reports) are returned
//! as plain dicts built from their JSON form.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

use hardy_core::bounds::{self, Flux};
use hardy_core::estimate::McParams;
use hardy_core::functionals;
use hardy_core::geometry;
use hardy_core::optimize::{self, KConfig, WeightedMeasure};
use hardy_core::report::RunReport;
use hardy_core::trials::{self, TrialFunction};
use hardy_core::verify::{self, Suite, VerifyConfig};

fn err(e: hardy_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<T: Serialize>(py: Python<'_>, v: &T) -> PyResult<Py<PyAny>> {
    let s = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (s,))?.unbind())
}

fn config(points: Vec<Vec<f64>>) -> PyResult<geometry::Configuration> {
    geometry::Configuration::from_points(&points).map_err(err)
}

fn mc(samples: u64, seed: u64, chunk_size: u64) -> McParams {
    McParams::new(samples, seed).with_chunk_size(chunk_size)
}

/// `N` points in `R^d`, given as a list of coordinate lists.
#[pyclass(name = "Configuration", frozen)]
struct PyConfiguration {
    inner: geometry::Configuration,
}

#[pymethods]
impl PyConfiguration {
    #[new]
    fn new(points: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self { inner: config(points)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn count(&self) -> usize {
        self.inner.count()
    }

    fn points(&self) -> Vec<Vec<f64>> {
        self.inner.points().map(|p| p.to_vec()).collect()
    }

    fn diameter(&self) -> f64 {
        self.inner.diameter()
    }

    fn min_pair_distance(&self) -> f64 {
        self.inner.min_pair_distance()
    }

    /// `Σ_{i<j} 1/r_ij²`.
    fn pair_density(&self) -> PyResult<f64> {
        geometry::pair_density(&self.inner).map_err(err)
    }

    /// `Σ_{i<j<k} 1/R_ijk²`.
    fn triple_density(&self) -> PyResult<f64> {
        geometry::triple_density(&self.inner).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Configuration(dim={}, count={})", self.inner.dim(), self.inner.count())
    }
}

/// A trial function of one of the shipped families.
#[pyclass(name = "Trial", frozen)]
struct PyTrial {
    inner: Box<dyn TrialFunction>,
}

impl PyTrial {
    fn config(&self, points: Vec<Vec<f64>>) -> PyResult<geometry::Configuration> {
        let c = config(points)?;
        if c.dim() != self.inner.dim() || c.count() != self.inner.count() {
            return Err(PyValueError::new_err(format!(
                "expected {} points in dimension {}, got {} in dimension {}",
                self.inner.count(),
                self.inner.dim(),
                c.count(),
                c.dim()
            )));
        }
        Ok(c)
    }
}

#[pymethods]
impl PyTrial {
    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn count(&self) -> usize {
        self.inner.count()
    }

    fn value(&self, points: Vec<Vec<f64>>) -> PyResult<f64> {
        Ok(self.inner.value(&self.config(points)?))
    }

    /// Gradient flattened particle by particle.
    fn gradient(&self, points: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        Ok(self.inner.gradient(&self.config(points)?))
    }

    /// `(mass, kinetic, pair)`, each `None` when the family has no closed form.
    fn closed_forms(&self) -> (Option<f64>, Option<f64>, Option<f64>) {
        let c = self.inner.closed_forms();
        (c.mass, c.kinetic, c.pair)
    }

    fn params(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner.params())
    }

    fn __repr__(&self) -> String {
        format!("Trial({}, dim={}, count={})", self.inner.name(), self.inner.dim(), self.inner.count())
    }
}

fn trial<T: TrialFunction + 'static>(r: hardy_core::Result<T>) -> PyResult<PyTrial> {
    Ok(PyTrial { inner: Box::new(r.map_err(err)?) })
}

#[pyfunction]
#[pyo3(signature = (d, n, scale = 1.0))]
fn gaussian_product(d: usize, n: usize, scale: f64) -> PyResult<PyTrial> {
    trial(trials::gaussian_product(d, n, scale))
}

#[pyfunction]
fn sharpness_1d(n: usize, delta: f64) -> PyResult<PyTrial> {
    let p = trials::SharpnessParams::new(delta).map_err(err)?;
    trial(trials::sharpness_1d(n, p))
}

/// Slater determinant of Gaussians; centers default to points on a line.
#[pyfunction]
#[pyo3(signature = (d, n, centers = None))]
fn slater_gaussian(d: usize, n: usize, centers: Option<Vec<Vec<f64>>>) -> PyResult<PyTrial> {
    let c = match centers {
        Some(c) => config(c)?,
        None => trials::default_slater_centers(d, n),
    };
    trial(trials::slater_gaussian(d, n, &c))
}

#[pyfunction]
fn odd_gaussian(d: usize) -> PyResult<PyTrial> {
    trial(trials::odd_gaussian(d))
}

#[pyfunction]
fn hardy_lower_bound(d: usize, n: usize) -> PyResult<f64> {
    Ok(bounds::hardy_lower_bound(d, n).map_err(err)?.value)
}

#[pyfunction]
fn gaussian_upper_bound(d: usize, n: usize) -> PyResult<f64> {
    bounds::gaussian_upper_bound(d, n).map_err(err)
}

#[pyfunction]
fn fermi_bound(d: usize, n: usize) -> PyResult<f64> {
    bounds::fermi_bound(d, n).map_err(err)
}

/// `D_{N,α}`; `alpha` is a string such as `"1/3"` (exact) or `"0.3"` (float).
#[pyfunction]
fn magnetic_constant(n: usize, alpha: &str) -> PyResult<f64> {
    bounds::magnetic_constant(n, Flux::parse(alpha).map_err(err)?).map_err(err)
}

/// `D_{N,p/q}` as an exact `(numerator, denominator)` pair.
#[pyfunction]
fn magnetic_constant_exact(n: usize, p: i64, q: i64) -> PyResult<(i128, i128)> {
    let r = bounds::magnetic_constant_exact(n, bounds::RationalFlux::new(p, q).map_err(err)?).map_err(err)?;
    Ok((*r.numer(), *r.denom()))
}

#[pyfunction]
#[pyo3(signature = (d, n, alpha = None, k = None))]
fn bound_table(py: Python<'_>, d: usize, n: usize, alpha: Option<&str>, k: Option<f64>) -> PyResult<Py<PyAny>> {
    let alpha = alpha.map(Flux::parse).transpose().map_err(err)?;
    to_py(py, &bounds::bound_table(d, n, alpha, k).map_err(err)?)
}

#[pyfunction]
fn circumradius_inv_sq(p1: Vec<f64>, p2: Vec<f64>, p3: Vec<f64>) -> PyResult<f64> {
    geometry::circumradius_inv_sq(&p1, &p2, &p3).map_err(err)
}

#[pyfunction]
fn menger_b(p1: Vec<f64>, p2: Vec<f64>, p3: Vec<f64>) -> PyResult<f64> {
    geometry::menger_b(&p1, &p2, &p3).map_err(err)
}

/// `(1/R², 9/ρ², Σ 1/side²)`, a non-decreasing chain.
#[pyfunction]
fn triangle_chain(p1: Vec<f64>, p2: Vec<f64>, p3: Vec<f64>) -> PyResult<(f64, f64, f64)> {
    let [a, b, c] = geometry::triangle_chain(&p1, &p2, &p3).map_err(err)?;
    Ok((a, b, c))
}

#[pyfunction]
#[pyo3(signature = (u, samples = 200_000, seed = 0, chunk_size = 4096))]
fn hardy_quotient(py: Python<'_>, u: &PyTrial, samples: u64, seed: u64, chunk_size: u64) -> PyResult<Py<PyAny>> {
    let r = py.detach(|| functionals::hardy_quotient(u.inner.as_ref(), mc(samples, seed, chunk_size))).map_err(err)?;
    to_py(py, &r)
}

#[pyfunction]
#[pyo3(signature = (u, samples = 200_000, seed = 0, chunk_size = 4096))]
fn fermi_quotient(py: Python<'_>, u: &PyTrial, samples: u64, seed: u64, chunk_size: u64) -> PyResult<Py<PyAny>> {
    let r = py.detach(|| functionals::fermi_quotient(u.inner.as_ref(), mc(samples, seed, chunk_size))).map_err(err)?;
    to_py(py, &r)
}

#[pyfunction]
#[pyo3(signature = (u, samples = 200_000, seed = 0, chunk_size = 4096))]
fn divmain_check(py: Python<'_>, u: &PyTrial, samples: u64, seed: u64, chunk_size: u64) -> PyResult<Py<PyAny>> {
    let r = py.detach(|| functionals::divmain_check(u.inner.as_ref(), mc(samples, seed, chunk_size))).map_err(err)?;
    to_py(py, &r)
}

/// Quotient of `x₁ e^{−|x|²/2}` in `R^d` by quadrature.
#[pyfunction]
fn odd_quotient(py: Python<'_>, d: usize) -> PyResult<Py<PyAny>> {
    let u = trials::odd_gaussian(d).map_err(err)?;
    to_py(py, &functionals::odd_quotient(&u, 0).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (n, deltas, samples = 200_000, seed = 0, chunk_size = 4096))]
fn sharpness_scan(py: Python<'_>, n: usize, deltas: Vec<f64>, samples: u64, seed: u64, chunk_size: u64) -> PyResult<Py<PyAny>> {
    let r = py.detach(|| optimize::sharpness_scan(n, &deltas, mc(samples, seed, chunk_size))).map_err(err)?;
    to_py(py, &r)
}

/// K objective of an atomic measure; `weights` default to uniform.
#[pyfunction]
#[pyo3(signature = (atoms, weights = None))]
fn k_objective(atoms: Vec<Vec<f64>>, weights: Option<Vec<f64>>) -> PyResult<f64> {
    let atoms = config(atoms)?;
    let m = match weights {
        Some(w) => WeightedMeasure::new(atoms, w).map_err(err)?,
        None => WeightedMeasure::uniform(atoms),
    };
    optimize::k_objective(&m).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (d, atoms, iters = 2000, restarts = 8, seed = 0))]
fn maximize_k(py: Python<'_>, d: usize, atoms: usize, iters: usize, restarts: usize, seed: u64) -> PyResult<Py<PyAny>> {
    let cfg = KConfig { iters, restarts, seed, ..KConfig::default() };
    let r = py.detach(|| optimize::maximize_k(d, atoms, &cfg, None)).map_err(err)?;
    to_py(py, &r)
}

/// Runs a verification suite and returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (suite = "all", seed = 0, samples = 200_000, chunk_size = 4096))]
fn run_verify(py: Python<'_>, suite: &str, seed: u64, samples: u64, chunk_size: u64) -> PyResult<Py<PyAny>> {
    let s: Suite = suite.parse().map_err(err)?;
    let cfg = VerifyConfig { seed, samples, chunk_size };
    let results = py.detach(|| verify::run_suite(s, &cfg));
    let mut report = RunReport::new("verify", env!("CARGO_PKG_VERSION"))
        .param("suite", s.name())
        .param("samples", samples)
        .param("chunk_size", chunk_size);
    report.seed = Some(seed);
    report.suite_pass = Some(verify::all_pass(&results));
    report.results = results;
    to_py(py, &report)
}

#[pymodule]
fn hardy(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyConfiguration>()?;
    m.add_class::<PyTrial>()?;
    m.add_function(wrap_pyfunction!(gaussian_product, m)?)?;
    m.add_function(wrap_pyfunction!(sharpness_1d, m)?)?;
    m.add_function(wrap_pyfunction!(slater_gaussian, m)?)?;
    m.add_function(wrap_pyfunction!(odd_gaussian, m)?)?;
    m.add_function(wrap_pyfunction!(hardy_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_upper_bound, m)?)?;
    m.add_function(wrap_pyfunction!(fermi_bound, m)?)?;
    m.add_function(wrap_pyfunction!(magnetic_constant, m)?)?;
    m.add_function(wrap_pyfunction!(magnetic_constant_exact, m)?)?;
    m.add_function(wrap_pyfunction!(bound_table, m)?)?;
    m.add_function(wrap_pyfunction!(circumradius_inv_sq, m)?)?;
    m.add_function(wrap_pyfunction!(menger_b, m)?)?;
    m.add_function(wrap_pyfunction!(triangle_chain, m)?)?;
    m.add_function(wrap_pyfunction!(hardy_quotient, m)?)?;
    m.add_function(wrap_pyfunction!(fermi_quotient, m)?)?;
    m.add_function(wrap_pyfunction!(divmain_check, m)?)?;
    m.add_function(wrap_pyfunction!(odd_quotient, m)?)?;
    m.add_function(wrap_pyfunction!(sharpness_scan, m)?)?;
    m.add_function(wrap_pyfunction!(k_objective, m)?)?;
    m.add_function(wrap_pyfunction!(maximize_k, m)?)?;
    m.add_function(wrap_pyfunction!(run_verify, m)?)?;
    Ok(())
}
