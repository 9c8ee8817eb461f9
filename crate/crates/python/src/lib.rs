//! Python module `nodal_morse_py`. Reports come back as plain dicts.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyModule;
use serde::Serialize;

use nodal_morse::campaign::{analyze_instance, hill_sweep, run_campaign, CampaignParams};
use nodal_morse::hill::Potential;
use nodal_morse::instance::InstanceFile;
use nodal_morse::magnetic::{fd_hessian, magnetic_spectrum, DEFAULT_FD_STEP};
use nodal_morse::nodal::nodal_report;
use nodal_morse::special_cases::{bipartite_check, determinant_index_check, two_triangles_operator};
use nodal_morse::spectral::eigenvalues_symmetric;
use nodal_morse::{Graph, SchrodingerOperator};

fn err(e: nodal_morse::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Serializes through JSON and hands the text to Python's `json.loads`.
fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A Schrödinger operator on a connected graph: negative edge weights,
/// arbitrary diagonal.
#[pyclass(name = "Operator", frozen)]
struct PyOperator(SchrodingerOperator);

#[pymethods]
impl PyOperator {
    #[new]
    fn new(vertices: usize, edges: Vec<(usize, usize)>, weights: Vec<f64>, diagonal: Vec<f64>) -> PyResult<Self> {
        let g = Graph::new(vertices, &edges).map_err(err)?;
        Ok(Self(SchrodingerOperator::from_weights(g, &weights, &diagonal).map_err(err)?))
    }

    /// Parses the JSON instance format.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self(InstanceFile::parse(text).and_then(|f| f.to_operator()).map_err(err)?))
    }

    #[staticmethod]
    fn laplacian(vertices: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        Ok(Self(SchrodingerOperator::laplacian(Graph::new(vertices, &edges).map_err(err)?)))
    }

    #[staticmethod]
    #[pyo3(signature = (vertices, edges, seed))]
    fn random(vertices: usize, edges: Vec<(usize, usize)>, seed: u64) -> PyResult<Self> {
        Ok(Self(SchrodingerOperator::random_default(Graph::new(vertices, &edges).map_err(err)?, seed)))
    }

    #[staticmethod]
    fn two_triangles() -> Self {
        Self(two_triangles_operator())
    }

    fn to_json(&self) -> String {
        InstanceFile::from_operator(&self.0).to_canonical_string()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn beta(&self) -> usize {
        self.0.graph().cycle_dimension()
    }

    fn matrix(&self) -> Vec<Vec<f64>> {
        self.0.matrix().row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    fn eigenvalues(&self) -> PyResult<Vec<f64>> {
        eigenvalues_symmetric(self.0.matrix()).map_err(err)
    }

    /// Spectrum of the magnetic operator at flux coordinates `theta` (one
    /// angle per cycle).
    fn magnetic_spectrum(&self, theta: Vec<f64>) -> PyResult<Vec<f64>> {
        magnetic_spectrum(&self.0, &theta).map_err(err)
    }

    fn nodal<'py>(&self, py: Python<'py>, n: usize) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &nodal_report(&self.0, n).map_err(err)?)
    }

    /// Analytic pipeline, FD Hessian and every identity for `λ_n`.
    fn analyze<'py>(&self, py: Python<'py>, n: usize) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &analyze_instance(&self.0, n).map_err(err)?)
    }

    /// Extrapolated finite-difference Hessian of `Λ_n` in flux coordinates.
    #[pyo3(signature = (n, h = DEFAULT_FD_STEP))]
    fn fd_hessian(&self, n: usize, h: f64) -> PyResult<Vec<Vec<f64>>> {
        let fd = fd_hessian(&self.0, n, h).map_err(err)?;
        Ok(fd.extrapolated.row_iter().map(|r| r.iter().copied().collect()).collect())
    }

    fn bipartite_check<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &bipartite_check(&self.0).map_err(err)?)
    }

    fn determinant_check<'py>(&self, py: Python<'py>, n: usize) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &determinant_index_check(&self.0, n).map_err(err)?)
    }

    fn __repr__(&self) -> String {
        let g = self.0.graph();
        format!("Operator(vertices={}, edges={}, beta={})", g.num_vertices(), g.num_edges(), g.cycle_dimension())
    }
}

/// Random verification campaign; the report is independent of `threads`.
#[pyfunction]
#[pyo3(signature = (trials, max_vertices, max_extra_edges, seed, threads = 1))]
fn verify<'py>(
    py: Python<'py>,
    trials: usize,
    max_vertices: usize,
    max_extra_edges: usize,
    seed: u64,
    threads: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let params = CampaignParams { trials, max_vertices, max_extra_edges, seed };
    let report = py.detach(|| run_campaign(&params, threads.max(1))).map_err(err)?;
    to_py(py, &report)
}

/// Band edges, `Λ_n(α)` samples and the Hessian identity for a Hill
/// operator given by a potential spec such as `"cos:1"`.
#[pyfunction]
#[pyo3(signature = (potential, band, samples = 33))]
fn hill<'py>(py: Python<'py>, potential: &str, band: usize, samples: usize) -> PyResult<Bound<'py, PyAny>> {
    let q = Potential::parse(potential).map_err(err)?;
    to_py(py, &hill_sweep(q, band, samples).map_err(err)?)
}

#[pymodule]
fn nodal_morse_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyOperator>()?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(hill, m)?)?;
    Ok(())
}
