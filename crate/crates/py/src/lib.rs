//! Python bindings: nets, labelings, the solver and the classification of
//! its real solutions.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wronski_core::critpoly::{enumerate_open_faces, sigma_dimension};
use wronski_core::labelpoly::{
    interior_labeling, labeling_dimension, lemma6_labeling, lemma7_labeling, predicted_support,
    validate_labeling, ArcSet, ArcSubsetW,
};
use wronski_core::netcomb::{self, AnalyzedNet, EdgeId, NetClass};
use wronski_core::nettrace::{check_solution, roundtrip_check, TraceConfig};
use wronski_core::numcore::{self as nc, Tolerances};
use wronski_core::render::{render_net_svg, render_tree_svg};
use wronski_core::solver::{random_problem, solve_shapiro, ShapiroProblem, SolverConfig};

fn err(e: wronski_core::Error) -> PyErr {
    if e.is_input_error() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn json_to_py<'py>(py: Python<'py>, s: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (s,))
}

/// A net: a non-crossing perfect matching of the circle vertices.
#[pyclass(name = "Net", frozen, skip_from_py_object, eq, hash)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyNet {
    inner: NetClass,
}

impl PyNet {
    fn analyzed(&self) -> PyResult<AnalyzedNet> {
        AnalyzedNet::new(&self.inner).map_err(err)
    }

    fn subset(&self, net: &AnalyzedNet, arcs: Vec<usize>) -> PyResult<ArcSubsetW> {
        ArcSubsetW::new(net, ArcSet::from_arcs(arcs)).map_err(err)
    }
}

#[pymethods]
impl PyNet {
    #[new]
    fn new(pairs: Vec<(usize, usize)>) -> PyResult<Self> {
        let d = pairs.len() + 1;
        Ok(PyNet {
            inner: NetClass::new(d, pairs).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(PyNet {
            inner: NetClass::from_json(s).map_err(err)?,
        })
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    #[getter]
    fn matching(&self) -> Vec<(usize, usize)> {
        self.inner.matching().to_vec()
    }

    /// Index of the vertex `v_{-1}`.
    #[getter]
    fn n_index(&self) -> PyResult<usize> {
        Ok(self.analyzed()?.n_index())
    }

    /// Parity of every face, inside faces first.
    fn parity(&self) -> PyResult<Vec<i8>> {
        Ok(self.analyzed()?.parity)
    }

    fn labeling_dimension(&self) -> PyResult<usize> {
        Ok(labeling_dimension(&self.analyzed()?))
    }

    fn sigma_dimension(&self) -> PyResult<usize> {
        Ok(sigma_dimension(&self.analyzed()?))
    }

    /// Arc subsets of the open faces of the critical-sequence polytope.
    fn open_faces(&self) -> PyResult<Vec<Vec<usize>>> {
        let net = self.analyzed()?;
        Ok(enumerate_open_faces(&net)
            .iter()
            .map(|f| f.w.arcs().iter().collect())
            .collect())
    }

    fn interior_labeling(&self) -> PyResult<PyLabeling> {
        let net = self.analyzed()?;
        Ok(PyLabeling {
            inner: interior_labeling(&net).map_err(err)?,
        })
    }

    /// The labeling with support `W`, given as arc indices.
    fn lemma6_labeling(&self, w: Vec<usize>) -> PyResult<PyLabeling> {
        let net = self.analyzed()?;
        let w = self.subset(&net, w)?;
        Ok(PyLabeling {
            inner: lemma6_labeling(&net, &w).map_err(err)?,
        })
    }

    /// A labeling for a decreasing chain of arc subsets.
    fn lemma7_labeling(&self, chain: Vec<Vec<usize>>) -> PyResult<PyLabeling> {
        let net = self.analyzed()?;
        let chain = chain
            .into_iter()
            .map(|w| self.subset(&net, w))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(PyLabeling {
            inner: lemma7_labeling(&net, &chain).map_err(err)?,
        })
    }

    fn svg(&self) -> PyResult<String> {
        Ok(render_net_svg(&self.analyzed()?))
    }

    fn tree_svg(&self) -> PyResult<String> {
        Ok(render_tree_svg(&self.analyzed()?.s_hat))
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __repr__(&self) -> String {
        format!("Net({})", self.inner)
    }
}

#[pyclass(name = "Labeling", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyLabeling {
    inner: wronski_core::labelpoly::Labeling,
}

#[pymethods]
impl PyLabeling {
    #[getter]
    fn net(&self) -> PyNet {
        PyNet {
            inner: self.inner.net().clone(),
        }
    }

    /// Labels keyed by edge name (`t1`, `c1-2`, ...).
    fn values(&self) -> Vec<(String, f64)> {
        self.inner.values().iter().map(|(e, v)| (e.to_string(), *v)).collect()
    }

    fn get(&self, edge: &str) -> PyResult<f64> {
        let e: EdgeId = edge.parse().map_err(err)?;
        Ok(self.inner.get(e))
    }

    /// Violation messages; empty for a valid labeling.
    fn validate(&self) -> PyResult<Vec<String>> {
        let net = AnalyzedNet::new(self.inner.net()).map_err(err)?;
        Ok(validate_labeling(&net, &self.inner).iter().map(|v| v.to_string()).collect())
    }

    /// Arcs where the critical sequence is predicted to be nonzero.
    fn predicted_support(&self) -> PyResult<Vec<usize>> {
        let net = AnalyzedNet::new(self.inner.net()).map_err(err)?;
        Ok(predicted_support(&net, &self.inner).iter().collect())
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __repr__(&self) -> String {
        format!("Labeling({})", self.inner.to_json())
    }
}

/// Prescribed real critical points `x_1 < ... < x_{2d-2}`.
#[pyclass(name = "Problem", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyProblem {
    inner: ShapiroProblem,
}

#[pymethods]
impl PyProblem {
    #[new]
    fn new(d: usize, points: Vec<f64>) -> PyResult<Self> {
        Ok(PyProblem {
            inner: ShapiroProblem::new(d, points).map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (d, seed=0))]
    fn random(d: usize, seed: u64) -> Self {
        PyProblem {
            inner: random_problem(d, &mut ChaCha8Rng::seed_from_u64(seed)),
        }
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d
    }

    #[getter]
    fn points(&self) -> Vec<f64> {
        self.inner.points.clone()
    }

    fn __repr__(&self) -> String {
        format!("Problem(d={}, points={:?})", self.inner.d, self.inner.points)
    }
}

/// A 2-plane of polynomials of degree at most `d`.
#[pyclass(name = "Plane", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPlane {
    inner: nc::Plane2,
}

#[pymethods]
impl PyPlane {
    #[staticmethod]
    fn from_real(r: Vec<f64>, q: Vec<f64>, d: usize) -> PyResult<Self> {
        Ok(PyPlane {
            inner: nc::Plane2::from_real(&r, &q, d).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_complex(r: Vec<Complex64>, q: Vec<Complex64>, d: usize) -> PyResult<Self> {
        Ok(PyPlane {
            inner: nc::Plane2::new(&r, &q, d).map_err(err)?,
        })
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    /// Two spanning rows, ascending coefficients.
    fn rows(&self) -> Vec<Vec<Complex64>> {
        self.inner.rows().to_vec()
    }

    fn plucker(&self) -> Vec<Complex64> {
        self.inner.plucker().to_vec()
    }

    fn wronskian(&self) -> Vec<Complex64> {
        self.inner.wronskian().coeffs().to_vec()
    }

    fn realness_ratio(&self) -> f64 {
        self.inner.realness_ratio()
    }

    #[pyo3(signature = (tol=1e-8))]
    fn is_real(&self, tol: f64) -> bool {
        self.inner.is_real_plane(tol)
    }

    fn critical_points(&self) -> PyResult<Vec<Complex64>> {
        self.inner.critical_points().map_err(err)
    }

    fn distance(&self, other: &PyPlane) -> f64 {
        self.inner.distance(&other.inner)
    }
}

#[pyclass(name = "Solution", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySolution {
    #[pyo3(get)]
    plane: PyPlane,
    #[pyo3(get)]
    residual: f64,
    #[pyo3(get)]
    is_real: bool,
    #[pyo3(get)]
    realness_ratio: f64,
}

#[pymethods]
impl PySolution {
    fn __repr__(&self) -> String {
        format!(
            "Solution(residual={:.2e}, is_real={}, realness_ratio={:.2e})",
            self.residual, self.is_real, self.realness_ratio
        )
    }
}

#[pyfunction]
fn catalan_u(d: usize) -> PyResult<u64> {
    netcomb::catalan_u(d).map_err(err)
}

#[pyfunction]
fn enumerate_nets(d: usize) -> PyResult<Vec<PyNet>> {
    Ok(netcomb::enumerate_nets(d)
        .map_err(err)?
        .into_iter()
        .map(|inner| PyNet { inner })
        .collect())
}

/// `W(r, q) = r q' - r' q` for ascending complex coefficient lists.
#[pyfunction]
fn wronskian(r: Vec<Complex64>, q: Vec<Complex64>) -> Vec<Complex64> {
    nc::wronskian(&nc::Poly::new(r), &nc::Poly::new(q)).coeffs().to_vec()
}

/// All planes whose Wronskian vanishes at the problem's points.
#[pyfunction]
#[pyo3(signature = (problem, seed=0))]
fn solve(py: Python<'_>, problem: &PyProblem, seed: u64) -> PyResult<Vec<PySolution>> {
    let p = problem.inner.clone();
    let set = py
        .detach(move || solve_shapiro(&p, &SolverConfig::with_seed(seed)))
        .map_err(err)?;
    Ok(set
        .solutions
        .into_iter()
        .map(|s| PySolution {
            plane: PyPlane { inner: s.plane },
            residual: s.residual,
            is_real: s.is_real,
            realness_ratio: s.realness_ratio,
        })
        .collect())
}

/// Net class and labeling of a real solution.
#[pyfunction]
fn classify(problem: &PyProblem, plane: &PyPlane) -> PyResult<(PyNet, PyLabeling)> {
    let check = check_solution(&plane.inner, &problem.inner, &Tolerances::default(), &TraceConfig::default());
    if let Some(e) = check.error {
        return Err(PyRuntimeError::new_err(e));
    }
    match (check.net, check.labeling) {
        (Some(net), Some(labeling)) => Ok((PyNet { inner: net }, PyLabeling { inner: labeling })),
        _ => Err(PyRuntimeError::new_err("classification incomplete")),
    }
}

/// Solve, classify and label; returns the full report as a dict.
#[pyfunction]
#[pyo3(signature = (problem, seed=0))]
fn roundtrip<'py>(py: Python<'py>, problem: &PyProblem, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let p = problem.inner.clone();
    let report = py
        .detach(move || roundtrip_check(&p, &SolverConfig::with_seed(seed), &TraceConfig::default()))
        .map_err(err)?;
    let s = serde_json::to_string(&report).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    json_to_py(py, &s)
}

#[pymodule]
fn wronski(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyNet>()?;
    m.add_class::<PyLabeling>()?;
    m.add_class::<PyProblem>()?;
    m.add_class::<PyPlane>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(catalan_u, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_nets, m)?)?;
    m.add_function(wrap_pyfunction!(wronskian, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(roundtrip, m)?)?;
    Ok(())
}
