//! Python bindings: scenarios, snapshots, reports and the verification studies.

use std::path::PathBuf;

use dirac_maxwell_core::integrate::Method;
use dirac_maxwell_core::maxwell::{read_snapshot, FieldState, ARRAY_NAMES};
use dirac_maxwell_core::scenario::{self, Prepared};
use dirac_maxwell_core::verify::{self, ChainCase, DispersionConfig};
use dirac_maxwell_core::Error;
use pyo3::exceptions::{PyFileNotFoundError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn to_py(err: Error) -> PyErr {
    match err {
        Error::ManifestMissing(_) => PyFileNotFoundError::new_err(err.to_string()),
        Error::Validation(_)
        | Error::Config { .. }
        | Error::CflViolation { .. }
        | Error::InvalidGrid(_)
        | Error::NonLorentzianMetric(_)
        | Error::NonStaticMetric { .. } => PyValueError::new_err(err.to_string()),
        _ => PyRuntimeError::new_err(err.to_string()),
    }
}

/// Serialize through JSON into plain Python objects.
fn to_object<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A validated scenario, ready to run.
#[pyclass(name = "Scenario", module = "dirac_maxwell")]
struct PyScenario {
    prepared: Prepared,
}

#[pymethods]
impl PyScenario {
    /// Load and validate a TOML scenario file.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let s = scenario::Scenario::load(&path).map_err(to_py)?;
        Ok(Self {
            prepared: s.prepare().map_err(to_py)?,
        })
    }

    /// Parse and validate scenario text; `name` is used when the text has none.
    #[staticmethod]
    #[pyo3(signature = (text, name = "scenario"))]
    fn from_toml(text: &str, name: &str) -> PyResult<Self> {
        let mut s = scenario::Scenario::from_toml_str(text, &PathBuf::from(format!("{name}.toml"))).map_err(to_py)?;
        if s.name.is_none() {
            s.name = Some(name.to_string());
        }
        Ok(Self {
            prepared: s.prepare().map_err(to_py)?,
        })
    }

    #[getter]
    fn name(&self) -> &str {
        self.prepared.name()
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.prepared.dt
    }

    #[getter]
    fn cfl(&self) -> f64 {
        self.prepared.cfl
    }

    #[getter]
    fn steps(&self) -> usize {
        self.prepared.run.steps
    }

    #[getter]
    fn speed_of_light(&self) -> f64 {
        self.prepared.speed_of_light()
    }

    #[getter]
    fn stability_limit(&self) -> f64 {
        self.prepared.stability_limit()
    }

    /// The scenario with every default filled in.
    fn config<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_object(py, &self.prepared.scenario)
    }

    fn initial_state(&self) -> PyFieldState {
        PyFieldState {
            state: self.prepared.initial.clone(),
        }
    }

    /// Run into `root` (default: the output root) and return the manifest.
    #[pyo3(signature = (root = None))]
    fn run<'py>(&self, py: Python<'py>, root: Option<PathBuf>) -> PyResult<Bound<'py, PyAny>> {
        let root = root.unwrap_or_else(scenario::output_root);
        let dir = scenario::run_dir(&self.prepared, &root);
        let prepared = &self.prepared;
        let manifest = py.detach(|| scenario::execute(prepared, &dir)).map_err(to_py)?;
        to_object(py, &manifest)
    }

    fn __repr__(&self) -> String {
        let g = &self.prepared.grid;
        format!(
            "Scenario({:?}, cells={:?}, dt={}, steps={})",
            self.prepared.name(),
            g.n,
            self.prepared.dt,
            self.prepared.run.steps
        )
    }
}

/// Canonical field variables on the grid.
#[pyclass(name = "FieldState", module = "dirac_maxwell")]
struct PyFieldState {
    state: FieldState,
}

#[pymethods]
impl PyFieldState {
    /// Read a binary snapshot.
    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            state: read_snapshot(&path).map_err(to_py)?,
        })
    }

    #[getter]
    fn time(&self) -> f64 {
        self.state.time
    }

    #[getter]
    fn shape(&self) -> (usize, usize, usize) {
        let n = self.state.grid.n;
        (n[0], n[1], n[2])
    }

    #[getter]
    fn spacing(&self) -> (f64, f64, f64) {
        let d = self.state.grid.dx;
        (d[0], d[1], d[2])
    }

    /// Names accepted by `array`, in snapshot order.
    #[staticmethod]
    fn names() -> Vec<&'static str> {
        ARRAY_NAMES.to_vec()
    }

    /// One array as a flat C-order list.
    fn array(&self, name: &str) -> PyResult<Vec<f64>> {
        let i = ARRAY_NAMES
            .iter()
            .position(|n| *n == name)
            .ok_or_else(|| PyValueError::new_err(format!("unknown array {name:?}; expected one of {ARRAY_NAMES:?}")))?;
        Ok(self.state.arrays()[i].clone())
    }

    fn p0_max(&self) -> f64 {
        self.state.p0_max()
    }

    fn p_max(&self) -> f64 {
        self.state.p_max()
    }

    fn max_difference(&self, other: &PyFieldState) -> f64 {
        self.state.max_difference(&other.state)
    }

    fn __repr__(&self) -> String {
        format!("FieldState(shape={:?}, time={})", self.state.grid.n, self.state.time)
    }
}

/// Monitor rows of a run directory.
#[pyfunction]
fn read_monitor<'py>(py: Python<'py>, dir: PathBuf) -> PyResult<Bound<'py, PyAny>> {
    let log = scenario::read_monitor(&dir).map_err(to_py)?;
    to_object(py, &log.records)
}

/// Manifest of a run directory.
#[pyfunction]
fn read_manifest<'py>(py: Python<'py>, dir: PathBuf) -> PyResult<Bound<'py, PyAny>> {
    let m = scenario::Manifest::read(&dir).map_err(to_py)?;
    to_object(py, &m)
}

/// Build the report over run directories, write it to `out` when given and
/// return the digest text.
#[pyfunction]
#[pyo3(signature = (dirs, out = None))]
fn report(dirs: Vec<PathBuf>, out: Option<PathBuf>) -> PyResult<String> {
    let r = scenario::build_report(&dirs).map_err(to_py)?;
    if let Some(out) = out {
        scenario::write_report(&r, &out).map_err(to_py)?;
    }
    Ok(scenario::digest(&r))
}

/// Derive the constraint chain of a reference system and compare with the
/// analytic one. `case` is `em_single_mode`, `second_class_pair` or
/// `regular_oscillator`.
#[pyfunction]
#[pyo3(signature = (case, k = 1.0, c = 1.0, rho0 = 0.0))]
fn constraint_chain_check<'py>(py: Python<'py>, case: &str, k: f64, c: f64, rho0: f64) -> PyResult<Bound<'py, PyAny>> {
    let case = match case {
        "em_single_mode" => ChainCase::EmSingleMode { k, c, rho0 },
        "second_class_pair" => ChainCase::SecondClassPair,
        "regular_oscillator" => ChainCase::RegularOscillator,
        other => return Err(PyValueError::new_err(format!("unknown chain case {other:?}"))),
    };
    let r = verify::constraint_chain_check(case).map_err(to_py)?;
    to_object(py, &r)
}

/// Measured plane-wave frequencies against the exact and discrete ones.
#[pyfunction]
#[pyo3(signature = (cells_per_wavelength = vec![16, 32], cfl = 0.5, periods = 8.0, method = "leapfrog", c = 1.0))]
fn dispersion_study<'py>(
    py: Python<'py>,
    cells_per_wavelength: Vec<usize>,
    cfl: f64,
    periods: f64,
    method: &str,
    c: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let method = match method {
        "leapfrog" => Method::Leapfrog,
        "rk4" => Method::Rk4,
        other => return Err(PyValueError::new_err(format!("unknown method {other:?}"))),
    };
    let cfg = DispersionConfig {
        c,
        cells_per_wavelength,
        cfl,
        periods,
        method,
    };
    let rows = py.detach(|| verify::dispersion_study(&cfg)).map_err(to_py)?;
    to_object(py, &rows)
}

#[pymodule]
fn dirac_maxwell(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_class::<PyFieldState>()?;
    m.add_function(wrap_pyfunction!(read_monitor, m)?)?;
    m.add_function(wrap_pyfunction!(read_manifest, m)?)?;
    m.add_function(wrap_pyfunction!(report, m)?)?;
    m.add_function(wrap_pyfunction!(constraint_chain_check, m)?)?;
    m.add_function(wrap_pyfunction!(dispersion_study, m)?)?;
    m.add("__version__", scenario::VERSION)?;
    Ok(())
}
