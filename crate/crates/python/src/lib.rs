//! Python bindings: model-space geometry, rearrangements and scenario runs.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use symmheat::geometry;
use symmheat::rearrangement::{self, StepFunction, WeightedField};
use symmheat::scenario::{self, SuiteConfig};

fn to_py(e: symmheat::Error) -> PyErr {
    if e.is_configuration() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

/// Simply connected model space of constant curvature `kappa >= 0`.
#[pyclass(name = "ModelSpace", frozen)]
struct PyModelSpace {
    inner: geometry::ModelSpace,
}

#[pymethods]
impl PyModelSpace {
    #[new]
    #[pyo3(signature = (kappa = 0.0, n = 2))]
    fn new(kappa: f64, n: u32) -> PyResult<Self> {
        let inner = geometry::ModelSpace::new(kappa, n).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn kappa(&self) -> f64 {
        self.inner.kappa
    }

    #[getter]
    fn n(&self) -> u32 {
        self.inner.n
    }

    /// Total volume of the space (infinite when flat).
    #[getter]
    fn capacity(&self) -> f64 {
        self.inner.capacity()
    }

    fn ball_volume(&self, r: f64) -> PyResult<f64> {
        self.inner.ball_volume(r).map_err(to_py)
    }

    fn ball_radius(&self, volume: f64) -> PyResult<f64> {
        self.inner.ball_radius(volume).map_err(to_py)
    }

    fn sphere_area(&self, r: f64) -> PyResult<f64> {
        self.inner.sphere_area(r).map_err(to_py)
    }

    fn isoperimetric_profile(&self, volume: f64) -> PyResult<f64> {
        self.inner.isoperimetric_profile(volume).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("ModelSpace(kappa={}, n={})", self.inner.kappa, self.inner.n)
    }
}

/// `theta` of a flat cone with the given total angle.
#[pyfunction]
fn theta_for_cone(total_angle: f64) -> PyResult<f64> {
    geometry::theta_for_cone(total_angle).map_err(to_py)
}

/// Decreasing rearrangement of a nonnegative cell field on `[0, |Omega|]`.
#[pyclass(name = "Rearrangement", frozen)]
struct PyRearrangement {
    inner: StepFunction,
}

#[pymethods]
impl PyRearrangement {
    #[new]
    fn new(volumes: Vec<f64>, values: Vec<f64>) -> PyResult<Self> {
        let field = WeightedField::new(volumes, values).map_err(to_py)?;
        Ok(Self {
            inner: field.decreasing_rearrangement(),
        })
    }

    /// Plateau boundaries `0 = s_0 < ... < s_m = |Omega|`.
    #[getter]
    fn breaks(&self) -> Vec<f64> {
        self.inner.breaks().to_vec()
    }

    /// Strictly decreasing plateau values.
    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    #[getter]
    fn total_volume(&self) -> f64 {
        self.inner.total_volume()
    }

    fn value_at(&self, s: f64) -> PyResult<f64> {
        self.inner.value_at(s).map_err(to_py)
    }

    fn distribution(&self, t: f64) -> PyResult<f64> {
        self.inner.distribution(t).map_err(to_py)
    }

    /// `(1/theta) int_0^{theta a} h*`.
    #[pyo3(signature = (a, theta = 1.0))]
    fn concentration(&self, a: f64, theta: f64) -> PyResult<f64> {
        self.inner.concentration(a, theta).map_err(to_py)
    }

    fn power_integral(&self, p: f64) -> f64 {
        self.inner.power_integral(p)
    }
}

/// `(int f g, int f* g*)` for two fields on the same cells.
#[pyfunction]
fn hardy_littlewood(volumes: Vec<f64>, f: Vec<f64>, g: Vec<f64>) -> PyResult<(f64, f64)> {
    let f = WeightedField::new(volumes.clone(), f).map_err(to_py)?;
    let g = WeightedField::new(volumes, g).map_err(to_py)?;
    rearrangement::hardy_littlewood_pair(&f, &g).map_err(to_py)
}

/// Outcome of one scenario: the `U` and `V` surfaces and the named checks.
#[pyclass(name = "ScenarioResult", frozen)]
struct PyScenarioResult {
    #[pyo3(get)]
    name: String,
    #[pyo3(get)]
    passed: bool,
    #[pyo3(get)]
    theta: f64,
    #[pyo3(get)]
    a_grid: Vec<f64>,
    #[pyo3(get)]
    times: Vec<f64>,
    /// `U[j][i]` at `times[j]`, `a_grid[i]`.
    #[pyo3(get)]
    u: Vec<Vec<f64>>,
    #[pyo3(get)]
    v: Vec<Vec<f64>>,
    /// `(t, a, U - V)` at the largest gap.
    #[pyo3(get)]
    max_gap: (f64, f64, f64),
    /// `(name, value, limit, passed)` per check.
    #[pyo3(get)]
    checks: Vec<(String, f64, f64, bool)>,
}

#[pymethods]
impl PyScenarioResult {
    fn __repr__(&self) -> String {
        format!(
            "ScenarioResult(name={:?}, passed={}, max_gap={:?})",
            self.name, self.passed, self.max_gap
        )
    }
}

/// Runs every scenario of a JSON config (one scenario or `{"scenarios": [...]}`).
#[pyfunction]
fn run_config(py: Python<'_>, json: &str) -> PyResult<Vec<PyScenarioResult>> {
    let suite = SuiteConfig::parse(json).map_err(to_py)?;
    let runs = py
        .detach(|| {
            suite
                .scenarios
                .iter()
                .map(scenario::prepare_and_run)
                .collect::<symmheat::Result<Vec<_>>>()
        })
        .map_err(to_py)?;
    Ok(runs
        .into_iter()
        .map(|run| {
            let gap = run.report.global_max;
            PyScenarioResult {
                passed: run.passed(),
                theta: run.theta,
                a_grid: run.u_scan.a_grid.clone(),
                times: run.u_scan.times.clone(),
                u: run.u_scan.values.clone(),
                v: run.v_surface.values.clone(),
                max_gap: (gap.t, gap.a, gap.gap),
                checks: run
                    .checks
                    .iter()
                    .map(|c| (c.name.clone(), c.value, c.limit, c.passed))
                    .collect(),
                name: run.name,
            }
        })
        .collect())
}

/// Validates a JSON config and returns its normalized form.
#[pyfunction]
fn normalize_config(json: &str) -> PyResult<String> {
    let suite = SuiteConfig::parse(json).and_then(|s| s.normalized()).map_err(to_py)?;
    Ok(suite.to_json())
}

#[pyfunction]
fn list_presets() -> String {
    symmheat::source::preset_catalog()
}

#[pymodule]
fn symmheat_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelSpace>()?;
    m.add_class::<PyRearrangement>()?;
    m.add_class::<PyScenarioResult>()?;
    m.add_function(wrap_pyfunction!(theta_for_cone, m)?)?;
    m.add_function(wrap_pyfunction!(hardy_littlewood, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_config, m)?)?;
    m.add_function(wrap_pyfunction!(list_presets, m)?)?;
    Ok(())
}
