//! Python bindings: the toy landscape, optimizers, connectors and probes on
//! plain lists of floats, plus the command-line runner.

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use wedgelab::connectors::{self, Connector};
use wedgelab::optim::{self, Method, OptimizerConfig};
use wedgelab::probing::{self, ShortDirectionMethod};

fn to_py(err: wedgelab::Error) -> PyErr {
    if err.is_numerical() {
        PyArithmeticError::new_err(err.to_string())
    } else {
        PyValueError::new_err(err.to_string())
    }
}

fn params(values: Vec<f64>) -> PyResult<wedgelab::ParamVector> {
    wedgelab::ParamVector::new(values).map_err(to_py)
}

/// Optimizer settings; `method` is "gd", "momentum" or "adam".
#[pyclass(name = "OptimizerConfig", from_py_object)]
#[derive(Clone)]
struct PyOptimizerConfig {
    inner: OptimizerConfig,
}

#[pymethods]
impl PyOptimizerConfig {
    #[new]
    #[pyo3(signature = (method = "adam", learning_rate = 0.01, max_steps = 10_000, loss_tolerance = 1e-6, lr_decay = 1.0, momentum_coeff = 0.9))]
    fn new(
        method: &str,
        learning_rate: f64,
        max_steps: usize,
        loss_tolerance: f64,
        lr_decay: f64,
        momentum_coeff: f64,
    ) -> PyResult<Self> {
        let method = match method {
            "gd" => Method::Gd,
            "momentum" => Method::Momentum,
            "adam" => Method::Adam,
            other => return Err(PyValueError::new_err(format!("unknown method {other:?}"))),
        };
        let inner = OptimizerConfig {
            method,
            learning_rate,
            max_steps,
            loss_tolerance,
            lr_decay,
            momentum_coeff,
            ..OptimizerConfig::default()
        };
        inner.validate().map_err(to_py)?;
        Ok(PyOptimizerConfig { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!(
            "OptimizerConfig(method={:?}, learning_rate={}, max_steps={}, lr_decay={})",
            self.inner.method, self.inner.learning_rate, self.inner.max_steps, self.inner.lr_decay
        )
    }
}

fn config_or_default(cfg: Option<PyOptimizerConfig>) -> OptimizerConfig {
    cfg.map_or_else(wedgelab::cli::default_toy_optimizer, |c| c.inner)
}

/// Distance to the nearest axis-aligned n-wedge in D dimensions.
#[pyclass(name = "WedgeLandscape", frozen)]
struct PyWedgeLandscape {
    inner: wedgelab::WedgeLandscape,
}

#[pymethods]
impl PyWedgeLandscape {
    #[new]
    #[pyo3(signature = (dim, wedge_dim, rotation_seed = None))]
    fn new(dim: usize, wedge_dim: usize, rotation_seed: Option<u64>) -> PyResult<Self> {
        let inner = match rotation_seed {
            Some(seed) => wedgelab::WedgeLandscape::with_rotation_seed(dim, wedge_dim, seed),
            None => wedgelab::WedgeLandscape::new(dim, wedge_dim),
        }
        .map_err(to_py)?;
        Ok(PyWedgeLandscape { inner })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn wedge_dim(&self) -> usize {
        self.inner.wedge_dim()
    }

    fn loss(&self, p: Vec<f64>) -> PyResult<f64> {
        self.inner.surrogate_loss(&p).map_err(to_py)
    }

    fn grad(&self, p: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.inner.surrogate_grad(&p).map_err(to_py)?.into_inner())
    }

    /// Axes spanning the nearest wedge, ascending.
    fn nearest_wedge(&self, p: Vec<f64>) -> PyResult<Vec<usize>> {
        Ok(self.inner.nearest_wedge(&p).map_err(to_py)?.axes().to_vec())
    }

    fn project_to_wedge(&self, p: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.inner.project_to_wedge(&p).map_err(to_py)?.into_inner())
    }

    #[pyo3(signature = (p, tol = 1e-6))]
    fn exact_short_count(&self, p: Vec<f64>, tol: f64) -> PyResult<usize> {
        self.inner.exact_short_count(&p, tol).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("WedgeLandscape(dim={}, wedge_dim={})", self.inner.dim(), self.inner.wedge_dim())
    }
}

/// Waypoints of a tunnel or m-connector with their losses.
#[pyclass(name = "Connector", frozen)]
struct PyConnector {
    inner: Connector,
}

#[pymethods]
impl PyConnector {
    #[getter]
    fn order(&self) -> usize {
        self.inner.order
    }

    #[getter]
    fn waypoints(&self) -> Vec<Vec<f64>> {
        self.inner.waypoints.iter().map(|w| w.as_slice().to_vec()).collect()
    }

    #[getter]
    fn losses(&self) -> Vec<f64> {
        self.inner.losses.clone()
    }

    #[getter]
    fn start_losses(&self) -> Vec<f64> {
        self.inner.start_losses.clone()
    }

    fn max_loss(&self) -> f64 {
        self.inner.max_loss()
    }

    fn max_start_loss(&self) -> f64 {
        self.inner.max_start_loss()
    }

    /// Pairwise deviation cosines; `None` where a deviation vanishes.
    fn deviation_cosines(&self) -> Vec<Vec<Option<f64>>> {
        connectors::deviation_cosines(&self.inner).entries
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Returns `(final_point, final_loss, converged)`.
#[pyfunction]
#[pyo3(signature = (landscape, p0, config = None))]
fn minimize(
    landscape: &PyWedgeLandscape,
    p0: Vec<f64>,
    config: Option<PyOptimizerConfig>,
) -> PyResult<(Vec<f64>, f64, bool)> {
    let t = optim::minimize(&landscape.inner, &p0, &config_or_default(config)).map_err(to_py)?;
    let loss = t.final_loss();
    Ok((t.final_point.into_inner(), loss, t.converged))
}

#[pyfunction]
#[pyo3(signature = (landscape, a, b, waypoints = 21, config = None))]
fn build_tunnel(
    landscape: &PyWedgeLandscape,
    a: Vec<f64>,
    b: Vec<f64>,
    waypoints: usize,
    config: Option<PyOptimizerConfig>,
) -> PyResult<PyConnector> {
    let inner = connectors::build_tunnel(&landscape.inner, &a, &b, waypoints, &config_or_default(config))
        .map_err(to_py)?;
    Ok(PyConnector { inner })
}

#[pyfunction]
#[pyo3(signature = (landscape, optima, grid_points_per_edge = 5, config = None))]
fn build_m_connector(
    landscape: &PyWedgeLandscape,
    optima: Vec<Vec<f64>>,
    grid_points_per_edge: usize,
    config: Option<PyOptimizerConfig>,
) -> PyResult<PyConnector> {
    let optima = optima.into_iter().map(params).collect::<PyResult<Vec<_>>>()?;
    let inner =
        connectors::build_m_connector(&landscape.inner, &optima, grid_points_per_edge, &config_or_default(config))
            .map_err(to_py)?;
    Ok(PyConnector { inner })
}

/// `method` is "hessian_fd" (step `h`) or "exact_toy" (tolerance `tol`).
#[pyfunction]
#[pyo3(signature = (landscape, p, kappa = 0.5, method = "hessian_fd", h = 1e-4, tol = 1e-6))]
fn short_direction_count(
    landscape: &PyWedgeLandscape,
    p: Vec<f64>,
    kappa: f64,
    method: &str,
    h: f64,
    tol: f64,
) -> PyResult<usize> {
    let method = match method {
        "hessian_fd" => ShortDirectionMethod::HessianFd { h },
        "exact_toy" => ShortDirectionMethod::ExactToy { tol },
        other => return Err(PyValueError::new_err(format!("unknown method {other:?}"))),
    };
    Ok(probing::short_direction_count(&landscape.inner, &p, kappa, method).map_err(to_py)?.count)
}

/// Crossing distance per probe direction, in direction order.
#[pyfunction]
#[pyo3(signature = (landscape, center, loss_threshold, k = 200, r_max = 100.0, seed = 0))]
fn radial_tunnel_width(
    landscape: &PyWedgeLandscape,
    center: Vec<f64>,
    loss_threshold: f64,
    k: usize,
    r_max: f64,
    seed: u64,
) -> PyResult<Vec<f64>> {
    let report =
        probing::radial_tunnel_width(&landscape.inner, &center, loss_threshold, k, r_max, seed).map_err(to_py)?;
    Ok(report.distances())
}

#[pyfunction]
fn derive_seed(master: u64, label: &str, index: u64) -> u64 {
    wedgelab::rng::derive_seed(master, label, index)
}

/// Runs a subcommand as the `wedgelab` binary would and returns its exit
/// code. `args` excludes the program name.
#[pyfunction]
fn run_cli(args: Vec<String>) -> i32 {
    wedgelab::cli::run(std::iter::once("wedgelab".to_string()).chain(args))
}

#[pymodule(name = "wedgelab")]
fn wedgelab_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyOptimizerConfig>()?;
    m.add_class::<PyWedgeLandscape>()?;
    m.add_class::<PyConnector>()?;
    m.add_function(wrap_pyfunction!(minimize, m)?)?;
    m.add_function(wrap_pyfunction!(build_tunnel, m)?)?;
    m.add_function(wrap_pyfunction!(build_m_connector, m)?)?;
    m.add_function(wrap_pyfunction!(short_direction_count, m)?)?;
    m.add_function(wrap_pyfunction!(radial_tunnel_width, m)?)?;
    m.add_function(wrap_pyfunction!(derive_seed, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
