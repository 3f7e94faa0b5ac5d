//! Python bindings for the volterra crate: quadrature rules, the
//! smoothness toolkit, both collocation solvers on the built-in problems,
//! and the solvability check. Errors surface as ValueError for bad
//! arguments and RuntimeError for failed iterations.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use volterra::harness::{run_convergence, ExperimentConfig, Method};
use volterra::holder::{HolderParams, SampledFunction};
use volterra::problem::{by_name, existence_margin, find_r0, problem_names, Problem};
use volterra::solver::linear::{solve_linear, LinearConfig, LinearSolution};
use volterra::solver::spectral::{solve_spectral, SpectralConfig, SpectralSolution};

fn raise(e: volterra::Error) -> PyErr {
    use volterra::Error::*;
    match &e {
        Domain(_) | Config(_) | Unsupported(_) | UnknownProblem { .. } => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn params(alpha: f64, beta: Option<f64>) -> PyResult<HolderParams> {
    match beta {
        Some(b) => HolderParams::finite(alpha, b).map_err(raise),
        None => HolderParams::infinite(alpha).map_err(raise),
    }
}

fn sampled(values: Vec<f64>, a: f64, b: f64) -> PyResult<SampledFunction> {
    SampledFunction::new(a, b, values).map_err(raise)
}

fn lookup(problem: &str) -> PyResult<Problem> {
    by_name(problem).map_err(raise)
}

/// Nodes and weights of the m-point Gauss-Legendre rule on [a, b].
#[pyfunction]
#[pyo3(signature = (m, a=0.0, b=1.0))]
fn gauss_rule(m: usize, a: f64, b: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let rule = volterra::quadrature::gauss_rule(m, a, b).map_err(raise)?;
    Ok((rule.nodes, rule.weights))
}

/// Legendre polynomial value and derivative at t in [-1, 1].
#[pyfunction]
fn legendre_eval(n: usize, t: f64) -> (f64, f64) {
    volterra::quadrature::legendre_eval(n, t)
}

/// Modulus of continuity of sampled values on [a, b] at scale sigma.
#[pyfunction]
#[pyo3(signature = (values, sigma, a=0.0, b=1.0))]
fn modulus(values: Vec<f64>, sigma: f64, a: f64, b: f64) -> PyResult<f64> {
    volterra::holder::modulus(&sampled(values, a, b)?, sigma).map_err(raise)
}

/// Integral smoothness seminorm over [0, s] for finite beta.
#[pyfunction]
#[pyo3(signature = (values, alpha, beta, s, a=0.0, b=1.0))]
fn j_seminorm(values: Vec<f64>, alpha: f64, beta: f64, s: f64, a: f64, b: f64) -> PyResult<f64> {
    let p = params(alpha, Some(beta))?;
    volterra::holder::j_seminorm(&sampled(values, a, b)?, &p, s).map_err(raise)
}

/// Supremum form of the seminorm: largest sigma^-alpha * modulus(sigma).
#[pyfunction]
#[pyo3(signature = (values, alpha, a=0.0, b=1.0))]
fn j_sup(values: Vec<f64>, alpha: f64, a: f64, b: f64) -> PyResult<f64> {
    volterra::holder::j_sup(&sampled(values, a, b)?, alpha).map_err(raise)
}

/// Constant in the deviation bound; beta=None selects the supremum form.
#[pyfunction]
#[pyo3(signature = (alpha, beta=None))]
fn sup_bound_constant(alpha: f64, beta: Option<f64>) -> PyResult<f64> {
    Ok(volterra::holder::sup_bound_constant(&params(alpha, beta)?))
}

/// Bound on max |x(t) - x(0)| over [0, span] from sampled values.
#[pyfunction]
#[pyo3(signature = (values, alpha, beta=None, span=1.0))]
fn sup_norm_bound(values: Vec<f64>, alpha: f64, beta: Option<f64>, span: f64) -> PyResult<f64> {
    let p = params(alpha, beta)?;
    volterra::holder::sup_norm_bound(&sampled(values, 0.0, span)?, &p, span).map_err(raise)
}

/// Piecewise-linear interpolation error bound at mesh width h, from
/// values sampled on [0, 1].
#[pyfunction]
#[pyo3(signature = (values, alpha, h, beta=None))]
fn interp_error_bound(values: Vec<f64>, alpha: f64, h: f64, beta: Option<f64>) -> PyResult<f64> {
    let p = params(alpha, beta)?;
    volterra::interp::interp_error_bound(&sampled(values, 0.0, 1.0)?, &p, h).map_err(raise)
}

/// Names of the built-in problems.
#[pyfunction]
fn problems() -> Vec<String> {
    problem_names()
}

/// Marching collocation solution on a uniform mesh.
#[pyclass(name = "LinearSolution")]
struct PyLinearSolution {
    inner: LinearSolution,
}

#[pymethods]
impl PyLinearSolution {
    fn __call__(&self, t: f64) -> f64 {
        self.inner.eval(t)
    }

    fn nodes(&self) -> Vec<f64> {
        self.inner.interpolant.mesh().nodes()
    }

    fn values(&self) -> Vec<f64> {
        self.inner.node_values().to_vec()
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    #[getter]
    fn max_residual(&self) -> f64 {
        self.inner.max_residual
    }

    #[getter]
    fn clamped(&self) -> bool {
        self.inner.clamped
    }

    fn __repr__(&self) -> String {
        format!(
            "LinearSolution(n={}, iterations={}, max_residual={:.3e})",
            self.inner.interpolant.mesh().n(),
            self.inner.iterations,
            self.inner.max_residual
        )
    }
}

/// Global spectral collocation solution.
#[pyclass(name = "SpectralSolution")]
struct PySpectralSolution {
    inner: SpectralSolution,
}

#[pymethods]
impl PySpectralSolution {
    fn __call__(&self, t: f64) -> PyResult<f64> {
        self.inner.eval(t).map_err(raise)
    }

    fn nodes(&self) -> Vec<f64> {
        self.inner.nodes().to_vec()
    }

    fn values(&self) -> Vec<f64> {
        self.inner.node_values().to_vec()
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    #[getter]
    fn max_residual(&self) -> f64 {
        self.inner.max_residual
    }

    #[getter]
    fn clamped(&self) -> bool {
        self.inner.clamped
    }

    fn __repr__(&self) -> String {
        format!(
            "SpectralSolution(degree={}, iterations={}, max_residual={:.3e})",
            self.inner.nodes().len().saturating_sub(1),
            self.inner.iterations,
            self.inner.max_residual
        )
    }
}

/// Solve a built-in problem with the marching method on n cells.
#[pyfunction]
#[pyo3(signature = (problem, n, tol=None, max_iter=None))]
fn linear_solve(
    problem: &str,
    n: usize,
    tol: Option<f64>,
    max_iter: Option<usize>,
) -> PyResult<PyLinearSolution> {
    let mut config = LinearConfig::new(n);
    if let Some(t) = tol {
        config.tol = t;
    }
    if let Some(m) = max_iter {
        config.max_iter = m;
    }
    let inner = solve_linear(&lookup(problem)?, &config).map_err(raise)?;
    Ok(PyLinearSolution { inner })
}

/// Solve a built-in problem with the spectral method at the given degree.
#[pyfunction]
#[pyo3(signature = (problem, degree, tol=None, max_iter=None))]
fn spectral_solve(
    problem: &str,
    degree: usize,
    tol: Option<f64>,
    max_iter: Option<usize>,
) -> PyResult<PySpectralSolution> {
    let mut config = SpectralConfig::new(degree);
    if let Some(t) = tol {
        config.tol = t;
    }
    if let Some(m) = max_iter {
        config.max_iter = m;
    }
    let inner = solve_spectral(&lookup(problem)?, &config).map_err(raise)?;
    Ok(PySpectralSolution { inner })
}

/// Exact solution of a built-in problem at t, when one is known.
#[pyfunction]
fn exact(problem: &str, t: f64) -> PyResult<Option<f64>> {
    Ok(lookup(problem)?.exact_at(t))
}

/// Smallest radius satisfying the solvability condition of a built-in
/// problem, or None when no radius does.
#[pyfunction]
fn solvability_radius(problem: &str, alpha: f64, beta: f64) -> PyResult<Option<f64>> {
    let p = lookup(problem)?;
    let meta = p
        .meta()
        .ok_or_else(|| PyValueError::new_err(format!("problem '{problem}' carries no growth data")))?;
    find_r0(meta, &params(alpha, Some(beta))?).map_err(raise)
}

/// Margin r - (envelope at r) * I^(alpha/beta) at a given radius.
#[pyfunction]
fn solvability_margin(problem: &str, alpha: f64, beta: f64, r: f64) -> PyResult<f64> {
    let p = lookup(problem)?;
    let meta = p
        .meta()
        .ok_or_else(|| PyValueError::new_err(format!("problem '{problem}' carries no growth data")))?;
    existence_margin(meta, &params(alpha, Some(beta))?, r).map_err(raise)
}

/// Run a convergence study and return the report as a JSON string.
#[pyfunction]
#[pyo3(signature = (problem, method, resolutions))]
fn convergence_report(problem: &str, method: &str, resolutions: Vec<usize>) -> PyResult<String> {
    let m = match method {
        "linear" => Method::Linear,
        "spectral" => Method::Spectral,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown method '{other}'; use 'linear' or 'spectral'"
            )))
        }
    };
    let config = ExperimentConfig::new(m, resolutions);
    let report = run_convergence(&lookup(problem)?, &config).map_err(raise)?;
    report.to_json().map_err(raise)
}

#[pymodule]
fn volterra_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(gauss_rule, m)?)?;
    m.add_function(wrap_pyfunction!(legendre_eval, m)?)?;
    m.add_function(wrap_pyfunction!(modulus, m)?)?;
    m.add_function(wrap_pyfunction!(j_seminorm, m)?)?;
    m.add_function(wrap_pyfunction!(j_sup, m)?)?;
    m.add_function(wrap_pyfunction!(sup_bound_constant, m)?)?;
    m.add_function(wrap_pyfunction!(sup_norm_bound, m)?)?;
    m.add_function(wrap_pyfunction!(interp_error_bound, m)?)?;
    m.add_function(wrap_pyfunction!(problems, m)?)?;
    m.add_function(wrap_pyfunction!(linear_solve, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_solve, m)?)?;
    m.add_function(wrap_pyfunction!(exact, m)?)?;
    m.add_function(wrap_pyfunction!(solvability_radius, m)?)?;
    m.add_function(wrap_pyfunction!(solvability_margin, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_report, m)?)?;
    m.add_class::<PyLinearSolution>()?;
    m.add_class::<PySpectralSolution>()?;
    Ok(())
}
