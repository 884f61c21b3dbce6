//! Python bindings.
//!
//! ```python
//! import fraclog
//! traj = fraclog.solve(0.5, 2.0, h=1e-4)
//! traj.blowup_time in fraclog.blowup_bracket(0.5, 2.0)
//! ```

use fraclog::analysis::{self, EnvelopeConstants, ProfileWindow};
use fraclog::quadrature::{self, KernelBranch, KernelSpec};
use fraclog::solver::{self, Nonlinearity, ProblemSpec, Scheme, Status};
use fraclog::{csv, oracle, special};
use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

create_exception!(fraclog, AccuracyError, PyArithmeticError, "An evaluation could not certify its accuracy.");

fn to_py(e: fraclog::Error) -> PyErr {
    match e {
        fraclog::Error::Domain(_) | fraclog::Error::Parse { .. } => PyValueError::new_err(e.to_string()),
        _ => AccuracyError::new_err(e.to_string()),
    }
}

/// Time grid, values and termination status of one run.
#[pyclass(frozen, name = "Trajectory")]
pub struct PyTrajectory {
    inner: solver::Trajectory,
}

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times.clone()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values.clone()
    }

    /// "completed", "blew_up" or "accuracy_failure".
    #[getter]
    fn status(&self) -> &'static str {
        match self.inner.status {
            Status::Completed => "completed",
            Status::BlewUp(_) => "blew_up",
            Status::AccuracyFailure(_) => "accuracy_failure",
        }
    }

    /// Index where marching stopped early, if it did.
    #[getter]
    fn stop_index(&self) -> Option<usize> {
        match self.inner.status {
            Status::Completed => None,
            Status::BlewUp(k) | Status::AccuracyFailure(k) => Some(k),
        }
    }

    #[getter]
    fn blowup_time(&self) -> Option<f64> {
        self.inner.blowup_time()
    }

    fn to_csv(&self) -> String {
        csv::trajectory_to_string(&self.inner, &[])
    }

    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        let parsed = csv::read_trajectory(text.as_bytes()).map_err(to_py)?;
        Ok(PyTrajectory { inner: parsed.trajectory })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Trajectory(len={}, status={})", self.inner.len(), self.status())
    }
}

/// Closed interval bounding a blow-up time.
#[pyclass(frozen, name = "BoundBracket")]
pub struct PyBracket {
    #[pyo3(get)]
    lower: f64,
    #[pyo3(get)]
    upper: f64,
}

impl From<analysis::BoundBracket> for PyBracket {
    fn from(b: analysis::BoundBracket) -> Self {
        PyBracket { lower: b.lower, upper: b.upper }
    }
}

#[pymethods]
impl PyBracket {
    fn __contains__(&self, t: f64) -> bool {
        self.lower <= t && t <= self.upper
    }

    fn __repr__(&self) -> String {
        format!("BoundBracket(lower={}, upper={})", self.lower, self.upper)
    }
}

fn problem(
    alpha: f64,
    u0: f64,
    h: f64,
    t_max: f64,
    threshold: f64,
    problem: &str,
    picard: bool,
) -> PyResult<ProblemSpec> {
    let nl: Nonlinearity = problem.parse().map_err(to_py)?;
    let spec = ProblemSpec::new(alpha, u0, nl, h, t_max)
        .map_err(to_py)?
        .with_threshold(threshold)
        .with_scheme(if picard { Scheme::Picard } else { Scheme::SemiImplicit });
    spec.validate().map_err(to_py)?;
    Ok(spec)
}

/// March the convolution quadrature scheme.
#[pyfunction]
#[pyo3(signature = (alpha, u0, h=1e-3, t_max=10.0, threshold=1e10, problem="logistic", picard=false))]
#[allow(clippy::too_many_arguments)]
fn solve(
    py: Python<'_>,
    alpha: f64,
    u0: f64,
    h: f64,
    t_max: f64,
    threshold: f64,
    problem: &str,
    picard: bool,
) -> PyResult<PyTrajectory> {
    let spec = self::problem(alpha, u0, h, t_max, threshold, problem, picard)?;
    let inner = py.detach(|| solver::solve(&spec)).map_err(to_py)?;
    Ok(PyTrajectory { inner })
}

/// Predictor-corrector reference solver on the Volterra form.
#[pyfunction]
#[pyo3(signature = (alpha, u0, h=1e-3, t_max=10.0, threshold=1e10, problem="logistic"))]
fn pece_solve(
    py: Python<'_>,
    alpha: f64,
    u0: f64,
    h: f64,
    t_max: f64,
    threshold: f64,
    problem: &str,
) -> PyResult<PyTrajectory> {
    let spec = self::problem(alpha, u0, h, t_max, threshold, problem, false)?;
    let inner = py.detach(|| oracle::pece_solve(&spec)).map_err(to_py)?;
    Ok(PyTrajectory { inner })
}

#[pyfunction]
fn blowup_bracket(alpha: f64, u0: f64) -> PyResult<PyBracket> {
    analysis::blowup_bracket(alpha, u0).map(Into::into).map_err(to_py)
}

/// Brackets for the square and shifted-square comparison problems.
#[pyfunction]
fn comparison_brackets(alpha: f64, w0: f64) -> PyResult<(PyBracket, PyBracket)> {
    let (sq, sh) = analysis::comparison_brackets(alpha, w0).map_err(to_py)?;
    Ok((sq.into(), sh.into()))
}

#[pyfunction]
#[pyo3(signature = (alpha, u0, t, c=1.0, c1=None))]
fn decay_envelope(alpha: f64, u0: f64, t: f64, c: f64, c1: Option<f64>) -> PyResult<f64> {
    let mut consts = EnvelopeConstants::for_alpha(alpha).map_err(to_py)?;
    consts.c = c;
    if let Some(c1) = c1 {
        consts.c1 = c1;
    }
    analysis::decay_envelope(alpha, u0, &consts, t).map_err(to_py)
}

#[pyfunction]
fn existence_horizon(alpha: f64, u0: f64, b: f64, t_cap: f64) -> PyResult<f64> {
    analysis::existence_horizon(alpha, u0, b, t_cap).map_err(to_py)
}

#[pyfunction]
fn profile_coefficient(alpha: f64) -> PyResult<f64> {
    analysis::profile_coefficient(alpha).map_err(to_py)
}

/// Fit `v - shift ≈ C (T - t)^{-α}` to the tail of a blown-up run; returns `(T, C)`.
#[pyfunction]
#[pyo3(signature = (traj, alpha, shift=0.0))]
fn fit_blowup_profile(traj: &PyTrajectory, alpha: f64, shift: f64) -> PyResult<(f64, f64)> {
    let fit = analysis::fit_blowup_profile(&traj.inner, alpha, shift, &ProfileWindow::default()).map_err(to_py)?;
    Ok((fit.t_est, fit.coeff))
}

/// Verification report for a logistic run: `[(name, passed, measured, bound)]`.
#[pyfunction]
#[pyo3(signature = (alpha, u0, traj, h, t_max, picard=false))]
fn verify_run(
    py: Python<'_>,
    alpha: f64,
    u0: f64,
    traj: &PyTrajectory,
    h: f64,
    t_max: f64,
    picard: bool,
) -> PyResult<Vec<(String, bool, f64, f64)>> {
    let spec = problem(alpha, u0, h, t_max, ProblemSpec::DEFAULT_THRESHOLD, "logistic", picard)?;
    let report = py.detach(|| analysis::verify_run(&spec, &traj.inner)).map_err(to_py)?;
    Ok(report.checks.into_iter().map(|c| (c.name, c.pass, c.measured, c.bound)).collect())
}

/// Weights `ω_0..ω_n` for branch "decay", "growth" or "rl".
#[pyfunction]
fn cq_weights(branch: &str, alpha: f64, h: f64, n: usize) -> PyResult<Vec<f64>> {
    let branch: KernelBranch = branch.parse().map_err(to_py)?;
    let spec = KernelSpec::new(branch, alpha, h).map_err(to_py)?;
    Ok(quadrature::cq_weights(&spec, n).map_err(to_py)?.into_weights())
}

#[pyfunction]
fn gamma(x: f64) -> PyResult<f64> {
    special::gamma(x).map_err(to_py)
}

/// `E_{α,β}(z)`.
#[pyfunction]
#[pyo3(signature = (alpha, z, beta=1.0))]
fn mittag_leffler(alpha: f64, z: f64, beta: f64) -> PyResult<f64> {
    special::mittag_leffler_two(alpha, beta, z).map_err(to_py)
}

/// `E_{α,β}(z)` from multiple-precision arithmetic.
#[pyfunction]
#[pyo3(signature = (alpha, z, beta=1.0))]
fn mittag_leffler_reference(alpha: f64, z: f64, beta: f64) -> PyResult<f64> {
    oracle::ml_reference(alpha, beta, z).map_err(to_py)
}

#[pyfunction]
fn caputo_residual(traj: &PyTrajectory, alpha: f64) -> PyResult<Vec<f64>> {
    oracle::caputo_residual(&traj.inner, alpha).map_err(to_py)
}

#[pymodule]
#[pyo3(name = "fraclog")]
fn fraclog_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTrajectory>()?;
    m.add_class::<PyBracket>()?;
    m.add("AccuracyError", m.py().get_type::<AccuracyError>())?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(pece_solve, m)?)?;
    m.add_function(wrap_pyfunction!(blowup_bracket, m)?)?;
    m.add_function(wrap_pyfunction!(comparison_brackets, m)?)?;
    m.add_function(wrap_pyfunction!(decay_envelope, m)?)?;
    m.add_function(wrap_pyfunction!(existence_horizon, m)?)?;
    m.add_function(wrap_pyfunction!(profile_coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(fit_blowup_profile, m)?)?;
    m.add_function(wrap_pyfunction!(verify_run, m)?)?;
    m.add_function(wrap_pyfunction!(cq_weights, m)?)?;
    m.add_function(wrap_pyfunction!(gamma, m)?)?;
    m.add_function(wrap_pyfunction!(mittag_leffler, m)?)?;
    m.add_function(wrap_pyfunction!(mittag_leffler_reference, m)?)?;
    m.add_function(wrap_pyfunction!(caputo_residual, m)?)?;
    Ok(())
}
