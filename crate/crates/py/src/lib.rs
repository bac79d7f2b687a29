//! Python bindings: problems, schedules, solver runs, Lyapunov
//! diagnostics, and the damped-flow integrator.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use avd_core::diagnostics;
use avd_core::dynamics;
use avd_core::perturbation::{Direction, PerturbationSchedule};
use avd_core::problems;
use avd_core::solver;
use avd_core::Error;

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Usage(msg) => PyValueError::new_err(msg),
        Error::Numerical(msg) => PyRuntimeError::new_err(msg),
    }
}

/// A named problem instance with its reference solution.
#[pyclass]
struct Problem {
    inner: problems::ProblemInstance,
}

#[pymethods]
impl Problem {
    /// Problem(name, dim=None, seed=0, lambda_weight=None)
    #[new]
    #[pyo3(signature = (name, dim=None, seed=0, lambda_weight=None))]
    fn new(name: &str, dim: Option<usize>, seed: u64, lambda_weight: Option<f64>) -> PyResult<Self> {
        Ok(Problem { inner: problems::by_name(name, dim, seed, lambda_weight).map_err(to_py_err)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.objective.dim()
    }

    #[getter]
    fn lipschitz(&self) -> f64 {
        self.inner.objective.lipschitz()
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.objective.label().to_string()
    }

    #[getter]
    fn xstar(&self) -> Option<Vec<f64>> {
        self.inner.xstar.clone()
    }

    #[getter]
    fn theta_star(&self) -> Option<f64> {
        self.inner.theta_star
    }

    #[getter]
    fn default_x0(&self) -> Vec<f64> {
        self.inner.default_x0.clone()
    }

    /// Θ(x) = Φ(x) + Ψ(x); returns +inf outside dom Φ.
    fn value(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.objective.eval_composite(&x).map_err(to_py_err)
    }

    /// Ψ(x) and ∇Ψ(x).
    fn smooth(&self, x: Vec<f64>) -> PyResult<(f64, Vec<f64>)> {
        self.inner.objective.eval_smooth(&x).map_err(to_py_err)
    }

    /// prox_{γΦ}(x).
    fn prox(&self, gamma: f64, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.objective.prox(gamma, &x).map_err(to_py_err)
    }

    fn __repr__(&self) -> String {
        format!("Problem('{}', dim={})", self.inner.objective.label(), self.inner.objective.dim())
    }
}

/// Perturbation schedule g_k / g(t).
#[pyclass(from_py_object)]
#[derive(Clone)]
struct Schedule {
    inner: PerturbationSchedule,
}

#[pymethods]
impl Schedule {
    /// Zero schedule of the given dimension.
    #[staticmethod]
    fn zero(dim: usize) -> Self {
        Schedule { inner: PerturbationSchedule::zero(dim) }
    }

    /// Power-law schedule ‖g_k‖ = c·k^(−p); direction is either a fixed
    /// vector or seeded per index.
    #[staticmethod]
    #[pyo3(signature = (c, p, dim, direction=None, direction_seed=0))]
    fn power_law(
        c: f64,
        p: f64,
        dim: usize,
        direction: Option<Vec<f64>>,
        direction_seed: u64,
    ) -> PyResult<Self> {
        let dir = match direction {
            Some(v) => Direction::fixed(v).map_err(to_py_err)?,
            None => Direction::seeded(direction_seed, dim),
        };
        Ok(Schedule { inner: PerturbationSchedule::power_law(c, p, dir).map_err(to_py_err)? })
    }

    /// Explicit leading entries; zero vectors past the end.
    #[staticmethod]
    fn finite_list(entries: Vec<Vec<f64>>, dim: usize) -> PyResult<Self> {
        Ok(Schedule { inner: PerturbationSchedule::finite_list(entries, dim).map_err(to_py_err)? })
    }

    fn sample_discrete(&self, k: usize) -> PyResult<Vec<f64>> {
        self.inner.sample_discrete(k).map_err(to_py_err)
    }

    #[pyo3(signature = (t, t0=1.0))]
    fn sample_continuous(&self, t: f64, t0: f64) -> PyResult<Vec<f64>> {
        self.inner.sample_continuous(t, t0).map_err(to_py_err)
    }

    fn weighted_tail_sum(&self, alpha: f64, k_from: usize, k_to: usize) -> PyResult<f64> {
        self.inner.weighted_tail_sum(alpha, k_from, k_to).map_err(to_py_err)
    }

    /// {"norm_summable", "k_weighted_summable", "t_weighted_integrable", "analytic"}
    fn classify<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let rep = self.inner.classify_summability();
        let d = PyDict::new(py);
        d.set_item("norm_summable", rep.norm_summable)?;
        d.set_item("k_weighted_summable", rep.k_weighted_summable)?;
        d.set_item("t_weighted_integrable", rep.t_weighted_integrable)?;
        d.set_item("analytic", rep.analytic)?;
        Ok(d)
    }
}

/// Recorded solver run.
#[pyclass]
struct History {
    inner: solver::RunHistory,
    sched: PerturbationSchedule,
}

#[pymethods]
impl History {
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Θ(x_k) for k = 1..
    fn theta(&self) -> Vec<f64> {
        self.inner.records.iter().map(|r| r.theta).collect()
    }

    /// Θ(x_k) − θ*.
    fn gaps(&self, theta_star: f64) -> Vec<f64> {
        self.inner.gaps(theta_star)
    }

    /// Iterate x_k (1-based).
    fn iterate(&self, k: usize) -> PyResult<Vec<f64>> {
        Ok(self.inner.record(k).map_err(to_py_err)?.x.clone())
    }

    /// ‖x_k − x_{k−1}‖ sequence.
    fn step_norms(&self) -> Vec<f64> {
        self.inner.records.iter().map(|r| r.step_norm).collect()
    }

    /// Momentum coefficients γ_k.
    fn momentum(&self) -> Vec<f64> {
        self.inner.records.iter().map(|r| r.momentum).collect()
    }

    /// Lyapunov G(k) series against a reference.
    fn lyapunov_g(&self, xstar: Vec<f64>, theta_star: f64) -> PyResult<Vec<f64>> {
        diagnostics::lyapunov_g_series(
            &self.inner,
            self.inner.params.alpha,
            self.inner.params.step,
            &xstar,
            theta_star,
        )
        .map_err(to_py_err)
    }

    /// Lyapunov E_K(k) series for k = 1..=K (default K = len − 1).
    #[pyo3(signature = (xstar, theta_star, big_k=None))]
    fn lyapunov_ek(
        &self,
        xstar: Vec<f64>,
        theta_star: f64,
        big_k: Option<usize>,
    ) -> PyResult<Vec<f64>> {
        diagnostics::lyapunov_ek(
            &self.inner,
            &self.sched,
            self.inner.params.alpha,
            self.inner.params.step,
            &xstar,
            theta_star,
            big_k.unwrap_or(self.inner.len().saturating_sub(1)),
        )
        .map_err(to_py_err)
    }

    /// (C, M) of the value-gap bound; None encodes the infinite sentinel.
    fn constants(&self, xstar: Vec<f64>, theta_star: f64) -> PyResult<(Option<f64>, Option<f64>)> {
        let c = diagnostics::theorem_constants(
            &self.inner,
            &self.sched,
            self.inner.params.alpha,
            self.inner.params.step,
            &xstar,
            theta_star,
        )
        .map_err(to_py_err)?;
        Ok((c.c, c.m))
    }

    /// Indices where a series fails to be nonincreasing.
    #[staticmethod]
    #[pyo3(signature = (series, tol_abs=1e-9, tol_rel=1e-9))]
    fn monotone_violations(series: Vec<f64>, tol_abs: f64, tol_rel: f64) -> Vec<usize> {
        diagnostics::check_monotone(&series, tol_abs, tol_rel)
            .into_iter()
            .map(|v| v.k)
            .collect()
    }

    /// Fitted log-log slope of the gap over [k_from, k_to].
    fn fit_rate(&self, theta_star: f64, k_from: usize, k_to: usize) -> PyResult<f64> {
        Ok(diagnostics::fit_rate(&self.inner.gaps(theta_star), k_from, k_to)
            .map_err(to_py_err)?
            .slope)
    }
}

/// Runs the inertial solver.
#[pyfunction]
#[pyo3(signature = (problem, schedule, alpha, max_iter, s=None, value_tol=0.0, x0=None, allow_no_guarantee=false))]
#[allow(clippy::too_many_arguments)]
fn solve(
    problem: &Problem,
    schedule: &Schedule,
    alpha: f64,
    max_iter: usize,
    s: Option<f64>,
    value_tol: f64,
    x0: Option<Vec<f64>>,
    allow_no_guarantee: bool,
) -> PyResult<History> {
    let params = solver::SolverParams {
        alpha,
        step: s.unwrap_or(1.0 / problem.inner.objective.lipschitz()),
        max_iter,
        value_tol,
        allow_no_guarantee,
    };
    let start = x0.unwrap_or_else(|| problem.inner.default_x0.clone());
    let history = solver::run(
        &problem.inner.objective,
        &schedule.inner,
        &params,
        &start,
        problem.inner.theta_star,
        |_| false,
    )
    .map_err(|f| to_py_err(f.into()))?;
    Ok(History { inner: history, sched: schedule.inner.clone() })
}

/// Integrated trajectory of the damped flow with its energy series.
#[pyclass]
struct Flow {
    times: Vec<f64>,
    positions: Vec<Vec<f64>>,
    velocities: Vec<Vec<f64>>,
    total_energy: Vec<f64>,
    lyapunov: Option<Vec<f64>>,
    scaled_gap: Vec<f64>,
}

#[pymethods]
impl Flow {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.times.clone()
    }

    #[getter]
    fn positions(&self) -> Vec<Vec<f64>> {
        self.positions.clone()
    }

    #[getter]
    fn velocities(&self) -> Vec<Vec<f64>> {
        self.velocities.clone()
    }

    /// W(t): kinetic + gap + perturbation tail.
    #[getter]
    fn total_energy(&self) -> Vec<f64> {
        self.total_energy.clone()
    }

    /// Rate-certifying Lyapunov energy (None without a minimizer).
    #[getter]
    fn lyapunov(&self) -> Option<Vec<f64>> {
        self.lyapunov.clone()
    }

    /// t²·(Ψ(x(t)) − inf Ψ).
    #[getter]
    fn scaled_gap(&self) -> Vec<f64> {
        self.scaled_gap.clone()
    }

    fn __len__(&self) -> usize {
        self.times.len()
    }
}

/// Integrates ẍ + (α/t)ẋ + ∇Ψ(x) = g(t) from t0 to t_end.
#[pyfunction]
#[pyo3(signature = (problem, schedule, alpha, t0, t_end, x0=None, v0=None, rtol=1e-8, atol=1e-12))]
#[allow(clippy::too_many_arguments)]
fn integrate_flow(
    problem: &Problem,
    schedule: &Schedule,
    alpha: f64,
    t0: f64,
    t_end: f64,
    x0: Option<Vec<f64>>,
    v0: Option<Vec<f64>>,
    rtol: f64,
    atol: f64,
) -> PyResult<Flow> {
    let dim = problem.inner.objective.dim();
    let prob = dynamics::DynamicsProblem::new(
        problem.inner.objective.clone(),
        schedule.inner.clone(),
        alpha,
        t0,
        x0.unwrap_or_else(|| problem.inner.default_x0.clone()),
        v0.unwrap_or_else(|| vec![0.0; dim]),
    )
    .map_err(to_py_err)?;
    let traj = dynamics::integrate(&prob, t_end, rtol, atol).map_err(to_py_err)?;
    let phistar = problem
        .inner
        .theta_star
        .ok_or_else(|| PyValueError::new_err("instance has no reference infimum"))?;
    let series =
        dynamics::energy_series(&traj, &prob, problem.inner.xstar.as_deref(), phistar)
            .map_err(to_py_err)?;
    Ok(Flow {
        times: traj.times,
        positions: traj.positions,
        velocities: traj.velocities,
        total_energy: series.total_energy,
        lyapunov: series.lyapunov,
        scaled_gap: series.scaled_gap,
    })
}

/// Momentum coefficient γ_k = (k−1)/(k+α−1).
#[pyfunction]
fn momentum_coefficient(k: usize, alpha: f64) -> f64 {
    solver::momentum_coefficient(k, alpha)
}

/// Runs a verification suite ("fast" or "full"); returns one dict per
/// criterion.
#[pyfunction]
fn verify(py: Python<'_>, suite: &str) -> PyResult<Vec<Py<PyDict>>> {
    let suite: avd_core::verify::Suite = suite.parse().map_err(to_py_err)?;
    let results = avd_core::verify::run_suite(suite).map_err(to_py_err)?;
    results
        .into_iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("id", r.id)?;
            d.set_item("name", r.name)?;
            d.set_item("measured", r.measured)?;
            d.set_item("threshold", r.threshold)?;
            d.set_item("pass", r.pass)?;
            d.set_item("detail", r.detail)?;
            Ok(d.unbind())
        })
        .collect()
}

#[pymodule]
fn avd_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Problem>()?;
    m.add_class::<Schedule>()?;
    m.add_class::<History>()?;
    m.add_class::<Flow>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(integrate_flow, m)?)?;
    m.add_function(wrap_pyfunction!(momentum_coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add("INSTANCE_NAMES", problems::INSTANCE_NAMES.to_vec())?;
    Ok(())
}
