//! Python bindings: kernel coefficients, schedules, bounds, exact Gaussian
//! laws, discrete divergences, replica runs and the dimension sweep.

use kinlangevin::bounds;
use kinlangevin::chain::{run_chain, InitDistribution, Recording, RunSpec, SamplerKind};
use kinlangevin::divergences::{self, DiscreteDist};
use kinlangevin::gaussian_exact::{self as ge, GaussianLaw2D, Mat2};
use kinlangevin::harness::{sweep_rows, SweepSettings};
use kinlangevin::kernel::{self, FrictionStep};
use kinlangevin::targets::make_diagonal_gaussian;
use kinlangevin::Error;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    if e.is_numerical() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

type Cov = [[f64; 2]; 2];

#[pyclass(name = "KernelCoefficients", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyKernelCoefficients {
    vel_decay: f64,
    pos_vel: f64,
    pos_grad: f64,
    vel_grad: f64,
    a: f64,
    b: f64,
    c: f64,
}

#[pymethods]
impl PyKernelCoefficients {
    fn noise_det(&self) -> f64 {
        self.a * self.b - self.c * self.c
    }

    fn __repr__(&self) -> String {
        format!(
            "KernelCoefficients(vel_decay={}, pos_vel={}, pos_grad={}, vel_grad={}, a={}, b={}, c={})",
            self.vel_decay, self.pos_vel, self.pos_grad, self.vel_grad, self.a, self.b, self.c
        )
    }
}

/// One-step kernel coefficients for friction `beta` and step `eta`.
#[pyfunction]
fn kernel_coefficients(beta: f64, eta: f64) -> PyResult<PyKernelCoefficients> {
    let k = kernel::compute_coefficients(FrictionStep::new(beta, eta).map_err(to_py)?);
    Ok(PyKernelCoefficients {
        vel_decay: k.vel_decay,
        pos_vel: k.pos_vel,
        pos_grad: k.pos_grad,
        vel_grad: k.vel_grad,
        a: k.a,
        b: k.b,
        c: k.c,
    })
}

#[pyfunction]
fn hypocoercive_factor(beta: f64, poincare: f64, kappa: f64, t: f64) -> PyResult<f64> {
    bounds::hypocoercive_factor_explicit(beta, poincare, kappa, t).map_err(to_py)
}

#[pyclass(name = "Schedule", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PySchedule {
    beta: f64,
    eta: f64,
    k: u64,
    predicted_tv: f64,
    total_tv_prediction: f64,
}

#[pymethods]
impl PySchedule {
    fn total_time(&self) -> f64 {
        self.k as f64 * self.eta
    }

    fn __repr__(&self) -> String {
        format!(
            "Schedule(beta={}, eta={}, k={}, predicted_tv={}, total_tv_prediction={})",
            self.beta, self.eta, self.k, self.predicted_tv, self.total_tv_prediction
        )
    }
}

#[pyfunction]
#[pyo3(signature = (epsilon, n, lipschitz, poincare, chi2_warm, log_concave = false, c = 1.0, big_c = 1.0, c_disc = 1.0))]
#[allow(clippy::too_many_arguments)]
fn make_schedule(
    epsilon: f64,
    n: usize,
    lipschitz: f64,
    poincare: f64,
    chi2_warm: f64,
    log_concave: bool,
    c: f64,
    big_c: f64,
    c_disc: f64,
) -> PyResult<PySchedule> {
    let mut input = bounds::ScheduleInput::new(epsilon, n, lipschitz, poincare, chi2_warm, log_concave);
    input.c_const = c;
    input.big_c_const = big_c;
    input.c_disc = c_disc;
    let s = bounds::make_schedule(&input).map_err(to_py)?;
    let total = bounds::total_tv_prediction(&input, &s).map_err(to_py)?;
    Ok(PySchedule { beta: s.beta, eta: s.eta, k: s.k, predicted_tv: s.predicted_tv, total_tv_prediction: total })
}

fn dist(p: Vec<f64>) -> PyResult<DiscreteDist> {
    DiscreteDist::new(p).map_err(to_py)
}

#[pyfunction]
fn tv_discrete(p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    divergences::tv_discrete(&dist(p)?, &dist(q)?).map_err(to_py)
}

#[pyfunction]
fn kl_discrete(p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    divergences::kl_discrete(&dist(p)?, &dist(q)?).map_err(to_py)
}

#[pyfunction]
fn chi2_discrete(p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    divergences::chi2_discrete(&dist(p)?, &dist(q)?).map_err(to_py)
}

/// `(lhs, rhs, holds)` of the KL / chi-square triangle inequality.
#[pyfunction]
fn check_triangle_lemma(m1: Vec<f64>, m2: Vec<f64>, m3: Vec<f64>) -> PyResult<(f64, f64, bool)> {
    let c = divergences::check_triangle_lemma(&dist(m1)?, &dist(m2)?, &dist(m3)?).map_err(to_py)?;
    Ok((c.lhs, c.rhs, c.holds))
}

fn law(mean: [f64; 2], cov: Cov) -> PyResult<GaussianLaw2D> {
    GaussianLaw2D::new(mean, Mat2(cov)).map_err(to_py)
}

/// Stationary `(mean, cov)` of the discrete kinetic chain on mode `lam`.
#[pyfunction]
fn discrete_stationary(lam: f64, beta: f64, eta: f64) -> PyResult<([f64; 2], Cov)> {
    let k = kernel::compute_coefficients(FrictionStep::new(beta, eta).map_err(to_py)?);
    let s = ge::discrete_stationary(lam, &k).map_err(to_py)?;
    Ok((s.mean, s.cov.0))
}

/// Law of one mode after `k` discrete kinetic steps.
#[pyfunction]
fn propagate_discrete(mean: [f64; 2], cov: Cov, lam: f64, beta: f64, eta: f64, k: u64) -> PyResult<([f64; 2], Cov)> {
    let coeffs = kernel::compute_coefficients(FrictionStep::new(beta, eta).map_err(to_py)?);
    let start = ge::ProductGaussianLaw::new(vec![law(mean, cov)?]);
    let out = ge::propagate_discrete(&start, &[lam], &coeffs, k).map_err(to_py)?;
    Ok((out.modes[0].mean, out.modes[0].cov.0))
}

/// Law of one mode after time `t` of the continuous kinetic flow.
#[pyfunction]
fn propagate_continuous(mean: [f64; 2], cov: Cov, lam: f64, beta: f64, t: f64) -> PyResult<([f64; 2], Cov)> {
    let out = ge::propagate_continuous(&law(mean, cov)?, lam, beta, t).map_err(to_py)?;
    Ok((out.mean, out.cov.0))
}

#[pyfunction]
fn kl_mode(p_mean: [f64; 2], p_cov: Cov, q_mean: [f64; 2], q_cov: Cov) -> PyResult<f64> {
    ge::kl_mode(&law(p_mean, p_cov)?, &law(q_mean, q_cov)?).map_err(to_py)
}

#[pyfunction]
fn log1p_chi2_mode(p_mean: [f64; 2], p_cov: Cov, q_mean: [f64; 2], q_cov: Cov) -> PyResult<f64> {
    Ok(ge::log1p_chi2_mode(&law(p_mean, p_cov)?, &law(q_mean, q_cov)?))
}

/// Replica run on a centered diagonal Gaussian target from a point mass.
/// Returns `(step, E|x|^2, E|y|^2, replicas)` at every `every` steps.
#[pyfunction]
#[pyo3(signature = (eigenvalues, eta, steps, replicas, seed, beta = 1.0, kind = "kinetic", x0 = None, every = 1))]
#[allow(clippy::too_many_arguments)]
fn run_chain_gaussian(
    eigenvalues: Vec<f64>,
    eta: f64,
    steps: u64,
    replicas: usize,
    seed: u64,
    beta: f64,
    kind: &str,
    x0: Option<Vec<f64>>,
    every: u64,
) -> PyResult<Vec<(u64, f64, f64, usize)>> {
    let n = eigenvalues.len();
    let target = make_diagonal_gaussian(eigenvalues, vec![0.0; n]).map_err(to_py)?;
    let sampler: SamplerKind = kind.parse().map_err(to_py)?;
    let spec = RunSpec {
        sampler,
        friction_step: FrictionStep::new(beta, eta).map_err(to_py)?,
        init: InitDistribution::point(x0.unwrap_or_else(|| vec![0.0; n])),
        steps,
        replicas,
        seed,
        record: Recording::Linear(every),
        keep_snapshots: false,
    };
    let out = run_chain(&target, &spec).and_then(|o| o.ok()).map_err(to_py)?;
    Ok(out
        .reports
        .into_iter()
        .map(|(s, r)| (s, r.second_moment_position, r.second_moment_velocity, r.samples_used))
        .collect())
}

/// Matched-bias sweep on standard Gaussians:
/// `(n, steps_kinetic, steps_overdamped, ratio)` per dimension.
#[pyfunction]
#[pyo3(signature = (dims, epsilon = 0.1, chi2_warm = 10.0))]
fn sweep(dims: Vec<usize>, epsilon: f64, chi2_warm: f64) -> PyResult<Vec<(usize, u64, u64, f64)>> {
    let mut s = SweepSettings::standard(epsilon, chi2_warm);
    s.dims = dims;
    let rows = sweep_rows(&s).map_err(to_py)?;
    Ok(rows.iter().map(|r| (r.n, r.steps_kinetic, r.steps_overdamped, r.ratio())).collect())
}

#[pymodule]
fn pykinlangevin(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyKernelCoefficients>()?;
    m.add_class::<PySchedule>()?;
    m.add_function(wrap_pyfunction!(kernel_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(hypocoercive_factor, m)?)?;
    m.add_function(wrap_pyfunction!(make_schedule, m)?)?;
    m.add_function(wrap_pyfunction!(tv_discrete, m)?)?;
    m.add_function(wrap_pyfunction!(kl_discrete, m)?)?;
    m.add_function(wrap_pyfunction!(chi2_discrete, m)?)?;
    m.add_function(wrap_pyfunction!(check_triangle_lemma, m)?)?;
    m.add_function(wrap_pyfunction!(discrete_stationary, m)?)?;
    m.add_function(wrap_pyfunction!(propagate_discrete, m)?)?;
    m.add_function(wrap_pyfunction!(propagate_continuous, m)?)?;
    m.add_function(wrap_pyfunction!(kl_mode, m)?)?;
    m.add_function(wrap_pyfunction!(log1p_chi2_mode, m)?)?;
    m.add_function(wrap_pyfunction!(run_chain_gaussian, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
