//! Python bindings: special functions, the limit memory-equation solver,
//! the thin-interface trace, graph distance, and facet-network evolution.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use memrelax::fractional::{solve_volterra, ForcingSpec, LimitEnergy};
use memrelax::grains::{step_grains, Boundary, GrainState};
use memrelax::graph::hausdorff_graph_distance;
use memrelax::params::{ModelParams, SchemeConfig};
use memrelax::{pde, special};

fn to_py_err(e: memrelax::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn params(a: f64, b: f64, c: f64, mu: f64, epsilon: f64, tau1: f64, l: f64) -> ModelParams {
    ModelParams { a, b, c, mu, epsilon, tau1, l }
}

/// Error function.
#[pyfunction]
fn erf(x: f64) -> f64 {
    special::erf(x)
}

/// Complementary error function.
#[pyfunction]
fn erfc(x: f64) -> f64 {
    special::erfc(x)
}

/// Scaled complementary error function `e^(x^2) erfc(x)`.
#[pyfunction]
fn erfcx(x: f64) -> f64 {
    special::erfcx(x)
}

/// Memory kernel `m_a(t)`.
#[pyfunction]
fn kernel_eval(a: f64, t: f64) -> PyResult<f64> {
    let kernel = special::MemoryKernel::new(a).map_err(to_py_err)?;
    kernel.eval(t).map_err(to_py_err)
}

/// Exact kernel mass over `[t0, t1]`.
#[pyfunction]
fn kernel_moment(a: f64, t0: f64, t1: f64) -> PyResult<f64> {
    special::kernel_moment(a, t0, t1).map_err(to_py_err)
}

/// Closed-form limit trace `xi(t)` for exponential initial dips.
#[pyfunction]
#[pyo3(signature = (a, b, c, mu, t))]
fn closed_form_xi(a: f64, b: f64, c: f64, mu: f64, t: f64) -> PyResult<f64> {
    let p = params(a, b, c, mu, 0.125, 1.0, 1.0);
    memrelax::fractional::closed_form_xi(&p, t).map_err(to_py_err)
}

/// Solve the limit memory equation; returns `(times, xis)`.
#[pyfunction]
#[pyo3(signature = (a, b, c, mu, dt=1e-3, t_end=5.0))]
fn solve_limit(
    a: f64,
    b: f64,
    c: f64,
    mu: f64,
    dt: f64,
    t_end: f64,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let p = params(a, b, c, mu, 0.125, 1.0, 1.0);
    let energy = LimitEnergy::new(a, b).map_err(to_py_err)?;
    let spec = ForcingSpec::exponential(c, mu);
    let ts = solve_volterra(energy, &spec, &p, dt, t_end).map_err(to_py_err)?;
    Ok((ts.times().to_vec(), ts.values().to_vec()))
}

/// Solve the thin-interface problem; returns `(times, boundary_trace)`.
#[pyfunction]
#[pyo3(signature = (a, b, c, mu, epsilon, tau1=1.0, l=1.0, n=200, dt=None, t_end=5.0, theta=1.0))]
#[allow(clippy::too_many_arguments)]
fn solve_trace(
    a: f64,
    b: f64,
    c: f64,
    mu: f64,
    epsilon: f64,
    tau1: f64,
    l: f64,
    n: usize,
    dt: Option<f64>,
    t_end: f64,
    theta: f64,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let p = params(a, b, c, mu, epsilon, tau1, l);
    let dx = l / n as f64;
    let config = SchemeConfig { dt: dt.unwrap_or(dx * dx), t_end, theta };
    let sol = pde::solve(&p, &config, n).map_err(to_py_err)?;
    Ok((sol.trace.times().to_vec(), sol.trace.values().to_vec()))
}

/// Hausdorff distance between the solution graph at time `t` and the
/// set-valued limit graph through the closed-form trace.
#[pyfunction]
#[pyo3(signature = (a, b, c, mu, epsilon, t, tau1=1.0, l=1.0, n=200, dt=None, theta=1.0))]
#[allow(clippy::too_many_arguments)]
fn graph_distance(
    a: f64,
    b: f64,
    c: f64,
    mu: f64,
    epsilon: f64,
    t: f64,
    tau1: f64,
    l: f64,
    n: usize,
    dt: Option<f64>,
    theta: f64,
) -> PyResult<f64> {
    let p = params(a, b, c, mu, epsilon, tau1, l);
    let dx = l / n as f64;
    let config = SchemeConfig { dt: dt.unwrap_or(dx * dx), t_end: t, theta };
    let sol = pde::solve(&p, &config, n).map_err(to_py_err)?;
    let snap = sol.snapshots.last().expect("terminal snapshot always recorded");
    let xi = memrelax::fractional::closed_form_xi(&p, snap.time()).map_err(to_py_err)?;
    hausdorff_graph_distance(snap, xi).map_err(to_py_err)
}

/// Evolve a facet network; returns `(times, heights, xis)` where `heights`
/// and `xis` are per-step rows.
#[pyfunction]
#[pyo3(signature = (partition, heights, xis, a, boundary="periodic", alpha_w1=1.0, dt=1e-3, steps=1000))]
#[allow(clippy::too_many_arguments)]
fn simulate_grains(
    partition: Vec<f64>,
    heights: Vec<f64>,
    xis: Vec<f64>,
    a: f64,
    boundary: &str,
    alpha_w1: f64,
    dt: f64,
    steps: usize,
) -> PyResult<(Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let boundary = match boundary {
        "periodic" => Boundary::Periodic,
        "dirichlet" => Boundary::Dirichlet,
        "neumann" => Boundary::Neumann,
        other => {
            return Err(PyValueError::new_err(format!(
                "boundary must be periodic, dirichlet or neumann, got {other:?}"
            )))
        }
    };
    let mut state =
        GrainState::new(partition, heights, xis, alpha_w1, a, boundary).map_err(to_py_err)?;
    let mut times = vec![state.time()];
    let mut height_rows = vec![state.heights().to_vec()];
    let mut xi_rows = vec![state.xis().to_vec()];
    for _ in 0..steps {
        step_grains(&mut state, dt).map_err(to_py_err)?;
        times.push(state.time());
        height_rows.push(state.heights().to_vec());
        xi_rows.push(state.xis().to_vec());
    }
    Ok((times, height_rows, xi_rows))
}

#[pymodule]
fn memrelax_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(erf, m)?)?;
    m.add_function(wrap_pyfunction!(erfc, m)?)?;
    m.add_function(wrap_pyfunction!(erfcx, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_eval, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_moment, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form_xi, m)?)?;
    m.add_function(wrap_pyfunction!(solve_limit, m)?)?;
    m.add_function(wrap_pyfunction!(solve_trace, m)?)?;
    m.add_function(wrap_pyfunction!(graph_distance, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_grains, m)?)?;
    Ok(())
}
