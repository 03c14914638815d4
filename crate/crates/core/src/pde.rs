//! Implicit finite-difference solver for the thin-interface relaxation
//! problem on the half-interval `[0, L]`:
//!
//! ```text
//! (tau1/eps) v_t = eps v_xx - a^2 (v - 1)/eps      on (0, L),
//! -v_x(0) + (b/eps) v(0) = 0,     v_x(L) = 0,
//! v(x, 0) = 1 - c e^{-mu x / eps},
//! ```
//!
//! the Robin reduction, valid for even data, of a full-line problem with a
//! `2b/eps` point sink at the origin. The observable is the boundary trace
//! `xi_eps(t) = v(0, t)`, which relaxes toward `a/(a+b)` and converges as
//! `eps -> 0` to the memory-kernel limit solved by [`crate::fractional`].
//!
//! Space is discretized by central differences on the `n + 1` nodes
//! `x_i = i dx`, `dx = L/n`, with ghost nodes at `-1` and `n + 1` eliminated
//! through the discrete boundary relations
//!
//! ```text
//! -(v_1 - v_{-1})/(2 dx) + (b/eps) v_0 = 0,
//! (v_{n+1} - v_{n-1})/(2 dx) = 0.
//! ```
//!
//! Time stepping is theta-weighted (`theta = 1` backward Euler, the reference
//! configuration; `theta = 1/2` Crank–Nicolson for order studies). One step
//! solves the tridiagonal system
//!
//! ```text
//! (lam I - theta A) v = lam v_hat + (1 - theta) A v_hat + R 1,
//! ```
//!
//! with `lam = tau1/(eps dt)`, `D = eps/dx^2`, `R = a^2/eps`, and `A` the
//! ghost-eliminated operator `eps D2 - R - (2b/dx) delta_{i0}`. The implicit
//! matrix is strictly diagonally dominant (`lam + theta R > 0` on top of the
//! nonnegative off-diagonal mass), so Thomas elimination without pivoting is
//! safe; a vanishing pivot is reported as an internal error.

use crate::params::{ModelParams, SchemeConfig, TimeSeries};
use crate::{Error, Result};

/// Empirical constant of the parabolic derivative bound: checks of
/// `sup_t sqrt(t) ||v_t||_inf <= C (||w0'||_inf + ||w0||_inf + 1)` use this
/// baseline, calibrated once at fine resolution (measured suprema sit near
/// half of it) and regression-tested thereafter.
pub const DERIVATIVE_BOUND_CONSTANT: f64 = 1.0;

/// Nodal values of the bulk field on the uniform grid `x_i = i dx`,
/// `i = 0..=n`, over `[0, L]` with `dx n = L`, stamped with the solution
/// time.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    n: usize,
    dx: f64,
    values: Vec<f64>,
    time: f64,
}

impl GridField {
    fn new(n: usize, dx: f64, values: Vec<f64>, time: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("grid needs at least 2 cells, got {n}")));
        }
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::Domain(format!("grid spacing must be > 0, got {dx}")));
        }
        if values.len() != n + 1 {
            return Err(Error::Domain(format!(
                "grid with {n} cells needs {} nodal values, got {}",
                n + 1,
                values.len()
            )));
        }
        Ok(Self { n, dx, values, time })
    }

    /// Cell count; the field has `n + 1` nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Node coordinate `x_i = i dx`.
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    /// Boundary trace `v(0)`.
    pub fn trace(&self) -> f64 {
        self.values[0]
    }

    /// Largest nodal difference against another field on the same grid.
    pub fn max_abs_diff(&self, other: &GridField) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::Domain(format!(
                "cannot compare fields with {} and {} cells",
                self.n, other.n
            )));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max))
    }
}

/// Everything `step` needs to know about `params` — a strict subset of the
/// full validation so that degenerate-but-meaningful cases (`b = 0`: no
/// boundary sink; pure Neumann heat flow) remain steppable for the
/// conservation and fixed-point checks.
fn validate_for_step(params: &ModelParams) -> Result<()> {
    if !(params.a.is_finite() && params.a >= 0.0) {
        return Err(Error::Domain(format!("a must be >= 0, got {}", params.a)));
    }
    if !(params.b.is_finite() && params.b >= 0.0) {
        return Err(Error::Domain(format!("stepping requires b >= 0, got {}", params.b)));
    }
    if !params.c.is_finite() {
        return Err(Error::Domain(format!("c must be finite, got {}", params.c)));
    }
    if !(params.mu.is_finite() && params.mu >= 0.0) {
        return Err(Error::Domain(format!("mu must be >= 0, got {}", params.mu)));
    }
    if !(params.epsilon.is_finite() && params.epsilon > 0.0) {
        return Err(Error::Domain(format!("epsilon must be > 0, got {}", params.epsilon)));
    }
    if !(params.tau1.is_finite() && params.tau1 > 0.0) {
        return Err(Error::Domain(format!("tau1 must be > 0, got {}", params.tau1)));
    }
    if !(params.l.is_finite() && params.l > 0.0) {
        return Err(Error::Domain(format!("L must be > 0, got {}", params.l)));
    }
    Ok(())
}

/// Initial field `v_0(x_i) = 1 - c e^{-mu x_i / eps}` on `n` cells over
/// `[0, L]`; well-prepared (matching the kernel decay) when `mu = a`.
pub fn initial_data(params: &ModelParams, n: usize) -> Result<GridField> {
    validate_for_step(params)?;
    if n < 2 {
        return Err(Error::Domain(format!("grid needs at least 2 cells, got {n}")));
    }
    let dx = params.l / n as f64;
    let rate = params.mu / params.epsilon;
    let values = (0..=n).map(|i| 1.0 - params.c * (-rate * (i as f64 * dx)).exp()).collect();
    GridField::new(n, dx, values, 0.0)
}

/// Coefficients of one implicit solve on a given node layout. The layout is
/// the half-domain one (`sink` at node 0) for the production path and a
/// symmetric full-domain one (Neumann ends, `sink` at the center) for the
/// reduction cross-check.
struct Scheme {
    nodes: usize,
    /// Node carrying the `2b/dx` boundary/jump sink.
    sink: usize,
    lam: f64,
    d: f64,
    react: f64,
    robin: f64,
    theta: f64,
}

impl Scheme {
    fn half_domain(n: usize, dx: f64, params: &ModelParams, config: &SchemeConfig) -> Self {
        Self {
            nodes: n + 1,
            sink: 0,
            lam: params.tau1 / (params.epsilon * config.dt),
            d: params.epsilon / (dx * dx),
            react: params.a * params.a / params.epsilon,
            robin: 2.0 * params.b / dx,
            theta: config.theta,
        }
    }

    fn full_domain(n_half: usize, dx: f64, params: &ModelParams, config: &SchemeConfig) -> Self {
        Self {
            nodes: 2 * n_half + 1,
            sink: n_half,
            lam: params.tau1 / (params.epsilon * config.dt),
            d: params.epsilon / (dx * dx),
            react: params.a * params.a / params.epsilon,
            robin: 2.0 * params.b / dx,
            theta: config.theta,
        }
    }

    /// Spatial operator `A v = eps D2 v - R v - (2b/dx) v|_sink` with the
    /// ghost-eliminated first and last rows (doubled couplings).
    fn apply(&self, v: &[f64], out: &mut [f64]) {
        let m = self.nodes - 1;
        out[0] = 2.0 * self.d * (v[1] - v[0]) - self.react * v[0];
        for i in 1..m {
            out[i] = self.d * (v[i - 1] - 2.0 * v[i] + v[i + 1]) - self.react * v[i];
        }
        out[m] = 2.0 * self.d * (v[m - 1] - v[m]) - self.react * v[m];
        out[self.sink] -= self.robin * v[self.sink];
    }

    /// Tridiagonal bands of the implicit matrix `M = lam I - theta A`.
    fn implicit_bands(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let m = self.nodes - 1;
        let mut lo = vec![-self.theta * self.d; self.nodes];
        let mut di = vec![self.lam + self.theta * (2.0 * self.d + self.react); self.nodes];
        let mut up = vec![-self.theta * self.d; self.nodes];
        up[0] = -2.0 * self.theta * self.d;
        lo[m] = -2.0 * self.theta * self.d;
        di[self.sink] += self.theta * self.robin;
        lo[0] = 0.0;
        up[m] = 0.0;
        (lo, di, up)
    }

    /// Right side `lam v_hat + (1 - theta) A v_hat + R 1`; `scratch` holds
    /// `A v_hat` between calls to avoid reallocation.
    fn rhs(&self, v_hat: &[f64], scratch: &mut [f64], out: &mut [f64]) {
        if self.theta < 1.0 {
            self.apply(v_hat, scratch);
            let w = 1.0 - self.theta;
            for i in 0..self.nodes {
                out[i] = self.lam * v_hat[i] + w * scratch[i] + self.react;
            }
        } else {
            for i in 0..self.nodes {
                out[i] = self.lam * v_hat[i] + self.react;
            }
        }
    }
}

/// Prefactored Thomas elimination of a tridiagonal system; the factorization
/// is reused across the steps of a run (the matrix is time-independent).
struct ThomasFactor {
    lo: Vec<f64>,
    w: Vec<f64>,
    cp: Vec<f64>,
}

impl ThomasFactor {
    fn new(lo: Vec<f64>, di: Vec<f64>, up: Vec<f64>) -> Result<Self> {
        let n = di.len();
        let mut w = vec![0.0; n];
        let mut cp = vec![0.0; n];
        w[0] = di[0];
        for i in 1..=n {
            let prev = w[i - 1];
            let scale = di[i - 1].abs() + lo[i - 1].abs() + up[i - 1].abs();
            if !prev.is_finite() || prev.abs() <= 4.0 * f64::EPSILON * scale {
                return Err(Error::Internal(format!(
                    "tridiagonal elimination hit a near-zero pivot {prev:.3e} at row {} \
                     (diagonal dominance violated)",
                    i - 1
                )));
            }
            if i == n {
                break;
            }
            cp[i - 1] = up[i - 1] / prev;
            w[i] = di[i] - lo[i] * cp[i - 1];
        }
        Ok(Self { lo, w, cp })
    }

    fn solve(&self, rhs: &[f64], x: &mut [f64]) {
        let n = self.w.len();
        x[0] = rhs[0] / self.w[0];
        for i in 1..n {
            x[i] = (rhs[i] - self.lo[i] * x[i - 1]) / self.w[i];
        }
        for i in (0..n - 1).rev() {
            x[i] -= self.cp[i] * x[i + 1];
        }
    }
}

fn consistent_grid(field: &GridField, params: &ModelParams) -> Result<()> {
    let l = field.dx * field.n as f64;
    if (l - params.l).abs() > 1e-12 * params.l.max(1.0) {
        return Err(Error::Domain(format!(
            "grid covers [0, {l}] but params declare L = {}",
            params.l
        )));
    }
    Ok(())
}

/// Advance the field by one implicit step of size `config.dt`.
pub fn step(field: &GridField, params: &ModelParams, config: &SchemeConfig) -> Result<GridField> {
    validate_for_step(params)?;
    config.validate()?;
    consistent_grid(field, params)?;
    let scheme = Scheme::half_domain(field.n, field.dx, params, config);
    let (lo, di, up) = scheme.implicit_bands();
    let factor = ThomasFactor::new(lo, di, up)?;
    let mut scratch = vec![0.0; scheme.nodes];
    let mut rhs = vec![0.0; scheme.nodes];
    scheme.rhs(&field.values, &mut scratch, &mut rhs);
    let mut values = vec![0.0; scheme.nodes];
    factor.solve(&rhs, &mut values);
    GridField::new(field.n, field.dx, values, field.time + config.dt)
}

/// Trace and snapshots of one run.
#[derive(Debug, Clone)]
pub struct PdeSolution {
    /// Boundary trace `xi_eps(t_k) = v(0, t_k)` at every step, including
    /// `t = 0`.
    pub trace: TimeSeries,
    /// Full fields at the requested times (clamped to the step grid), plus
    /// always the terminal field.
    pub snapshots: Vec<GridField>,
}

/// Run the half-domain solver from `initial_data` to `t_end` on `n` cells,
/// recording the boundary trace at every step; snapshots are kept at the
/// terminal time only (see [`solve_with_snapshots`] for more).
pub fn solve(params: &ModelParams, config: &SchemeConfig, n: usize) -> Result<PdeSolution> {
    solve_with_snapshots(params, config, n, &[])
}

/// [`solve`], additionally retaining full fields at each requested time
/// (rounded to the nearest step; the terminal field is always included).
pub fn solve_with_snapshots(
    params: &ModelParams,
    config: &SchemeConfig,
    n: usize,
    snapshot_times: &[f64],
) -> Result<PdeSolution> {
    params.validate()?;
    config.validate()?;
    let steps = config.step_count();
    let field = initial_data(params, n)?;
    let scheme = Scheme::half_domain(n, field.dx, params, config);
    let (lo, di, up) = scheme.implicit_bands();
    let factor = ThomasFactor::new(lo, di, up)?;

    let mut want: Vec<usize> = snapshot_times
        .iter()
        .map(|&t| ((t / config.dt).round().max(0.0) as usize).min(steps))
        .collect();
    want.push(steps);
    want.sort_unstable();
    want.dedup();

    let mut trace = TimeSeries::with_capacity(steps + 1);
    trace.push(0.0, field.values[0])?;
    let mut snapshots = Vec::with_capacity(want.len());
    if want.first() == Some(&0) {
        snapshots.push(field.clone());
        want.remove(0);
    }

    let mut v = field.values;
    let mut next = vec![0.0; scheme.nodes];
    let mut scratch = vec![0.0; scheme.nodes];
    let mut rhs = vec![0.0; scheme.nodes];
    let mut want_iter = want.into_iter().peekable();
    for k in 1..=steps {
        scheme.rhs(&v, &mut scratch, &mut rhs);
        factor.solve(&rhs, &mut next);
        std::mem::swap(&mut v, &mut next);
        let t = k as f64 * config.dt;
        trace.push(t, v[0])?;
        if want_iter.peek() == Some(&k) {
            want_iter.next();
            snapshots.push(GridField::new(n, field.dx, v.clone(), t)?);
        }
    }
    Ok(PdeSolution { trace, snapshots })
}

/// Trace of the symmetric full-domain formulation on `[-L, L]` (Neumann at
/// both walls, the boundary sink folded into the center row as the flux-jump
/// condition `[v_x](0) = (2b/eps) v(0)`). Exists to validate the half-domain
/// Robin reduction; `n` counts cells per half-interval.
pub fn solve_full_domain(
    params: &ModelParams,
    config: &SchemeConfig,
    n: usize,
) -> Result<TimeSeries> {
    params.validate()?;
    config.validate()?;
    if n < 2 {
        return Err(Error::Domain(format!("grid needs at least 2 cells per half, got {n}")));
    }
    let steps = config.step_count();
    let dx = params.l / n as f64;
    let scheme = Scheme::full_domain(n, dx, params, config);
    let (lo, di, up) = scheme.implicit_bands();
    let factor = ThomasFactor::new(lo, di, up)?;
    let rate = params.mu / params.epsilon;
    // nodes at x_i = -L + i dx, i = 0..=2n; the dip decays from the center
    let mut v: Vec<f64> = (0..scheme.nodes)
        .map(|i| {
            let x = (i as f64 - n as f64) * dx;
            1.0 - params.c * (-rate * x.abs()).exp()
        })
        .collect();
    let mut trace = TimeSeries::with_capacity(steps + 1);
    trace.push(0.0, v[scheme.sink])?;
    let mut next = vec![0.0; scheme.nodes];
    let mut scratch = vec![0.0; scheme.nodes];
    let mut rhs = vec![0.0; scheme.nodes];
    for k in 1..=steps {
        scheme.rhs(&v, &mut scratch, &mut rhs);
        factor.solve(&rhs, &mut next);
        std::mem::swap(&mut v, &mut next);
        trace.push(k as f64 * config.dt, v[scheme.sink])?;
    }
    Ok(trace)
}

/// Exact fixed point of [`step`]: the solution of the discrete stationary
/// system `-A v = R 1`, computable by one linear solve. Every step contracts
/// the sup-distance to it. Requires `a > 0` or `b > 0` (with both zero the
/// stationary system is pure Neumann and singular).
pub fn steady_state(params: &ModelParams, n: usize) -> Result<GridField> {
    validate_for_step(params)?;
    if n < 2 {
        return Err(Error::Domain(format!("grid needs at least 2 cells, got {n}")));
    }
    if params.a == 0.0 && params.b == 0.0 {
        return Err(Error::Domain(
            "stationary system is singular for a = 0, b = 0 (pure Neumann)".into(),
        ));
    }
    let dx = params.l / n as f64;
    let config = SchemeConfig::default();
    let scheme = Scheme::half_domain(n, dx, params, &config);
    // bands of -A: theta-independent, so assemble with theta = 1 and lam = 0
    let stationary = Scheme { lam: 0.0, theta: 1.0, ..scheme };
    let (lo, di, up) = stationary.implicit_bands();
    let factor = ThomasFactor::new(lo, di, up)?;
    let rhs = vec![stationary.react; stationary.nodes];
    let mut values = vec![0.0; stationary.nodes];
    factor.solve(&rhs, &mut values);
    GridField::new(n, dx, values, f64::INFINITY)
}

/// Outcome of the parabolic-smoothing check on one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeBoundReport {
    /// `sup_k sqrt(t_k) max_i |v_i^k - v_i^{k-1}| / dt`.
    pub sup_weighted: f64,
    /// `||w0'||_inf + ||w0||_inf + 1` for the initial deviation
    /// `w0 = -c e^{-mu x/eps}`.
    pub data_norm: f64,
    /// The baseline constant the supremum is compared against.
    pub constant: f64,
    /// Whether `sup_weighted <= constant * data_norm`.
    pub bound_ok: bool,
}

/// Run the solver and measure the parabolic derivative bound: the weighted
/// supremum `sqrt(t) ||v_t||_inf` must stay below
/// [`DERIVATIVE_BOUND_CONSTANT`] times the initial-data norm. The supremum is
/// discretization-stable (halving `dt` moves it by a few percent), so a
/// violation signals a genuine smoothing failure rather than grid noise.
pub fn time_derivative_bound_check(
    params: &ModelParams,
    config: &SchemeConfig,
    n: usize,
) -> Result<DerivativeBoundReport> {
    params.validate()?;
    config.validate()?;
    let steps = config.step_count();
    let field = initial_data(params, n)?;
    let scheme = Scheme::half_domain(n, field.dx, params, config);
    let (lo, di, up) = scheme.implicit_bands();
    let factor = ThomasFactor::new(lo, di, up)?;
    let mut v = field.values;
    let mut next = vec![0.0; scheme.nodes];
    let mut scratch = vec![0.0; scheme.nodes];
    let mut rhs = vec![0.0; scheme.nodes];
    let mut sup_weighted = 0.0f64;
    for k in 1..=steps {
        scheme.rhs(&v, &mut scratch, &mut rhs);
        factor.solve(&rhs, &mut next);
        let t = k as f64 * config.dt;
        let mut dv = 0.0f64;
        for (new, old) in next.iter().zip(&v) {
            dv = dv.max((new - old).abs());
        }
        sup_weighted = sup_weighted.max(t.sqrt() * dv / config.dt);
        std::mem::swap(&mut v, &mut next);
    }
    let data_norm = params.c.abs() + params.c.abs() * params.mu / params.epsilon + 1.0;
    Ok(DerivativeBoundReport {
        sup_weighted,
        data_norm,
        constant: DERIVATIVE_BOUND_CONSTANT,
        bound_ok: sup_weighted <= DERIVATIVE_BOUND_CONSTANT * data_norm,
    })
}
