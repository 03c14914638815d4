//! Shared parameter bundles and the time-series container used by both
//! solver front ends.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Physical parameters of the boundary relaxation problem.
///
/// * `a` — bulk relaxation rate (the kernel stiffness); `a = 0` is the
///   half-order (Caputo) limit.
/// * `b` — boundary drive strength in the Robin condition.
/// * `c` — amplitude of the exponential dip in the initial profile
///   `w0(x) = 1 - c e^{-mu x}`.
/// * `mu` — decay rate of that dip (`mu = a` is the well-prepared choice).
/// * `epsilon` — interface thickness of the thin-layer problem.
/// * `tau1` — time-scale coefficient multiplying the interface time
///   derivative.
/// * `l` — half-length of the spatial domain `(-L, L)` (serialized as `L`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub mu: f64,
    pub epsilon: f64,
    pub tau1: f64,
    #[serde(rename = "L")]
    pub l: f64,
}

impl ModelParams {
    pub fn new(a: f64, b: f64, c: f64, mu: f64, epsilon: f64, tau1: f64, l: f64) -> Result<Self> {
        let p = Self { a, b, c, mu, epsilon, tau1, l };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.a >= 0.0) {
            return Err(Error::Domain(format!("a must be >= 0, got {}", self.a)));
        }
        if !(self.b.is_finite() && self.b > 0.0) {
            return Err(Error::Domain(format!("b must be > 0, got {}", self.b)));
        }
        if !self.c.is_finite() {
            return Err(Error::Domain(format!("c must be finite, got {}", self.c)));
        }
        if !(self.mu.is_finite() && self.mu >= 0.0) {
            return Err(Error::Domain(format!("mu must be >= 0, got {}", self.mu)));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::Domain(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if !(self.tau1.is_finite() && self.tau1 > 0.0) {
            return Err(Error::Domain(format!("tau1 must be > 0, got {}", self.tau1)));
        }
        if !(self.l.is_finite() && self.l > 0.0) {
            return Err(Error::Domain(format!("L must be > 0, got {}", self.l)));
        }
        Ok(())
    }

    /// Same parameters with a different interface thickness (used by the
    /// thin-layer sweeps).
    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        self.epsilon = epsilon;
        self.validate()?;
        Ok(self)
    }

    /// Same parameters with a different dip amplitude.
    pub fn with_c(mut self, c: f64) -> Result<Self> {
        self.c = c;
        self.validate()?;
        Ok(self)
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self { a: 1.0, b: 1.0, c: 0.0, mu: 1.0, epsilon: 0.125, tau1: 1.0, l: 1.0 }
    }
}

/// Time-stepping configuration shared by both solvers.
///
/// `theta` selects the implicitness of the finite-difference scheme
/// (`1` backward Euler, `1/2` Crank–Nicolson); the Volterra solver ignores
/// it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub dt: f64,
    pub t_end: f64,
    pub theta: f64,
}

impl SchemeConfig {
    pub fn new(dt: f64, t_end: f64, theta: f64) -> Result<Self> {
        let s = Self { dt, t_end, theta };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Domain(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end >= self.dt) {
            return Err(Error::Domain(format!(
                "t_end must be >= dt, got t_end = {} with dt = {}",
                self.t_end, self.dt
            )));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::Domain(format!("theta must lie in [0, 1], got {}", self.theta)));
        }
        let steps = self.t_end / self.dt;
        if steps > 5e8 {
            return Err(Error::Domain(format!("t_end/dt = {steps:.3e} steps is not tractable")));
        }
        Ok(())
    }

    /// Number of steps covering `[0, t_end]`, rounding so that `n * dt`
    /// reaches `t_end` up to roundoff.
    pub fn step_count(&self) -> usize {
        (self.t_end / self.dt).round().max(1.0) as usize
    }
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self { dt: 1e-3, t_end: 5.0, theta: 1.0 }
    }
}

/// A sampled scalar trajectory: strictly increasing times with one value per
/// time.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::Domain(format!(
                "time series needs matching lengths, got {} times and {} values",
                times.len(),
                values.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("time series requires strictly increasing times".into()));
        }
        Ok(Self { times, values })
    }

    pub fn with_capacity(n: usize) -> Self {
        Self { times: Vec::with_capacity(n), values: Vec::with_capacity(n) }
    }

    /// Append a sample; `t` must exceed the last stored time.
    pub fn push(&mut self, t: f64, value: f64) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(Error::Domain(format!(
                    "time series times must increase, got {t} after {last}"
                )));
            }
        }
        self.times.push(t);
        self.values.push(value);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }

    /// Final sample, if any.
    pub fn terminal(&self) -> Option<(f64, f64)> {
        Some((*self.times.last()?, *self.values.last()?))
    }

    /// Linear interpolation at `t`; clamped to the end values outside the
    /// sampled range.
    pub fn interpolate(&self, t: f64) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::Domain("cannot interpolate an empty time series".into()));
        }
        if t <= self.times[0] {
            return Ok(self.values[0]);
        }
        let n = self.times.len();
        if t >= self.times[n - 1] {
            return Ok(self.values[n - 1]);
        }
        let i = self.times.partition_point(|&s| s < t);
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let w = (t - t0) / (t1 - t0);
        Ok(self.values[i - 1] * (1.0 - w) + self.values[i] * w)
    }

    /// Largest absolute difference of values against a series on the same
    /// time grid.
    pub fn max_abs_diff(&self, other: &TimeSeries) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::Domain(format!(
                "cannot compare series of lengths {} and {}",
                self.len(),
                other.len()
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
