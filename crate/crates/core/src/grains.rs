//! Piecewise-constant grain dynamics: the stationary weighted
//! total-variation check for single-jump profiles, and the time stepper for
//! a network of facets coupled through junction order parameters.
//!
//! # Stationary check
//!
//! For a continuous nonnegative weight `beta` on `[-L, L]`, the single-jump
//! profile with a height-`b` step at the origin is stationary for the
//! weighted total-variation flow exactly when the Cahn–Hoffman field
//! `z(x) = beta(0)/beta(x)` is admissible. [`verify_stationary`] constructs
//! `z` and checks the three defining conditions — `|z| <= 1` pointwise,
//! constant flux `beta z == beta(0)`, and the energy balance of the jump —
//! reporting the first violation with its location.
//!
//! # Facet network
//!
//! A [`GrainState`] holds facets `h_1..h_m` on the partition
//! `p_0 < ... < p_m`. Each junction `j` between adjacent facets carries an
//! order parameter `xi_j` (in `[0, 1]`) and a jump sign
//! `chi_j = sign(h_right - h_left)`; the junction flux is `xi_j^2 chi_j`.
//! One [`step_grains`] call advances, in order:
//!
//! 1. every `xi_j` by one implicit step of its memory relaxation
//!    (the same product-integration engine as
//!    [`solve_volterra`](crate::fractional::solve_volterra), zero forcing)
//!    with the jump height `b_j = |h_right - h_left|` frozen for the step;
//! 2. every height by explicit Euler,
//!    `alpha_w1 dh_j/dt = (flux_j - flux_{j-1}) / (p_j - p_{j-1})`,
//!    using start-of-step `xi` and `chi`;
//! 3. every jump sign from the new heights, with `sign(0) = 0` so collided
//!    facets stop driving flux until their neighbors reopen a jump.
//!
//! Boundary handling: `Periodic` adds the wrap junction between the last
//! and first facets (making the weighted height sum an exact invariant),
//! `Dirichlet` pins the first and last heights, and `Neumann` sets the end
//! fluxes to zero.

use std::fmt;

use crate::fractional::{AbelWeights, MemoryStepper};
use crate::{Error, Result};

/// Hard cap on the total number of memory steps (the junction convolution
/// cost grows quadratically with it).
const MAX_MEMORY_STEPS: usize = 4_000_000;

/// A continuous nonnegative weight sampled on a uniform grid over
/// `[-L, L]`; the sample count is odd so that `x = 0` is a node.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightProfile {
    l: f64,
    values: Vec<f64>,
}

impl WeightProfile {
    /// Sample `f` at `count` uniform nodes over `[-l, l]`; `count` must be
    /// odd (so the origin is a node) and at least 3, and `f` must be
    /// nonnegative and finite at every node.
    pub fn sample(l: f64, count: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::Domain(format!("weight profile needs L > 0, got {l}")));
        }
        if count < 3 || count % 2 == 0 {
            return Err(Error::Domain(format!(
                "weight profile needs an odd sample count >= 3, got {count}"
            )));
        }
        let dx = 2.0 * l / (count - 1) as f64;
        let mut values = Vec::with_capacity(count);
        for i in 0..count {
            let x = -l + i as f64 * dx;
            let v = f(x);
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Domain(format!(
                    "weight must be finite and >= 0, got {v} at x = {x}"
                )));
            }
            values.push(v);
        }
        Ok(Self { l, values })
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Node coordinate `x_i = -L + i dx`.
    pub fn x(&self, i: usize) -> f64 {
        -self.l + i as f64 * (2.0 * self.l / (self.len() - 1) as f64)
    }

    /// Value at the origin (the center node).
    pub fn center(&self) -> f64 {
        self.values[self.values.len() / 2]
    }
}

/// The auxiliary field `z` of a stationary single-jump profile, sampled on
/// the same grid as the weight it was built from. `beta z` is the constant
/// flux and `|z| <= 1` everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct CahnHoffmanField {
    l: f64,
    values: Vec<f64>,
}

impl CahnHoffmanField {
    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Node coordinate `x_i = -L + i dx`.
    pub fn x(&self, i: usize) -> f64 {
        -self.l + i as f64 * (2.0 * self.l / (self.values.len() - 1) as f64)
    }
}

/// First stationarity condition violated by a candidate field, with where
/// and by how much.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StationaryViolation {
    /// `|z(x)| > 1` at `x`: the weight dips below its value at the origin.
    PointwiseBound { x: f64, value: f64 },
    /// `beta(x) z(x)` deviates from the constant flux `beta(0)` at `x`.
    ConstantFlux { x: f64, deviation: f64 },
    /// The energy released by the jump does not match the flux through it.
    JumpEnergyBalance { lhs: f64, rhs: f64 },
}

impl fmt::Display for StationaryViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PointwiseBound { x, value } => {
                write!(f, "pointwise bound |z| <= 1 violated at x = {x}: z = {value}")
            }
            Self::ConstantFlux { x, deviation } => {
                write!(f, "flux beta*z deviates from beta(0) at x = {x} by {deviation:e}")
            }
            Self::JumpEnergyBalance { lhs, rhs } => {
                write!(f, "jump energy balance broken: flux through jump {lhs} != weight {rhs}")
            }
        }
    }
}

/// Outcome of [`verify_stationary`]: either the admissible field or the
/// first violated condition.
#[derive(Debug, Clone, PartialEq)]
pub enum StationaryCheck {
    Admissible(CahnHoffmanField),
    Violated(StationaryViolation),
}

impl StationaryCheck {
    pub fn is_admissible(&self) -> bool {
        matches!(self, Self::Admissible(_))
    }

    pub fn field(&self) -> Option<&CahnHoffmanField> {
        match self {
            Self::Admissible(z) => Some(z),
            Self::Violated(_) => None,
        }
    }

    pub fn violation(&self) -> Option<&StationaryViolation> {
        match self {
            Self::Admissible(_) => None,
            Self::Violated(v) => Some(v),
        }
    }
}

/// Check whether the single-jump profile of height `b` at the origin is
/// stationary for the `beta`-weighted total-variation flow.
///
/// Builds the candidate field `z(x) = beta(0)/beta(x)` (taking `z = 0`
/// where `beta` vanishes; in particular `z` is identically zero when
/// `beta(0) = 0`, and the jump then carries no energy on either side) and
/// verifies, in order: the pointwise bound `|z| <= 1`, the constant-flux
/// condition `beta z == beta(0)`, and the jump energy balance
/// `b beta(0) z(0) == b beta(0)`. Succeeds exactly when
/// `beta(0) <= beta(x)` everywhere (up to sampling), i.e. when the weight
/// attains its minimum at the jump.
pub fn verify_stationary(beta: &WeightProfile, b: f64) -> Result<StationaryCheck> {
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::Domain(format!("jump height must be > 0, got {b}")));
    }
    let beta0 = beta.center();
    let z: Vec<f64> = beta
        .values()
        .iter()
        .map(|&bv| if bv > 0.0 { beta0 / bv } else { 0.0 })
        .collect();

    for (i, &zi) in z.iter().enumerate() {
        if zi.abs() > 1.0 + 1e-12 {
            return Ok(StationaryCheck::Violated(StationaryViolation::PointwiseBound {
                x: beta.x(i),
                value: zi,
            }));
        }
    }
    let flux_tol = 1e-12 * beta0.max(1.0);
    for (i, (&zi, &bv)) in z.iter().zip(beta.values()).enumerate() {
        let deviation = bv * zi - beta0;
        if deviation.abs() > flux_tol {
            return Ok(StationaryCheck::Violated(StationaryViolation::ConstantFlux {
                x: beta.x(i),
                deviation,
            }));
        }
    }
    let lhs = b * beta0 * z[z.len() / 2];
    let rhs = b * beta0;
    if (lhs - rhs).abs() > 1e-12 * rhs.abs().max(1.0) {
        return Ok(StationaryCheck::Violated(StationaryViolation::JumpEnergyBalance {
            lhs,
            rhs,
        }));
    }
    Ok(StationaryCheck::Admissible(CahnHoffmanField { l: beta.l, values: z }))
}

/// End handling of the facet network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// The last facet wraps to the first through an extra junction; the
    /// weighted height sum is then an exact step invariant.
    Periodic,
    /// First and last heights are pinned to their initial values.
    Dirichlet,
    /// Zero flux through both ends.
    Neumann,
}

/// Per-junction memory integrators, grid-locked to the `dt` of the first
/// step.
struct GrainMemory {
    dt: f64,
    horizon: usize,
    weights: AbelWeights,
    row: Vec<f64>,
    steppers: Vec<MemoryStepper>,
}

/// Facet heights, junction order parameters, and jump signs of the grain
/// network; advanced in place by [`step_grains`].
pub struct GrainState {
    partition: Vec<f64>,
    heights: Vec<f64>,
    xis: Vec<f64>,
    chis: Vec<i8>,
    alpha_w1: f64,
    a: f64,
    boundary: Boundary,
    time: f64,
    memory: Option<GrainMemory>,
}

impl fmt::Debug for GrainState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GrainState")
            .field("partition", &self.partition)
            .field("heights", &self.heights)
            .field("xis", &self.xis)
            .field("chis", &self.chis)
            .field("alpha_w1", &self.alpha_w1)
            .field("a", &self.a)
            .field("boundary", &self.boundary)
            .field("time", &self.time)
            .finish()
    }
}

fn jump_sign(d: f64) -> i8 {
    if d > 0.0 {
        1
    } else if d < 0.0 {
        -1
    } else {
        0
    }
}

impl GrainState {
    /// Build a network of `m = heights.len()` facets on the strictly
    /// increasing `partition` (`m + 1` points). `xis0` supplies the initial
    /// order parameters, one per junction: `m - 1` interior junctions, plus
    /// the wrap junction for [`Boundary::Periodic`] (so `m` of them). Every
    /// `xi` must start in `[0, 1]`; each junction's memory starts empty
    /// (well-prepared data).
    pub fn new(
        partition: Vec<f64>,
        heights: Vec<f64>,
        xis0: Vec<f64>,
        alpha_w1: f64,
        a: f64,
        boundary: Boundary,
    ) -> Result<Self> {
        let m = heights.len();
        if m < 2 {
            return Err(Error::Domain(format!("grain network needs >= 2 facets, got {m}")));
        }
        if partition.len() != m + 1 {
            return Err(Error::Domain(format!(
                "{m} facets need {} partition points, got {}",
                m + 1,
                partition.len()
            )));
        }
        for w in partition.windows(2) {
            if !(w[0].is_finite() && w[1].is_finite() && w[1] > w[0]) {
                return Err(Error::Domain(format!(
                    "partition must be strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if heights.iter().any(|h| !h.is_finite()) {
            return Err(Error::Domain("facet heights must be finite".into()));
        }
        let junctions = if boundary == Boundary::Periodic { m } else { m - 1 };
        if xis0.len() != junctions {
            return Err(Error::Domain(format!(
                "{m} facets with {boundary:?} ends have {junctions} junctions, got {} xi values",
                xis0.len()
            )));
        }
        for &xi in &xis0 {
            if !(xi.is_finite() && (0.0..=1.0).contains(&xi)) {
                return Err(Error::Domain(format!("initial xi must lie in [0, 1], got {xi}")));
            }
        }
        if !(alpha_w1.is_finite() && alpha_w1 > 0.0) {
            return Err(Error::Domain(format!("alpha_w1 must be > 0, got {alpha_w1}")));
        }
        if !(a.is_finite() && a >= 0.0) {
            return Err(Error::Domain(format!("a must be >= 0, got {a}")));
        }
        let chis = (0..junctions)
            .map(|j| jump_sign(heights[(j + 1) % m] - heights[j]))
            .collect();
        Ok(Self {
            partition,
            heights,
            xis: xis0,
            chis,
            alpha_w1,
            a,
            boundary,
            time: 0.0,
            memory: None,
        })
    }

    pub fn facet_count(&self) -> usize {
        self.heights.len()
    }

    pub fn junction_count(&self) -> usize {
        self.xis.len()
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn partition(&self) -> &[f64] {
        &self.partition
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn xis(&self) -> &[f64] {
        &self.xis
    }

    /// Jump signs `chi_j = sign(h_right - h_left)`, `0` across collided
    /// facets.
    pub fn chis(&self) -> &[i8] {
        &self.chis
    }

    /// Signed jump `h_right - h_left` across junction `j` (the wrap
    /// junction reads the first facet as its right neighbor).
    pub fn jump(&self, j: usize) -> f64 {
        let m = self.heights.len();
        self.heights[(j + 1) % m] - self.heights[j]
    }

    /// `sum_j (p_j - p_{j-1}) h_j`, the exact step invariant of periodic
    /// networks.
    pub fn weighted_height_sum(&self) -> f64 {
        self.partition
            .windows(2)
            .zip(&self.heights)
            .map(|(p, &h)| (p[1] - p[0]) * h)
            .sum()
    }

    /// Bind the memory grid on first use, check `dt` consistency after, and
    /// grow the step horizon as needed.
    fn ensure_memory(&mut self, dt: f64) -> Result<()> {
        match &mut self.memory {
            None => {
                let horizon = 1024;
                let steppers = self
                    .xis
                    .iter()
                    .map(|&xi| MemoryStepper::new(self.a, dt, xi - 1.0, horizon))
                    .collect::<Result<Vec<_>>>()?;
                self.memory = Some(GrainMemory {
                    dt,
                    horizon,
                    weights: AbelWeights::new(horizon),
                    row: Vec::with_capacity(horizon),
                    steppers,
                });
            }
            Some(mem) => {
                if mem.dt != dt {
                    return Err(Error::Domain(format!(
                        "the junction memory lives on a uniform grid: every step must reuse \
                         the first step's dt = {}, got {dt}",
                        mem.dt
                    )));
                }
                let k = mem.steppers[0].steps() + 1;
                if k > MAX_MEMORY_STEPS {
                    return Err(Error::Domain(format!(
                        "{k} steps exceed the O(n^2) junction convolution budget"
                    )));
                }
                if k > mem.horizon {
                    let horizon = (mem.horizon * 2).min(MAX_MEMORY_STEPS);
                    mem.weights = AbelWeights::new(horizon);
                    for s in &mut mem.steppers {
                        s.extend_horizon(horizon)?;
                    }
                    mem.horizon = horizon;
                }
            }
        }
        Ok(())
    }
}

/// Advance the network by one step of size `dt` (fixed across the run: the
/// junction memory integrals live on a uniform grid, so a changed `dt` is
/// rejected).
pub fn step_grains(state: &mut GrainState, dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Domain(format!("dt must be > 0, got {dt}")));
    }
    state.ensure_memory(dt)?;
    let m = state.heights.len();
    let nj = state.xis.len();

    // junction fluxes from start-of-step xi and chi
    let fluxes: Vec<f64> =
        (0..nj).map(|j| state.xis[j] * state.xis[j] * f64::from(state.chis[j])).collect();

    // 1. order parameters: one implicit memory step per junction, jump
    //    height frozen, no forcing; the arcsine row is shared
    let mem = state.memory.as_mut().expect("ensure_memory just ran");
    let k = mem.steppers[0].steps() + 1;
    mem.weights.fill_row(k, &mut mem.row);
    for (j, stepper) in mem.steppers.iter_mut().enumerate() {
        let b_j = (state.heights[(j + 1) % m] - state.heights[j]).abs();
        let eta = stepper.step_with_row(&mem.row, b_j, 0.0);
        state.xis[j] = 1.0 + eta;
    }

    // 2. heights: explicit Euler on the flux differences
    let pinned = state.boundary == Boundary::Dirichlet;
    for i in 0..m {
        if pinned && (i == 0 || i == m - 1) {
            continue;
        }
        let right = match state.boundary {
            Boundary::Periodic => fluxes[i],
            _ if i < nj => fluxes[i],
            _ => 0.0,
        };
        let left = match state.boundary {
            Boundary::Periodic if i == 0 => fluxes[nj - 1],
            _ if i >= 1 => fluxes[i - 1],
            _ => 0.0,
        };
        let cell = state.partition[i + 1] - state.partition[i];
        state.heights[i] += dt * (right - left) / (state.alpha_w1 * cell);
    }

    // 3. jump signs from the new heights
    for j in 0..nj {
        state.chis[j] = jump_sign(state.heights[(j + 1) % m] - state.heights[j]);
    }
    state.time += dt;
    Ok(())
}
