//! Solvers for a one-dimensional boundary relaxation problem and its
//! memory-kernel (fractional-time) limit.
//!
//! The library has two solver front ends for the same physics:
//!
//! * [`pde`] — an implicit finite-difference solver for the thin-interface
//!   problem `(tau1/eps) v_t = eps v_xx - a^2 (v - 1)/eps` on `[0, L]` with a
//!   Robin row `-v_x(0) + (b/eps) v(0) = 0` at the origin and a Neumann wall
//!   at `x = L`. The observable is the boundary trace `xi_eps(t) = v(0, t)`.
//! * [`fractional`] — a direct solver for the `eps -> 0` limit of that trace:
//!   a Volterra equation `int_0^t m_a(t-s) xi'(s) ds = -grad E(xi) + F(t)`
//!   whose kernel `m_a` carries a square-root singularity at `t = 0`, plus
//!   closed-form erf/erfc solutions used as references.
//!
//! Supporting modules: [`special`] (erf/erfc/erfcx, the kernel family and its
//! exact subinterval moments), [`quad`] (adaptive Gauss–Kronrod quadrature),
//! [`laplace`] (forward Laplace quadrature and Talbot inversion, the
//! brute-force oracle for every transform identity used by the tests),
//! [`grains`] (a facet-height/order-parameter system driven by the same
//! memory kernel, and the stationary weighted-TV verifier), [`graph`]
//! (Hausdorff distance between a solver trace graph and its set-valued
//! limit), and [`experiment`] (sweeps, error tables, CSV emission).

pub mod experiment;
pub mod fractional;
pub mod grains;
pub mod graph;
pub mod laplace;
pub mod params;
pub mod pde;
pub mod quad;
pub mod special;

pub use experiment::{ExperimentConfig, ExperimentKind, RawConfig, RunReport};
pub use fractional::{ForcingKind, ForcingSpec, LimitEnergy};
pub use grains::{Boundary, GrainState, WeightProfile};
pub use params::{ModelParams, SchemeConfig, TimeSeries};
pub use pde::{GridField, PdeSolution};
pub use special::{KernelParams, MemoryKernel};

use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    /// An internal consistency check failed (indicates a bug, not bad input).
    #[error("internal error: {0}")]
    Internal(String),
    /// File I/O failure, with the offending path.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// Invalid or inconsistent run configuration.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

#[cfg(test)]
pub(crate) mod testutil {
    /// Asserts `|actual - expected| <= tol`, printing both values on failure.
    pub fn assert_close(actual: f64, expected: f64, tol: f64) {
        assert!(
            (actual - expected).abs() <= tol,
            "expected {expected:.17e}, got {actual:.17e} (|diff| = {:.3e} > tol {tol:.3e})",
            (actual - expected).abs()
        );
    }

    /// Asserts agreement to relative tolerance (absolute when expected == 0).
    pub fn assert_rel(actual: f64, expected: f64, rel: f64) {
        let scale = expected.abs().max(f64::MIN_POSITIVE);
        assert!(
            (actual - expected).abs() <= rel * scale,
            "expected {expected:.17e}, got {actual:.17e} (rel = {:.3e} > {rel:.3e})",
            (actual - expected).abs() / scale
        );
    }
}
