//! Executable machinery for topological expansion by stretching.
//!
//! The crate is organized around five building blocks:
//!
//! * [`index_algebra`] — sign-string combinatorics: the index sets Λ_n, the
//!   parent projection, and chart-number bookkeeping for the expansion
//!   diagrams.
//! * [`stretching`] — the left/right stretching process on open intervals and
//!   boxes, expansion trees, and verification of the five stretching
//!   conditions.
//! * [`finite_topology`] — an exhaustive finite-topology engine: subspace and
//!   coproduct topologies, the "finer" relation, fractal-family axiom checks,
//!   and the step-to-step open-set expansion.
//! * [`mean_functions`] — Weierstrass-type generators, forward/backward means,
//!   iterated means over a δ-schedule, graph sampling and the translation map.
//! * [`dimension`] — box-counting dimension estimation for stretched unions
//!   and calibration fractals.

pub mod dimension;
mod error;
pub mod finite_topology;
pub mod index_algebra;
pub mod mean_functions;
pub mod stretching;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Default cap on the step index `n`; enumerating Λ_n materializes 2^{n+1}
/// strings, so the cap bounds memory.
pub const DEFAULT_STEP_CAP: usize = 20;

/// Default cap on the number of opens a materialized coproduct topology may
/// hold.
pub const DEFAULT_COPRODUCT_CAP: usize = 1_000_000;
