//! Compressed-sensing toolkit built around two ideas that share one constant:
//! a sharpness-driven restart scheme for l1-recovery solvers, and estimators
//! for the cone-restricted (Renegar) condition number that controls both the
//! convergence speed of those solvers and the statistical recovery error.
//!
//! The crate is organized as a library with a thin `sharpcs` binary on top:
//!
//! - [`linalg`] — dense matrices, seeded Gaussian instances, Householder QR,
//!   power-iteration spectral norms, and a brute-force min-l1 oracle for tiny
//!   problems.
//! - [`smooth`] — the Huber-smoothed l1 objective and the accelerated
//!   projected-gradient method used inside the restart scheme, for both
//!   equality and noise-ball constraints.
//! - [`restart`] — the restart scheme itself plus the nullspace-property /
//!   sharpness constant calculators that predict its rate.
//! - [`conditioning`] — l1 tangent cones, exact cone projections, the
//!   projected power method for the cone-restricted minimal singular value,
//!   dual certificates, diameter and restricted-eigenvalue estimators.
//! - [`structures`] — the sparsity-structure abstraction (norm + projector
//!   family) with l1 and small-matrix nuclear-norm instances.
//! - [`experiments`] — seeded experiment harness: instance generation,
//!   restart comparisons, condition sweeps, CSV persistence and summaries.
//! - [`report`] — dependency-free SVG line plots for experiment outputs.
//! - [`cli`] — the `solve` / `cond` / `experiment` / `report` / `defaults`
//!   subcommands used by the binary.
//!
//! Every randomized routine takes an explicit 64-bit seed and is fully
//! deterministic for a given build; see the `examples/` directory for one
//! runnable walkthrough per major capability.

pub mod cli;
pub mod conditioning;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod report;
pub mod restart;
pub mod rng;
pub mod smooth;
pub mod structures;

pub use error::Error;
pub use linalg::{DenseMatrix, RngSeed};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
