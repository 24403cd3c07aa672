//! Staggered summation-by-parts (SBP) finite differences and a linearized
//! rotating shallow-water solver on the equiangular gnomonic cubed sphere.
//!
//! The crate is layered bottom-up:
//!
//! * [`sbp1d`] — 1D staggered operator families (2/1, 4/2, 6/3) with
//!   penalty (SAT) and projection interface corrections;
//! * [`grid`] — cubed-sphere panels, metric terms, and the interface
//!   point-pairing tables;
//! * [`ops2d`] — 2D multi-panel operators assembled from 1D kernels via
//!   Kronecker-product sweeps: gradient, divergence, metric transform,
//!   interface projection/penalty, Coriolis variants, curl;
//! * [`swe`] — the linearized shallow-water model: right-hand side, RK4
//!   time stepping, conservation diagnostics, snapshot and CSV output;
//! * [`experiments`] — initial conditions, error norms, convergence
//!   studies, and the stationary-mode diagnostic;
//! * [`cli`] — the `sbp-sphere` command-line interface.

pub mod banded;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod ops2d;
pub mod sbp1d;
pub mod swe;

pub use error::{Error, Result};
