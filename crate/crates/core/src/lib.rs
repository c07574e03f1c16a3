//! Heteroclinic layer solutions of `𝓛Q + a(x) W'(Q) = 0` for nonlocal
//! operators with kernels comparable to `|r|^{-1-2s}`, `1/4 < s <= 1/2`,
//! computed by constrained minimization of a renormalized energy.

pub mod appendix_bench;
pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod discretize;
pub mod energy;
pub mod error;
pub mod io;
pub mod model;
pub mod obstacles;
pub mod solver;

pub use error::{Error, Result};
