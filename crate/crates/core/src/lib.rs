//! Pseudo-spectral laboratory for the degenerate Kolmogorov-Prandtl equation
//!
//! ```text
//! dt v + y dx v - (1 + v)^2 dy^2 v = 0
//! ```
//!
//! on a periodic box, together with its linearized and weighted variants,
//! a finite-difference reference solver and diagnostics for energy bounds,
//! factorial vector-field bounds and analytic smoothing.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod checkpoint;
pub mod config;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod field;
pub mod grid;
pub mod modified;
pub mod oracle;
pub mod picard;
pub mod profiles;
pub mod report;
pub mod smoothing;
pub mod solver;
pub mod stats;
pub mod verdict;

pub use error::{Error, Result};
pub use exec::Exec;
pub use field::{Field, SobolevIndex};
pub use grid::{Grid, GridSpec};
pub use profiles::Profile;
pub use solver::{Scheme, SolveConfig, Trajectory};
