//! Loss-landscape geometry laboratory.
//!
//! The crate models a loss surface as a union of `n`-dimensional wedges in a
//! `D`-dimensional parameter space and ships the diagnostics used to study
//! that picture on both the exact toy landscape and on small fully-connected
//! networks trained from scratch:
//!
//! - [`wedge`]: the toy landscape (distance to the nearest axis-aligned wedge).
//! - [`optim`]: first-order optimizers, hyperplane-constrained optimization
//!   and cyclical learning-rate snapshotting.
//! - [`connectors`]: linear paths, low-loss tunnels and m-connectors.
//! - [`probing`]: short-direction counts and radial tunnel widths.
//! - [`tinynet`]: a from-scratch MLP classifier exposing its flat parameters.
//! - [`ensembling`]: weight averaging versus prediction averaging.
//! - [`cli`]: the experiment runner behind the `wedgelab` binary.

pub mod cli;
pub mod connectors;
pub mod ensembling;
mod error;
pub mod io;
pub mod linalg;
pub mod optim;
mod oracle;
mod param;
pub mod probing;
pub mod rng;
pub mod tinynet;
pub mod wedge;

pub use error::{Error, Result};
pub use oracle::{FnOracle, HalfSquared, LossOracle};
pub use param::ParamVector;
pub use wedge::{WedgeId, WedgeLandscape};
