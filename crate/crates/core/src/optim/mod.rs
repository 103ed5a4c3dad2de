//! First-order optimizers over any [`LossOracle`](crate::LossOracle).
//!
//! [`minimize`] runs unconstrained, [`hyperplane_minimize`] optimizes the
//! coordinates of a point on an affine plane `p = θM + P₀`, and
//! [`minimize_projected`] keeps iterates on an affine slice by projecting both
//! the gradient and the update. [`snapshot_train`] drives the same machinery
//! with a cosine-cyclical learning rate.

mod config;
mod engine;
mod hyperplane;
mod schedule;
mod trajectory;

pub use config::{Method, OptimizerConfig};
pub use engine::{minimize, minimize_projected, Stepper};
pub use hyperplane::{hyperplane_minimize, random_hyperplane, Hyperplane, HyperplaneRun};
pub use schedule::{cyclical_lr, snapshot_train, CyclicalSchedule};
pub use trajectory::{Trajectory, TrajectoryPoint};
