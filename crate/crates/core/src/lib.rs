//! Kinetic (underdamped) Langevin sampling with an exact one-step Gaussian
//! kernel, explicit-constant convergence bounds and a noise-free
//! linear-Gaussian engine that checks those bounds on quadratic targets.
//!
//! Module map:
//!
//! * [`kernel`]: closed-form transition coefficients and correlated noise.
//! * [`targets`]: the gradient-oracle interface and a few analytic targets.
//! * [`chain`]: the kinetic chain, the overdamped baseline and the replica driver.
//! * [`gaussian_exact`]: exact law propagation for diagonal quadratic potentials.
//! * [`divergences`]: TV, KL and chi-square on finite distributions.
//! * [`bounds`]: hypocoercive factor, discretization bound and step schedules.
//! * [`config`] and [`harness`]: the flat config format and CLI subcommands.

pub mod bounds;
pub mod chain;
pub mod config;
pub mod divergences;
mod error;
pub mod gaussian_exact;
pub mod harness;
pub mod kernel;
pub mod targets;

pub use error::{Error, Result};
