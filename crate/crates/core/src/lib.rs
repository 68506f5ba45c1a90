//! Continuous-time MMSE signal detection for MIMO systems as a gradient-flow
//! ODE, with exact analytical MSE evaluation, Euler-discretized simulation,
//! Monte Carlo validation, and regularization-schedule optimization.

pub mod detectors;
pub mod error;
pub mod mimo;
pub mod montecarlo;
pub mod mse;
pub mod quad;
pub mod schedules;
pub mod spectral;

pub use error::{Error, Result};
