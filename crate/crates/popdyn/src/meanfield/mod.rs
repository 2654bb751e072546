//! Deterministic mean-field integration.

pub mod integrator;
pub mod systems;

pub use integrator::{integrate, integrate_fixed_step, SampledTrajectory};
