//! Density-dependent population processes with time-varying rates.
//!
//! The crate models lattice jump processes whose transition intensities scale
//! as `n * beta_{l,t}(k/n)`, simulates them exactly with two independent
//! engines, integrates their mean-field ODE limits, and analyzes convergence,
//! stability, and control of the viral-propagation special case. A reverse
//! construction realizes bounded polynomial vector fields (including the
//! Lorenz system) as population processes.

pub mod analysis;
pub mod construct;
pub mod control;
pub mod error;
pub mod meanfield;
pub mod model;
pub mod poly;
pub mod rate;
pub mod rng;
pub mod simulate;
pub mod stats;

pub use analysis::{ConvergenceReport, EquilibriumReport};
pub use construct::{
    affine_rescale, build_population_model, build_sign_model, decompose_field, lorenz_model,
    AffineMap, ConstructedModel, FieldDecomposition, VectorField,
};
pub use control::{ControlPolicy, RewardSpec, ScalarFn};
pub use error::{Error, Result};
pub use meanfield::{integrate, SampledTrajectory};
pub use model::{Domain, PopulationModel, TransitionChannel};
pub use poly::{ChannelRate, PolyTerm, Polynomial};
pub use rate::RateFunction;
pub use simulate::{
    engine_by_name, engine_names, simulate_ensemble, simulate_next_reaction, simulate_thinning,
    EnsembleSummary, JumpEngine, JumpPath,
};
