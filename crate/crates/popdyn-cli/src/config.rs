//! Subcommand config schemas. All configs are JSON with unknown keys
//! rejected; validation failures exit with code 2 before any computation.

use popdyn::rate::RateFunction;
use popdyn::{Domain, Polynomial, PopulationModel, RewardSpec, ScalarFn, TransitionChannel};
use serde::{Deserialize, Serialize};

/// Model selection: a named preset or an explicit channel list.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Susceptible/infected contact process on the unit simplex.
    Sis { lambda: RateFunction, mu: RateFunction },
    /// Birth-death logistic process.
    Logistic { lambda: RateFunction, mu: RateFunction },
    /// Explicit model; revalidated on load.
    Custom {
        domain: Domain,
        channels: Vec<TransitionChannel>,
        conserved: Option<Vec<i64>>,
    },
}

impl ModelSpec {
    pub fn build(&self) -> popdyn::Result<PopulationModel> {
        match self {
            ModelSpec::Sis { lambda, mu } => PopulationModel::make_sis(lambda, mu),
            ModelSpec::Logistic { lambda, mu } => PopulationModel::make_logistic(lambda, mu),
            ModelSpec::Custom { domain, channels, conserved } => {
                PopulationModel::new(domain.clone(), channels.clone(), conserved.clone())
            }
        }
    }
}

fn default_engine() -> String {
    "thinning".into()
}

fn default_grid_points() -> usize {
    201
}

fn default_paths() -> usize {
    1
}

fn default_rtol() -> f64 {
    1e-8
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub model: ModelSpec,
    pub n: u64,
    /// Initial densities; rounded to the nearest feasible lattice state.
    pub z0: Vec<f64>,
    pub horizon: f64,
    #[serde(default = "default_paths")]
    pub paths: usize,
    #[serde(default = "default_engine")]
    pub engine: String,
    pub seed: Option<u64>,
    /// Uniform summary grid for the ensemble statistics.
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentRequest {
    /// Population scale entering the finite-n lower bound.
    pub n: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanfieldConfig {
    pub model: ModelSpec,
    pub z0: Vec<f64>,
    pub horizon: f64,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    /// Also integrate the moment-bound system (SIS models only).
    pub moments: Option<MomentRequest>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeConfig {
    pub model: ModelSpec,
    pub z0: Vec<f64>,
    pub horizon: f64,
    pub n_list: Vec<u64>,
    pub paths: usize,
    #[serde(default = "default_engine")]
    pub engine: String,
    pub seed: Option<u64>,
}

fn default_c() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityConfig {
    pub lambda: RateFunction,
    pub mu: RateFunction,
    #[serde(default = "default_c")]
    pub c: f64,
    pub x0: f64,
    pub horizon: f64,
    /// Confinement level for the neighborhood radius; defaults to
    /// `max(x0, sup mu/lambda) + 1e-6`.
    pub psi: Option<f64>,
    /// Classification window; defaults to the horizon.
    pub window: Option<f64>,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControlConfig {
    /// Best constant cure rate for a fixed infection rate.
    Stationary {
        spec: RewardSpec,
        lambda: f64,
        #[serde(default = "default_c")]
        c: f64,
        mu_max: Option<f64>,
    },
    /// Direct-shooting optimization of a piecewise-constant schedule.
    FiniteHorizon {
        spec: RewardSpec,
        #[serde(default = "default_c")]
        c: f64,
        x0: f64,
        horizon: f64,
        knots: usize,
        lambda_box: (f64, f64),
        mu_box: (f64, f64),
        terminal: Option<ScalarFn>,
    },
    /// Monte-Carlo objective gap between the jump process and its
    /// mean-field rollout under a fixed policy, running cost zero and
    /// terminal cost `|z - Z(T)|_1`.
    Gap {
        model: ModelSpec,
        z0: Vec<f64>,
        horizon: f64,
        n_list: Vec<u64>,
        paths: usize,
        #[serde(default = "default_engine")]
        engine: String,
        seed: Option<u64>,
    },
}

fn default_events() -> u64 {
    1_000_000
}

fn default_u0() -> Vec<f64> {
    vec![0.2875, 0.3704, 0.54]
}

fn default_sample_dt() -> f64 {
    0.5
}

fn default_chunk_horizon() -> f64 {
    500.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LorenzSimulate {
    /// Jump-event budget; the run stops after the chunk that crosses it.
    #[serde(default = "default_events")]
    pub events: u64,
    /// Initial class densities in the rescaled unit cube.
    #[serde(default = "default_u0")]
    pub u0: Vec<f64>,
    #[serde(default = "default_sample_dt")]
    pub sample_dt: f64,
    #[serde(default = "default_chunk_horizon")]
    pub chunk_horizon: f64,
    #[serde(default = "default_engine")]
    pub engine: String,
}

fn default_a() -> f64 {
    10.0
}

fn default_b() -> f64 {
    28.0
}

fn default_c_lorenz() -> f64 {
    8.0 / 3.0
}

fn default_true() -> bool {
    true
}

fn default_procedure() -> u8 {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserPair {
    pub pos: Vec<Polynomial>,
    pub neg: Vec<Polynomial>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstructConfig {
    /// Lorenz preset: the attractor rescaled into the unit cube and realized
    /// as a 4-class process.
    Lorenz {
        #[serde(default = "default_a")]
        a: f64,
        #[serde(default = "default_b")]
        b: f64,
        #[serde(default = "default_c_lorenz")]
        c: f64,
        alpha: f64,
        n: u64,
        /// Override of the default invariant box.
        invariant_box: Option<(Vec<f64>, Vec<f64>)>,
        simulate: Option<LorenzSimulate>,
        seed: Option<u64>,
    },
    /// Arbitrary polynomial field on the unit box.
    Field {
        components: Vec<Polynomial>,
        /// User decomposition `F = pos - neg`; positive/negative parts when
        /// absent.
        decomposition: Option<UserPair>,
        alpha: f64,
        n: u64,
        #[serde(default = "default_true")]
        with_n_scaling: bool,
        /// 1 = reservoir channels from a decomposition, 2 = signed channels
        /// with sign-definite pruning.
        #[serde(default = "default_procedure")]
        procedure: u8,
    },
}
