use thiserror::Error;

/// Errors produced by model construction, simulation, integration and control.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid model definition (negative rates, broken conservation, bad domain).
    #[error("model error: {0}")]
    Model(String),

    /// A state lies outside the declared domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A stochastic simulation could not proceed.
    #[error("simulation error: {0}")]
    Simulation(String),

    /// ODE integration failure; `t` is the last successfully reached time.
    #[error("integration error at t={t}: {msg}")]
    Integration { t: f64, msg: String },

    /// Invalid control problem or optimizer failure.
    #[error("control error: {0}")]
    Control(String),

    /// Invalid run configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
