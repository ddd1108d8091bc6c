use thiserror::Error;

use crate::model::State;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlcError {
    #[error("population size must be positive, got {0}")]
    NonPositivePopulation(f64),

    #[error("parameter `{name}` is not finite: {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("more than one negative interaction propensity is not supported: {0}")]
    MultipleNegative(String),

    #[error("negative self-interaction rate `{name}` = {value} is not supported")]
    NegativeRate { name: &'static str, value: f64 },

    #[error(
        "flow leaves the simplex: need delta + beta >= alpha + gamma, got {lhs} < {rhs}"
    )]
    OutwardFlow { lhs: f64, rhs: f64 },

    #[error("state ({x}, {y}) is outside the simplex x >= 0, y >= 0, x + y <= 1")]
    OutsideSimplex { x: f64, y: f64 },

    #[error("operation requires the generic regime, parameters are in {0}")]
    NotGeneric(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("step size underflow at t = {t} near ({}, {})", .state.x, .state.y)]
    StepUnderflow { t: f64, state: State },

    #[error("interior critical point is degenerate")]
    DegenerateSaddle,

    #[error("dataset too small: {points} points for {params} free parameters")]
    Underdetermined { points: usize, params: usize },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("long-term outcome undecided after horizon {0}")]
    Undecided(f64),
}

pub type Result<T> = std::result::Result<T, PlcError>;
