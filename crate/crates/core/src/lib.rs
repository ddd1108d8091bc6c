//! Simulation, stability analysis and curve fitting for the
//! progressive/liberal/conservative (PLC) interaction model of language
//! change.
//!
//! The model tracks the fractions `x` of progressive and `y` of conservative
//! speakers on the simplex `x, y >= 0, x + y <= 1`:
//!
//! ```text
//! dx/dt = alpha x (1 - x) - beta  x y
//! dy/dt = gamma y (1 - y) - delta x y
//! ```
//!
//! * [`model`]: parameters, states, regimes and the vector field.
//! * [`critical`]: equilibria, linearization, nullcline sectors and the
//!   outcome taxonomy.
//! * [`integrate`]: adaptive integration, fates, separatrices.
//! * [`fit`]: least-squares fitting of the PLC model and three logistic
//!   baselines to usage time series.
//! * [`sweep`]: batch evaluations (basin grids, fate batches) that run on the
//!   rayon pool when the `parallel` feature is enabled.

pub mod critical;
pub mod error;
pub mod exec;
pub mod fit;
pub mod integrate;
pub mod lsq;
pub mod model;
mod ode;
pub mod sample;
pub mod sweep;

pub use critical::{
    critical_points, jacobian, outcome_taxonomy, sector_of, ChangeKind, CriticalKind,
    CriticalPoint, CriticalSet, Nullclines, OutcomeReport, Sector, Stability,
};
pub use error::{PlcError, Result};
pub use exec::Execution;
pub use integrate::{fate, integrate, trace_separatrix, Fate, FateKind, Trajectory};
pub use model::{
    classify_regime, normalize, vector_field, ModelParams, RawParams, Regime, State, Tolerances,
};
pub use ode::StepTolerance;
