//! Random draws of parameters and states for sweeps and property checks.

use rand::Rng;

use crate::model::{ModelParams, State};

/// Generic parameters built from raw propensities drawn uniformly from
/// `[lo, hi]` with unit population, so `beta - alpha` and `delta - gamma`
/// are bounded away from zero by `lo`.
pub fn generic_params<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> ModelParams {
    let mut draw = || rng.random_range(lo..hi);
    let (a, b, c, d) = (draw(), draw(), draw(), draw());
    ModelParams::new(a, a + b, c, c + d).expect("finite draws")
}

/// Uniform point of the open simplex, at least `margin` from each edge.
pub fn interior_state<R: Rng + ?Sized>(rng: &mut R, margin: f64) -> State {
    loop {
        let x: f64 = rng.random_range(margin..1.0 - margin);
        let y: f64 = rng.random_range(margin..1.0 - margin);
        if x + y <= 1.0 - margin {
            return State::raw(x, y);
        }
    }
}

/// Log-uniform draw on `[lo, hi]`.
pub fn log_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo.ln()..hi.ln()).exp()
}
