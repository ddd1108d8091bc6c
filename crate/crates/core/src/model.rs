//! Domain types of the two-dimensional interaction system and its vector field.
//!
//! The normalized system on the simplex is
//!
//! ```text
//! dx/dt = alpha * x * (1 - x) - beta  * x * y
//! dy/dt = gamma * y * (1 - y) - delta * x * y
//! ```
//!
//! where `x` is the fraction of progressive speakers, `y` the fraction of
//! conservative speakers and `1 - x - y` the liberal remainder.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{PlcError, Result};

/// Numerical tolerances shared by the whole crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Absolute tolerance for equalities on regime boundaries and for
    /// declaring an eigenvalue zero.
    pub regime: f64,
    /// Band around the simplex absorbed by projection.
    pub domain: f64,
    /// Half-width of the band treated as lying on a nullcline.
    pub sector: f64,
    /// Convergence radius for fate decisions.
    pub convergence: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            regime: 1e-12,
            domain: 1e-9,
            sector: 1e-9,
            convergence: 1e-6,
        }
    }
}

/// Raw per-encounter propensities and population size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawParams {
    pub alpha_t: f64,
    pub beta_t: f64,
    pub gamma_t: f64,
    pub delta_t: f64,
    pub population: f64,
}

impl RawParams {
    pub fn new(alpha_t: f64, beta_t: f64, gamma_t: f64, delta_t: f64, population: f64) -> Self {
        Self {
            alpha_t,
            beta_t,
            gamma_t,
            delta_t,
            population,
        }
    }

    /// All four propensities strictly positive.
    pub fn is_generic(&self) -> bool {
        self.alpha_t > 0.0 && self.beta_t > 0.0 && self.gamma_t > 0.0 && self.delta_t > 0.0
    }
}

/// Normalized rates of the planar system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        for (name, value) in [
            ("alpha", alpha),
            ("beta", beta),
            ("gamma", gamma),
            ("delta", delta),
        ] {
            if !value.is_finite() {
                return Err(PlcError::NonFinite { name, value });
            }
        }
        Ok(Self {
            alpha,
            beta,
            gamma,
            delta,
        })
    }

    /// `alpha * gamma - beta * delta`.
    pub fn d(&self) -> f64 {
        self.alpha * self.gamma - self.beta * self.delta
    }

    /// Parameters with the roles of the two communities exchanged. The
    /// system is invariant under this swap combined with `(x, y) -> (y, x)`.
    pub fn swapped(&self) -> Self {
        Self {
            alpha: self.gamma,
            beta: self.delta,
            gamma: self.alpha,
            delta: self.beta,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.alpha, self.beta, self.gamma, self.delta]
    }
}

impl fmt::Display for ModelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(alpha={}, beta={}, gamma={}, delta={})",
            self.alpha, self.beta, self.gamma, self.delta
        )
    }
}

/// A point of the simplex `{x >= 0, y >= 0, x + y <= 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub x: f64,
    pub y: f64,
}

impl State {
    pub const ORIGIN: State = State { x: 0.0, y: 0.0 };
    pub const X_CORNER: State = State { x: 1.0, y: 0.0 };
    pub const Y_CORNER: State = State { x: 0.0, y: 1.0 };

    /// Builds a state with the default domain band.
    pub fn new(x: f64, y: f64) -> Result<Self> {
        Self::with_band(x, y, Tolerances::default().domain)
    }

    /// Accepts points within `band` of the simplex and projects them onto it.
    pub fn with_band(x: f64, y: f64, band: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(PlcError::OutsideSimplex { x, y });
        }
        if x < -band || y < -band || x + y > 1.0 + band {
            return Err(PlcError::OutsideSimplex { x, y });
        }
        Ok(Self::project(x, y))
    }

    /// Euclidean projection onto the simplex for points already close to it.
    pub(crate) fn project(x: f64, y: f64) -> Self {
        let mut x = x.max(0.0);
        let mut y = y.max(0.0);
        let excess = x + y - 1.0;
        if excess > 0.0 {
            x -= excess / 2.0;
            y -= excess / 2.0;
            if x < 0.0 {
                y += x;
                x = 0.0;
            }
            if y < 0.0 {
                x += y;
                y = 0.0;
            }
        }
        Self { x, y }
    }

    /// Unvalidated constructor for points known to be inside the simplex.
    pub(crate) const fn raw(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn liberal(&self) -> f64 {
        1.0 - self.x - self.y
    }

    pub fn distance(&self, other: &State) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_interior(&self) -> bool {
        self.x > 0.0 && self.y > 0.0 && self.x + self.y < 1.0
    }

    pub fn swapped(&self) -> Self {
        Self {
            x: self.y,
            y: self.x,
        }
    }
}

/// Which of the enumerated parameter situations a parameter set realizes.
///
/// The singular cases are keyed by where the intersection `C` of the two
/// nullclines sits relative to the simplex:
///
/// | tag | condition | location of `C` |
/// |-----|-----------|-----------------|
/// | `Generic` | `0 < alpha < beta`, `0 < gamma < delta` | interior |
/// | `OneNegative` | `beta < alpha` or `delta < gamma` (not both) | outside |
/// | `SingularCase3` | `alpha = 0` | `(gamma/delta, 0)`, x-axis critical |
/// | `SingularCase4` | `gamma = 0` | `(0, alpha/beta)`, y-axis critical |
/// | `SingularCase5` | `alpha = gamma = 0` | origin, both axes critical |
/// | `SingularCase6` | `alpha = beta` | `C_y` |
/// | `SingularCase7` | `gamma = delta` | `C_x` |
/// | `SingularCase8` | `alpha = beta`, `gamma = delta` | hypotenuse critical |
///
/// Cases are tested in the order 5, 8, 7 (with `alpha = 0`), 3, 6 (with
/// `gamma = 0`), 4, 6, 7 so that every admissible parameter set receives
/// exactly one tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    Generic,
    OneNegative,
    SingularCase3,
    SingularCase4,
    SingularCase5,
    SingularCase6,
    SingularCase7,
    SingularCase8,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Generic => "generic",
            Regime::OneNegative => "one-negative",
            Regime::SingularCase3 => "singular-3",
            Regime::SingularCase4 => "singular-4",
            Regime::SingularCase5 => "singular-5",
            Regime::SingularCase6 => "singular-6",
            Regime::SingularCase7 => "singular-7",
            Regime::SingularCase8 => "singular-8",
        }
    }

    pub fn describe(&self) -> &'static str {
        match self {
            Regime::Generic => "interior saddle between the nullclines; bistable between C_x and C_y",
            Regime::OneNegative => {
                "one negative raw propensity; the nullcline intersection lies outside the simplex"
            }
            Regime::SingularCase3 => "alpha = 0: every point of the x-axis is critical",
            Regime::SingularCase4 => "gamma = 0: every point of the y-axis is critical",
            Regime::SingularCase5 => "alpha = gamma = 0: both axes are critical",
            Regime::SingularCase6 => "alpha = beta: the nullcline intersection coincides with C_y",
            Regime::SingularCase7 => "gamma = delta: the nullcline intersection coincides with C_x",
            Regime::SingularCase8 => {
                "alpha = beta and gamma = delta: every point of x + y = 1 is critical"
            }
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Converts raw propensities and population size into normalized rates.
pub fn normalize(raw: &RawParams) -> Result<ModelParams> {
    if !(raw.population > 0.0) || !raw.population.is_finite() {
        return Err(PlcError::NonPositivePopulation(raw.population));
    }
    let negatives: Vec<&str> = [
        ("alpha_t", raw.alpha_t),
        ("beta_t", raw.beta_t),
        ("gamma_t", raw.gamma_t),
        ("delta_t", raw.delta_t),
    ]
    .iter()
    .filter(|(_, v)| *v < 0.0)
    .map(|(n, _)| *n)
    .collect();
    if negatives.len() > 1 {
        return Err(PlcError::MultipleNegative(negatives.join(", ")));
    }
    let n = raw.population;
    ModelParams::new(
        n * raw.alpha_t,
        n * (raw.alpha_t + raw.beta_t),
        n * raw.gamma_t,
        n * (raw.gamma_t + raw.delta_t),
    )
}

/// Evaluates `(dx/dt, dy/dt)`.
#[inline]
pub fn vector_field(p: &ModelParams, s: &State) -> (f64, f64) {
    field_xy(p, s.x, s.y)
}

#[inline]
pub(crate) fn field_xy(p: &ModelParams, x: f64, y: f64) -> (f64, f64) {
    (
        p.alpha * x * (1.0 - x) - p.beta * x * y,
        p.gamma * y * (1.0 - y) - p.delta * x * y,
    )
}

pub fn classify_regime(p: &ModelParams) -> Result<Regime> {
    classify_regime_with(p, Tolerances::default().regime)
}

/// Classifies a parameter set with an explicit equality tolerance.
pub fn classify_regime_with(p: &ModelParams, tol: f64) -> Result<Regime> {
    let ModelParams {
        alpha,
        beta,
        gamma,
        delta,
    } = *p;
    for (name, value) in [("alpha", alpha), ("gamma", gamma)] {
        if value < -tol {
            return Err(PlcError::NegativeRate { name, value });
        }
    }
    let eq = |a: f64, b: f64| (a - b).abs() <= tol;
    let beta_neg = beta < alpha - tol;
    let delta_neg = delta < gamma - tol;
    if beta_neg && delta_neg {
        return Err(PlcError::MultipleNegative("beta_t, delta_t".into()));
    }
    if beta_neg || delta_neg {
        let lhs = delta + beta;
        let rhs = alpha + gamma;
        if lhs < rhs - tol {
            return Err(PlcError::OutwardFlow { lhs, rhs });
        }
        return Ok(Regime::OneNegative);
    }

    let alpha_zero = eq(alpha, 0.0);
    let gamma_zero = eq(gamma, 0.0);
    let x_tie = eq(alpha, beta);
    let y_tie = eq(gamma, delta);

    let regime = if alpha_zero && gamma_zero {
        Regime::SingularCase5
    } else if x_tie && y_tie {
        Regime::SingularCase8
    } else if alpha_zero {
        if y_tie {
            Regime::SingularCase7
        } else {
            Regime::SingularCase3
        }
    } else if gamma_zero {
        if x_tie {
            Regime::SingularCase6
        } else {
            Regime::SingularCase4
        }
    } else if x_tie {
        Regime::SingularCase6
    } else if y_tie {
        Regime::SingularCase7
    } else {
        Regime::Generic
    };
    Ok(regime)
}

/// Checks admissibility and returns the regime; convenience for callers that
/// only need validation.
pub fn validate(p: &ModelParams) -> Result<Regime> {
    classify_regime(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn mp(a: f64, b: f64, c: f64, d: f64) -> ModelParams {
        ModelParams::new(a, b, c, d).unwrap()
    }

    #[test]
    fn normalize_zero_case() {
        let p = normalize(&RawParams::new(0.0, 0.0, 0.0, 0.0, 100.0)).unwrap();
        assert_eq!(p.as_array(), [0.0; 4]);
        assert_eq!(p.d(), 0.0);
    }

    #[test]
    fn normalize_equal_propensities() {
        let p = normalize(&RawParams::new(0.01, 0.01, 0.01, 0.01, 100.0)).unwrap();
        assert_abs_diff_eq!(p.alpha, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.beta, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.gamma, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.delta, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.d(), -3.0, epsilon = 1e-12);
    }

    #[test]
    fn normalize_rejects_bad_population() {
        for n in [0.0, -5.0, f64::NAN] {
            assert!(matches!(
                normalize(&RawParams::new(0.1, 0.1, 0.1, 0.1, n)),
                Err(PlcError::NonPositivePopulation(_))
            ));
        }
    }

    #[test]
    fn normalize_rejects_two_negatives() {
        let err = normalize(&RawParams::new(0.1, -0.1, 0.1, -0.1, 10.0)).unwrap_err();
        assert!(matches!(err, PlcError::MultipleNegative(_)));
    }

    #[test]
    fn field_examples() {
        let p = mp(1.0, 1.0, 1.0, 1.0);
        let (dx, dy) = vector_field(&p, &State::new(0.5, 0.25).unwrap());
        assert_abs_diff_eq!(dx, 0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(dy, 0.0625, epsilon = 1e-15);
        let q = mp(0.3, 1.7, 2.2, 5.1);
        for s in [State::ORIGIN, State::X_CORNER, State::Y_CORNER] {
            assert_eq!(vector_field(&q, &s), (0.0, 0.0));
        }
    }

    #[test]
    fn regime_examples() {
        assert_eq!(classify_regime(&mp(1.0, 2.0, 1.0, 2.0)).unwrap(), Regime::Generic);
        assert_eq!(
            classify_regime(&mp(0.0, 2.0, 1.0, 2.0)).unwrap(),
            Regime::SingularCase3
        );
        assert_eq!(
            classify_regime(&mp(1.0, 1.0, 1.0, 1.0)).unwrap(),
            Regime::SingularCase8
        );
        assert_eq!(
            classify_regime(&mp(1.0, 2.0, 0.0, 2.0)).unwrap(),
            Regime::SingularCase4
        );
        assert_eq!(
            classify_regime(&mp(0.0, 2.0, 0.0, 2.0)).unwrap(),
            Regime::SingularCase5
        );
        assert_eq!(
            classify_regime(&mp(1.0, 1.0, 1.0, 3.0)).unwrap(),
            Regime::SingularCase6
        );
        assert_eq!(
            classify_regime(&mp(1.0, 3.0, 1.0, 1.0)).unwrap(),
            Regime::SingularCase7
        );
        assert_eq!(
            classify_regime(&mp(0.0, 3.0, 1.0, 1.0)).unwrap(),
            Regime::SingularCase7
        );
        assert_eq!(
            classify_regime(&mp(1.0, 1.0, 0.0, 2.0)).unwrap(),
            Regime::SingularCase6
        );
        assert_eq!(
            classify_regime(&mp(0.1076, 2.3732, 0.0377, -1.1806)).unwrap(),
            Regime::OneNegative
        );
    }

    #[test]
    fn regime_rejections() {
        // beta + delta < alpha + gamma
        assert!(matches!(
            classify_regime(&mp(2.0, 0.5, 1.0, 1.2)),
            Err(PlcError::OutwardFlow { .. })
        ));
        assert!(matches!(
            classify_regime(&mp(2.0, 1.0, 2.0, 1.0)),
            Err(PlcError::MultipleNegative(_))
        ));
        assert!(matches!(
            classify_regime(&mp(-0.1, 1.0, 2.0, 3.0)),
            Err(PlcError::NegativeRate { .. })
        ));
    }

    #[test]
    fn regime_tolerance_is_configurable() {
        let p = mp(1.0, 1.0 + 1e-9, 1.0, 2.0);
        assert_eq!(classify_regime(&p).unwrap(), Regime::Generic);
        assert_eq!(classify_regime_with(&p, 1e-6).unwrap(), Regime::SingularCase6);
    }

    #[test]
    fn state_band_and_projection() {
        let s = State::new(-5e-10, 0.3).unwrap();
        assert_eq!(s.x, 0.0);
        let s = State::new(0.6, 0.4 + 5e-10).unwrap();
        assert!(s.x + s.y <= 1.0);
        assert!(State::new(0.6, 0.5).is_err());
        assert!(State::new(-1e-6, 0.5).is_err());
        assert!(State::new(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn boundary_flow_points_inward_for_one_negative() {
        // sum of derivatives on x + y = 1 must be <= 0
        let p = mp(0.1076, 2.3732, 0.0377, -1.1806);
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            let (dx, dy) = field_xy(&p, x, 1.0 - x);
            assert!(dx + dy <= 1e-15, "outward at x={x}: {}", dx + dy);
        }
    }
}
