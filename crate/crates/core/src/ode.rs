//! Dormand-Prince 5(4) embedded pair with a PI step-size controller,
//! specialized to two-dimensional autonomous systems.

pub(crate) type Vec2 = [f64; 2];

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the 5th and 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Absolute and relative local error tolerances.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StepTolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for StepTolerance {
    fn default() -> Self {
        Self {
            abs: 1e-10,
            rel: 1e-10,
        }
    }
}

impl StepTolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    pub fn is_valid(&self) -> bool {
        self.abs > 0.0 && self.rel >= 0.0 && self.abs.is_finite() && self.rel.is_finite()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            abs: self.abs * factor,
            rel: self.rel * factor,
        }
    }
}

pub(crate) struct StepResult {
    pub y: Vec2,
    pub f_new: Vec2,
    /// Weighted RMS error norm; the step is acceptable when `<= 1`.
    pub err_norm: f64,
    /// Largest raw component of the error estimate.
    pub err_abs: f64,
}

/// One trial step of size `h` from `y` with `f0 = f(y)` (FSAL).
pub(crate) fn dopri_step<F>(f: &F, y: Vec2, f0: Vec2, h: f64, tol: &StepTolerance) -> StepResult
where
    F: Fn(Vec2) -> Vec2,
{
    let k1 = f0;
    let k2 = f(comb(y, h, &[(A21, k1)]));
    let k3 = f(comb(y, h, &[(A31, k1), (A32, k2)]));
    let k4 = f(comb(y, h, &[(A41, k1), (A42, k2), (A43, k3)]));
    let k5 = f(comb(y, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]));
    let k6 = f(comb(
        y,
        h,
        &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)],
    ));
    let y_new = comb(
        y,
        h,
        &[(A71, k1), (A73, k3), (A74, k4), (A75, k5), (A76, k6)],
    );
    let k7 = f(y_new);

    let mut err_sq = 0.0;
    let mut err_abs: f64 = 0.0;
    for i in 0..2 {
        let e = h
            * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let scale = tol.abs + tol.rel * y[i].abs().max(y_new[i].abs());
        err_sq += (e / scale) * (e / scale);
        err_abs = err_abs.max(e.abs());
    }
    StepResult {
        y: y_new,
        f_new: k7,
        err_norm: (err_sq / 2.0).sqrt(),
        err_abs,
    }
}

#[inline]
fn comb(y: Vec2, h: f64, terms: &[(f64, Vec2)]) -> Vec2 {
    let mut out = y;
    for &(a, k) in terms {
        out[0] += h * a * k[0];
        out[1] += h * a * k[1];
    }
    out
}

/// PI controller (Hairer & Wanner, order 5 pair).
#[derive(Debug, Clone, Copy)]
pub(crate) struct PiController {
    prev_err: f64,
}

impl PiController {
    const SAFETY: f64 = 0.9;
    const ALPHA: f64 = 0.7 / 5.0;
    const BETA: f64 = 0.4 / 5.0;
    const MIN_FACTOR: f64 = 0.2;
    const MAX_FACTOR: f64 = 5.0;

    pub fn new() -> Self {
        Self { prev_err: 1e-4 }
    }

    /// Factor for the next step after an accepted step.
    pub fn accept(&mut self, err: f64) -> f64 {
        let err = err.max(1e-10);
        let fac = Self::SAFETY * err.powf(-Self::ALPHA) * self.prev_err.powf(Self::BETA);
        self.prev_err = err;
        fac.clamp(Self::MIN_FACTOR, Self::MAX_FACTOR)
    }

    /// Factor after a rejected step.
    pub fn reject(&self, err: f64) -> f64 {
        if !err.is_finite() {
            return Self::MIN_FACTOR;
        }
        (Self::SAFETY * err.powf(-1.0 / 5.0)).clamp(Self::MIN_FACTOR, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fifth_order_on_exponential() {
        // y' = -y, y(0) = 1; a single step of size h has local error O(h^6).
        let f = |y: Vec2| [-y[0], -y[1]];
        let tol = StepTolerance::default();
        let err = |h: f64| {
            let r = dopri_step(&f, [1.0, 1.0], [-1.0, -1.0], h, &tol);
            (r.y[0] - (-h).exp()).abs()
        };
        let ratio = err(0.2) / err(0.1);
        // 2^6 = 64
        assert!(ratio > 50.0 && ratio < 80.0, "ratio {ratio}");
    }

    #[test]
    fn controller_shrinks_on_large_error() {
        let c = PiController::new();
        assert!(c.reject(100.0) < 1.0);
        assert_eq!(c.reject(f64::NAN), PiController::MIN_FACTOR);
    }
}
