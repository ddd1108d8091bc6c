//! Adaptive integration of the system confined to the simplex, fate
//! detection, separatrix tracing and an empirical periodic-orbit check.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::critical::{
    critical_points_with, sector_unchecked, ChangeKind, CriticalKind, CriticalSet, Nullclines,
    Sector, Stability,
};
use crate::error::{PlcError, Result};
use crate::model::{field_xy, ModelParams, Regime, State, Tolerances};
use crate::ode::{dopri_step, PiController, StepTolerance, Vec2};

/// Horizons tried in turn by [`fate`].
pub const FATE_HORIZONS: [f64; 3] = [1e3, 1e4, 1e5];

/// Displacement from the saddle along its stable eigendirection used to
/// seed separatrix branches.
pub const SEPARATRIX_OFFSET: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub state: State,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    /// Largest component of the local error estimate over accepted steps.
    pub max_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FateKind {
    ConvergedTo { kind: CriticalKind, location: State },
    Undecided,
}

/// Terminal behaviour of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fate {
    pub kind: FateKind,
    /// Distance from the last sample to the nearest critical object.
    pub distance_at_end: f64,
    pub final_state: State,
    pub t_end: f64,
    /// Horizon that was in force when integration stopped.
    pub horizon: f64,
}

impl Fate {
    pub fn is_converged(&self) -> bool {
        matches!(self.kind, FateKind::ConvergedTo { .. })
    }

    pub fn target(&self) -> Option<CriticalKind> {
        match self.kind {
            FateKind::ConvergedTo { kind, .. } => Some(kind),
            FateKind::Undecided => None,
        }
    }

    /// `C0`, `Cx`, `Cy`, `C`, `segment` or `undecided`.
    pub fn name(&self) -> &'static str {
        self.target().map_or("undecided", |k| k.name())
    }

    pub fn limit(&self) -> Option<State> {
        match self.kind {
            FateKind::ConvergedTo { location, .. } => Some(location),
            FateKind::Undecided => None,
        }
    }

    pub fn change_kind(&self) -> Option<ChangeKind> {
        match self.kind {
            FateKind::ConvergedTo {
                kind: CriticalKind::C,
                ..
            } => Some(ChangeKind::Incomplete),
            FateKind::ConvergedTo { location, .. } => Some(ChangeKind::of_state(&location)),
            FateKind::Undecided => None,
        }
    }
}

impl fmt::Display for Fate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FateKind::ConvergedTo { kind, location } => write!(
                f,
                "converged to {kind} at ({:.6}, {:.6}) by t = {}",
                location.x, location.y, self.t_end
            ),
            FateKind::Undecided => write!(f, "undecided at t = {}", self.t_end),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub params: ModelParams,
    pub fate: Fate,
    pub step_stats: StepStats,
}

impl Trajectory {
    pub fn final_state(&self) -> State {
        self.samples.last().map(|s| s.state).unwrap_or(self.fate.final_state)
    }

    /// Number of samples after which the fish-trap invariant fails: once a
    /// sample lies between the nullclines every later sample must too.
    /// Always zero outside the generic regime, where it does not apply.
    pub fn trap_violations(&self, tol: &Tolerances) -> usize {
        let Ok(Regime::Generic) = crate::model::classify_regime_with(&self.params, tol.regime)
        else {
            return 0;
        };
        let n = Nullclines::new(&self.params);
        let mut trapped = false;
        let mut violations = 0;
        for s in &self.samples {
            let sector = sector_unchecked(&n, &s.state, tol.sector);
            if sector.in_trap() {
                trapped = true;
            } else if trapped {
                violations += 1;
            }
        }
        violations
    }

    /// Sector sequence of the samples (generic regime only).
    pub fn sectors(&self, band: f64) -> Vec<Sector> {
        let n = Nullclines::new(&self.params);
        self.samples
            .iter()
            .map(|s| sector_unchecked(&n, &s.state, band))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub step: StepTolerance,
    pub tolerances: Tolerances,
    /// Stop as soon as the fate is decided.
    pub stop_on_fate: bool,
    /// Keep every accepted step in the trajectory.
    pub record: bool,
    pub max_steps: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            step: StepTolerance::default(),
            tolerances: Tolerances::default(),
            stop_on_fate: true,
            record: true,
            max_steps: 2_000_000,
        }
    }
}

/// Right-hand side evaluated on the clamped state, with invariant axes
/// pinned.
struct Field {
    p: ModelParams,
    x_pinned: bool,
    y_pinned: bool,
}

impl Field {
    fn new(p: &ModelParams, s0: &State) -> Self {
        Self {
            p: *p,
            x_pinned: s0.x == 0.0,
            y_pinned: s0.y == 0.0,
        }
    }

    #[inline]
    fn eval(&self, y: Vec2) -> Vec2 {
        let (dx, dy) = field_xy(&self.p, y[0].clamp(0.0, 1.0), y[1].clamp(0.0, 1.0));
        [
            if self.x_pinned { 0.0 } else { dx },
            if self.y_pinned { 0.0 } else { dy },
        ]
    }
}

/// Stepping engine shared by every forward integration.
struct Engine {
    field: Field,
    critical: CriticalSet,
    opts: IntegrateOptions,
    t: f64,
    y: Vec2,
    f: Vec2,
    h: f64,
    ctrl: PiController,
    stats: StepStats,
    samples: Vec<Sample>,
    decided: Option<(CriticalKind, State, f64)>,
}

impl Engine {
    fn new(p: &ModelParams, s0: &State, h0: f64, opts: IntegrateOptions) -> Result<Self> {
        if !opts.step.is_valid() {
            return Err(PlcError::InvalidArgument(format!(
                "tolerances must be positive, got abs={} rel={}",
                opts.step.abs, opts.step.rel
            )));
        }
        let critical = critical_points_with(p, &opts.tolerances)?;
        let field = Field::new(p, s0);
        let y = [s0.x, s0.y];
        let f = field.eval(y);
        let mut engine = Self {
            field,
            critical,
            opts,
            t: 0.0,
            y,
            f,
            h: h0,
            ctrl: PiController::new(),
            stats: StepStats::default(),
            samples: Vec::new(),
            decided: None,
        };
        engine.push_sample();
        engine.check_fate();
        Ok(engine)
    }

    fn state(&self) -> State {
        State::raw(self.y[0], self.y[1])
    }

    fn push_sample(&mut self) {
        if self.opts.record {
            self.samples.push(Sample {
                t: self.t,
                state: self.state(),
            });
        }
    }

    fn check_fate(&mut self) {
        let eps = self.opts.tolerances.convergence;
        let s = self.state();
        let near = self.critical.nearest(&s);
        let speed = self.f[0].hypot(self.f[1]);
        if near.distance < eps && speed < eps {
            self.decided = Some((near.kind, near.location, near.distance));
        }
    }

    /// Integrates up to `t_end`, landing exactly on each of `outputs` (which
    /// must be ascending and within `(t, t_end]`) and calling `on_output`.
    fn advance<F>(&mut self, t_end: f64, horizon: f64, outputs: &[f64], mut on_output: F) -> Result<()>
    where
        F: FnMut(f64, State),
    {
        let h_min = 1e-12 * horizon;
        let band = self.opts.tolerances.domain;
        let mut next_out = 0;
        while self.t < t_end {
            if self.opts.stop_on_fate && self.decided.is_some() {
                break;
            }
            if self.stats.accepted + self.stats.rejected >= self.opts.max_steps {
                break;
            }
            let target = outputs.get(next_out).copied().unwrap_or(t_end).min(t_end);
            let mut h = self.h.min(target - self.t);
            let lands = h >= target - self.t;
            if h <= 0.0 {
                // Output time coincides with the current time.
                on_output(self.t, self.state());
                next_out += 1;
                continue;
            }
            if h < h_min && !lands {
                return Err(PlcError::StepUnderflow {
                    t: self.t,
                    state: self.state(),
                });
            }
            let field = &self.field;
            let step = dopri_step(&|y| field.eval(y), self.y, self.f, h, &self.opts.step);
            let cand = step.y;
            let inside = cand[0].is_finite()
                && cand[1].is_finite()
                && cand[0] >= -band
                && cand[1] >= -band
                && cand[0] + cand[1] <= 1.0 + band;
            if step.err_norm <= 1.0 && inside {
                let projected = State::project(cand[0], cand[1]);
                let mut y = [projected.x, projected.y];
                if self.field.x_pinned {
                    y[0] = 0.0;
                }
                if self.field.y_pinned {
                    y[1] = 0.0;
                }
                self.t = if lands { target } else { self.t + h };
                self.y = y;
                self.f = if y == cand { step.f_new } else { self.field.eval(y) };
                self.stats.accepted += 1;
                self.stats.max_error = self.stats.max_error.max(step.err_abs);
                let fac = self.ctrl.accept(step.err_norm);
                // Keep the proposed step when landing shortened it.
                self.h = (if lands { self.h.max(h) } else { h }) * fac;
                self.push_sample();
                self.check_fate();
                if lands && next_out < outputs.len() && self.t >= outputs[next_out] {
                    on_output(self.t, self.state());
                    next_out += 1;
                }
            } else {
                self.stats.rejected += 1;
                let fac = if inside {
                    self.ctrl.reject(step.err_norm)
                } else {
                    0.5
                };
                h *= fac;
                self.h = h;
                if h < h_min {
                    return Err(PlcError::StepUnderflow {
                        t: self.t,
                        state: self.state(),
                    });
                }
            }
        }
        Ok(())
    }

    fn fate(&self, horizon: f64) -> Fate {
        let s = self.state();
        match self.decided {
            Some((kind, location, distance)) => Fate {
                kind: FateKind::ConvergedTo { kind, location },
                distance_at_end: distance,
                final_state: s,
                t_end: self.t,
                horizon,
            },
            None => Fate {
                kind: FateKind::Undecided,
                distance_at_end: self.critical.nearest(&s).distance,
                final_state: s,
                t_end: self.t,
                horizon,
            },
        }
    }

    fn into_trajectory(self, horizon: f64) -> Trajectory {
        let fate = self.fate(horizon);
        let mut samples = self.samples;
        if samples.is_empty() {
            samples.push(Sample {
                t: self.t,
                state: fate.final_state,
            });
        }
        Trajectory {
            samples,
            params: self.field.p,
            fate,
            step_stats: self.stats,
        }
    }
}

fn check_horizon(horizon: f64) -> Result<()> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(PlcError::InvalidArgument(format!(
            "horizon must be positive and finite, got {horizon}"
        )));
    }
    Ok(())
}

/// Integrates from `s0` up to `horizon`, stopping early once the fate is
/// decided.
pub fn integrate(p: &ModelParams, s0: State, horizon: f64, tol: StepTolerance) -> Result<Trajectory> {
    integrate_with(
        p,
        s0,
        horizon,
        IntegrateOptions {
            step: tol,
            ..IntegrateOptions::default()
        },
    )
}

pub fn integrate_with(
    p: &ModelParams,
    s0: State,
    horizon: f64,
    opts: IntegrateOptions,
) -> Result<Trajectory> {
    check_horizon(horizon)?;
    let mut engine = Engine::new(p, &s0, horizon * 1e-4, opts)?;
    engine.advance(horizon, horizon, &[], |_, _| {})?;
    Ok(engine.into_trajectory(horizon))
}

/// Integrates with the escalating horizons of [`FATE_HORIZONS`], continuing
/// from where the previous horizon stopped, and returns the full trajectory.
pub fn simulate_until_fate(p: &ModelParams, s0: State, opts: IntegrateOptions) -> Result<Trajectory> {
    let opts = IntegrateOptions {
        stop_on_fate: true,
        ..opts
    };
    let mut engine = Engine::new(p, &s0, FATE_HORIZONS[0] * 1e-4, opts)?;
    let mut horizon = FATE_HORIZONS[0];
    for &hz in &FATE_HORIZONS {
        horizon = hz;
        engine.advance(hz, hz, &[], |_, _| {})?;
        if engine.decided.is_some() {
            break;
        }
    }
    Ok(engine.into_trajectory(horizon))
}

/// Long-term fate of the trajectory through `s0`.
pub fn fate(p: &ModelParams, s0: State) -> Result<Fate> {
    let opts = IntegrateOptions {
        record: false,
        ..IntegrateOptions::default()
    };
    Ok(simulate_until_fate(p, s0, opts)?.fate)
}

/// States at the requested times (ascending, non-negative) of the trajectory
/// starting at `s0` at time zero.
pub fn solve_at(p: &ModelParams, s0: State, times: &[f64], tol: StepTolerance) -> Result<Vec<State>> {
    if times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        return Err(PlcError::InvalidArgument(
            "evaluation times must be finite and non-negative".into(),
        ));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(PlcError::InvalidArgument(
            "evaluation times must be ascending".into(),
        ));
    }
    let t_end = times.last().copied().unwrap_or(0.0);
    let mut out = Vec::with_capacity(times.len());
    // Leading zeros are the initial state.
    let first = times.iter().take_while(|t| **t == 0.0).count();
    out.extend(std::iter::repeat_n(s0, first));
    if t_end == 0.0 {
        return Ok(out);
    }
    let opts = IntegrateOptions {
        step: tol,
        stop_on_fate: false,
        record: false,
        ..IntegrateOptions::default()
    };
    let mut engine = Engine::new(p, &s0, (t_end * 1e-3).min(0.1), opts)?;
    engine.advance(t_end, t_end.max(1.0), &times[first..], |_, s| out.push(s))?;
    // Duplicate times land on the same state.
    while out.len() < times.len() {
        out.push(engine.state());
    }
    Ok(out)
}

/// The two branches of the stable manifold of the interior saddle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Separatrix {
    pub saddle: State,
    /// Unit stable eigendirection at the saddle.
    pub stable_direction: [f64; 2],
    /// Branch seeded along `+stable_direction`, then along its negative.
    /// Each polyline starts at the saddle.
    pub branches: [Vec<State>; 2],
    pub arc_lengths: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparatrixOptions {
    pub offset: f64,
    pub step: StepTolerance,
    /// Upper bound on the arc length of a single integration step.
    pub max_segment: f64,
}

impl Default for SeparatrixOptions {
    fn default() -> Self {
        Self {
            offset: SEPARATRIX_OFFSET,
            step: StepTolerance::new(1e-12, 1e-12),
            max_segment: 5e-3,
        }
    }
}

pub fn trace_separatrix(p: &ModelParams, arc_length_budget: f64) -> Result<Separatrix> {
    trace_separatrix_with(p, arc_length_budget, &SeparatrixOptions::default())
}

/// Traces both branches by integrating the time-reversed field away from
/// the saddle until they leave the simplex, approach another equilibrium, or
/// use up the arc-length budget.
pub fn trace_separatrix_with(
    p: &ModelParams,
    arc_length_budget: f64,
    opts: &SeparatrixOptions,
) -> Result<Separatrix> {
    if !(arc_length_budget > 0.0) {
        return Err(PlcError::InvalidArgument(format!(
            "arc length budget must be positive, got {arc_length_budget}"
        )));
    }
    let tol = Tolerances::default();
    let set = critical_points_with(p, &tol)?;
    if set.regime != Regime::Generic {
        return Err(PlcError::NotGeneric(set.regime.to_string()));
    }
    let saddle = set.interior().ok_or(PlcError::DegenerateSaddle)?;
    if saddle.stability != Stability::Saddle {
        return Err(PlcError::DegenerateSaddle);
    }
    let vectors = saddle.eigen.vectors.ok_or(PlcError::DegenerateSaddle)?;
    // values are ordered ascending, so index 0 is the negative one
    let v = vectors[0];
    let c = saddle.location;

    let mut branches: [Vec<State>; 2] = [Vec::new(), Vec::new()];
    let mut lengths = [0.0; 2];
    for (b, sign) in [1.0, -1.0].into_iter().enumerate() {
        let start = [c.x + sign * opts.offset * v[0], c.y + sign * opts.offset * v[1]];
        let (poly, len) = trace_branch(p, &set, c, start, arc_length_budget, opts);
        branches[b] = poly;
        lengths[b] = len;
    }
    Ok(Separatrix {
        saddle: c,
        stable_direction: v,
        branches,
        arc_lengths: lengths,
    })
}

fn trace_branch(
    p: &ModelParams,
    set: &CriticalSet,
    saddle: State,
    start: Vec2,
    budget: f64,
    opts: &SeparatrixOptions,
) -> (Vec<State>, f64) {
    let rev = |y: Vec2| {
        let (dx, dy) = field_xy(p, y[0], y[1]);
        [-dx, -dy]
    };
    let mut poly = vec![saddle, State::raw(start[0], start[1])];
    let mut len = opts.offset;
    let mut y = start;
    let mut f = rev(y);
    let mut h: f64 = 1e-2;
    let mut ctrl = PiController::new();
    let inside = |z: Vec2| z[0] >= 0.0 && z[1] >= 0.0 && z[0] + z[1] <= 1.0;

    for _ in 0..1_000_000 {
        let speed = f[0].hypot(f[1]);
        if speed < 1e-14 || len >= budget {
            break;
        }
        let h_try = h.min(opts.max_segment / speed);
        let step = dopri_step(&rev, y, f, h_try, &opts.step);
        if !(step.err_norm <= 1.0) {
            h = h_try * ctrl.reject(step.err_norm);
            if h < 1e-14 {
                break;
            }
            continue;
        }
        let fac = ctrl.accept(step.err_norm);
        h = h_try * fac;
        let mut next = step.y;
        let mut leaving = false;
        if !inside(next) {
            next = clip_to_simplex(y, next);
            leaving = true;
        }
        let seg = (next[0] - y[0]).hypot(next[1] - y[1]);
        let (next, seg) = if len + seg > budget {
            let r = (budget - len) / seg;
            (
                [y[0] + r * (next[0] - y[0]), y[1] + r * (next[1] - y[1])],
                budget - len,
            )
        } else {
            (next, seg)
        };
        len += seg;
        poly.push(State::raw(next[0], next[1]));
        if leaving {
            break;
        }
        y = next;
        f = step.f_new;
        // Backward-time attractors are the repelling equilibria.
        let s = State::raw(y[0], y[1]);
        let near = set.nearest(&s);
        if near.distance < 1e-9 && near.kind != CriticalKind::C {
            break;
        }
    }
    (poly, len)
}

/// Point where the segment from an inside point `a` to `b` crosses the
/// boundary of the simplex.
fn clip_to_simplex(a: Vec2, b: Vec2) -> Vec2 {
    let mut t: f64 = 1.0;
    let d = [b[0] - a[0], b[1] - a[1]];
    if b[0] < 0.0 {
        t = t.min(a[0] / (a[0] - b[0]));
    }
    if b[1] < 0.0 {
        t = t.min(a[1] / (a[1] - b[1]));
    }
    let sa = a[0] + a[1];
    let sb = b[0] + b[1];
    if sb > 1.0 {
        t = t.min((1.0 - sa) / (sb - sa));
    }
    let t = t.clamp(0.0, 1.0);
    let q = State::project(a[0] + t * d[0], a[1] + t * d[1]);
    [q.x, q.y]
}

/// A return of the trajectory to the section through the initial point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Recurrence {
    /// Index of the crossing in [`PeriodicityReport::crossings`].
    pub crossing: usize,
    pub t: f64,
    pub state: State,
    /// Distance to the closest earlier crossing (or the initial point).
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicityReport {
    /// Same-direction crossings of the section, in time order.
    pub crossings: Vec<Sample>,
    pub recurrences: Vec<Recurrence>,
    pub fate: Fate,
}

impl PeriodicityReport {
    pub fn is_clean(&self) -> bool {
        self.recurrences.is_empty()
    }
}

/// Distance below which a return to the section counts as a recurrence.
pub const RECURRENCE_RADIUS: f64 = 1e-4;

/// Looks for returns of the trajectory through `s0` to the line through
/// `s0` orthogonal to the initial velocity.
pub fn falsify_periodicity(p: &ModelParams, s0: State, horizon: f64) -> Result<PeriodicityReport> {
    check_horizon(horizon)?;
    if !s0.is_interior() {
        return Err(PlcError::InvalidArgument(
            "periodicity check needs an interior starting point".into(),
        ));
    }
    let (dx, dy) = field_xy(p, s0.x, s0.y);
    if dx.hypot(dy) < 1e-14 {
        return Err(PlcError::InvalidArgument(
            "starting point is a critical point".into(),
        ));
    }
    let tol = Tolerances::default();
    let set = critical_points_with(p, &tol)?;
    let traj = integrate(p, s0, horizon, StepTolerance::default())?;
    let (crossings, recurrences) = find_recurrences(&traj.samples, s0, [dx, dy], |s| {
        set.nearest(s).distance
    });
    Ok(PeriodicityReport {
        crossings,
        recurrences,
        fate: traj.fate,
    })
}

/// Section crossings and recurrences of a sampled path.
///
/// A crossing near an earlier one is only reported while the path stays at
/// least `1e-3` away from every equilibrium, so accumulation of crossings
/// during convergence to a point is not mistaken for a closed orbit.
pub(crate) fn find_recurrences<D>(
    samples: &[Sample],
    s0: State,
    v0: [f64; 2],
    dist_to_equilibrium: D,
) -> (Vec<Sample>, Vec<Recurrence>)
where
    D: Fn(&State) -> f64,
{
    let sigma = |s: &State| (s.x - s0.x) * v0[0] + (s.y - s0.y) * v0[1];
    let mut crossings: Vec<Sample> = Vec::new();
    let mut recurrences = Vec::new();
    for w in samples.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let (sa, sb) = (sigma(&a.state), sigma(&b.state));
        if !(sa < 0.0 && sb >= 0.0) {
            continue;
        }
        let r = sa / (sa - sb);
        let c = Sample {
            t: a.t + r * (b.t - a.t),
            state: State::raw(
                a.state.x + r * (b.state.x - a.state.x),
                a.state.y + r * (b.state.y - a.state.y),
            ),
        };
        let distance = std::iter::once(s0)
            .chain(crossings.iter().map(|k| k.state))
            .map(|q| q.distance(&c.state))
            .fold(f64::INFINITY, f64::min);
        if distance < RECURRENCE_RADIUS && dist_to_equilibrium(&c.state) > 1e-3 {
            recurrences.push(Recurrence {
                crossing: crossings.len(),
                t: c.t,
                state: c.state,
                distance,
            });
        }
        crossings.push(c);
    }
    (crossings, recurrences)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn mp(a: f64, b: f64, c: f64, d: f64) -> ModelParams {
        ModelParams::new(a, b, c, d).unwrap()
    }

    fn st(x: f64, y: f64) -> State {
        State::new(x, y).unwrap()
    }

    #[test]
    fn constant_at_origin() {
        let t = integrate(&mp(0.4, 1.3, 0.9, 2.0), State::ORIGIN, 100.0, StepTolerance::default())
            .unwrap();
        assert!(t.samples.iter().all(|s| s.state == State::ORIGIN));
        assert_eq!(t.fate.target(), Some(CriticalKind::C0));
    }

    #[test]
    fn logistic_closed_form_on_x_axis() {
        let p = mp(0.8, 2.0, 1.0, 1.5);
        let x0 = 0.02;
        let b = (1.0 / x0 - 1.0_f64).ln();
        let times: Vec<f64> = (0..=40).map(|i| i as f64 * 0.5).collect();
        let states = solve_at(&p, st(x0, 0.0), &times, StepTolerance::default()).unwrap();
        for (t, s) in times.iter().zip(&states) {
            let exact = 1.0 / (1.0 + (-p.alpha * t + b).exp());
            assert!((s.x - exact).abs() < 1e-8, "t={t}: {} vs {exact}", s.x);
            assert_eq!(s.y, 0.0);
        }
    }

    #[test]
    fn solve_at_handles_zero_and_duplicates() {
        let p = mp(0.8, 2.0, 1.0, 1.5);
        let s0 = st(0.1, 0.1);
        let out = solve_at(&p, s0, &[0.0, 0.0, 1.0, 1.0, 2.5], StepTolerance::default()).unwrap();
        assert_eq!(out.len(), 5);
        assert_eq!(out[0], s0);
        assert_eq!(out[2], out[3]);
        assert!(solve_at(&p, s0, &[2.0, 1.0], StepTolerance::default()).is_err());
        assert!(solve_at(&p, s0, &[-1.0], StepTolerance::default()).is_err());
    }

    #[test]
    fn generic_fates() {
        let p = mp(1.0, 2.0, 1.0, 2.0);
        assert_eq!(fate(&p, st(0.0, 0.3)).unwrap().target(), Some(CriticalKind::Cy));
        assert_eq!(fate(&p, st(0.3, 0.0)).unwrap().target(), Some(CriticalKind::Cx));
        assert_eq!(fate(&p, st(0.5, 0.1)).unwrap().target(), Some(CriticalKind::Cx));
        assert_eq!(fate(&p, st(0.1, 0.5)).unwrap().target(), Some(CriticalKind::Cy));
    }

    #[test]
    fn fate_requires_small_field_and_distance() {
        let p = mp(1.0, 2.0, 1.0, 2.0);
        let f = fate(&p, st(0.2, 0.1)).unwrap();
        let s = f.final_state;
        let (dx, dy) = field_xy(&p, s.x, s.y);
        assert!(f.distance_at_end < 1e-6 && dx.hypot(dy) < 1e-6);
    }

    #[test]
    fn case8_converges_to_segment() {
        let p = mp(1.0, 1.0, 1.0, 1.0);
        let f = fate(&p, st(0.2, 0.3)).unwrap();
        assert_eq!(f.target(), Some(CriticalKind::SegmentPoint));
        let l = f.limit().unwrap();
        assert_abs_diff_eq!(l.x + l.y, 1.0, epsilon = 1e-6);
        // dx/dy = x/y along the flow, so x/y is conserved
        assert_abs_diff_eq!(l.x / l.y, 0.2 / 0.3, epsilon = 1e-5);
    }

    #[test]
    fn case7_goes_to_cy() {
        let p = mp(0.0, 2.0, 1.5, 1.5);
        for s in [st(0.8, 0.05), st(0.3, 0.3), st(0.05, 0.05)] {
            assert_eq!(fate(&p, s).unwrap().target(), Some(CriticalKind::Cy));
        }
    }

    #[test]
    fn invalid_inputs() {
        let p = mp(1.0, 2.0, 1.0, 2.0);
        assert!(integrate(&p, st(0.1, 0.1), 0.0, StepTolerance::default()).is_err());
        assert!(integrate(&p, st(0.1, 0.1), 10.0, StepTolerance::new(0.0, 1e-9)).is_err());
        assert!(integrate(&mp(2.0, 1.0, 2.0, 1.0), st(0.1, 0.1), 10.0, StepTolerance::default())
            .is_err());
    }

    #[test]
    fn axis_is_exactly_invariant() {
        let p = mp(0.7, 3.0, 1.1, 1.9);
        let t = integrate(&p, st(0.0, 0.01), 500.0, StepTolerance::default()).unwrap();
        assert!(t.samples.iter().all(|s| s.state.x == 0.0));
        let t = integrate(&p, st(0.01, 0.0), 500.0, StepTolerance::default()).unwrap();
        assert!(t.samples.iter().all(|s| s.state.y == 0.0));
    }

    #[test]
    fn separatrix_symmetric_params() {
        let p = mp(1.0, 2.5, 1.0, 2.5);
        let sep = trace_separatrix(&p, 5.0).unwrap();
        for b in &sep.branches {
            assert!(b.len() > 10);
            for s in b {
                assert!((s.x - s.y).abs() < 1e-4, "({}, {})", s.x, s.y);
            }
        }
        // one branch runs to the hypotenuse, the other towards the origin
        let ends: Vec<State> = sep.branches.iter().map(|b| *b.last().unwrap()).collect();
        assert!(ends.iter().any(|e| (e.x + e.y - 1.0).abs() < 1e-9));
        assert!(ends.iter().any(|e| e.x < 1e-6 && e.y < 1e-6));
    }

    #[test]
    fn separatrix_rejects_non_generic() {
        assert!(matches!(
            trace_separatrix(&mp(1.0, 1.0, 1.0, 1.0), 1.0),
            Err(PlcError::NotGeneric(_))
        ));
    }

    #[test]
    fn recurrence_detector_flags_circle() {
        // Unit-speed circle around (0.5, 0.3), radius 0.1, three laps.
        let samples: Vec<Sample> = (0..=3100)
            .map(|i| {
                let th = i as f64 * 2.0 * std::f64::consts::PI / 1000.0;
                Sample {
                    t: th,
                    state: State::raw(0.5 + 0.1 * th.cos(), 0.3 + 0.1 * th.sin()),
                }
            })
            .collect();
        let s0 = samples[0].state;
        let (crossings, rec) = find_recurrences(&samples, s0, [0.0, 1.0], |_| 1.0);
        assert_eq!(crossings.len(), 3);
        assert_eq!(rec.len(), 3);
    }

    #[test]
    fn periodicity_rejects_bad_start() {
        let p = mp(1.0, 2.0, 1.0, 2.0);
        assert!(falsify_periodicity(&p, State::ORIGIN, 100.0).is_err());
        assert!(falsify_periodicity(&p, st(1.0 / 3.0, 1.0 / 3.0), 100.0).is_err());
    }
}
