//! Least-squares fitting of the PLC model and three logistic baselines to
//! usage-fraction time series.
//!
//! | family | formula | parameters |
//! |--------|---------|------------|
//! | `Pa` | `c / (1 + a e^(-b t))` | `a, b, c` |
//! | `AltmannK2` | `c / (1 + a e^(-(b t + d t^2)))` | `a, b, c, d` |
//! | `AltmannK3` | `c / (1 + e^(-(k0 + k1 t + k2 t^2 + k3 t^3)))` | `c, k0, k1, k2, k3` |
//! | `Plc` | `x(t)` of the planar system | `alpha, beta, gamma, delta, x0, y0` |
//!
//! The PLC initial state `(x0, y0)` is taken at `t = 0`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::critical::ChangeKind;
use crate::error::{PlcError, Result};
use crate::exec::{self, Execution};
use crate::integrate::{fate, solve_at, Fate};
use crate::lsq::{self, LsqOptions, Problem, Termination};
use crate::model::{classify_regime, ModelParams, State};
use crate::ode::StepTolerance;
use crate::sample::log_uniform;

/// Default multistart seed.
pub const DEFAULT_SEED: u64 = 0x504c_4331;

/// Upper bound on every PLC rate during fitting; keeps trial integrations
/// cheap without excluding any fitted value reported for real corpora.
pub const MAX_RATE: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataPoint {
    pub t: f64,
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub label: String,
    pub points: Vec<DataPoint>,
}

impl Dataset {
    /// Validates finiteness, fractions in `[0, 1]` and strictly increasing
    /// times.
    pub fn new(label: impl Into<String>, points: Vec<DataPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(PlcError::InvalidDataset("no data points".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if !p.t.is_finite() || !p.f.is_finite() {
                return Err(PlcError::InvalidDataset(format!("row {i} is not finite")));
            }
            if !(0.0..=1.0).contains(&p.f) {
                return Err(PlcError::InvalidDataset(format!(
                    "row {i}: fraction {} outside [0, 1]",
                    p.f
                )));
            }
        }
        if points.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err(PlcError::InvalidDataset(
                "time values must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            label: label.into(),
            points,
        })
    }

    /// Uses the row index as the time axis.
    pub fn from_values(label: impl Into<String>, values: &[f64]) -> Result<Self> {
        Self::new(
            label,
            values
                .iter()
                .enumerate()
                .map(|(i, &f)| DataPoint { t: i as f64, f })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.f).collect()
    }

    /// First `n` points.
    pub fn head(&self, n: usize) -> Self {
        Self {
            label: self.label.clone(),
            points: self.points[..n.min(self.points.len())].to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelFamily {
    Pa,
    AltmannK2,
    AltmannK3,
    Plc,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 4] = [
        ModelFamily::Pa,
        ModelFamily::AltmannK2,
        ModelFamily::AltmannK3,
        ModelFamily::Plc,
    ];

    pub fn n_params(&self) -> usize {
        self.param_names().len()
    }

    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            ModelFamily::Pa => &["a", "b", "c"],
            ModelFamily::AltmannK2 => &["a", "b", "c", "d"],
            ModelFamily::AltmannK3 => &["c", "k0", "k1", "k2", "k3"],
            ModelFamily::Plc => &["alpha", "beta", "gamma", "delta", "x0", "y0"],
        }
    }

    /// Display name used in reports.
    pub fn title(&self) -> &'static str {
        match self {
            ModelFamily::Pa => "Piotrowski-Altmann",
            ModelFamily::AltmannK2 => "Altmann k=2",
            ModelFamily::AltmannK3 => "Altmann k=3",
            ModelFamily::Plc => "PLC model",
        }
    }

    pub fn key(&self) -> &'static str {
        match self {
            ModelFamily::Pa => "pa",
            ModelFamily::AltmannK2 => "k2",
            ModelFamily::AltmannK3 => "k3",
            ModelFamily::Plc => "plc",
        }
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.title())
    }
}

impl FromStr for ModelFamily {
    type Err = PlcError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pa" | "piotrowski-altmann" => Ok(ModelFamily::Pa),
            "k2" | "altmann-k2" => Ok(ModelFamily::AltmannK2),
            "k3" | "altmann-k3" => Ok(ModelFamily::AltmannK3),
            "plc" => Ok(ModelFamily::Plc),
            other => Err(PlcError::InvalidArgument(format!("unknown model family `{other}`"))),
        }
    }
}

/// Integration tolerance used inside the fitting loop.
pub const FIT_STEP_TOLERANCE: StepTolerance = StepTolerance {
    abs: 1e-12,
    rel: 1e-12,
};

fn check_theta(family: ModelFamily, theta: &[f64]) -> Result<()> {
    if theta.len() != family.n_params() {
        return Err(PlcError::InvalidArgument(format!(
            "{family} takes {} parameters, got {}",
            family.n_params(),
            theta.len()
        )));
    }
    if theta.iter().any(|v| !v.is_finite()) {
        return Err(PlcError::InvalidArgument("parameters must be finite".into()));
    }
    Ok(())
}

/// `c / (1 + a e^(-z))` with the exponential clamped to avoid overflow.
fn logistic(a: f64, z: f64, c: f64) -> f64 {
    let e = (-z).clamp(-700.0, 700.0).exp();
    let v = c / (1.0 + a * e);
    if !v.is_finite() {
        return 0.0;
    }
    if c >= 0.0 {
        v.clamp(0.0, c)
    } else {
        v.clamp(c, 0.0)
    }
}

pub(crate) fn plc_parts(theta: &[f64]) -> Result<(ModelParams, State)> {
    let p = ModelParams::new(theta[0], theta[1], theta[2], theta[3])?;
    classify_regime(&p)?;
    let s0 = State::new(theta[4], theta[5])?;
    Ok((p, s0))
}

/// Model prediction at a single time.
pub fn model_eval(family: ModelFamily, theta: &[f64], t: f64) -> Result<f64> {
    Ok(model_eval_many(family, theta, &[t])?[0])
}

/// Model predictions at several times. PLC integrates once through all of
/// them.
pub fn model_eval_many(family: ModelFamily, theta: &[f64], times: &[f64]) -> Result<Vec<f64>> {
    model_eval_with(family, theta, times, FIT_STEP_TOLERANCE)
}

pub fn model_eval_with(
    family: ModelFamily,
    theta: &[f64],
    times: &[f64],
    tol: StepTolerance,
) -> Result<Vec<f64>> {
    check_theta(family, theta)?;
    match family {
        ModelFamily::Pa => {
            let (a, b, c) = (theta[0], theta[1], theta[2]);
            Ok(times.iter().map(|&t| logistic(a, b * t, c)).collect())
        }
        ModelFamily::AltmannK2 => {
            let (a, b, c, d) = (theta[0], theta[1], theta[2], theta[3]);
            Ok(times
                .iter()
                .map(|&t| logistic(a, b * t + d * t * t, c))
                .collect())
        }
        ModelFamily::AltmannK3 => {
            let c = theta[0];
            let k = &theta[1..];
            Ok(times
                .iter()
                .map(|&t| logistic(1.0, k[0] + t * (k[1] + t * (k[2] + t * k[3])), c))
                .collect())
        }
        ModelFamily::Plc => {
            let (p, s0) = plc_parts(theta)?;
            let mut order: Vec<usize> = (0..times.len()).collect();
            order.sort_by(|&i, &j| times[i].total_cmp(&times[j]));
            let sorted: Vec<f64> = order.iter().map(|&i| times[i]).collect();
            let states = solve_at(&p, s0, &sorted, tol)?;
            let mut out = vec![0.0; times.len()];
            for (k, &i) in order.iter().enumerate() {
                out[i] = states[k].x;
            }
            Ok(out)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// Number of starting points (at least one).
    pub multistart: usize,
    pub seed: u64,
    /// Replaces the data-driven first start.
    pub init: Option<Vec<f64>>,
    /// Per-parameter values held fixed; empty means all free.
    pub fixed: Vec<Option<f64>>,
    /// Permit one of `beta < alpha`, `delta < gamma` for the PLC family.
    pub allow_negative: bool,
    pub lsq: LsqOptions,
    pub step: StepTolerance,
    pub exec: Execution,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            multistart: 16,
            seed: DEFAULT_SEED,
            init: None,
            fixed: Vec::new(),
            allow_negative: false,
            lsq: LsqOptions::default(),
            step: FIT_STEP_TOLERANCE,
            exec: Execution::Parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub family: ModelFamily,
    pub theta: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Parameters the data leave (numerically) undetermined.
    pub poorly_determined: Vec<bool>,
    pub rss: f64,
    pub rmse: f64,
    pub n_points: usize,
    pub n_iter: usize,
    pub converged: bool,
    pub termination: Termination,
    /// Index of the winning start.
    pub start: usize,
    /// Fate of the fitted system from its initial state (PLC only).
    pub predicted_outcome: Option<Fate>,
}

impl FitResult {
    pub fn params(&self) -> impl Iterator<Item = (&'static str, f64, f64)> + '_ {
        self.family
            .param_names()
            .iter()
            .zip(self.theta.iter().zip(&self.sigma))
            .map(|(n, (v, s))| (*n, *v, *s))
    }

    /// `(model params, initial state)` of a PLC fit.
    pub fn plc(&self) -> Option<(ModelParams, State)> {
        (self.family == ModelFamily::Plc)
            .then(|| plc_parts(&self.theta).ok())
            .flatten()
    }
}

/// Projection onto the admissible parameter set of each family.
pub fn project(family: ModelFamily, theta: &mut [f64], allow_negative: bool) {
    match family {
        ModelFamily::Pa | ModelFamily::AltmannK2 => {
            theta[0] = theta[0].max(0.0);
            theta[2] = theta[2].max(0.0);
        }
        ModelFamily::AltmannK3 => {
            theta[0] = theta[0].max(0.0);
        }
        ModelFamily::Plc => project_plc(theta, allow_negative),
    }
}

fn average_pair(theta: &mut [f64], lo: usize, hi: usize) {
    let m = 0.5 * (theta[lo] + theta[hi]);
    theta[lo] = m;
    theta[hi] = m;
}

fn project_plc(theta: &mut [f64], allow_negative: bool) {
    for _ in 0..4 {
        theta[0] = theta[0].clamp(0.0, MAX_RATE);
        theta[2] = theta[2].clamp(0.0, MAX_RATE);
        theta[1] = theta[1].clamp(-MAX_RATE, MAX_RATE);
        theta[3] = theta[3].clamp(-MAX_RATE, MAX_RATE);
        let beta_gap = theta[1] - theta[0];
        let delta_gap = theta[3] - theta[2];
        if !allow_negative {
            if beta_gap < 0.0 {
                average_pair(theta, 0, 1);
            }
            if delta_gap < 0.0 {
                average_pair(theta, 2, 3);
            }
        } else {
            if beta_gap < 0.0 && delta_gap < 0.0 {
                if beta_gap > delta_gap {
                    average_pair(theta, 0, 1);
                } else {
                    average_pair(theta, 2, 3);
                }
            }
            // beta + delta >= alpha + gamma
            let deficit = theta[0] + theta[2] - theta[1] - theta[3];
            if deficit > 0.0 {
                let s = deficit / 4.0;
                theta[0] -= s;
                theta[2] -= s;
                theta[1] += s;
                theta[3] += s;
            }
        }
    }
    // Tiny overshoot from the alternating projections.
    if theta[1] < theta[0] && !allow_negative {
        theta[1] = theta[0];
    }
    if theta[3] < theta[2] && !allow_negative {
        theta[3] = theta[2];
    }
    let s = State::project(theta[4], theta[5]);
    theta[4] = s.x;
    theta[5] = s.y;
}

/// Residuals of a family on a dataset as a function of the free parameters.
///
/// When all four PLC rates are free the optimizer works on the gaps
/// `(alpha, beta - alpha, gamma, delta - gamma, x0, y0)`, which turns the
/// ordering constraints into simple bounds.
#[derive(Clone)]
struct FitProblem<'a> {
    family: ModelFamily,
    times: Vec<f64>,
    values: Vec<f64>,
    free: Vec<usize>,
    base: Vec<f64>,
    gaps: bool,
    config: &'a FitConfig,
}

impl<'a> FitProblem<'a> {
    fn new(family: ModelFamily, data: &Dataset, config: &'a FitConfig) -> Result<Self> {
        let n = family.n_params();
        if !config.fixed.is_empty() && config.fixed.len() != n {
            return Err(PlcError::InvalidArgument(format!(
                "fixed mask has {} entries, {family} has {n} parameters",
                config.fixed.len()
            )));
        }
        let fixed = |j: usize| config.fixed.get(j).copied().flatten();
        let free: Vec<usize> = (0..n).filter(|&j| fixed(j).is_none()).collect();
        if data.len() < free.len() + 1 {
            return Err(PlcError::Underdetermined {
                points: data.len(),
                params: free.len(),
            });
        }
        if family == ModelFamily::Plc && data.points.iter().any(|p| p.t < 0.0) {
            return Err(PlcError::InvalidDataset(
                "the PLC family needs non-negative times".into(),
            ));
        }
        let base = (0..n).map(|j| fixed(j).unwrap_or(0.0)).collect();
        let gaps = family == ModelFamily::Plc && (0..4).all(|j| fixed(j).is_none());
        Ok(Self {
            family,
            times: data.times(),
            values: data.values(),
            free,
            base,
            gaps,
            config,
        })
    }

    /// Same problem in the original coordinates.
    fn plain(&self) -> Self {
        Self {
            gaps: false,
            ..self.clone()
        }
    }

    fn to_inner(&self, ext: &[f64]) -> Vec<f64> {
        let mut v = ext.to_vec();
        if self.gaps {
            v[1] = ext[1] - ext[0];
            v[3] = ext[3] - ext[2];
        }
        v
    }

    fn to_outer(&self, inner: &[f64]) -> Vec<f64> {
        let mut v = inner.to_vec();
        if self.gaps {
            v[1] = inner[0] + inner[1];
            v[3] = inner[2] + inner[3];
        }
        v
    }

    /// Full outer parameter vector from the free inner coordinates.
    fn full(&self, free_theta: &[f64]) -> Vec<f64> {
        let mut th = self.to_inner(&self.base);
        for (k, &j) in self.free.iter().enumerate() {
            th[j] = free_theta[k];
        }
        self.to_outer(&th)
    }

    /// Free inner coordinates of an outer parameter vector.
    fn free_of(&self, full: &[f64]) -> Vec<f64> {
        let inner = self.to_inner(full);
        self.free.iter().map(|&j| inner[j]).collect()
    }

    fn is_fixed(&self, j: usize) -> bool {
        !self.free.contains(&j)
    }

    fn project_full(&self, th: &mut [f64]) {
        project(self.family, th, self.config.allow_negative);
        for j in 0..th.len() {
            if self.is_fixed(j) {
                th[j] = self.base[j];
            }
        }
    }

    fn project_inner(&self, v: &mut [f64]) {
        v[0] = v[0].clamp(0.0, MAX_RATE);
        v[2] = v[2].clamp(0.0, MAX_RATE);
        if self.config.allow_negative {
            v[1] = v[1].clamp(-2.0 * MAX_RATE, MAX_RATE);
            v[3] = v[3].clamp(-2.0 * MAX_RATE, MAX_RATE);
            if v[1] < 0.0 && v[3] < 0.0 {
                let k = if v[1] > v[3] { 1 } else { 3 };
                v[k] = 0.0;
            }
            // beta + delta >= alpha + gamma
            if v[1] + v[3] < 0.0 {
                if v[1] < 0.0 {
                    v[1] = -v[3];
                } else {
                    v[3] = -v[1];
                }
            }
        } else {
            v[1] = v[1].clamp(0.0, MAX_RATE);
            v[3] = v[3].clamp(0.0, MAX_RATE);
        }
        let s = State::project(v[4], v[5]);
        v[4] = s.x;
        v[5] = s.y;
        for j in 4..6 {
            if self.is_fixed(j) {
                v[j] = self.base[j];
            }
        }
    }
}

impl Problem for FitProblem<'_> {
    fn n_params(&self) -> usize {
        self.free.len()
    }

    fn residuals(&self, theta: &[f64]) -> Option<Vec<f64>> {
        let full = self.full(theta);
        let pred = model_eval_with(self.family, &full, &self.times, self.config.step).ok()?;
        Some(pred.iter().zip(&self.values).map(|(p, v)| p - v).collect())
    }

    fn project(&self, theta: &mut [f64]) {
        let mut inner = self.to_inner(&self.base);
        for (k, &j) in self.free.iter().enumerate() {
            inner[j] = theta[k];
        }
        if self.gaps {
            self.project_inner(&mut inner);
        } else {
            self.project_full(&mut inner);
        }
        for (k, &j) in self.free.iter().enumerate() {
            theta[k] = inner[j];
        }
    }
}

/// Least-squares line through `(t, z)`; returns `(intercept, slope)`.
fn line_fit(t: &[f64], z: &[f64]) -> Option<(f64, f64)> {
    let n = t.len() as f64;
    if t.len() < 2 {
        return None;
    }
    let mt = t.iter().sum::<f64>() / n;
    let mz = z.iter().sum::<f64>() / n;
    let stt: f64 = t.iter().map(|v| (v - mt) * (v - mt)).sum();
    if stt == 0.0 {
        return None;
    }
    let stz: f64 = t.iter().zip(z).map(|(a, b)| (a - mt) * (b - mz)).sum();
    let slope = stz / stt;
    Some((mz - slope * mt, slope))
}

/// Data-driven logistic start `(a, b, c)` from a logit-linear regression.
fn logistic_start(data: &Dataset) -> (f64, f64, f64) {
    let fmax = data.values().into_iter().fold(0.0, f64::max);
    let c = if fmax > 0.0 { (fmax * 1.02).min(1.0) } else { 0.5 };
    let (t, z): (Vec<f64>, Vec<f64>) = data
        .points
        .iter()
        .filter(|p| p.f > 0.0 && p.f < c)
        .map(|p| (p.t, (c / p.f - 1.0).ln()))
        .unzip();
    match line_fit(&t, &z) {
        Some((icpt, slope)) if icpt.is_finite() && slope.is_finite() => {
            (icpt.exp().clamp(1e-6, 1e8), -slope, c)
        }
        _ => (10.0, 0.5, c),
    }
}

fn heuristic_start(family: ModelFamily, data: &Dataset) -> Vec<f64> {
    let (a, b, c) = logistic_start(data);
    match family {
        ModelFamily::Pa => vec![a, b, c],
        ModelFamily::AltmannK2 => vec![a, b, c, 0.0],
        ModelFamily::AltmannK3 => vec![c, -a.ln(), b, 0.0, 0.0],
        ModelFamily::Plc => {
            let alpha = b.abs().max(1e-2);
            let x0 = (1.0 / (1.0 + a)).clamp(1e-6, 0.5);
            vec![alpha, 2.0 * alpha + 0.5, alpha, 2.0 * alpha + 0.5, x0, 1e-3]
        }
    }
}

/// Random start from the documented priors.
fn random_start<R: Rng>(family: ModelFamily, rng: &mut R, allow_negative: bool) -> Vec<f64> {
    match family {
        ModelFamily::Pa => vec![
            log_uniform(rng, 1e-2, 1e3),
            log_uniform(rng, 1e-2, 3.0),
            rng.random_range(0.2..1.0),
        ],
        ModelFamily::AltmannK2 => vec![
            log_uniform(rng, 1e-2, 1e3),
            log_uniform(rng, 1e-2, 3.0),
            rng.random_range(0.2..1.0),
            rng.random_range(-0.1..0.1),
        ],
        ModelFamily::AltmannK3 => vec![
            rng.random_range(0.2..1.0),
            rng.random_range(-7.0..5.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-0.05..0.05),
            rng.random_range(-1e-3..1e-3),
        ],
        ModelFamily::Plc => {
            let alpha = log_uniform(rng, 1e-3, 10.0);
            let mut beta = log_uniform(rng, 1e-3, 10.0);
            let gamma = log_uniform(rng, 1e-3, 10.0);
            let mut delta = log_uniform(rng, 1e-3, 10.0);
            if allow_negative {
                match rng.random_range(0..4) {
                    0 => beta = -beta,
                    1 => delta = -delta,
                    _ => {}
                }
            }
            let (x0, y0) = loop {
                let x: f64 = rng.random_range(0.0..0.2);
                let y: f64 = rng.random_range(0.0..0.2);
                if x + y <= 1.0 {
                    break (x, y);
                }
            };
            vec![alpha, beta, gamma, delta, x0, y0]
        }
    }
}

/// Starting points in multistart order: the user's (or the data-driven)
/// start first, then seeded random draws.
pub fn starting_points(family: ModelFamily, data: &Dataset, config: &FitConfig) -> Vec<Vec<f64>> {
    let n = config.multistart.max(1);
    let mut starts = Vec::with_capacity(n);
    match &config.init {
        Some(init) => {
            starts.push(init.clone());
            if n > 1 {
                starts.push(heuristic_start(family, data));
            }
        }
        None => starts.push(heuristic_start(family, data)),
    }
    let mut i = 0u64;
    while starts.len() < n {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(i));
        starts.push(random_start(family, &mut rng, config.allow_negative));
        i += 1;
    }
    starts
}

/// Fits `family` to `data`, keeping the lowest-rss local optimum over all
/// starts (ties go to the lower start index).
pub fn fit(family: ModelFamily, data: &Dataset, config: &FitConfig) -> Result<FitResult> {
    if config.multistart == 0 {
        return Err(PlcError::InvalidArgument("multistart must be at least 1".into()));
    }
    if let Some(init) = &config.init {
        check_theta(family, init)?;
    }
    let problem = FitProblem::new(family, data, config)?;
    let starts = starting_points(family, data, config);
    let runs = exec::map(config.exec, &starts, |s| {
        let mut full = s.clone();
        problem.project_full(&mut full);
        lsq::minimize(&problem, &problem.free_of(&full), &config.lsq)
    });
    let (start, best) = runs
        .into_iter()
        .enumerate()
        .filter(|(_, r)| r.rss.is_finite())
        .fold(None, |acc: Option<(usize, lsq::LsqReport)>, (i, r)| match acc {
            Some((j, b)) if b.rss <= r.rss => Some((j, b)),
            _ => Some((i, r)),
        })
        .ok_or_else(|| {
            PlcError::InvalidArgument(format!("no start of {family} could be evaluated"))
        })?;

    let theta = problem.full(&best.theta);
    let plain = problem.plain();
    let cov = covariance_of(&plain, &plain.free_of(&theta), &best.residuals, best.rss)?;
    let n = data.len();
    let predicted_outcome = if family == ModelFamily::Plc {
        plc_parts(&theta)
            .ok()
            .and_then(|(p, s0)| fate(&p, s0).ok())
    } else {
        None
    };
    Ok(FitResult {
        family,
        theta,
        sigma: cov.0,
        poorly_determined: cov.1,
        rss: best.rss,
        rmse: (best.rss / n as f64).sqrt(),
        n_points: n,
        n_iter: best.iterations,
        converged: best.converged(),
        termination: best.termination,
        start,
        predicted_outcome,
    })
}

fn covariance_of(
    problem: &FitProblem<'_>,
    free_theta: &[f64],
    residuals: &[f64],
    rss: f64,
) -> Result<(Vec<f64>, Vec<bool>)> {
    let jac = lsq::jacobian_fd(problem, free_theta, residuals, &problem.config.lsq);
    let cov = lsq::covariance(&jac, rss)?;
    let n = problem.family.n_params();
    let mut sigma = vec![0.0; n];
    let mut flags = vec![false; n];
    for (k, &j) in problem.free.iter().enumerate() {
        sigma[j] = cov.sigma[k];
        flags[j] = cov.poorly_determined[k];
    }
    Ok((sigma, flags))
}

/// Standard errors of `theta` on `data` (all parameters free).
pub fn uncertainties(family: ModelFamily, theta: &[f64], data: &Dataset) -> Result<lsq::Covariance> {
    check_theta(family, theta)?;
    let config = FitConfig::default();
    let n = data.len();
    let p = family.n_params();
    if n <= p {
        return Err(PlcError::Underdetermined {
            points: n,
            params: p,
        });
    }
    let problem = FitProblem::new(family, data, &config)?;
    let r = problem
        .residuals(theta)
        .ok_or_else(|| PlcError::InvalidArgument("parameters cannot be evaluated".into()))?;
    let jac = lsq::jacobian_fd(&problem, theta, &r, &config.lsq);
    lsq::covariance(&jac, lsq::sum_sq(&r))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoldoutPoint {
    pub t: f64,
    pub observed: f64,
    pub predicted: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldoutReport {
    pub fit: FitResult,
    pub held_out: Vec<HoldoutPoint>,
    pub holdout_rmse: f64,
}

/// Fits on all but the last `k` points and predicts those.
pub fn predict_holdout(
    family: ModelFamily,
    data: &Dataset,
    k: usize,
    config: &FitConfig,
) -> Result<HoldoutReport> {
    let n = data.len();
    let p = family.n_params();
    if k == 0 || k + p >= n {
        return Err(PlcError::InvalidArgument(format!(
            "holdout must satisfy 1 <= k < n - p = {}, got {k}",
            n as i64 - p as i64
        )));
    }
    let train = data.head(n - k);
    let fit = fit(family, &train, config)?;
    let tail = &data.points[n - k..];
    let times: Vec<f64> = tail.iter().map(|q| q.t).collect();
    let pred = model_eval_with(family, &fit.theta, &times, config.step)?;
    let held_out: Vec<HoldoutPoint> = tail
        .iter()
        .zip(pred)
        .map(|(q, predicted)| HoldoutPoint {
            t: q.t,
            observed: q.f,
            predicted,
            residual: predicted - q.f,
        })
        .collect();
    let holdout_rmse =
        (held_out.iter().map(|h| h.residual * h.residual).sum::<f64>() / k as f64).sqrt();
    Ok(HoldoutReport {
        fit,
        held_out,
        holdout_rmse,
    })
}

/// Long-term outcome label of a fitted PLC system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum LongTermOutcome {
    CompleteChange,
    ReversibleChange,
    IncompleteChange { share: f64 },
}

impl fmt::Display for LongTermOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LongTermOutcome::CompleteChange => f.write_str("complete change"),
            LongTermOutcome::ReversibleChange => f.write_str("reversible change"),
            LongTermOutcome::IncompleteChange { share } => {
                write!(f, "incomplete change ({share:.4})")
            }
        }
    }
}

impl LongTermOutcome {
    pub fn from_fate(f: &Fate) -> Option<Self> {
        let limit = f.limit()?;
        Some(match f.change_kind()? {
            ChangeKind::Complete => LongTermOutcome::CompleteChange,
            ChangeKind::Reversible => LongTermOutcome::ReversibleChange,
            ChangeKind::Incomplete => LongTermOutcome::IncompleteChange { share: limit.x },
        })
    }
}

pub fn long_term_outcome(fit: &FitResult) -> Result<LongTermOutcome> {
    if fit.family != ModelFamily::Plc {
        return Err(PlcError::InvalidArgument(format!(
            "long-term outcome needs a PLC fit, got {}",
            fit.family
        )));
    }
    let (p, s0) = plc_parts(&fit.theta)?;
    let f = match fit.predicted_outcome {
        Some(f) => f,
        None => fate(&p, s0)?,
    };
    LongTermOutcome::from_fate(&f).ok_or(PlcError::Undecided(f.horizon))
}

/// Outcome of a PLC parameter vector without a fit.
pub fn outcome_of_theta(theta: &[f64]) -> Result<LongTermOutcome> {
    check_theta(ModelFamily::Plc, theta)?;
    let (p, s0) = plc_parts(theta)?;
    let f = fate(&p, s0)?;
    LongTermOutcome::from_fate(&f).ok_or(PlcError::Undecided(f.horizon))
}
