use plc_core::critical::{outcome_taxonomy, LimitObject, Nullclines};
use plc_core::fit::{
    self, long_term_outcome, model_eval_many, predict_holdout, FitConfig, FitResult,
    LongTermOutcome, ModelFamily, DEFAULT_SEED,
};
use plc_core::integrate::{integrate_with, simulate_until_fate, IntegrateOptions, Trajectory};
use plc_core::model::{normalize, validate, RawParams};
use plc_core::sweep::{self, BasinCensus};
use plc_core::{ChangeKind, Execution, ModelParams, Regime, State, StepTolerance};
use serde_json::{json, Map, Value};

use crate::data::read_dataset;
use crate::report::{emit_json, pm, state, write_csv};
use crate::{
    ClassifyArgs, CliError, FamilyArg, FitArgs, ParamArgs, PortraitArgs, SimulateArgs,
};

fn params(a: &ParamArgs) -> Result<ModelParams, CliError> {
    let p = match a.population {
        Some(n) => normalize(&RawParams::new(a.alpha, a.beta, a.gamma, a.delta, n))?,
        None => ModelParams::new(a.alpha, a.beta, a.gamma, a.delta)?,
    };
    validate(&p)?;
    Ok(p)
}

fn params_json(p: &ModelParams) -> Value {
    json!({ "alpha": p.alpha, "beta": p.beta, "gamma": p.gamma, "delta": p.delta })
}

fn regime_json(r: Regime) -> Value {
    json!({ "tag": r.name(), "description": r.describe() })
}

fn exec(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

pub fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let p = params(&a.params)?;
    let regime = validate(&p)?;
    let s0 = State::new(a.x0, a.y0).map_err(|_| {
        CliError::input(format!(
            "initial state ({}, {}) violates the simplex constraint x0 >= 0, y0 >= 0, x0 + y0 <= 1",
            a.x0, a.y0
        ))
    })?;
    let step = StepTolerance::new(a.atol, a.rtol);
    if !step.is_valid() || a.atol >= 1.0 || a.rtol >= 1.0 {
        return Err(CliError::input("tolerances must satisfy 0 < atol < 1 and 0 <= rtol < 1"));
    }
    let opts = IntegrateOptions {
        step,
        ..IntegrateOptions::default()
    };
    let traj: Trajectory = match a.horizon {
        Some(h) if !(h > 0.0 && h.is_finite()) => {
            return Err(CliError::input(format!("horizon must be positive, got {h}")));
        }
        Some(h) => integrate_with(
            &p,
            s0,
            h,
            IntegrateOptions {
                stop_on_fate: false,
                ..opts
            },
        )?,
        None => simulate_until_fate(&p, s0, opts)?,
    };

    if let Some(path) = &a.csv {
        write_csv(
            path,
            &["t", "x", "y"],
            traj.samples
                .iter()
                .map(|s| [s.t.to_string(), s.state.x.to_string(), s.state.y.to_string()]),
        )?;
    }
    let f = &traj.fate;
    let report = json!({
        "params": params_json(&p),
        "regime": regime_json(regime),
        "initial_state": state(&s0),
        "fate": f.name(),
        "converged": f.is_converged(),
        "limit": f.limit().map(|s| state(&s)),
        "outcome": f.change_kind().map(|k| k.label()),
        "final_state": state(&traj.final_state()),
        "distance_at_end": f.distance_at_end,
        "t_end": f.t_end,
        "horizon": f.horizon,
        "samples": traj.samples.len(),
        "step_stats": {
            "accepted": traj.step_stats.accepted,
            "rejected": traj.step_stats.rejected,
            "max_error": traj.step_stats.max_error,
        },
    });
    emit_json(report, a.out.output.as_deref(), a.out.full_precision)
}

pub fn classify(a: &ClassifyArgs) -> Result<(), CliError> {
    let p = params(&a.params)?;
    let rep = outcome_taxonomy(&p)?;
    let nc = Nullclines::new(&p);
    let line = |l: &plc_core::critical::Line| {
        json!({ "slope": l.slope, "intercept": l.intercept, "degenerate": l.degenerate })
    };
    let points: Vec<Value> = rep
        .critical
        .points
        .iter()
        .map(|cp| {
            json!({
                "kind": cp.kind.name(),
                "location": state(&cp.location),
                "eigenvalues": cp.eigen.values.iter()
                    .map(|v| json!({ "re": v.re, "im": v.im }))
                    .collect::<Vec<_>>(),
                "stability": cp.stability.to_string(),
                "jacobian": cp.jacobian,
            })
        })
        .collect();
    let segments: Vec<Value> = rep
        .critical
        .segments
        .iter()
        .map(|s| {
            json!({
                "kind": format!("{:?}", s.kind),
                "start": state(&s.start),
                "end": state(&s.end),
                "description": s.describe(),
                "attracting_range": s.attracting_range(&p, 1e-12),
            })
        })
        .collect();
    let outcomes: Vec<Value> = rep
        .attractors
        .iter()
        .map(|at| {
            let (object, share) = match at.object {
                LimitObject::Point { kind, location } => (
                    json!({ "type": "point", "kind": kind.name(), "location": state(&location) }),
                    location.x,
                ),
                LimitObject::SegmentRange { kind, from, to } => (
                    json!({
                        "type": "segment",
                        "kind": format!("{kind:?}"),
                        "from": state(&from),
                        "to": state(&to),
                    }),
                    0.5 * (from.x + to.x),
                ),
            };
            let mut v = json!({ "attractor": object, "outcome": at.outcome.label() });
            if at.outcome == ChangeKind::Incomplete {
                v["share"] = json!(share);
            }
            v
        })
        .collect();
    let names = |v: &[plc_core::CriticalPoint]| -> Vec<&str> { v.iter().map(|c| c.kind.name()).collect() };
    let report = json!({
        "params": params_json(&p),
        "d": p.d(),
        "regime": regime_json(rep.regime),
        "critical_points": points,
        "segments": segments,
        "exterior_intersection": rep.critical.exterior.map(|s| state(&s)),
        "all_critical": rep.critical.all_critical,
        "nullclines": { "g_x": line(&nc.g_x), "g_y": line(&nc.g_y) },
        "outcomes": outcomes,
        "saddles": names(&rep.saddles),
        "sources": names(&rep.sources),
        "surviving_sectors": rep.surviving_sectors.iter().map(|s| format!("{s:?}")).collect::<Vec<_>>(),
    });
    emit_json(report, a.out.output.as_deref(), a.out.full_precision)
}

fn families(f: FamilyArg) -> Vec<ModelFamily> {
    match f {
        FamilyArg::Pa => vec![ModelFamily::Pa],
        FamilyArg::K2 => vec![ModelFamily::AltmannK2],
        FamilyArg::K3 => vec![ModelFamily::AltmannK3],
        FamilyArg::Plc => vec![ModelFamily::Plc],
        FamilyArg::All => ModelFamily::ALL.to_vec(),
    }
}

fn outcome_json(o: &LongTermOutcome) -> Value {
    match o {
        LongTermOutcome::IncompleteChange { share } => {
            json!({ "label": "incomplete change", "share": share })
        }
        other => json!({ "label": other.to_string() }),
    }
}

fn fit_block(r: &FitResult, full: bool) -> Value {
    let mut shown = Map::new();
    let mut estimates = Map::new();
    for (name, v, s) in r.params() {
        shown.insert(name.into(), json!(pm(v, s, full)));
        estimates.insert(name.into(), json!({ "value": v, "sigma": s }));
    }
    let poorly: Vec<&str> = r
        .family
        .param_names()
        .iter()
        .zip(&r.poorly_determined)
        .filter(|(_, f)| **f)
        .map(|(n, _)| *n)
        .collect();
    let mut block = json!({
        "family": r.family.title(),
        "parameters": shown,
        "estimates": estimates,
        "rss": r.rss,
        "rmse": r.rmse,
        "points": r.n_points,
        "converged": r.converged,
        "termination": r.termination,
        "iterations": r.n_iter,
        "best_start": r.start,
        "poorly_determined": poorly,
    });
    if let Some((p, _)) = r.plc() {
        block["regime"] = validate(&p).map_or(Value::Null, regime_json);
        block["predicted_fate"] = r.predicted_outcome.map_or(Value::Null, |f| {
            json!({ "fate": f.name(), "limit": f.limit().map(|s| state(&s)) })
        });
        block["long_term_outcome"] = match long_term_outcome(r) {
            Ok(o) => outcome_json(&o),
            Err(e) => json!({ "error": e.to_string() }),
        };
    }
    block
}

pub fn fit(a: &FitArgs) -> Result<(), CliError> {
    if a.multistart == 0 {
        return Err(CliError::input("--multistart must be at least 1"));
    }
    let data = read_dataset(&a.input, a.percent)?;
    let seed = a.seed.unwrap_or(DEFAULT_SEED);
    let config = FitConfig {
        multistart: a.multistart,
        seed,
        allow_negative: a.allow_negative,
        exec: exec(a.sequential),
        ..FitConfig::default()
    };
    let fams = families(a.family);
    if let Some(k) = a.holdout {
        for f in &fams {
            if k == 0 || k + f.n_params() >= data.len() {
                return Err(CliError::input(format!(
                    "--holdout {k} needs 1 <= k < n - p ({} points, {} parameters for {f})",
                    data.len(),
                    f.n_params()
                )));
            }
        }
    }

    let mut models = Map::new();
    let mut fits = Vec::new();
    for &family in &fams {
        let r = fit::fit(family, &data, &config)?;
        models.insert(family.title().into(), fit_block(&r, a.out.full_precision));
        if let Some(k) = a.holdout {
            let h = predict_holdout(family, &data, k, &config)?;
            let mut block = fit_block(&h.fit, a.out.full_precision);
            block["holdout"] = json!({
                "k": k,
                "rmse": h.holdout_rmse,
                "points": h.held_out.iter().map(|q| json!({
                    "t": q.t, "observed": q.observed, "predicted": q.predicted, "residual": q.residual,
                })).collect::<Vec<_>>(),
            });
            models.insert(format!("{}-predict", family.title()), block);
        }
        fits.push(r);
    }

    if let Some(path) = &a.emit_curve {
        let n = a.curve_points.max(2);
        let (t0, t1) = (data.points[0].t, data.points[data.len() - 1].t);
        let times: Vec<f64> = (0..n)
            .map(|i| t0 + (t1 - t0) * i as f64 / (n - 1) as f64)
            .collect();
        let curves = fits
            .iter()
            .map(|r| model_eval_many(r.family, &r.theta, &times))
            .collect::<Result<Vec<_>, _>>()?;
        let mut header = vec!["t"];
        if fits.len() == 1 {
            header.push("value");
        } else {
            header.extend(fits.iter().map(|r| r.family.key()));
        }
        write_csv(
            path,
            &header,
            times.iter().enumerate().map(|(i, t)| {
                std::iter::once(t.to_string())
                    .chain(curves.iter().map(move |c| c[i].to_string()))
                    .collect::<Vec<_>>()
            }),
        )?;
    }

    let report = json!({
        "dataset": { "label": data.label, "points": data.len() },
        "seed": seed,
        "multistart": a.multistart,
        "models": models,
    });
    emit_json(report, a.out.output.as_deref(), a.out.full_precision)
}

pub fn portrait(a: &PortraitArgs) -> Result<(), CliError> {
    let p = params(&a.params)?;
    let regime = validate(&p)?;
    if regime != Regime::Generic {
        return Err(CliError::input(format!(
            "portrait needs generic parameters (0 < alpha < beta, 0 < gamma < delta); \
             these are {}: {}",
            regime.name(),
            regime.describe()
        )));
    }
    if a.grid == 0 {
        return Err(CliError::input("--grid must be at least 1"));
    }
    if !(a.arc_length > 0.0 && a.arc_length.is_finite()) {
        return Err(CliError::input("--arc-length must be positive"));
    }
    let portrait = sweep::portrait(&p, a.grid, a.arc_length, exec(a.sequential))?;
    std::fs::create_dir_all(&a.out_dir)
        .map_err(|e| CliError::input(format!("cannot create {}: {e}", a.out_dir.display())))?;
    let xy = |s: &State| [s.x.to_string(), s.y.to_string()];

    let nullclines = a.out_dir.join("nullclines.csv");
    write_csv(
        &nullclines,
        &["curve", "x", "y"],
        [("g_x", &portrait.g_x), ("g_y", &portrait.g_y)]
            .into_iter()
            .flat_map(|(name, pts)| {
                pts.iter()
                    .map(move |s| std::iter::once(name.to_string()).chain(xy(s)).collect::<Vec<_>>())
            }),
    )?;

    let sep = portrait
        .separatrix
        .as_ref()
        .ok_or_else(|| CliError::numeric("separatrix could not be traced"))?;
    let separatrix = a.out_dir.join("separatrix.csv");
    write_csv(
        &separatrix,
        &["branch", "x", "y"],
        sep.branches.iter().enumerate().flat_map(|(b, pts)| {
            pts.iter()
                .map(move |s| std::iter::once(b.to_string()).chain(xy(s)).collect::<Vec<_>>())
        }),
    )?;

    let grid = a.out_dir.join("grid.csv");
    write_csv(
        &grid,
        &["x", "y", "fate"],
        portrait
            .grid
            .iter()
            .map(|c| xy(&c.state).into_iter().chain([c.label().to_string()]).collect::<Vec<_>>()),
    )?;

    let census = BasinCensus::of(&portrait.grid);
    let report = json!({
        "params": params_json(&p),
        "regime": regime_json(regime),
        "saddle": state(&sep.saddle),
        "stable_direction": sep.stable_direction,
        "separatrix": {
            "points": [sep.branches[0].len(), sep.branches[1].len()],
            "arc_lengths": sep.arc_lengths,
        },
        "grid": {
            "n": a.grid,
            "cells": portrait.grid.len(),
            "census": census,
        },
        "files": {
            "nullclines": nullclines.display().to_string(),
            "separatrix": separatrix.display().to_string(),
            "grid": grid.display().to_string(),
        },
    });
    emit_json(report, a.out.output.as_deref(), a.out.full_precision)
}
