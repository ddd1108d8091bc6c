//! Batch evaluations over many initial states or parameter sets.

use serde::{Deserialize, Serialize};

use crate::critical::{CriticalKind, Nullclines};
use crate::error::Result;
use crate::exec::{self, Execution};
use crate::integrate::{fate, trace_separatrix, Fate, Separatrix};
use crate::model::{ModelParams, State};

/// One cell of a basin grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasinCell {
    pub state: State,
    /// `None` when integration failed.
    pub fate: Option<Fate>,
}

impl BasinCell {
    pub fn label(&self) -> &'static str {
        self.fate.as_ref().map_or("error", Fate::name)
    }
}

/// Grid points `(i / n, j / n)` with `i + j <= n`, excluding the corners and
/// edges when `interior_only` is set.
pub fn simplex_grid(n: usize, interior_only: bool) -> Vec<State> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let h = 1.0 / n as f64;
    for i in 0..=n {
        for j in 0..=(n - i) {
            if interior_only && (i == 0 || j == 0 || i + j == n) {
                continue;
            }
            out.push(State::raw(i as f64 * h, j as f64 * h));
        }
    }
    out
}

/// Fates of a batch of initial states.
pub fn fates_batch(p: &ModelParams, states: &[State], exec: Execution) -> Vec<Result<Fate>> {
    exec::map(exec, states, |s| fate(p, *s))
}

/// Fate of every point of an `n`-grid on the simplex.
pub fn basin_grid(p: &ModelParams, n: usize, exec: Execution) -> Vec<BasinCell> {
    let states = simplex_grid(n, false);
    fates_batch(p, &states, exec)
        .into_iter()
        .zip(states)
        .map(|(f, state)| BasinCell {
            state,
            fate: f.ok(),
        })
        .collect()
}

/// Counts of basin cells per limit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasinCensus {
    pub to_cx: usize,
    pub to_cy: usize,
    pub to_c: usize,
    pub to_c0: usize,
    pub to_segment: usize,
    pub undecided: usize,
    pub failed: usize,
}

impl BasinCensus {
    pub fn of(cells: &[BasinCell]) -> Self {
        let mut c = Self::default();
        for cell in cells {
            match cell.fate.as_ref().map(|f| f.target()) {
                None => c.failed += 1,
                Some(None) => c.undecided += 1,
                Some(Some(CriticalKind::Cx)) => c.to_cx += 1,
                Some(Some(CriticalKind::Cy)) => c.to_cy += 1,
                Some(Some(CriticalKind::C)) => c.to_c += 1,
                Some(Some(CriticalKind::C0)) => c.to_c0 += 1,
                Some(Some(CriticalKind::SegmentPoint)) => c.to_segment += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.to_cx + self.to_cy + self.to_c + self.to_c0 + self.to_segment + self.undecided + self.failed
    }
}

/// Nullclines sampled inside the simplex, the separatrix (generic regime
/// only) and a basin grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Portrait {
    pub g_x: Vec<State>,
    pub g_y: Vec<State>,
    pub separatrix: Option<Separatrix>,
    pub grid: Vec<BasinCell>,
}

/// Points of the line `y = slope x + intercept` inside the simplex.
fn clip_line(slope: f64, intercept: f64, samples: usize) -> Vec<State> {
    let samples = samples.max(2);
    (0..samples)
        .filter_map(|i| {
            let x = i as f64 / (samples - 1) as f64;
            let y = slope * x + intercept;
            (y >= 0.0 && x + y <= 1.0).then(|| State::raw(x, y))
        })
        .collect()
}

/// Phase portrait with `arc_length` of separatrix per branch and an
/// `grid_n` basin grid.
pub fn portrait(
    p: &ModelParams,
    grid_n: usize,
    arc_length: f64,
    exec: Execution,
) -> Result<Portrait> {
    let regime = crate::model::validate(p)?;
    let nc = Nullclines::new(p);
    let line = |l: &crate::critical::Line| {
        if l.degenerate {
            Vec::new()
        } else {
            clip_line(l.slope, l.intercept, 201)
        }
    };
    let separatrix = if regime == crate::model::Regime::Generic {
        Some(trace_separatrix(p, arc_length)?)
    } else {
        None
    };
    Ok(Portrait {
        g_x: line(&nc.g_x),
        g_y: line(&nc.g_y),
        separatrix,
        grid: basin_grid(p, grid_n, exec),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_size() {
        assert_eq!(simplex_grid(4, false).len(), 15);
        assert_eq!(simplex_grid(4, true).len(), 3);
        assert!(simplex_grid(0, false).is_empty());
    }

    #[test]
    fn basin_modes_agree() {
        let p = ModelParams::new(1.0, 2.0, 1.0, 2.0).unwrap();
        let a = basin_grid(&p, 6, Execution::Sequential);
        let b = basin_grid(&p, 6, Execution::Parallel);
        assert_eq!(a, b);
        let c = BasinCensus::of(&a);
        assert_eq!(c.total(), a.len());
        assert!(c.to_cx > 0 && c.to_cy > 0);
        assert_eq!(c.failed, 0);
    }
}
