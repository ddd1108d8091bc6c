//! Nullclines, critical points, linearization and long-term outcome taxonomy.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PlcError, Result};
use crate::model::{classify_regime_with, field_xy, ModelParams, Regime, State, Tolerances};

pub type Jacobian = [[f64; 2]; 2];

/// Analytic Jacobian of the vector field.
pub fn jacobian(p: &ModelParams, s: &State) -> Jacobian {
    let (x, y) = (s.x, s.y);
    [
        [p.alpha - 2.0 * p.alpha * x - p.beta * y, -p.beta * x],
        [-p.delta * y, p.gamma - 2.0 * p.gamma * y - p.delta * x],
    ]
}

/// A nullcline `y = slope * x + intercept`, or a vertical line when
/// `degenerate` is set (then `intercept` holds the x position).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub slope: f64,
    pub intercept: f64,
    pub degenerate: bool,
}

impl Line {
    /// Signed perpendicular distance, positive above the line (or right of a
    /// vertical line).
    pub fn signed_distance(&self, s: &State) -> f64 {
        if self.degenerate {
            s.x - self.intercept
        } else {
            (s.y - (self.slope * s.x + self.intercept)) / self.slope.hypot(1.0)
        }
    }

    pub fn y_at(&self, x: f64) -> Option<f64> {
        (!self.degenerate).then_some(self.slope * x + self.intercept)
    }
}

/// The off-axis nullclines: `g_x` where `dx/dt` vanishes for `x > 0`, `g_y`
/// where `dy/dt` vanishes for `y > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nullclines {
    pub g_x: Line,
    pub g_y: Line,
}

impl Nullclines {
    pub fn new(p: &ModelParams) -> Self {
        let tol = Tolerances::default().regime;
        let g_x = if p.beta.abs() <= tol {
            // alpha (1 - x) = 0
            Line {
                slope: f64::INFINITY,
                intercept: 1.0,
                degenerate: true,
            }
        } else {
            let r = p.alpha / p.beta;
            Line {
                slope: -r,
                intercept: r,
                degenerate: false,
            }
        };
        let g_y = if p.gamma.abs() <= tol {
            // delta x = 0
            Line {
                slope: f64::INFINITY,
                intercept: 0.0,
                degenerate: true,
            }
        } else {
            Line {
                slope: -p.delta / p.gamma,
                intercept: 1.0,
                degenerate: false,
            }
        };
        Self { g_x, g_y }
    }

    /// Intersection of the two lines by elimination on their slope/intercept
    /// form. `None` when parallel or degenerate.
    pub fn intersection(&self) -> Option<State> {
        let (a, b) = (self.g_x, self.g_y);
        match (a.degenerate, b.degenerate) {
            (false, false) => {
                let ds = a.slope - b.slope;
                if ds.abs() < 1e-300 {
                    return None;
                }
                let x = (b.intercept - a.intercept) / ds;
                Some(State::raw(x, a.slope * x + a.intercept))
            }
            (true, false) => Some(State::raw(a.intercept, b.y_at(a.intercept)?)),
            (false, true) => Some(State::raw(b.intercept, a.y_at(b.intercept)?)),
            (true, true) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stability {
    Source,
    Sink,
    Saddle,
    Degenerate,
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stability::Source => "source",
            Stability::Sink => "sink",
            Stability::Saddle => "saddle",
            Stability::Degenerate => "degenerate",
        })
    }
}

/// Eigenvalues of a 2x2 matrix, with unit eigenvectors when the eigenvalues
/// are real and distinct. `vectors[i]` belongs to `values[i]`; values are
/// ordered by ascending real part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigen2 {
    pub values: [Complex64; 2],
    pub vectors: Option<[[f64; 2]; 2]>,
}

impl Eigen2 {
    pub fn is_real(&self) -> bool {
        self.values[0].im == 0.0 && self.values[1].im == 0.0
    }
}

/// Closed-form eigen-decomposition through the characteristic quadratic.
pub fn eigen_2x2(m: &Jacobian) -> Eigen2 {
    let [[a, b], [c, d]] = *m;
    let half_tr = 0.5 * (a + d);
    let det = a * d - b * c;
    // Discriminant written as ((a-d)/2)^2 + bc to avoid cancellation.
    let disc = 0.25 * (a - d) * (a - d) + b * c;
    if disc < 0.0 {
        let im = (-disc).sqrt();
        return Eigen2 {
            values: [Complex64::new(half_tr, -im), Complex64::new(half_tr, im)],
            vectors: None,
        };
    }
    let root = disc.sqrt();
    // Stable pairing: the larger-magnitude root first, the other from det.
    let big = if half_tr >= 0.0 {
        half_tr + root
    } else {
        half_tr - root
    };
    let small = if big != 0.0 { det / big } else { 0.0 };
    let (lo, hi) = if big <= small { (big, small) } else { (small, big) };
    let vectors = if root > 0.0 {
        Some([eigvec(m, lo), eigvec(m, hi)])
    } else {
        None
    };
    Eigen2 {
        values: [Complex64::new(lo, 0.0), Complex64::new(hi, 0.0)],
        vectors,
    }
}

fn eigvec(m: &Jacobian, lambda: f64) -> [f64; 2] {
    let [[a, b], [c, d]] = *m;
    // Rows of (M - lambda I) are orthogonal to the eigenvector; use the
    // better-conditioned one.
    let r1 = [b, lambda - a];
    let r2 = [lambda - d, c];
    let n1 = r1[0].hypot(r1[1]);
    let n2 = r2[0].hypot(r2[1]);
    let (v, n) = if n1 >= n2 { (r1, n1) } else { (r2, n2) };
    if n == 0.0 {
        return [1.0, 0.0];
    }
    let mut v = [v[0] / n, v[1] / n];
    // Sign convention: first nonzero component positive.
    if v[0] < 0.0 || (v[0] == 0.0 && v[1] < 0.0) {
        v = [-v[0], -v[1]];
    }
    v
}

pub fn stability_of(eigen: &Eigen2, tol: f64) -> Stability {
    let [l0, l1] = eigen.values;
    if l0.norm() < tol || l1.norm() < tol || l0.re.abs() <= tol || l1.re.abs() <= tol {
        return Stability::Degenerate;
    }
    match (l0.re < 0.0, l1.re < 0.0) {
        (true, true) => Stability::Sink,
        (false, false) => Stability::Source,
        _ if eigen.is_real() => Stability::Saddle,
        _ => Stability::Degenerate,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CriticalKind {
    C0,
    Cx,
    Cy,
    /// Intersection of the two nullclines.
    C,
    SegmentPoint,
}

impl CriticalKind {
    pub fn name(&self) -> &'static str {
        match self {
            CriticalKind::C0 => "C0",
            CriticalKind::Cx => "Cx",
            CriticalKind::Cy => "Cy",
            CriticalKind::C => "C",
            CriticalKind::SegmentPoint => "segment",
        }
    }
}

impl fmt::Display for CriticalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub kind: CriticalKind,
    pub location: State,
    pub jacobian: Jacobian,
    pub eigen: Eigen2,
    pub stability: Stability,
}

impl CriticalPoint {
    pub fn at(p: &ModelParams, kind: CriticalKind, location: State) -> Self {
        let jacobian = jacobian(p, &location);
        let eigen = eigen_2x2(&jacobian);
        let stability = stability_of(&eigen, Tolerances::default().regime);
        Self {
            kind,
            location,
            jacobian,
            eigen,
            stability,
        }
    }
}

/// Stability from the eigenvalues stored on the point.
pub fn classify_stability(cp: &CriticalPoint) -> Stability {
    stability_of(&cp.eigen, Tolerances::default().regime)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SegmentKind {
    XAxis,
    YAxis,
    Hypotenuse,
    /// A nullcline that is critical along its whole length.
    Line,
}

/// A continuum of critical points `start + u (end - start)`, `u` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalSegment {
    pub kind: SegmentKind,
    pub start: State,
    pub end: State,
}

impl CriticalSegment {
    pub fn point_at(&self, u: f64) -> State {
        let u = u.clamp(0.0, 1.0);
        State::project(
            self.start.x + u * (self.end.x - self.start.x),
            self.start.y + u * (self.end.y - self.start.y),
        )
    }

    /// `n >= 2` evenly spaced points including both ends.
    pub fn sample(&self, n: usize) -> Vec<State> {
        let n = n.max(2);
        (0..n)
            .map(|i| self.point_at(i as f64 / (n - 1) as f64))
            .collect()
    }

    /// Parameter of the closest point.
    pub fn project(&self, s: &State) -> f64 {
        let dx = self.end.x - self.start.x;
        let dy = self.end.y - self.start.y;
        let len2 = dx * dx + dy * dy;
        if len2 == 0.0 {
            return 0.0;
        }
        (((s.x - self.start.x) * dx + (s.y - self.start.y) * dy) / len2).clamp(0.0, 1.0)
    }

    pub fn closest(&self, s: &State) -> State {
        self.point_at(self.project(s))
    }

    pub fn distance(&self, s: &State) -> f64 {
        self.closest(s).distance(s)
    }

    pub fn describe(&self) -> String {
        match self.kind {
            SegmentKind::XAxis => "{(p, 0) | 0 <= p <= 1}".to_string(),
            SegmentKind::YAxis => "{(0, p) | 0 <= p <= 1}".to_string(),
            SegmentKind::Hypotenuse => "{(p, 1 - p) | 0 <= p <= 1}".to_string(),
            SegmentKind::Line => format!(
                "segment from ({:.6}, {:.6}) to ({:.6}, {:.6})",
                self.start.x, self.start.y, self.end.x, self.end.y
            ),
        }
    }

    /// Sub-range of `u` on which segment points attract transversally.
    ///
    /// Along a line of equilibria one eigenvalue vanishes, so the transverse
    /// eigenvalue equals the trace, which is affine in `u`.
    pub fn attracting_range(&self, p: &ModelParams, tol: f64) -> Option<(f64, f64)> {
        let trace = |s: &State| {
            let j = jacobian(p, s);
            j[0][0] + j[1][1]
        };
        let t0 = trace(&self.start);
        let t1 = trace(&self.end);
        match (t0 < -tol, t1 < -tol) {
            (true, true) => Some((0.0, 1.0)),
            (false, false) => None,
            (true, false) => Some((0.0, t0 / (t0 - t1))),
            (false, true) => Some((t0 / (t0 - t1), 1.0)),
        }
    }
}

/// Every critical object of a parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalSet {
    pub regime: Regime,
    pub points: Vec<CriticalPoint>,
    pub segments: Vec<CriticalSegment>,
    /// Nullcline intersection when it falls outside the simplex.
    pub exterior: Option<State>,
    /// Vector field vanishes identically.
    pub all_critical: bool,
}

/// Nearest critical object to a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NearestCritical {
    pub kind: CriticalKind,
    pub location: State,
    pub distance: f64,
}

impl CriticalSet {
    pub fn point(&self, kind: CriticalKind) -> Option<&CriticalPoint> {
        self.points.iter().find(|c| c.kind == kind)
    }

    /// Interior saddle of the generic regime.
    pub fn interior(&self) -> Option<&CriticalPoint> {
        self.point(CriticalKind::C)
    }

    pub fn nearest(&self, s: &State) -> NearestCritical {
        if self.all_critical {
            return NearestCritical {
                kind: CriticalKind::SegmentPoint,
                location: *s,
                distance: 0.0,
            };
        }
        let mut best = NearestCritical {
            kind: CriticalKind::C0,
            location: State::ORIGIN,
            distance: f64::INFINITY,
        };
        for seg in &self.segments {
            let loc = seg.closest(s);
            let d = loc.distance(s);
            if d < best.distance {
                best = NearestCritical {
                    kind: CriticalKind::SegmentPoint,
                    location: loc,
                    distance: d,
                };
            }
        }
        // Isolated points win ties so that corners keep their names.
        for cp in &self.points {
            let d = cp.location.distance(s);
            if d <= best.distance || d < 1e-12 {
                best = NearestCritical {
                    kind: cp.kind,
                    location: cp.location,
                    distance: d,
                };
            }
        }
        best
    }
}

/// Line `a x + b y = c`.
#[derive(Debug, Clone, Copy)]
struct Implicit {
    a: f64,
    b: f64,
    c: f64,
}

impl Implicit {
    fn is_null(&self, tol: f64) -> bool {
        self.a.abs() <= tol && self.b.abs() <= tol
    }

    /// Portion of the line inside the simplex, if it is more than a point.
    fn clip(&self, tol: f64) -> Option<(State, State)> {
        let mut pts: Vec<(f64, f64)> = Vec::new();
        // x = 0
        if self.b.abs() > tol {
            pts.push((0.0, self.c / self.b));
        }
        // y = 0
        if self.a.abs() > tol {
            pts.push((self.c / self.a, 0.0));
        }
        // x + y = 1
        if (self.a - self.b).abs() > tol {
            let x = (self.c - self.b) / (self.a - self.b);
            pts.push((x, 1.0 - x));
        } else if (self.c - self.a).abs() <= tol {
            pts.push((0.0, 1.0));
            pts.push((1.0, 0.0));
        }
        let band = 1e-12;
        pts.retain(|&(x, y)| x >= -band && y >= -band && x + y <= 1.0 + band);
        if pts.len() < 2 {
            return None;
        }
        // Farthest pair.
        let mut best = (pts[0], pts[0], 0.0);
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let d = (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1);
                if d > best.2 {
                    best = (pts[i], pts[j], d);
                }
            }
        }
        if best.2 <= 1e-12 {
            return None;
        }
        let (a, b) = (State::project(best.0 .0, best.0 .1), State::project(best.1 .0, best.1 .1));
        Some(order_segment(a, b))
    }
}

fn order_segment(a: State, b: State) -> (State, State) {
    if (a.x, -a.y) <= (b.x, -b.y) {
        (a, b)
    } else {
        (b, a)
    }
}

fn segment_kind(start: &State, end: &State) -> SegmentKind {
    let eps = 1e-12;
    if start.y.abs() < eps && end.y.abs() < eps {
        SegmentKind::XAxis
    } else if start.x.abs() < eps && end.x.abs() < eps {
        SegmentKind::YAxis
    } else if (start.x + start.y - 1.0).abs() < eps && (end.x + end.y - 1.0).abs() < eps {
        SegmentKind::Hypotenuse
    } else {
        SegmentKind::Line
    }
}

pub fn critical_points(p: &ModelParams) -> Result<CriticalSet> {
    critical_points_with(p, &Tolerances::default())
}

/// All equilibria of the system in the simplex.
///
/// The field factors as `dx/dt = x Lx`, `dy/dt = y Ly` with
/// `Lx = alpha (1 - x) - beta y` and `Ly = gamma (1 - y) - delta x`, so the
/// critical set is `({x = 0} u {Lx = 0}) n ({y = 0} u {Ly = 0})`.
pub fn critical_points_with(p: &ModelParams, tol: &Tolerances) -> Result<CriticalSet> {
    let regime = classify_regime_with(p, tol.regime)?;
    let t = tol.regime;

    let mut points = vec![
        CriticalPoint::at(p, CriticalKind::C0, State::ORIGIN),
        CriticalPoint::at(p, CriticalKind::Cx, State::X_CORNER),
        CriticalPoint::at(p, CriticalKind::Cy, State::Y_CORNER),
    ];
    let mut segments = Vec::new();
    let mut exterior = None;

    let lx = Implicit {
        a: p.alpha,
        b: p.beta,
        c: p.alpha,
    };
    let ly = Implicit {
        a: p.delta,
        b: p.gamma,
        c: p.gamma,
    };

    if lx.is_null(t) && ly.is_null(t) {
        return Ok(CriticalSet {
            regime,
            points,
            segments,
            exterior,
            all_critical: true,
        });
    }

    let mut push_segment = |a: State, b: State| {
        let (a, b) = order_segment(a, b);
        let seg = CriticalSegment {
            kind: segment_kind(&a, &b),
            start: a,
            end: b,
        };
        let dup = segments.iter().any(|s: &CriticalSegment| {
            s.start.distance(&seg.start) < 1e-12 && s.end.distance(&seg.end) < 1e-12
        });
        if !dup {
            segments.push(seg);
        }
    };

    // {y = 0} n {Lx = 0}: alpha (1 - x) = 0, the whole x-axis when alpha = 0.
    if p.alpha.abs() <= t {
        push_segment(State::ORIGIN, State::X_CORNER);
    }
    // {x = 0} n {Ly = 0}
    if p.gamma.abs() <= t {
        push_segment(State::ORIGIN, State::Y_CORNER);
    }

    // {Lx = 0} n {Ly = 0}
    if lx.is_null(t) {
        if let Some((a, b)) = ly.clip(t) {
            push_segment(a, b);
        }
    } else if ly.is_null(t) {
        if let Some((a, b)) = lx.clip(t) {
            push_segment(a, b);
        }
    } else {
        let det = lx.a * ly.b - lx.b * ly.a;
        // Scale-aware singularity test on the 2x2 system.
        let scale = (lx.a.abs() + lx.b.abs()) * (ly.a.abs() + ly.b.abs());
        if det.abs() <= t * scale.max(1.0) {
            // Parallel or coincident.
            let coincident = (lx.a * ly.c - lx.c * ly.a).abs() <= t * scale.max(1.0)
                && (lx.b * ly.c - lx.c * ly.b).abs() <= t * scale.max(1.0);
            if coincident {
                if let Some((a, b)) = lx.clip(t) {
                    push_segment(a, b);
                }
            }
        } else {
            let d = p.d();
            let c = State::raw(
                p.gamma * (p.alpha - p.beta) / d,
                p.alpha * (p.gamma - p.delta) / d,
            );
            let inside = c.x >= -tol.domain && c.y >= -tol.domain && c.x + c.y <= 1.0 + tol.domain;
            if !inside {
                exterior = Some(c);
            } else {
                let c = State::project(c.x, c.y);
                let on_corner = points.iter().any(|cp| cp.location.distance(&c) < 1e-9);
                let on_segment = segments.iter().any(|s| s.distance(&c) < 1e-9);
                if !on_corner && !on_segment {
                    points.push(CriticalPoint::at(p, CriticalKind::C, c));
                }
            }
        }
    }

    Ok(CriticalSet {
        regime,
        points,
        segments,
        exterior,
        all_critical: false,
    })
}

/// Position relative to the two nullclines.
///
/// `I` lies above both lines (both derivatives negative), `III` below both
/// (both positive), `II` between them on the `C_y` side (`dx/dt < 0 < dy/dt`)
/// and `IV` between them on the `C_x` side (`dy/dt < 0 < dx/dt`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sector {
    I,
    II,
    III,
    IV,
    OnGx,
    OnGy,
    AtC,
}

impl Sector {
    /// Member of the trapping region between the nullclines.
    pub fn in_trap(&self) -> bool {
        matches!(self, Sector::II | Sector::IV | Sector::OnGx | Sector::OnGy)
    }
}

pub fn sector_of(p: &ModelParams, s: &State) -> Result<Sector> {
    sector_of_with(p, s, &Tolerances::default())
}

pub fn sector_of_with(p: &ModelParams, s: &State, tol: &Tolerances) -> Result<Sector> {
    let regime = classify_regime_with(p, tol.regime)?;
    if regime != Regime::Generic {
        return Err(PlcError::NotGeneric(regime.to_string()));
    }
    Ok(sector_unchecked(&Nullclines::new(p), s, tol.sector))
}

/// Sector test without regime validation, for hot loops that already know
/// the parameters are generic.
pub(crate) fn sector_unchecked(n: &Nullclines, s: &State, band: f64) -> Sector {
    let rx = n.g_x.signed_distance(s);
    let ry = n.g_y.signed_distance(s);
    let on_x = rx.abs() <= band;
    let on_y = ry.abs() <= band;
    match (on_x, on_y) {
        (true, true) => Sector::AtC,
        (true, false) => Sector::OnGx,
        (false, true) => Sector::OnGy,
        (false, false) => match (rx > 0.0, ry > 0.0) {
            (true, true) => Sector::I,
            (false, false) => Sector::III,
            (true, false) => Sector::II,
            (false, true) => Sector::IV,
        },
    }
}

/// Sign pattern sectors that actually occur on a grid over the simplex.
///
/// Works in every regime: the sector is read off the signs of the two
/// derivatives rather than from the nullcline geometry.
pub fn surviving_sectors(p: &ModelParams, n: usize) -> Vec<Sector> {
    let mut seen = [false; 4];
    let n = n.max(2);
    for i in 0..n {
        for j in 0..n - i {
            let x = (i as f64 + 1.0 / 3.0) / n as f64;
            let y = (j as f64 + 1.0 / 3.0) / n as f64;
            if x + y >= 1.0 {
                continue;
            }
            let (dx, dy) = field_xy(p, x, y);
            let idx = match (dx < 0.0, dy < 0.0) {
                _ if dx == 0.0 || dy == 0.0 => continue,
                (true, true) => 0,
                (true, false) => 1,
                (false, false) => 2,
                (false, true) => 3,
            };
            seen[idx] = true;
        }
    }
    [Sector::I, Sector::II, Sector::III, Sector::IV]
        .into_iter()
        .zip(seen)
        .filter_map(|(s, keep)| keep.then_some(s))
        .collect()
}

/// Linguistic reading of a limit state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChangeKind {
    /// The new feature is used by everyone.
    Complete,
    /// The new feature dies out.
    Reversible,
    /// A fixed share keeps the new feature.
    Incomplete,
}

impl ChangeKind {
    pub fn label(&self) -> &'static str {
        match self {
            ChangeKind::Complete => "complete change",
            ChangeKind::Reversible => "reversible change",
            ChangeKind::Incomplete => "incomplete change",
        }
    }

    /// Reads the outcome from the progressive share of a limit state.
    pub fn of_state(s: &State) -> Self {
        let eps = 1e-9;
        if s.x <= eps {
            ChangeKind::Reversible
        } else if s.x >= 1.0 - eps {
            ChangeKind::Complete
        } else {
            ChangeKind::Incomplete
        }
    }
}

impl fmt::Display for ChangeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LimitObject {
    Point { kind: CriticalKind, location: State },
    SegmentRange { kind: SegmentKind, from: State, to: State },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Attractor {
    pub object: LimitObject,
    pub outcome: ChangeKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeReport {
    pub regime: Regime,
    pub attractors: Vec<Attractor>,
    /// Saddles whose stable manifolds bound the basins.
    pub saddles: Vec<CriticalPoint>,
    pub sources: Vec<CriticalPoint>,
    pub surviving_sectors: Vec<Sector>,
    pub critical: CriticalSet,
}

/// Attracting limit objects of a parameter set with their linguistic labels.
pub fn outcome_taxonomy(p: &ModelParams) -> Result<OutcomeReport> {
    let tol = Tolerances::default();
    let critical = critical_points_with(p, &tol)?;
    let mut attractors = Vec::new();
    let mut saddles = Vec::new();
    let mut sources = Vec::new();

    for cp in &critical.points {
        match cp.stability {
            Stability::Sink => attractors.push(Attractor {
                object: LimitObject::Point {
                    kind: cp.kind,
                    location: cp.location,
                },
                outcome: if cp.kind == CriticalKind::C {
                    ChangeKind::Incomplete
                } else {
                    ChangeKind::of_state(&cp.location)
                },
            }),
            Stability::Saddle => saddles.push(*cp),
            Stability::Source => sources.push(*cp),
            Stability::Degenerate => {}
        }
    }
    for seg in &critical.segments {
        if let Some((u0, u1)) = seg.attracting_range(p, tol.regime) {
            let from = seg.point_at(u0);
            let to = seg.point_at(u1);
            let mid = seg.point_at(0.5 * (u0 + u1));
            attractors.push(Attractor {
                object: LimitObject::SegmentRange {
                    kind: seg.kind,
                    from,
                    to,
                },
                outcome: ChangeKind::of_state(&mid),
            });
        }
    }

    Ok(OutcomeReport {
        regime: critical.regime,
        attractors,
        saddles,
        sources,
        surviving_sectors: surviving_sectors(p, 64),
        critical,
    })
}
