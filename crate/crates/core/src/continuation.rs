//! Numerical oracle: Pincherle convolution quadrature and monodromy measured on
//! the deformed contour, with branch-tracked evaluation of the factors.
//!
//! Nothing here uses the closed-form monodromy formulas. Branches are followed
//! by continuity: logarithms by choosing the representative nearest to the
//! previous value, polylogarithms through `Li_j(b) = Li_j(a) + ∫_a^b Li_{j−1}(u) du/u`
//! evaluated panel by panel with a spectral integration matrix.

use std::f64::consts::{PI, TAU};
use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use thiserror::Error;

use crate::coeffs::{Assignment, GaussianRational};
use crate::logpoly::{BranchPoint, LogLaurentPoly};
use crate::monodromy::{self, FunctionSpec, MonodromyError, ProductKind};
use crate::series::TruncatedSeries;

type C64 = Complex64;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContinuationError {
    #[error("path passes within {distance:.3e} of the singular point {point} (clearance {clearance:.3e})")]
    PathTooCloseToSingularity { point: C64, distance: f64, clearance: f64 },
    #[error("quadrature did not converge (error estimate {estimate:.3e})")]
    QuadratureNotConverged { estimate: f64 },
    #[error("infeasible contour geometry: {0}")]
    GeometryInfeasible(String),
    #[error("principal branch undefined at {0}")]
    OnBranchCut(C64),
    #[error("contour is not admissible: {0}")]
    NotAdmissible(String),
    #[error("invalid contour: {0}")]
    InvalidContour(String),
    #[error("invalid element: {0}")]
    InvalidElement(String),
    #[error("numeric monodromy is measured on the principal sheet only (winding {0} requested)")]
    UnsupportedWinding(i64),
    #[error(transparent)]
    Symbolic(#[from] MonodromyError),
    #[error("symbolic evaluation failed: {0}")]
    Evaluation(String),
}

type Result<T> = std::result::Result<T, ContinuationError>;

// ---------------------------------------------------------------------------
// Geometry

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathSegment {
    Line { a: C64, b: C64 },
    Arc { center: C64, radius: f64, theta_start: f64, theta_end: f64 },
}

impl PathSegment {
    pub fn line(a: C64, b: C64) -> Result<Self> {
        if (b - a).norm() == 0.0 {
            return Err(ContinuationError::InvalidContour("zero-length line".into()));
        }
        Ok(PathSegment::Line { a, b })
    }

    pub fn arc(center: C64, radius: f64, theta_start: f64, theta_end: f64) -> Result<Self> {
        if radius <= 0.0 || theta_start == theta_end {
            return Err(ContinuationError::InvalidContour("degenerate arc".into()));
        }
        Ok(PathSegment::Arc { center, radius, theta_start, theta_end })
    }

    /// Positively oriented circle starting at angle `theta`.
    pub fn circle(center: C64, radius: f64, theta: f64) -> Result<Self> {
        Self::arc(center, radius, theta, theta + TAU)
    }

    /// Point at parameter `s ∈ [0, 1]`.
    pub fn point(&self, s: f64) -> C64 {
        match *self {
            PathSegment::Line { a, b } => a + (b - a) * s,
            PathSegment::Arc { center, radius, theta_start, theta_end } => {
                center + C64::from_polar(radius, theta_start + (theta_end - theta_start) * s)
            }
        }
    }

    /// Derivative with respect to `s`.
    pub fn tangent(&self, s: f64) -> C64 {
        match *self {
            PathSegment::Line { a, b } => b - a,
            PathSegment::Arc { center, theta_start, theta_end, .. } => {
                (self.point(s) - center) * I * (theta_end - theta_start)
            }
        }
    }

    pub fn start(&self) -> C64 {
        self.point(0.0)
    }

    pub fn end(&self) -> C64 {
        self.point(1.0)
    }

    pub fn length(&self) -> f64 {
        match *self {
            PathSegment::Line { a, b } => (b - a).norm(),
            PathSegment::Arc { radius, theta_start, theta_end, .. } => radius * (theta_end - theta_start).abs(),
        }
    }

    pub fn reversed(&self) -> Self {
        match *self {
            PathSegment::Line { a, b } => PathSegment::Line { a: b, b: a },
            PathSegment::Arc { center, radius, theta_start, theta_end } => {
                PathSegment::Arc { center, radius, theta_start: theta_end, theta_end: theta_start }
            }
        }
    }

    /// Full circle centred at the origin, in either orientation.
    pub fn is_origin_circle(&self) -> bool {
        match *self {
            PathSegment::Arc { center, theta_start, theta_end, .. } => {
                center == C64::new(0.0, 0.0) && ((theta_end - theta_start).abs() - TAU).abs() < 1e-12
            }
            PathSegment::Line { .. } => false,
        }
    }

    pub fn distance_to(&self, p: C64) -> f64 {
        match *self {
            PathSegment::Line { a, b } => {
                let d = b - a;
                let t = (((p - a) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
                (a + d * t - p).norm()
            }
            PathSegment::Arc { center, radius, theta_start, theta_end } => {
                let q = p - center;
                let (lo, hi) = if theta_start <= theta_end { (theta_start, theta_end) } else { (theta_end, theta_start) };
                let mut ang = q.arg();
                while ang < lo {
                    ang += TAU;
                }
                while ang - TAU >= lo {
                    ang -= TAU;
                }
                if ang <= hi || q.norm() == 0.0 {
                    (q.norm() - radius).abs()
                } else {
                    (self.start() - p).norm().min((self.end() - p).norm())
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContourSpec {
    segments: Vec<PathSegment>,
    closed: bool,
}

impl ContourSpec {
    pub fn new(segments: Vec<PathSegment>, closed: bool) -> Result<Self> {
        if segments.is_empty() {
            return Err(ContinuationError::InvalidContour("no segments".into()));
        }
        for w in segments.windows(2) {
            if (w[0].end() - w[1].start()).norm() > 1e-12 {
                return Err(ContinuationError::InvalidContour(format!(
                    "gap between {} and {}",
                    w[0].end(),
                    w[1].start()
                )));
            }
        }
        if closed && (segments[segments.len() - 1].end() - segments[0].start()).norm() > 1e-12 {
            return Err(ContinuationError::InvalidContour("closed contour does not return to its start".into()));
        }
        Ok(ContourSpec { segments, closed })
    }

    /// Positively oriented circle `|u| = r`.
    pub fn circle(r: f64) -> Result<Self> {
        Self::new(vec![PathSegment::circle(C64::new(0.0, 0.0), r, 0.0)?], true)
    }

    pub fn segments(&self) -> &[PathSegment] {
        &self.segments
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(PathSegment::length).sum()
    }

    pub fn distance_to(&self, p: C64) -> f64 {
        self.segments.iter().map(|s| s.distance_to(p)).fold(f64::INFINITY, f64::min)
    }
}

// ---------------------------------------------------------------------------
// Polynomials with complex coefficients, ascending powers

fn poly_eval(c: &[C64], z: C64) -> C64 {
    c.iter().rev().fold(C64::new(0.0, 0.0), |acc, a| acc * z + a)
}

fn poly_deriv(c: &[C64]) -> Vec<C64> {
    c.iter().enumerate().skip(1).map(|(k, a)| a * k as f64).collect()
}

fn poly_mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| a.get(k).copied().unwrap_or_default() - b.get(k).copied().unwrap_or_default())
        .collect()
}

fn poly_trim(c: &[C64]) -> &[C64] {
    let mut n = c.len();
    while n > 0 && c[n - 1] == C64::new(0.0, 0.0) {
        n -= 1;
    }
    &c[..n]
}

/// Roots by simultaneous Weierstrass (Durand–Kerner) iteration.
fn poly_roots(c: &[C64]) -> Vec<C64> {
    let c = poly_trim(c);
    if c.len() <= 1 {
        return Vec::new();
    }
    let deg = c.len() - 1;
    let lead = c[deg];
    let monic: Vec<C64> = c.iter().map(|a| a / lead).collect();
    let bound = 1.0 + monic[..deg].iter().map(|a| a.norm()).fold(0.0, f64::max);
    let mut z: Vec<C64> = (0..deg)
        .map(|k| C64::from_polar(bound, 0.4 + TAU * k as f64 / deg as f64))
        .collect();
    for _ in 0..500 {
        let mut change: f64 = 0.0;
        for i in 0..deg {
            let mut den = C64::new(1.0, 0.0);
            for j in 0..deg {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            let step = poly_eval(&monic, z[i]) / den;
            z[i] -= step;
            change = change.max(step.norm());
        }
        if change < 1e-15 * bound {
            break;
        }
    }
    // one Newton polish per root
    let d = poly_deriv(&monic);
    for r in &mut z {
        let dv = poly_eval(&d, *r);
        if dv.norm() > 0.0 {
            *r -= poly_eval(&monic, *r) / dv;
        }
    }
    z
}

/// A rational function with its denominator kept in factored form, so that
/// values near a multiple pole do not suffer cancellation.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalFn {
    num: Vec<C64>,
    den: Vec<C64>,
    lead: C64,
    /// Distinct roots of `den` with multiplicities; roots closer than `1e−3`
    /// (relative) are treated as one.
    poles: Vec<(C64, u32)>,
}

impl RationalFn {
    pub fn new(num: Vec<C64>, den: Vec<C64>) -> Result<Self> {
        let d = poly_trim(&den).to_vec();
        let Some(&lead) = d.last() else {
            return Err(ContinuationError::InvalidElement("zero denominator".into()));
        };
        let poles = cluster_roots(&d);
        Ok(RationalFn { num, den: d, lead, poles })
    }

    pub fn num(&self) -> &[C64] {
        &self.num
    }

    pub fn den(&self) -> &[C64] {
        &self.den
    }

    pub fn poles(&self) -> &[(C64, u32)] {
        &self.poles
    }

    fn den_eval(&self, z: C64) -> C64 {
        self.poles.iter().fold(self.lead, |acc, &(p, m)| acc * (z - p).powu(m))
    }

    pub fn eval(&self, z: C64) -> C64 {
        poly_eval(&self.num, z) / self.den_eval(z)
    }

    pub fn derivative(&self) -> RationalFn {
        RationalFn {
            num: poly_sub(&poly_mul(&poly_deriv(&self.num), &self.den), &poly_mul(&self.num, &poly_deriv(&self.den))),
            den: poly_mul(&self.den, &self.den),
            lead: self.lead * self.lead,
            poles: self.poles.iter().map(|&(p, m)| (p, 2 * m)).collect(),
        }
    }
}

/// Roots of `c` grouped by [`dedup_points`]; each cluster centre is refined by
/// Newton's method on the derivative of order `m − 1`, where the root is simple.
fn cluster_roots(c: &[C64]) -> Vec<(C64, u32)> {
    let roots = poly_roots(c);
    let mut out: Vec<(C64, u32)> = Vec::new();
    for r in &roots {
        match out.iter_mut().find(|(p, _)| (*p - r).norm() <= 1e-3 * (1.0 + r.norm())) {
            Some((_, m)) => *m += 1,
            None => out.push((*r, 1)),
        }
    }
    for (p, m) in &mut out {
        let members: Vec<C64> =
            roots.iter().copied().filter(|r| (*p - r).norm() <= 1e-3 * (1.0 + r.norm())).collect();
        *p = members.iter().sum::<C64>() / members.len() as f64;
        let mut d = c.to_vec();
        for _ in 1..*m {
            d = poly_deriv(&d);
        }
        let dd = poly_deriv(&d);
        for _ in 0..3 {
            let v = poly_eval(&dd, *p);
            if v.norm() == 0.0 {
                break;
            }
            *p -= poly_eval(&d, *p) / v;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Quadrature rules

struct Rule {
    x: Vec<f64>,
    w: Vec<f64>,
    /// `q[i][j]`: weight of node `j` in `∫_{−1}^{x_i}`.
    q: Vec<Vec<f64>>,
}

fn legendre_values(n: usize, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; n + 1];
    p[0] = 1.0;
    if n >= 1 {
        p[1] = x;
    }
    for m in 1..n {
        p[m + 1] = ((2 * m + 1) as f64 * x * p[m] - m as f64 * p[m - 1]) / (m + 1) as f64;
    }
    p
}

impl Rule {
    fn new(n: usize) -> Rule {
        let gl = GaussLegendre::new(NonZeroUsize::new(n).expect("positive degree"));
        let mut pairs: Vec<(f64, f64)> = gl.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let w: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let pn: Vec<Vec<f64>> = x.iter().map(|&xj| legendre_values(n, xj)).collect();
        let q = x
            .iter()
            .map(|&xi| {
                let p = legendre_values(n, xi);
                let integ: Vec<f64> = (0..n)
                    .map(|m| if m == 0 { xi + 1.0 } else { (p[m + 1] - p[m - 1]) / (2 * m + 1) as f64 })
                    .collect();
                (0..n)
                    .map(|j| (0..n).map(|m| (2 * m + 1) as f64 / 2.0 * pn[j][m] * integ[m]).sum::<f64>() * w[j])
                    .collect()
            })
            .collect();
        Rule { x, w, q }
    }
}

fn rule15() -> &'static Rule {
    static R: OnceLock<Rule> = OnceLock::new();
    R.get_or_init(|| Rule::new(15))
}

fn rule31() -> &'static Rule {
    static R: OnceLock<Rule> = OnceLock::new();
    R.get_or_init(|| Rule::new(31))
}

/// Gauss nodes of a panel in path order, `dz/dx` at the nodes, and the panel end.
struct PanelGeom<'r> {
    end: C64,
    pts: Vec<C64>,
    dpts: Vec<C64>,
    rule: &'r Rule,
}

// ---------------------------------------------------------------------------
// Analytic elements

/// A germ at the origin together with a rule for continuing it.
#[derive(Debug, Clone, PartialEq)]
pub enum AnalyticElement {
    Rational(RationalFn),
    /// `P(z) · log(1 − z/α)`, principal at the origin; monodromy `2πi·P` at `α`.
    LogBranch { location: C64, prefactor: Vec<C64> },
    Polylog(u32),
    /// Truncated power series, valid for `|z| < radius`; approximate.
    Series { series: TruncatedSeries<C64>, radius: f64 },
    Sum(Vec<AnalyticElement>),
    /// `factor(z) · inner(z)`.
    Scaled { factor: RationalFn, inner: Box<AnalyticElement> },
}

/// Replaces clusters of points closer than `1e−3` (relative) by their mean;
/// a root of multiplicity `m` comes out of the root finder as `m` points spread
/// symmetrically around it, at distance about `ε_mach^{1/m}`.
fn dedup_points(pts: Vec<C64>) -> Vec<C64> {
    let mut clusters: Vec<Vec<C64>> = Vec::new();
    for p in pts {
        match clusters.iter_mut().find(|c| (c[0] - p).norm() <= 1e-3 * (1.0 + p.norm())) {
            Some(c) => c.push(p),
            None => clusters.push(vec![p]),
        }
    }
    let mut out: Vec<C64> = clusters.iter().map(|c| c.iter().sum::<C64>() / c.len() as f64).collect();
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    out
}

fn on_ray_cut(z: C64, base: C64) -> bool {
    // z ∈ base·[1, ∞)
    let t = z / base;
    t.im.abs() <= 1e-15 * t.norm() && t.re >= 1.0
}

impl AnalyticElement {
    pub fn rational(num: Vec<C64>, den: Vec<C64>) -> Result<Self> {
        Ok(AnalyticElement::Rational(RationalFn::new(num, den)?))
    }

    /// `1/(1 − z/α)`.
    pub fn geometric(alpha: C64) -> Self {
        Self::rational(vec![C64::new(1.0, 0.0)], vec![C64::new(1.0, 0.0), -1.0 / alpha]).expect("nonzero denominator")
    }

    /// `−K₀ = −z/(1 − z)²`.
    pub fn neg_koebe() -> Self {
        let one = C64::new(1.0, 0.0);
        Self::rational(vec![C64::new(0.0, 0.0), -one], vec![one, -2.0 * one, one]).expect("nonzero denominator")
    }

    pub fn constant(c: C64) -> Self {
        Self::rational(vec![c], vec![C64::new(1.0, 0.0)]).expect("nonzero denominator")
    }

    pub fn log_branch(location: C64, prefactor: Vec<C64>) -> Result<Self> {
        if location.norm() == 0.0 {
            return Err(ContinuationError::InvalidElement("log branch at the origin".into()));
        }
        Ok(AnalyticElement::LogBranch { location, prefactor })
    }

    pub fn polylog(k: u32) -> Result<Self> {
        if k == 0 {
            return Err(ContinuationError::InvalidElement("polylogarithm index starts at 1".into()));
        }
        Ok(AnalyticElement::Polylog(k))
    }

    pub fn is_approximate(&self) -> bool {
        match self {
            AnalyticElement::Series { .. } => true,
            AnalyticElement::Sum(v) => v.iter().any(Self::is_approximate),
            AnalyticElement::Scaled { inner, .. } => inner.is_approximate(),
            _ => false,
        }
    }

    /// Nonzero finite singular points of any branch.
    pub fn singular_points(&self) -> Vec<C64> {
        let pts = match self {
            AnalyticElement::Rational(r) => r.poles.iter().map(|p| p.0).collect(),
            AnalyticElement::LogBranch { location, .. } => vec![*location],
            AnalyticElement::Polylog(_) => vec![C64::new(1.0, 0.0)],
            AnalyticElement::Series { .. } => Vec::new(),
            AnalyticElement::Sum(v) => v.iter().flat_map(Self::singular_points).collect(),
            AnalyticElement::Scaled { factor, inner } => {
                let mut p: Vec<C64> = factor.poles.iter().map(|p| p.0).collect();
                p.extend(inner.singular_points());
                p
            }
        };
        dedup_points(pts.into_iter().filter(|p| p.norm() > 1e-14).collect())
    }

    /// Distance from `z` to the nearest point to avoid, the origin included.
    fn singular_distance(&self, z: C64) -> f64 {
        let mut d = z.norm();
        for p in self.singular_points() {
            d = d.min((z - p).norm());
        }
        if let Some(r) = self.series_radius() {
            d = d.min(r - z.norm());
        }
        d
    }

    fn series_radius(&self) -> Option<f64> {
        match self {
            AnalyticElement::Series { radius, .. } => Some(*radius),
            AnalyticElement::Sum(v) => v.iter().filter_map(Self::series_radius).reduce(f64::min),
            AnalyticElement::Scaled { inner, .. } => inner.series_radius(),
            _ => None,
        }
    }

    pub fn derivative(&self) -> AnalyticElement {
        match self {
            AnalyticElement::Rational(r) => AnalyticElement::Rational(r.derivative()),
            AnalyticElement::LogBranch { location, prefactor } => AnalyticElement::Sum(vec![
                AnalyticElement::LogBranch { location: *location, prefactor: poly_deriv(prefactor) },
                Self::rational(prefactor.clone(), vec![-location, C64::new(1.0, 0.0)]).expect("nonzero denominator"),
            ]),
            AnalyticElement::Polylog(1) => AnalyticElement::geometric(C64::new(1.0, 0.0)),
            AnalyticElement::Polylog(k) => AnalyticElement::Scaled {
                factor: RationalFn::new(vec![C64::new(1.0, 0.0)], vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)])
                    .expect("nonzero denominator"),
                inner: Box::new(AnalyticElement::Polylog(k - 1)),
            },
            AnalyticElement::Series { series, radius } => {
                AnalyticElement::Series { series: series.derivative(), radius: *radius }
            }
            AnalyticElement::Sum(v) => AnalyticElement::Sum(v.iter().map(Self::derivative).collect()),
            AnalyticElement::Scaled { factor, inner } => AnalyticElement::Sum(vec![
                AnalyticElement::Scaled { factor: factor.derivative(), inner: inner.clone() },
                AnalyticElement::Scaled { factor: factor.clone(), inner: Box::new(inner.derivative()) },
            ]),
        }
    }

    /// Bound on the omitted tail of a series element at `z`, zero otherwise.
    pub fn truncation_estimate(&self, z: C64) -> f64 {
        match self {
            AnalyticElement::Series { series, radius } => {
                let n = series.order();
                let last = series.coeffs().iter().rev().find(|c| c.norm() > 0.0).map_or(0.0, |c| c.norm());
                let q = z.norm() / radius;
                if q >= 1.0 {
                    f64::INFINITY
                } else {
                    last * z.norm().powi(n as i32) / (1.0 - q)
                }
            }
            AnalyticElement::Sum(v) => v.iter().map(|e| e.truncation_estimate(z)).sum(),
            AnalyticElement::Scaled { factor, inner } => factor.eval(z).norm() * inner.truncation_estimate(z),
            _ => 0.0,
        }
    }

    /// Value of the principal branch.
    pub fn eval_principal(&self, z: C64) -> Result<C64> {
        let st = self.principal_state(z)?;
        Ok(self.value_at(&st, z))
    }

    /// A branch state at `z`, starting on the principal branch.
    pub fn at(&self, z: C64) -> Result<Continued<'_>> {
        Ok(Continued { element: self, state: self.principal_state(z)?, point: z })
    }

    fn principal_state(&self, z: C64) -> Result<NodeState> {
        Ok(match self {
            AnalyticElement::Rational(r) => {
                if r.den_eval(z).norm() == 0.0 {
                    return Err(ContinuationError::PathTooCloseToSingularity { point: z, distance: 0.0, clearance: 0.0 });
                }
                NodeState::Plain
            }
            AnalyticElement::LogBranch { location, .. } => {
                if on_ray_cut(z, *location) {
                    return Err(ContinuationError::OnBranchCut(z));
                }
                NodeState::Log((1.0 - z / location).ln())
            }
            AnalyticElement::Polylog(k) => polylog_principal(*k, z)?,
            AnalyticElement::Series { radius, .. } => {
                if z.norm() >= *radius {
                    return Err(ContinuationError::OnBranchCut(z));
                }
                NodeState::Plain
            }
            AnalyticElement::Sum(v) => {
                NodeState::Many(v.iter().map(|e| e.principal_state(z)).collect::<Result<_>>()?)
            }
            AnalyticElement::Scaled { inner, .. } => NodeState::Many(vec![inner.principal_state(z)?]),
        })
    }

    fn value_at(&self, st: &NodeState, z: C64) -> C64 {
        match (self, st) {
            (AnalyticElement::Rational(r), _) => r.eval(z),
            (AnalyticElement::LogBranch { prefactor, .. }, NodeState::Log(l)) => poly_eval(prefactor, z) * l,
            (AnalyticElement::Polylog(k), NodeState::Polylog { li, .. }) => li[*k as usize - 1],
            (AnalyticElement::Series { series, .. }, _) => series.eval(z),
            (AnalyticElement::Sum(v), NodeState::Many(s)) => {
                v.iter().zip(s).map(|(e, st)| e.value_at(st, z)).sum()
            }
            (AnalyticElement::Scaled { factor, inner }, NodeState::Many(s)) => factor.eval(z) * inner.value_at(&s[0], z),
            _ => unreachable!("branch state does not match element"),
        }
    }

    /// Values at the panel nodes and the state at the panel end.
    fn advance(&self, st: &NodeState, g: &PanelGeom<'_>) -> (Vec<C64>, NodeState) {
        match (self, st) {
            (AnalyticElement::Rational(_) | AnalyticElement::Series { .. }, _) => {
                (g.pts.iter().map(|&z| self.value_at(st, z)).collect(), NodeState::Plain)
            }
            (AnalyticElement::LogBranch { location, prefactor }, NodeState::Log(l0)) => {
                let (logs, end) = track_logs(*l0, g, |z| 1.0 - z / location);
                let vals = logs.iter().zip(&g.pts).map(|(l, &z)| poly_eval(prefactor, z) * l).collect();
                (vals, NodeState::Log(end))
            }
            (AnalyticElement::Polylog(k), NodeState::Polylog { log1, li }) => {
                let (logs, log_end) = track_logs(*log1, g, |z| 1.0 - z);
                let mut nodes: Vec<C64> = logs.iter().map(|l| -l).collect();
                let mut end = vec![-log_end];
                for &lj in &li[1..*k as usize] {
                    let integrand: Vec<C64> =
                        nodes.iter().zip(g.pts.iter().zip(&g.dpts)).map(|(v, (z, dz))| v * dz / z).collect();
                    let next: Vec<C64> = (0..g.pts.len())
                        .map(|i| lj + g.rule.q[i].iter().zip(&integrand).map(|(q, f)| f * q).sum::<C64>())
                        .collect();
                    end.push(lj + g.rule.w.iter().zip(&integrand).map(|(w, f)| f * w).sum::<C64>());
                    nodes = next;
                }
                (nodes, NodeState::Polylog { log1: log_end, li: end })
            }
            (AnalyticElement::Sum(v), NodeState::Many(s)) => {
                let mut vals = vec![C64::new(0.0, 0.0); g.pts.len()];
                let mut states = Vec::with_capacity(v.len());
                for (e, st) in v.iter().zip(s) {
                    let (vs, ns) = e.advance(st, g);
                    vals.iter_mut().zip(vs).for_each(|(a, b)| *a += b);
                    states.push(ns);
                }
                (vals, NodeState::Many(states))
            }
            (AnalyticElement::Scaled { factor, inner }, NodeState::Many(s)) => {
                let (vs, ns) = inner.advance(&s[0], g);
                let vals = vs.iter().zip(&g.pts).map(|(v, &z)| factor.eval(z) * v).collect();
                (vals, NodeState::Many(vec![ns]))
            }
            _ => unreachable!("branch state does not match element"),
        }
    }
}

/// Continuous logarithm of `w(z)` through the panel nodes and to its end.
fn track_logs(l0: C64, g: &PanelGeom<'_>, w: impl Fn(C64) -> C64) -> (Vec<C64>, C64) {
    let mut prev = l0;
    let follow = |prev: C64, z: C64| {
        let l = w(z).ln();
        let k = ((prev.im - l.im) / TAU).round();
        l + I * (TAU * k)
    };
    let logs = g
        .pts
        .iter()
        .map(|&z| {
            prev = follow(prev, z);
            prev
        })
        .collect();
    (logs, follow(prev, g.end))
}

fn polylog_principal(k: u32, z: C64) -> Result<NodeState> {
    let zero = C64::new(0.0, 0.0);
    let mut st = NodeState::Polylog { log1: zero, li: vec![zero; k as usize] };
    if z == zero {
        return Ok(st);
    }
    if on_ray_cut(z, C64::new(1.0, 0.0)) {
        return Err(ContinuationError::OnBranchCut(z));
    }
    let elem = AnalyticElement::Polylog(k);
    let rule = rule31();
    let len = z.norm();
    let dist = |s: f64| (z * s - 1.0).norm();
    let mut s = 0.0;
    while s < 1.0 {
        let mut ds = (0.5 * dist(s) / len).min(1.0 - s);
        while ds * len > 0.5 * dist(s + ds).min(dist(s)) {
            ds *= 0.5;
        }
        let pts = rule.x.iter().map(|x| z * (s + (x + 1.0) / 2.0 * ds)).collect();
        let dpts = vec![z * (ds / 2.0); rule.x.len()];
        let g = PanelGeom { end: z * (s + ds), pts, dpts, rule };
        st = elem.advance(&st, &g).1;
        s += ds;
        if 1.0 - s < 1e-15 {
            break;
        }
    }
    Ok(st)
}

#[derive(Debug, Clone, PartialEq)]
enum NodeState {
    Plain,
    Log(C64),
    Polylog { log1: C64, li: Vec<C64> },
    Many(Vec<NodeState>),
}

/// An element continued to `point` along some path.
#[derive(Debug, Clone)]
pub struct Continued<'a> {
    element: &'a AnalyticElement,
    state: NodeState,
    point: C64,
}

impl Continued<'_> {
    pub fn point(&self) -> C64 {
        self.point
    }

    pub fn value(&self) -> C64 {
        self.element.value_at(&self.state, self.point)
    }

    /// Net turns of the tracked logarithms relative to their principal values,
    /// one entry per logarithmic singular point.
    pub fn windings(&self) -> Vec<(C64, i64)> {
        fn walk(e: &AnalyticElement, st: &NodeState, z: C64, out: &mut Vec<(C64, i64)>) {
            let turns = |l: &C64, w: C64| ((l.im - w.ln().im) / TAU).round() as i64;
            match (e, st) {
                (AnalyticElement::LogBranch { location, .. }, NodeState::Log(l)) => {
                    out.push((*location, turns(l, 1.0 - z / location)))
                }
                (AnalyticElement::Polylog(_), NodeState::Polylog { log1, .. }) => {
                    out.push((C64::new(1.0, 0.0), turns(log1, 1.0 - z)))
                }
                (AnalyticElement::Sum(v), NodeState::Many(s)) => {
                    v.iter().zip(s).for_each(|(e, st)| walk(e, st, z, out))
                }
                (AnalyticElement::Scaled { inner, .. }, NodeState::Many(s)) => walk(inner, &s[0], z, out),
                _ => {}
            }
        }
        let mut out = Vec::new();
        walk(self.element, &self.state, self.point, &mut out);
        out
    }

    /// Continues along consecutive segments starting at the current point;
    /// returns the value at the end.
    pub fn continue_along(&mut self, path: &[PathSegment], clearance: f64) -> Result<C64> {
        let e = self.element;
        check_clearance(path, &avoid_points(e), clearance)?;
        for seg in path {
            if (seg.start() - self.point).norm() > 1e-12 {
                return Err(ContinuationError::InvalidContour("path does not start at the current point".into()));
            }
            let len = seg.length();
            let mut s = 0.0;
            while s < 1.0 {
                let ds = panel_step(seg, s, len, |z| e.singular_distance(z));
                let g = panel_geom(seg, s, s + ds, rule31(), |z| z, |_, dz| dz);
                self.state = e.advance(&self.state, &g).1;
                s += ds;
                if 1.0 - s < 1e-15 {
                    break;
                }
            }
            self.point = seg.end();
        }
        Ok(self.value())
    }
}

/// Continues the principal branch at `path[0].start()` along `path`.
pub fn continue_along<'a>(
    e: &'a AnalyticElement,
    path: &[PathSegment],
    clearance: f64,
) -> Result<(C64, Continued<'a>)> {
    let start = path
        .first()
        .ok_or_else(|| ContinuationError::InvalidContour("empty path".into()))?
        .start();
    let mut c = e.at(start)?;
    let v = c.continue_along(path, clearance)?;
    Ok((v, c))
}

fn avoid_points(e: &AnalyticElement) -> Vec<C64> {
    let mut p = e.singular_points();
    p.push(C64::new(0.0, 0.0));
    p
}

fn check_clearance(path: &[PathSegment], points: &[C64], clearance: f64) -> Result<()> {
    for seg in path {
        for &p in points {
            let d = seg.distance_to(p);
            if d < clearance || d == 0.0 {
                return Err(ContinuationError::PathTooCloseToSingularity { point: p, distance: d, clearance });
            }
        }
    }
    Ok(())
}

/// Largest parameter step from `s` whose panel length is at most half the
/// distance to the nearest singular point at either end.
fn panel_step(seg: &PathSegment, s: f64, len: f64, dist: impl Fn(C64) -> f64) -> f64 {
    let d0 = dist(seg.point(s));
    let mut ds = (0.5 * d0 / len).min(1.0 - s);
    let mut guard = 0;
    while ds * len > 0.5 * d0.min(dist(seg.point(s + ds))).min(dist(seg.point(s + ds / 2.0))) && guard < 200 {
        ds *= 0.5;
        guard += 1;
    }
    ds
}

fn panel_geom<'r>(
    seg: &PathSegment,
    a: f64,
    b: f64,
    rule: &'r Rule,
    map: impl Fn(C64) -> C64,
    dmap: impl Fn(C64, C64) -> C64,
) -> PanelGeom<'r> {
    let half = (b - a) / 2.0;
    let mut pts = Vec::with_capacity(rule.x.len());
    let mut dpts = Vec::with_capacity(rule.x.len());
    for x in &rule.x {
        let s = a + (x + 1.0) * half;
        let u = seg.point(s);
        pts.push(map(u));
        dpts.push(dmap(u, seg.tangent(s) * half));
    }
    PanelGeom { end: map(seg.point(b)), pts, dpts, rule }
}

// ---------------------------------------------------------------------------
// Convolution integrals

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Absolute tolerance on each contour integral.
    pub tol: f64,
    /// Node budget for the trapezoid rule on circles.
    pub max_nodes: usize,
    /// Maximum bisection depth of a Gauss–Legendre panel.
    pub max_depth: u32,
    /// Minimal distance between the path and any singular point.
    pub clearance: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions { tol: 1e-9, max_nodes: 1 << 17, max_depth: 40, clearance: 0.0 }
    }
}

/// `(1/2πi)∮ F(u)G(z/u) du/u` or `−(1/2πi)∮ F′(u)G(z/u) du`.
struct Convolution<'a> {
    kind: ProductKind,
    f: AnalyticElement,
    g: &'a AnalyticElement,
    z: C64,
}

/// Relative accuracy below which a panel comparison is treated as round-off;
/// the polylogarithm recursion loses a few digits to cancellation.
const ROUNDOFF: f64 = 1e-12;

/// The same for the trapezoid sum, relative to its absolute-value sum.
const TRAPEZOID_ROUNDOFF: f64 = 1e-14;

#[derive(Default)]
struct QuadStats {
    trapezoid_nodes: usize,
    panels: usize,
}

impl<'a> Convolution<'a> {
    fn new(kind: ProductKind, f: &AnalyticElement, g: &'a AnalyticElement, z: C64) -> Self {
        let f = match kind {
            ProductKind::Hadamard => f.clone(),
            ProductKind::Ene => f.derivative(),
        };
        Convolution { kind, f, g, z }
    }

    fn prefactor(&self) -> C64 {
        match self.kind {
            ProductKind::Hadamard => 1.0 / (TAU * I),
            ProductKind::Ene => -1.0 / (TAU * I),
        }
    }

    fn kernel(&self, fu: C64, gw: C64, u: C64) -> C64 {
        match self.kind {
            ProductKind::Hadamard => fu * gw / u,
            ProductKind::Ene => fu * gw,
        }
    }

    fn avoid_points(&self) -> Vec<C64> {
        let mut p = avoid_points(&self.f);
        p.extend(self.g.singular_points().into_iter().map(|b| self.z / b));
        p
    }

    fn allowed_distance(&self, u: C64) -> f64 {
        let w = self.z / u;
        let dw_du = (self.z / (u * u)).norm();
        self.f.singular_distance(u).min(self.g.singular_distance(w) / dw_du)
    }

    /// Integral over one panel, its absolute-value sum (round-off scale) and
    /// the end states.
    fn panel(&self, seg: &PathSegment, a: f64, b: f64, rule: &Rule, st: &(NodeState, NodeState)) -> (C64, f64, (NodeState, NodeState)) {
        let z = self.z;
        let gu = panel_geom(seg, a, b, rule, |u| u, |_, du| du);
        let gw = panel_geom(seg, a, b, rule, |u| z / u, |u, du| -z * du / (u * u));
        let (fv, fe) = self.f.advance(&st.0, &gu);
        let (gv, ge) = self.g.advance(&st.1, &gw);
        let mut acc = C64::new(0.0, 0.0);
        let mut scale = 0.0;
        for m in 0..rule.x.len() {
            let t = self.kernel(fv[m], gv[m], gu.pts[m]) * gu.dpts[m] * rule.w[m];
            acc += t;
            scale += t.norm();
        }
        (acc, scale, (fe, ge))
    }

    #[allow(clippy::too_many_arguments)]
    fn adaptive(
        &self,
        seg: &PathSegment,
        a: f64,
        b: f64,
        st: &mut (NodeState, NodeState),
        tol: f64,
        depth: u32,
        opts: &QuadratureOptions,
        stats: &mut QuadStats,
    ) -> Result<C64> {
        let (i15, _, _) = self.panel(seg, a, b, rule15(), st);
        let (i31, scale, end) = self.panel(seg, a, b, rule31(), st);
        let err = (i31 - i15).norm();
        if err <= tol.max(ROUNDOFF * scale) {
            *st = end;
            stats.panels += 1;
            return Ok(i31);
        }
        if depth >= opts.max_depth {
            return Err(ContinuationError::QuadratureNotConverged { estimate: err });
        }
        let mid = 0.5 * (a + b);
        let left = self.adaptive(seg, a, mid, st, tol / 2.0, depth + 1, opts, stats)?;
        let right = self.adaptive(seg, mid, b, st, tol / 2.0, depth + 1, opts, stats)?;
        Ok(left + right)
    }

    /// Integral of the kernel along `path` with both factors continued from
    /// their principal branches at the start.
    fn tracked(&self, path: &[PathSegment], opts: &QuadratureOptions, stats: &mut QuadStats) -> Result<C64> {
        check_clearance(path, &self.avoid_points(), opts.clearance)?;
        let u0 = path[0].start();
        let mut st = (self.f.principal_state(u0)?, self.g.principal_state(self.z / u0)?);
        let total: f64 = path.iter().map(PathSegment::length).sum();
        let mut acc = C64::new(0.0, 0.0);
        for seg in path {
            let len = seg.length();
            let mut s = 0.0;
            while s < 1.0 {
                let ds = panel_step(seg, s, len, |u| self.allowed_distance(u));
                let tol = opts.tol * ds * len / total;
                acc += self.adaptive(seg, s, s + ds, &mut st, tol, 0, opts, stats)?;
                s += ds;
                if 1.0 - s < 1e-15 {
                    break;
                }
            }
        }
        Ok(acc)
    }

    /// `∮_{|u|=r}` of the kernel on principal branches, trapezoid rule with
    /// node doubling.
    fn trapezoid(&self, r: f64, orientation: f64, opts: &QuadratureOptions, stats: &mut QuadStats) -> Result<C64> {
        let sample = |theta: f64| -> Result<C64> {
            let u = C64::from_polar(r, theta);
            let fu = self.f.eval_principal(u)?;
            let gw = self.g.eval_principal(self.z / u)?;
            Ok(self.kernel(fu, gw, u) * I * u)
        };
        let mut n = 16usize;
        let mut sum = C64::new(0.0, 0.0);
        let mut scale = 0.0;
        for j in 0..n {
            let v = sample(TAU * j as f64 / n as f64)?;
            sum += v;
            scale += v.norm();
        }
        let mut prev = sum * (TAU / n as f64);
        loop {
            if 2 * n > opts.max_nodes {
                stats.trapezoid_nodes = stats.trapezoid_nodes.max(n);
                return Err(ContinuationError::QuadratureNotConverged { estimate: f64::NAN });
            }
            for j in 0..n {
                let v = sample(TAU * (2 * j + 1) as f64 / (2 * n) as f64)?;
                sum += v;
                scale += v.norm();
            }
            n *= 2;
            let cur = sum * (TAU / n as f64);
            let err = (cur - prev).norm();
            if err <= opts.tol.max(TRAPEZOID_ROUNDOFF * scale * TAU / n as f64) && n >= 64 {
                stats.trapezoid_nodes = stats.trapezoid_nodes.max(n);
                return Ok(cur * orientation);
            }
            if 2 * n > opts.max_nodes {
                stats.trapezoid_nodes = stats.trapezoid_nodes.max(n);
                return Err(ContinuationError::QuadratureNotConverged { estimate: err });
            }
            prev = cur;
        }
    }

    fn contour(&self, contour: &ContourSpec, opts: &QuadratureOptions, stats: &mut QuadStats) -> Result<C64> {
        let segs = contour.segments();
        if segs.len() == 1 && segs[0].is_origin_circle() {
            if let PathSegment::Arc { radius, theta_start, theta_end, .. } = segs[0] {
                check_clearance(segs, &self.avoid_points(), opts.clearance)?;
                return self.trapezoid(radius, (theta_end - theta_start).signum(), opts, stats);
            }
        }
        self.tracked(segs, opts, stats)
    }
}

fn check_admissible_circle(f: &AnalyticElement, g: &AnalyticElement, z: C64, contour: &ContourSpec) -> Result<()> {
    let segs = contour.segments();
    if let [seg @ PathSegment::Arc { radius, .. }] = segs {
        if seg.is_origin_circle() {
            let inner = g.singular_points().iter().map(|b| (z / b).norm()).fold(0.0, f64::max);
            let outer = f.singular_points().iter().map(|a| a.norm()).fold(f64::INFINITY, f64::min);
            if !(inner < *radius && *radius < outer) {
                return Err(ContinuationError::NotAdmissible(format!(
                    "radius {radius} does not separate |z/β| ≤ {inner} from |α| ≥ {outer}"
                )));
            }
        }
    }
    Ok(())
}

/// `F ⊙ G (z) = (1/2πi)∮ F(u) G(z/u) du/u`.
pub fn pincherle_eval(f: &AnalyticElement, g: &AnalyticElement, z: C64, contour: &ContourSpec, opts: &QuadratureOptions) -> Result<C64> {
    check_admissible_circle(f, g, z, contour)?;
    let conv = Convolution::new(ProductKind::Hadamard, f, g, z);
    Ok(conv.prefactor() * conv.contour(contour, opts, &mut QuadStats::default())?)
}

/// `F ⋆_e G (z) = −(1/2πi)∮ F′(u) G(z/u) du`.
pub fn ene_pincherle_eval(f: &AnalyticElement, g: &AnalyticElement, z: C64, contour: &ContourSpec, opts: &QuadratureOptions) -> Result<C64> {
    check_admissible_circle(f, g, z, contour)?;
    let conv = Convolution::new(ProductKind::Ene, f, g, z);
    Ok(conv.prefactor() * conv.contour(contour, opts, &mut QuadStats::default())?)
}

/// Trapezoid approximation with exactly `n` nodes on `|u| = r`, for
/// convergence studies.
pub fn pincherle_trapezoid_fixed(f: &AnalyticElement, g: &AnalyticElement, z: C64, r: f64, n: usize) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..n {
        let u = C64::from_polar(r, TAU * j as f64 / n as f64);
        acc += f.eval_principal(u)? * g.eval_principal(z / u)?;
    }
    Ok(acc / n as f64)
}

// ---------------------------------------------------------------------------
// Train track

#[derive(Debug, Clone, PartialEq)]
pub struct TrainTrack {
    pub eta: ContourSpec,
    pub eta_hat: ContourSpec,
    pub radius: f64,
    pub epsilon: f64,
    pub base_points: Vec<C64>,
}

/// Line to within `eps` of `p`, a full circle around `p`, and back to `a`.
fn lollipop(a: C64, p: C64, eps: f64, positive: bool) -> Result<Vec<PathSegment>> {
    let dir = (a - p) / (a - p).norm();
    let q = p + dir * eps;
    let th = dir.arg();
    let sweep = if positive { TAU } else { -TAU };
    Ok(vec![PathSegment::line(a, q)?, PathSegment::arc(p, eps, th, th + sweep)?, PathSegment::line(q, a)?])
}

/// Base circle `η` of radius `r` and its deformation `η̂`, which at the base
/// point `a` of each pair `(α, β)` inserts the loop word
/// `x · y · x⁻¹ · y⁻¹` with `x` around `α` and `y` around `z₀/β`.
pub fn build_traintrack(z0: C64, pairs: &[(C64, C64)], r: f64, eps: f64) -> Result<TrainTrack> {
    let infeasible = |m: String| Err(ContinuationError::GeometryInfeasible(m));
    if r <= 0.0 || eps <= 0.0 {
        return infeasible("radius and ε must be positive".into());
    }
    let mut marked = vec![C64::new(0.0, 0.0)];
    let mut loops = Vec::new();
    for &(alpha, beta) in pairs {
        let inner = z0 / beta;
        if alpha.norm() <= r || inner.norm() >= r {
            return infeasible(format!("circle |u| = {r} does not separate {alpha} from {inner}"));
        }
        // |inner + t (α − inner)| = r on (0, 1)
        let d = alpha - inner;
        let (qa, qb, qc) = (d.norm_sqr(), 2.0 * (inner * d.conj()).re, inner.norm_sqr() - r * r);
        let t = (-qb + (qb * qb - 4.0 * qa * qc).sqrt()) / (2.0 * qa);
        loops.push((inner + d * t, alpha, inner));
        marked.push(alpha);
        marked.push(inner);
    }
    let marked = {
        let mut m = marked;
        m.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        m.dedup_by(|a, b| (*a - *b).norm() == 0.0);
        m
    };
    let mut sep = f64::INFINITY;
    for i in 0..marked.len() {
        for j in 0..i {
            sep = sep.min((marked[i] - marked[j]).norm());
        }
    }
    for &(a, alpha, inner) in &loops {
        if (alpha - inner).norm() < 1e-12 {
            return infeasible(format!("marked points coincide at {alpha}"));
        }
        let _ = a;
    }
    if pairs.iter().any(|&(alpha, beta)| (alpha - z0 / beta).norm() < 1e-12) {
        return infeasible("marked points coincide".into());
    }
    if marked.len() > 1 && eps >= sep / 2.0 {
        return infeasible(format!("ε = {eps} is not below half the marked-point separation {sep}"));
    }

    loops.sort_by(|x, y| x.0.arg().total_cmp(&y.0.arg()));
    for w in loops.windows(2) {
        if (w[0].0 - w[1].0).norm() < 1e-12 {
            return infeasible("two pairs share a base point".into());
        }
    }
    let theta0 = loops.first().map_or(0.0, |l| l.0.arg());
    let origin = C64::new(0.0, 0.0);
    let eta = ContourSpec::new(vec![PathSegment::circle(origin, r, theta0)?], true)?;
    let mut segs = Vec::new();
    for (k, &(a, alpha, inner)) in loops.iter().enumerate() {
        segs.extend(lollipop(a, alpha, eps, true)?);
        segs.extend(lollipop(a, inner, eps, true)?);
        segs.extend(lollipop(a, alpha, eps, false)?);
        segs.extend(lollipop(a, inner, eps, false)?);
        let th_a = a.arg();
        let th_next = match loops.get(k + 1) {
            Some(n) => n.0.arg(),
            None => theta0 + TAU,
        };
        segs.push(PathSegment::arc(origin, r, th_a, th_next)?);
    }
    if segs.is_empty() {
        segs.push(PathSegment::circle(origin, r, theta0)?);
    }
    let eta_hat = ContourSpec::new(segs, true)?;
    Ok(TrainTrack { eta, eta_hat, radius: r, epsilon: eps, base_points: loops.iter().map(|l| l.0).collect() })
}

// ---------------------------------------------------------------------------
// Monodromy measurement

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub quad: QuadratureOptions,
    /// `ε` as a fraction of the minimal marked-point separation.
    pub eps_factor: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { quad: QuadratureOptions::default(), eps_factor: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumericMonodromy {
    pub value: C64,
    pub radius: f64,
    pub epsilon: f64,
    pub pairs: Vec<(C64, C64)>,
    pub trapezoid_nodes: usize,
    pub panels: usize,
}

/// `Δ_γ(F ⊙ G)(z₀)` or `Δ_γ(F ⋆_e G)(z₀)` as `I(η̂) − I(η)`.
pub fn monodromy_numeric(
    product: ProductKind,
    f: &AnalyticElement,
    g: &AnalyticElement,
    gamma: C64,
    z0: C64,
    opts: &OracleOptions,
) -> Result<NumericMonodromy> {
    let fa = f.singular_points();
    let gb = g.singular_points();
    let tol_eq = 1e-9 * gamma.norm().max(1.0);
    let pairs: Vec<(C64, C64)> = fa
        .iter()
        .flat_map(|&a| gb.iter().map(move |&b| (a, b)))
        .filter(|&(a, b)| (a * b - gamma).norm() <= tol_eq)
        .collect();

    let inner = gb.iter().map(|b| (z0 / b).norm()).fold(0.0, f64::max);
    let outer = fa.iter().map(|a| a.norm()).fold(f64::INFINITY, f64::min);
    let r = match (inner > 0.0, outer.is_finite()) {
        (true, true) => (inner * outer).sqrt(),
        (true, false) => 2.0 * inner,
        (false, true) => 0.5 * outer,
        (false, false) => 1.0,
    };
    if !(inner < r && r < outer) {
        return Err(ContinuationError::GeometryInfeasible(format!(
            "no circle separates |z₀/β| ≤ {inner} from |α| ≥ {outer}"
        )));
    }
    let mut marked = vec![C64::new(0.0, 0.0)];
    marked.extend(fa.iter().copied());
    marked.extend(gb.iter().map(|b| z0 / b));
    let mut sep = f64::INFINITY;
    for i in 0..marked.len() {
        for j in 0..i {
            sep = sep.min((marked[i] - marked[j]).norm());
        }
    }
    if sep < 1e-12 {
        return Err(ContinuationError::GeometryInfeasible("marked points coincide".into()));
    }
    let eps = if sep.is_finite() { opts.eps_factor * sep } else { opts.eps_factor * r };
    let track = build_traintrack(z0, &pairs, r, eps)?;

    let conv = Convolution::new(product, f, g, z0);
    let quad = QuadratureOptions { clearance: eps / 2.0, ..opts.quad };
    let mut stats = QuadStats::default();
    let hat = conv.tracked(track.eta_hat.segments(), &quad, &mut stats)?;
    let base = conv.contour(&track.eta, &quad, &mut stats)?;
    Ok(NumericMonodromy {
        value: conv.prefactor() * (hat - base),
        radius: r,
        epsilon: eps,
        pairs,
        trapezoid_nodes: stats.trapezoid_nodes,
        panels: stats.panels,
    })
}

// ---------------------------------------------------------------------------
// Dual-engine comparison

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub z: C64,
    pub winding: i64,
    pub symbolic: C64,
    pub numeric: C64,
    pub abs_error: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub product: ProductKind,
    pub gamma: GaussianRational,
    pub rows: Vec<OracleRow>,
    pub max_abs_error: f64,
    pub max_rel_error: f64,
    pub tolerance: f64,
    pub nodes: usize,
}

impl OracleReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_abs_error <= tol
    }
}

/// `count` points `center + radius·e^{iθ}` with `θ` spread over `[0.6π, 1.4π]`,
/// the part of the circle inside the unit disk when `center = 1`, `radius = 0.1`.
pub fn sample_points(center: C64, radius: f64, count: usize) -> Vec<C64> {
    (0..count)
        .map(|j| {
            let t = if count == 1 { 0.5 } else { j as f64 / (count - 1) as f64 };
            center + C64::from_polar(radius, PI * (0.6 + 0.8 * t))
        })
        .collect()
}

/// Evaluates the symbolic monodromy at each sample and compares it with the
/// contour measurement.
#[allow(clippy::too_many_arguments)]
pub fn crosscheck(
    product: ProductKind,
    f_spec: &FunctionSpec,
    f: &AnalyticElement,
    g_spec: &FunctionSpec,
    g: &AnalyticElement,
    gamma: &GaussianRational,
    samples: &[C64],
    windings: &[i64],
    opts: &OracleOptions,
) -> Result<OracleReport> {
    let symbolic = match product {
        ProductKind::Hadamard => monodromy::hadamard_monodromy_general(f_spec, g_spec, gamma)?,
        ProductKind::Ene => monodromy::ene_monodromy_general(f_spec, g_spec, gamma)?,
    };
    compare(product, &symbolic.value, f, g, gamma, samples, windings, opts)
}

/// Compares a given symbolic monodromy with the contour measurement.
#[allow(clippy::too_many_arguments)]
pub fn compare(
    product: ProductKind,
    symbolic: &LogLaurentPoly,
    f: &AnalyticElement,
    g: &AnalyticElement,
    gamma: &GaussianRational,
    samples: &[C64],
    windings: &[i64],
    opts: &OracleOptions,
) -> Result<OracleReport> {
    let assignment = Assignment::standard();
    let mut rows = Vec::new();
    let mut nodes = 0;
    for &z in samples {
        for &w in windings {
            if w != 0 {
                return Err(ContinuationError::UnsupportedWinding(w));
            }
            let s = symbolic
                .eval(BranchPoint { z, winding: w }, &assignment)
                .map_err(|e| ContinuationError::Evaluation(e.to_string()))?;
            let n = monodromy_numeric(product, f, g, gamma.to_c64(), z, opts)?;
            nodes = nodes.max(n.trapezoid_nodes);
            let abs_error = (s - n.value).norm();
            let rel_error = if s.norm() > 0.0 { abs_error / s.norm() } else { abs_error };
            rows.push(OracleRow { z, winding: w, symbolic: s, numeric: n.value, abs_error, rel_error });
        }
    }
    let max_abs_error = rows.iter().map(|r| r.abs_error).fold(0.0, f64::max);
    let max_rel_error = rows.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    Ok(OracleReport {
        product,
        gamma: gamma.clone(),
        rows,
        max_abs_error,
        max_rel_error,
        tolerance: opts.quad.tol,
        nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::polylog_series;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn roots_of_small_polynomials() {
        let r = poly_roots(&[c(2.0, 0.0), c(-3.0, 0.0), c(1.0, 0.0)]);
        let mut re: Vec<f64> = r.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        assert!((re[0] - 1.0).abs() < 1e-12 && (re[1] - 2.0).abs() < 1e-12);
        assert!(poly_roots(&[c(1.0, 0.0)]).is_empty());
        let k = AnalyticElement::neg_koebe().singular_points();
        assert_eq!(k.len(), 1);
        assert!(close(k[0], c(1.0, 0.0), 1e-6));
    }

    #[test]
    fn integration_matrix_is_exact_on_polynomials() {
        let r = rule15();
        // ∫_{−1}^{x} 3t² dt = x³ + 1
        for (i, &x) in r.x.iter().enumerate() {
            let v: f64 = r.q[i].iter().zip(&r.x).map(|(q, t)| q * 3.0 * t * t).sum();
            assert!((v - (x * x * x + 1.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn principal_polylog_matches_closed_forms_and_series() {
        let li2 = AnalyticElement::Polylog(2);
        let ln2 = 2f64.ln();
        assert!(close(li2.eval_principal(c(-1.0, 0.0)).unwrap(), c(-PI * PI / 12.0, 0.0), 1e-13));
        assert!(close(li2.eval_principal(c(0.5, 0.0)).unwrap(), c(PI * PI / 12.0 - ln2 * ln2 / 2.0, 0.0), 1e-13));
        let li1 = AnalyticElement::Polylog(1);
        let z = c(0.3, -0.7);
        assert!(close(li1.eval_principal(z).unwrap(), -(1.0 - z).ln(), 1e-15));
        for k in 1..5 {
            let s = polylog_series::<C64>(k, 600).unwrap();
            for z in [c(0.5, 0.3), c(-0.8, 0.1), c(0.1, -0.85)] {
                let e = AnalyticElement::Polylog(k).eval_principal(z).unwrap();
                assert!(close(e, s.eval(z), 1e-12), "k={k} z={z}");
            }
        }
        assert!(matches!(li2.eval_principal(c(2.0, 0.0)), Err(ContinuationError::OnBranchCut(_))));
    }

    #[test]
    fn log_branch_gains_two_pi_i_around_its_point() {
        let e = AnalyticElement::log_branch(c(1.0, 0.0), vec![c(1.0, 0.0)]).unwrap();
        let path = [PathSegment::circle(c(1.0, 0.0), 0.5, PI).unwrap()];
        let before = e.eval_principal(c(0.5, 0.0)).unwrap();
        let (after, cont) = continue_along(&e, &path, 1e-3).unwrap();
        assert!(close(after - before, c(0.0, TAU), 1e-12));
        assert_eq!(cont.windings(), vec![(c(1.0, 0.0), 1)]);
    }

    #[test]
    fn rational_is_single_valued() {
        let e = AnalyticElement::neg_koebe();
        let path = [PathSegment::circle(c(1.0, 0.0), 0.5, 2.5).unwrap()];
        let start = path[0].start();
        let (after, _) = continue_along(&e, &path, 1e-3).unwrap();
        assert!(close(after, e.eval_principal(start).unwrap(), 1e-13));
    }

    #[test]
    fn dilogarithm_loop_around_one() {
        let e = AnalyticElement::Polylog(2);
        let path = [PathSegment::circle(c(1.0, 0.0), 0.5, PI).unwrap()];
        let before = e.eval_principal(c(0.5, 0.0)).unwrap();
        let (after, _) = continue_along(&e, &path, 1e-3).unwrap();
        let expected = -TAU * I * 0.5f64.ln();
        assert!(close(after - before, expected, 1e-8), "{}", after - before);
    }

    #[test]
    fn null_homotopic_loops_return_to_start() {
        // loop around the origin only: every element here is analytic inside
        for e in [AnalyticElement::Polylog(3), AnalyticElement::log_branch(c(2.0, 1.0), vec![c(0.0, 1.0), c(1.0, 0.0)]).unwrap()] {
            let path = [PathSegment::circle(c(0.0, 0.0), 0.5, 0.3).unwrap()];
            let (after, _) = continue_along(&e, &path, 1e-3).unwrap();
            assert!(close(after, e.eval_principal(path[0].start()).unwrap(), 1e-10));
        }
    }

    #[test]
    fn clearance_is_enforced() {
        let e = AnalyticElement::Polylog(2);
        let path = [PathSegment::line(c(0.5, 0.0), c(0.5, 0.0) + c(0.499, 0.0)).unwrap()];
        let err = continue_along(&e, &path, 0.01).unwrap_err();
        assert!(matches!(err, ContinuationError::PathTooCloseToSingularity { .. }));
    }

    #[test]
    fn pincherle_geometric() {
        let g = AnalyticElement::geometric(c(1.0, 0.0));
        let contour = ContourSpec::circle(0.6).unwrap();
        let v = pincherle_eval(&g, &g, c(0.3, 0.0), &contour, &QuadratureOptions::default()).unwrap();
        assert!(close(v, c(1.0 / 0.7, 0.0), 1e-10));
    }

    #[test]
    fn pincherle_polylogs() {
        let li1 = AnalyticElement::Polylog(1);
        let contour = ContourSpec::circle(0.5).unwrap();
        let z = c(0.25, 0.0);
        let opts = QuadratureOptions::default();
        let v = pincherle_eval(&li1, &li1, z, &contour, &opts).unwrap();
        let s = polylog_series::<C64>(2, 400).unwrap().eval(z);
        assert!(close(v, s, 1e-9));
        // Li_1 ⋆_e Li_1 = −Li_1
        let e = ene_pincherle_eval(&li1, &li1, z, &contour, &opts).unwrap();
        assert!(close(e, (1.0 - z).ln(), 1e-9), "{e}");
        // F ⋆_e G = −K₀ ⊙ (F ⊙ G)
        let k = pincherle_eval(&AnalyticElement::neg_koebe(), &AnalyticElement::Polylog(2), z, &contour, &opts).unwrap();
        assert!(close(e, k, 1e-8));
        let constant = AnalyticElement::constant(c(3.0, 0.0));
        assert!(ene_pincherle_eval(&constant, &li1, z, &contour, &opts).unwrap().norm() < 1e-14);
        let bad = ContourSpec::circle(0.2).unwrap();
        assert!(matches!(pincherle_eval(&li1, &li1, z, &bad, &opts), Err(ContinuationError::NotAdmissible(_))));
    }

    #[test]
    fn pincherle_on_a_tracked_contour_agrees_with_trapezoid() {
        let li1 = AnalyticElement::Polylog(1);
        let z = c(0.2, 0.1);
        let opts = QuadratureOptions::default();
        let circle = ContourSpec::circle(0.5).unwrap();
        let square = ContourSpec::new(
            vec![
                PathSegment::line(c(0.5, -0.5), c(0.5, 0.5)).unwrap(),
                PathSegment::line(c(0.5, 0.5), c(-0.5, 0.5)).unwrap(),
                PathSegment::line(c(-0.5, 0.5), c(-0.5, -0.5)).unwrap(),
                PathSegment::line(c(-0.5, -0.5), c(0.5, -0.5)).unwrap(),
            ],
            true,
        )
        .unwrap();
        let a = pincherle_eval(&li1, &li1, z, &circle, &opts).unwrap();
        let b = pincherle_eval(&li1, &li1, z, &square, &opts).unwrap();
        assert!(close(a, b, 1e-9));
    }

    #[test]
    fn trapezoid_converges_spectrally() {
        let g = AnalyticElement::geometric(c(1.0, 0.0));
        let z = c(0.3, 0.2);
        let exact = 1.0 / (1.0 - z);
        let mut prev = f64::INFINITY;
        // geometric rate (|z|/r)^n with r = 0.6 ≈ √|z|
        for n in [8, 16, 32] {
            let err = (pincherle_trapezoid_fixed(&g, &g, z, 0.6, n).unwrap() - exact).norm();
            if prev > 1e-13 {
                assert!(err < prev / 10.0 || err < 1e-13, "n={n} err={err} prev={prev}");
            }
            prev = err;
        }
    }

    #[test]
    fn traintrack_shapes() {
        let z0 = c(0.9, 0.0);
        let tt = build_traintrack(z0, &[], 0.5, 0.01).unwrap();
        assert_eq!(tt.eta, tt.eta_hat);
        let tt = build_traintrack(z0, &[(c(1.0, 0.0), c(1.0, 0.0))], 0.9f64.sqrt(), 0.01).unwrap();
        assert_eq!(tt.eta_hat.segments().len(), 13);
        assert!((tt.base_points[0] - c(0.9f64.sqrt(), 0.0)).norm() < 1e-12);
        let err = build_traintrack(c(1.0, 0.0), &[(c(1.0, 0.0), c(1.0, 0.0))], 0.99, 0.001).unwrap_err();
        assert!(matches!(err, ContinuationError::GeometryInfeasible(_)));
    }

    #[test]
    fn numeric_monodromy_of_polylog_pair() {
        let li1 = AnalyticElement::Polylog(1);
        let z0 = c(0.9, 0.0);
        let n = monodromy_numeric(ProductKind::Hadamard, &li1, &li1, c(1.0, 0.0), z0, &OracleOptions::default()).unwrap();
        let expected = -TAU * I * 0.9f64.ln();
        assert!(close(n.value, expected, 1e-7), "{} vs {}", n.value, expected);
    }

    #[test]
    fn numeric_monodromy_of_rational_pair_vanishes() {
        let g = AnalyticElement::geometric(c(1.0, 0.0));
        let f = AnalyticElement::rational(vec![c(1.0, 0.0), c(0.5, 0.0)], vec![c(1.0, 0.0), c(-0.5, 0.0)]).unwrap();
        let opts = OracleOptions { quad: QuadratureOptions { tol: 1e-11, ..Default::default() }, ..Default::default() };
        for kind in [ProductKind::Hadamard, ProductKind::Ene] {
            let n = monodromy_numeric(kind, &f, &g, c(2.0, 0.0), c(0.9, 0.3), &opts).unwrap();
            assert_eq!(n.pairs.len(), 1);
            assert!(n.value.norm() < 1e-10, "{kind}: {}", n.value);
        }
        // double poles on both sides, default tolerance
        let k = AnalyticElement::neg_koebe();
        for kind in [ProductKind::Hadamard, ProductKind::Ene] {
            let n = monodromy_numeric(kind, &k, &k, c(1.0, 0.0), c(0.9, 0.05), &OracleOptions::default()).unwrap();
            assert!(n.value.norm() < 1e-8, "{kind}: {}", n.value);
        }
    }

    #[test]
    fn numeric_koebe_against_dilogarithm() {
        // Δ₁(−K₀ ⊙ Li₂)(z) = −z (Δ₁Li₂)′(z) = 2πi
        let n = monodromy_numeric(
            ProductKind::Hadamard,
            &AnalyticElement::neg_koebe(),
            &AnalyticElement::Polylog(2),
            c(1.0, 0.0),
            c(0.9, 0.0),
            &OracleOptions::default(),
        )
        .unwrap();
        assert!(close(n.value, c(0.0, TAU), 1e-7), "{}", n.value);
    }
    #[test]
    fn multiple_poles_are_resolved_to_full_precision() {
        let r = RationalFn::new(vec![c(1.0, 0.0)], vec![c(1.0, 0.0), c(-4.0, 0.0), c(6.0, 0.0), c(-4.0, 0.0), c(1.0, 0.0)])
            .unwrap();
        assert_eq!(r.poles().len(), 1);
        assert_eq!(r.poles()[0].1, 4);
        assert!(close(r.poles()[0].0, c(1.0, 0.0), 1e-14));
        let z = c(1.0 + 1e-3, 1e-3);
        let exact = 1.0 / (1.0 - z).powu(4);
        assert!((r.eval(z) - exact).norm() <= 1e-13 * exact.norm());
    }

    #[test]
    fn numeric_monodromy_is_stable_under_shrinking_epsilon() {
        let li1 = AnalyticElement::Polylog(1);
        let li2 = AnalyticElement::Polylog(2);
        let z0 = c(0.92, -0.04);
        let mut values = Vec::new();
        for eps_factor in [0.1, 0.05, 0.025] {
            let opts = OracleOptions { eps_factor, ..Default::default() };
            values.push(monodromy_numeric(ProductKind::Ene, &li1, &li2, c(1.0, 0.0), z0, &opts).unwrap().value);
        }
        for v in &values[1..] {
            assert!(close(*v, values[0], 1e-8), "{v} vs {}", values[0]);
        }
    }

    #[test]
    fn crosscheck_polylog_pairs() {
        let gamma = GaussianRational::from_int(1);
        let samples = sample_points(c(1.0, 0.0), 0.1, 3);
        for (k, l) in [(1, 1), (1, 2), (2, 2)] {
            for kind in [ProductKind::Hadamard, ProductKind::Ene] {
                let report = crosscheck(
                    kind,
                    &FunctionSpec::polylog(k),
                    &AnalyticElement::Polylog(k),
                    &FunctionSpec::polylog(l),
                    &AnalyticElement::Polylog(l),
                    &gamma,
                    &samples,
                    &[0],
                    &OracleOptions::default(),
                )
                .unwrap();
                assert!(report.passes(1e-7), "{kind} Li{k} Li{l}: {}", report.max_abs_error);
            }
        }
        let err = crosscheck(
            ProductKind::Ene,
            &FunctionSpec::polylog(1),
            &AnalyticElement::Polylog(1),
            &FunctionSpec::polylog(1),
            &AnalyticElement::Polylog(1),
            &gamma,
            &samples,
            &[1],
            &OracleOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, ContinuationError::UnsupportedWinding(1)));
    }
}
