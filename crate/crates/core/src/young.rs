//! Young functions: evaluation, right derivatives, conjugation, the linear-growth
//! truncation `Φ_r`, Luxemburg norms, and the convex body in ℝⁿ⁺¹ whose support
//! function represents `Φ` over a convex body `K`.
//!
//! Values live in `[0, ∞]`; `f64::INFINITY` is a legitimate result of [`YoungFunction::eval`].

use crate::convex::{Body, ConvexBody, MEMBERSHIP_SLACK};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use serde::{Deserialize, Serialize};

/// Geometric sampling grid for conjugates without a closed form.
pub const CONJUGATE_GRID_MIN: f64 = 1e-6;
pub const CONJUGATE_GRID_MAX: f64 = 1e6;
pub const CONJUGATE_GRID_POINTS: usize = 4096;

/// Relative tolerance of the Luxemburg-norm bisection.
pub const LUXEMBURG_RTOL: f64 = 1e-10;

const CONVEXITY_SLACK: f64 = 1e-12;

/// Behaviour of a piecewise-linear Young function beyond its last breakpoint.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    /// Affine continuation with the given slope.
    Linear(f64),
    /// `+∞` beyond the last breakpoint.
    Infinite,
}

/// Convex piecewise-linear function through `(0, 0)` and the given breakpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    points: Vec<(f64, f64)>,
    tail: Tail,
}

impl PiecewiseLinear {
    /// `points` must start at `(0, 0)`, be strictly increasing in `t` and have
    /// nondecreasing slopes; the tail slope must not undercut the last segment.
    pub fn new(points: Vec<(f64, f64)>, tail: Tail) -> Result<Self> {
        if points.first() != Some(&(0.0, 0.0)) {
            return Err(Error::InvalidYoung("piecewise-linear breakpoints must start at (0, 0)".into()));
        }
        let mut prev_slope = 0.0f64;
        for w in points.windows(2) {
            let ((t0, v0), (t1, v1)) = (w[0], w[1]);
            if !(t1 > t0) || !v1.is_finite() {
                return Err(Error::InvalidYoung(format!("breakpoints must increase in t (at t = {t1})")));
            }
            let slope = (v1 - v0) / (t1 - t0);
            if slope < prev_slope - CONVEXITY_SLACK * prev_slope.abs().max(1.0) {
                return Err(Error::InvalidYoung(format!("slopes must be nondecreasing (at t = {t1})")));
            }
            prev_slope = slope.max(prev_slope);
        }
        if let Tail::Linear(m) = tail {
            if !(m.is_finite()) || m < prev_slope - CONVEXITY_SLACK * prev_slope.abs().max(1.0) {
                return Err(Error::InvalidYoung(format!("tail slope {m} breaks convexity")));
            }
        }
        let pl = Self { points, tail };
        if pl.points.len() == 1 && matches!(tail, Tail::Infinite) {
            return Err(Error::InvalidYoung("Φ ≡ ∞ on (0, ∞) is trivial".into()));
        }
        if pl.points.iter().all(|p| p.1 == 0.0) && matches!(tail, Tail::Linear(m) if m == 0.0) {
            return Err(Error::InvalidYoung("Φ ≡ 0 is trivial".into()));
        }
        Ok(pl)
    }

    /// Breakpoints followed by the default tail that continues the last segment.
    pub fn with_linear_tail(points: Vec<(f64, f64)>) -> Result<Self> {
        let slope = match points.len() {
            0 | 1 => 0.0,
            n => (points[n - 1].1 - points[n - 2].1) / (points[n - 1].0 - points[n - 2].0),
        };
        Self::new(points, Tail::Linear(slope))
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    fn eval(&self, t: f64) -> f64 {
        let last = *self.points.last().expect("nonempty");
        if t > last.0 {
            return match self.tail {
                Tail::Linear(m) => last.1 + m * (t - last.0),
                Tail::Infinite => f64::INFINITY,
            };
        }
        let k = self.points.partition_point(|p| p.0 < t);
        if k == 0 {
            return 0.0;
        }
        let (t0, v0) = self.points[k - 1];
        let (t1, v1) = self.points[k];
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    fn right_derivative(&self, t: f64) -> f64 {
        let k = self.points.partition_point(|p| p.0 <= t);
        if k >= self.points.len() {
            return match self.tail {
                Tail::Linear(m) => m,
                Tail::Infinite => f64::INFINITY,
            };
        }
        let (t0, v0) = self.points[k - 1];
        let (t1, v1) = self.points[k];
        (v1 - v0) / (t1 - t0)
    }

    /// Legendre conjugate by breakpoint/slope exchange.
    fn conjugate(&self) -> Result<Self> {
        let pts = &self.points;
        let k = pts.len() - 1;
        let slopes: Vec<f64> = pts.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
        // at t = m_j both s_j and s_{j+1} are active: Ψ(m_j) = s_{j+1}·m_j − φ_{j+1}
        let mut out: Vec<(f64, f64)> = vec![(0.0, 0.0)];
        let push = |t: f64, (s, v): (f64, f64), out: &mut Vec<(f64, f64)>| {
            if t > out.last().expect("nonempty").0 {
                out.push((t, (s * t - v).max(0.0)));
            }
        };
        for (j, &m) in slopes.iter().enumerate() {
            push(m, pts[j + 1], &mut out);
        }
        let tail = match self.tail {
            Tail::Linear(m) => {
                push(m, pts[k], &mut out);
                Tail::Infinite
            }
            Tail::Infinite => Tail::Linear(pts[k].0),
        };
        Self::repaired(out, tail)
    }

    /// Like [`PiecewiseLinear::new`], after lifting breakpoint values so that chord
    /// slopes are nondecreasing (removes rounding-level kinks from computed data).
    fn repaired(points: Vec<(f64, f64)>, tail: Tail) -> Result<Self> {
        let mut fixed = vec![points[0]];
        let mut prev_slope = 0.0f64;
        for &(t, v) in &points[1..] {
            let (t0, v0) = *fixed.last().expect("nonempty");
            if t - t0 <= 1e-9 * t {
                continue;
            }
            let slope = ((v - v0) / (t - t0)).max(prev_slope);
            fixed.push((t, v0 + slope * (t - t0)));
            prev_slope = slope;
        }
        let tail = match tail {
            Tail::Linear(m) => Tail::Linear(m.max(prev_slope)),
            Tail::Infinite => Tail::Infinite,
        };
        Self::new(fixed, tail)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum YoungFunction {
    /// `coeff · t^p`, `p ≥ 1`.
    Power { p: f64, coeff: f64 },
    PiecewiseLinear(PiecewiseLinear),
    /// `√(1 + t²) − 1`.
    SqrtShift,
    /// `max(0, t − 1)`.
    PhiMin,
    /// `t` on `[0, 1]`, `∞` beyond.
    PhiMax,
    /// `Φ_r = max{0, Λ_r − 1/r}` where `Λ_r` follows `base` on `[0, r)` and its
    /// right tangent at `r` beyond.
    Truncated { base: Box<YoungFunction>, r: f64 },
}

impl YoungFunction {
    pub fn power(p: f64) -> Result<Self> {
        Self::scaled_power(p, 1.0)
    }

    pub fn scaled_power(p: f64, coeff: f64) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::InvalidYoung(format!("power exponent must be ≥ 1, got {p}")));
        }
        if !(coeff > 0.0) || !coeff.is_finite() {
            return Err(Error::InvalidYoung(format!("power coefficient must be positive, got {coeff}")));
        }
        Ok(Self::Power { p, coeff })
    }

    pub fn piecewise(points: Vec<(f64, f64)>) -> Result<Self> {
        Ok(Self::PiecewiseLinear(PiecewiseLinear::with_linear_tail(points)?))
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::NegativeArgument(t));
        }
        Ok(self.value(t))
    }

    /// Unchecked evaluation for `t ≥ 0`.
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Self::Power { p, coeff } => coeff * if *p == 1.0 { t } else if *p == 2.0 { t * t } else { t.powf(*p) },
            Self::PiecewiseLinear(pl) => pl.eval(t),
            Self::SqrtShift => t * t / ((1.0 + t * t).sqrt() + 1.0),
            Self::PhiMin => (t - 1.0).max(0.0),
            Self::PhiMax => {
                if t <= 1.0 {
                    t
                } else {
                    f64::INFINITY
                }
            }
            Self::Truncated { base, r } => (lambda_r(base, *r, t) - 1.0 / r).max(0.0),
        }
    }

    /// Right derivative `Φ′⁺(t)`, evaluated in closed form per variant.
    pub fn right_derivative(&self, t: f64) -> f64 {
        match self {
            Self::Power { p, coeff } => {
                if *p == 1.0 {
                    *coeff
                } else {
                    coeff * p * t.powf(p - 1.0)
                }
            }
            Self::PiecewiseLinear(pl) => pl.right_derivative(t),
            Self::SqrtShift => t / (1.0 + t * t).sqrt(),
            Self::PhiMin => {
                if t < 1.0 {
                    0.0
                } else {
                    1.0
                }
            }
            Self::PhiMax => {
                if t < 1.0 {
                    1.0
                } else {
                    f64::INFINITY
                }
            }
            Self::Truncated { base, r } => {
                if lambda_r(base, *r, t) < 1.0 / r {
                    0.0
                } else {
                    lambda_r_derivative(base, *r, t)
                }
            }
        }
    }

    /// `sup{t ≥ 0 : Φ(t) = 0}`.
    pub fn zero_set_sup(&self) -> f64 {
        match self {
            Self::Power { .. } | Self::SqrtShift | Self::PhiMax => 0.0,
            Self::PhiMin => 1.0,
            Self::PiecewiseLinear(pl) => pl.points.iter().filter(|p| p.1 == 0.0).map(|p| p.0).fold(0.0, f64::max),
            Self::Truncated { base, r } => {
                // Λ_r is continuous and nondecreasing; bisect for Λ_r = 1/r
                let target = 1.0 / r;
                let (mut lo, mut hi) = (0.0, r.max(1.0));
                while lambda_r(base, *r, hi) < target {
                    hi *= 2.0;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if lambda_r(base, *r, mid) <= target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            }
        }
    }

    /// The conjugate `Ψ(t) = sup_{s ≥ 0} (st − Φ(s))`.
    ///
    /// Closed forms for powers, piecewise-linear functions and the `Φ_min`/`Φ_max`
    /// pair; otherwise the exact conjugate of the piecewise-linear interpolant of `Φ`
    /// on `{0} ∪` a geometric grid of [`CONJUGATE_GRID_POINTS`] points spanning
    /// `[CONJUGATE_GRID_MIN, CONJUGATE_GRID_MAX]`.
    pub fn conjugate(&self) -> Result<Self> {
        match self {
            Self::Power { p, coeff } if *p == 1.0 => Ok(Self::PiecewiseLinear(PiecewiseLinear::new(
                vec![(0.0, 0.0), (*coeff, 0.0)],
                Tail::Infinite,
            )?)),
            Self::Power { p, coeff } => {
                let q = p / (p - 1.0);
                let c = (p - 1.0) * coeff / (coeff * p).powf(q);
                Self::scaled_power(q, c)
            }
            Self::PiecewiseLinear(pl) => Ok(Self::PiecewiseLinear(pl.conjugate()?)),
            Self::PhiMin => Ok(Self::PhiMax),
            Self::PhiMax => Ok(Self::PhiMin),
            Self::SqrtShift | Self::Truncated { .. } => Ok(Self::PiecewiseLinear(self.sampled()?.conjugate()?)),
        }
    }

    /// Piecewise-linear interpolant on the conjugation grid, with the exact tail slope.
    fn sampled(&self) -> Result<PiecewiseLinear> {
        let ratio = (CONJUGATE_GRID_MAX / CONJUGATE_GRID_MIN).powf(1.0 / (CONJUGATE_GRID_POINTS - 1) as f64);
        let mut points = vec![(0.0, 0.0)];
        let mut s = CONJUGATE_GRID_MIN;
        for _ in 0..CONJUGATE_GRID_POINTS {
            let v = self.value(s);
            if !v.is_finite() {
                break;
            }
            points.push((s, v));
            s *= ratio;
        }
        let (s_last, _) = *points.last().expect("nonempty");
        let n = points.len();
        let chord = if n >= 2 { (points[n - 1].1 - points[n - 2].1) / (points[n - 1].0 - points[n - 2].0) } else { 0.0 };
        let slope = self.right_derivative(s_last);
        let tail = if slope.is_finite() { Tail::Linear(slope.max(chord)) } else { Tail::Infinite };
        PiecewiseLinear::repaired(points, tail)
    }

    /// `Φ_r = max{0, Λ_r − 1/r}`.
    pub fn truncate(&self, r: f64) -> Result<Self> {
        if !(r > self.zero_set_sup()) {
            return Err(Error::InvalidYoung(format!(
                "truncation level r = {r} must exceed sup{{Φ = 0}} = {}",
                self.zero_set_sup()
            )));
        }
        if !self.value(r).is_finite() || !self.right_derivative(r).is_finite() {
            return Err(Error::InvalidYoung(format!("Φ(r) = ∞ at r = {r}")));
        }
        Ok(Self::Truncated { base: Box::new(self.clone()), r })
    }

    /// For a truncation `Φ_r`: `(t₀, δ)` with `δ(t − t₀) ≤ Φ_r(t) ≤ (t − t₀)/δ` for `t ≥ t₀`.
    pub fn linear_bounds(&self) -> Option<(f64, f64)> {
        let Self::Truncated { base, r } = self else { return None };
        let t0 = self.zero_set_sup();
        let lower = lambda_r_derivative(base, *r, t0);
        let upper = base.right_derivative(*r);
        Some((t0, lower.min(1.0 / upper)))
    }

    pub fn is_real_valued(&self) -> bool {
        match self {
            Self::PhiMax => false,
            Self::PiecewiseLinear(pl) => matches!(pl.tail, Tail::Linear(_)),
            _ => true,
        }
    }
}

fn lambda_r(base: &YoungFunction, r: f64, t: f64) -> f64 {
    if t < r {
        base.value(t)
    } else {
        base.right_derivative(r) * (t - r) + base.value(r)
    }
}

fn lambda_r_derivative(base: &YoungFunction, r: f64, t: f64) -> f64 {
    base.right_derivative(t.min(r))
}

/// Modular `Σ Φ(|v| / λ) · w`; `∞` as soon as one term is infinite.
fn modular(phi: &YoungFunction, values: &[f64], weight: f64, lambda: f64) -> f64 {
    let mut acc = 0.0;
    for &v in values {
        let x = phi.value(v.abs() / lambda);
        if x.is_infinite() {
            return f64::INFINITY;
        }
        acc += x;
    }
    acc * weight
}

/// Luxemburg norm of sampled values with per-sample weight `weight` (cell volume):
/// `inf{λ > 0 : Σ Φ(|v|/λ)·weight ≤ 1}`, by bisection to [`LUXEMBURG_RTOL`].
/// Returns `0` for the zero vector and `∞` if no admissible `λ` is found.
pub fn luxemburg_norm_values(phi: &YoungFunction, values: &[f64], weight: f64) -> f64 {
    let scale = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let ok = |lambda: f64| modular(phi, values, weight, lambda) <= 1.0;
    let mut hi = scale;
    let mut grow = 0;
    while !ok(hi) {
        hi *= 2.0;
        grow += 1;
        if grow > 2000 || !hi.is_finite() {
            return f64::INFINITY;
        }
    }
    let mut lo = hi / 2.0;
    let mut shrink = 0;
    while ok(lo) {
        lo /= 2.0;
        shrink += 1;
        if shrink > 2000 || lo == 0.0 {
            return 0.0;
        }
    }
    while (hi - lo) > LUXEMBURG_RTOL * hi {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

pub fn luxemburg_norm(phi: &YoungFunction, f: &GridFunction) -> f64 {
    luxemburg_norm_values(phi, f.values(), f.grid().cell_volume())
}

/// The body `C ⊂ ℝⁿ⁺¹` with `h_C(y, 1) = 1 + b·Φ(h_K(y))` whenever `h_K(y) ≤ M`.
///
/// Its support function is `h(y, t) = |t|(1 + bΨ(h_K(y)/|t|))` for `t ≠ 0` and
/// `b·m·h_K(y)` for `t = 0`, where `Ψ` is `Φ` on `[0, M]` continued by the
/// tangent line `m·u + q` beyond `M`. All horizontal sections are dilates of `K`.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportBody {
    phi: YoungFunction,
    k: ConvexBody,
    big_m: f64,
    m: f64,
    q: f64,
    b: f64,
}

impl SupportBody {
    /// Dimension of the ambient space, `dim K + 1`.
    pub fn dim(&self) -> usize {
        self.k.dim() + 1
    }

    pub fn phi(&self) -> &YoungFunction {
        &self.phi
    }

    pub fn body(&self) -> &ConvexBody {
        &self.k
    }

    pub fn params(&self) -> (f64, f64, f64, f64) {
        (self.big_m, self.m, self.q, self.b)
    }

    /// The convex extension `Ψ` of `Φ|[0, M]`.
    pub fn psi(&self, u: f64) -> f64 {
        if u <= self.big_m {
            self.phi.value(u)
        } else {
            self.m * u + self.q
        }
    }

    /// `h` as a function of `(h_K(y), t)`.
    pub fn support_from(&self, hk: f64, t: f64) -> f64 {
        if t == 0.0 {
            self.b * self.m * hk
        } else {
            let a = t.abs();
            a * (1.0 + self.b * self.psi(hk / a))
        }
    }

    /// Same function through the two-branch formula: the graph branch for
    /// `|t| ≥ h_K(y)/M` and the cylinder `b·m·K × [−(1+bq), 1+bq]` otherwise.
    pub fn support_branchwise(&self, hk: f64, t: f64) -> f64 {
        let a = t.abs();
        if a * self.big_m >= hk && a > 0.0 {
            a * (1.0 + self.b * self.phi.value(hk / a))
        } else {
            self.b * self.m * hk + (1.0 + self.b * self.q) * a
        }
    }

    /// `h_C(x)` for `x = (y, t) ∈ ℝⁿ⁺¹`.
    pub fn support(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(self.support_of(x))
    }

    pub fn support_of(&self, x: &[f64]) -> f64 {
        let n = self.k.dim();
        self.support_from(self.k.support_of(&x[..n]), x[n])
    }

    /// `λ(s)` with `C ∩ {x_{n+1} = s} = λ(s)·K` for `|s| ≤ 1`; `None` outside.
    ///
    /// `λ(s) = inf_{u ∈ (0, ∞]} (1 − |s| + bΨ(u)) / u`. On `(0, M]` the ratio is
    /// unimodal with derivative sign given by the nondecreasing
    /// `N(u) = b(uΦ′⁺(u) − Φ(u)) − (1 − |s|)`, so its minimiser is located by
    /// bisection on `N`; the tail `u > M` contributes `b·m` or its value at `M`.
    pub fn section_scale(&self, s: f64) -> Option<f64> {
        if s.abs() > 1.0 {
            return None;
        }
        let c = 1.0 - s.abs();
        let (b, big_m) = (self.b, self.big_m);
        let ratio = |u: f64| (c + b * self.phi.value(u)) / u;
        let tail = if c + b * self.q >= 0.0 { b * self.m } else { ratio(big_m) };
        let inner = if c == 0.0 {
            b * self.phi.right_derivative(0.0)
        } else {
            let n = |u: f64| b * (u * self.phi.right_derivative(u) - self.phi.value(u)) - c;
            if n(big_m) < 0.0 {
                ratio(big_m)
            } else {
                let (mut lo, mut hi) = (0.0, big_m);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if n(mid) < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                ratio(hi)
            }
        };
        Some(inner.min(tail))
    }

    /// `x ∈ d·C` with the global membership slack.
    pub fn contains_scaled(&self, x: &[f64], d: f64) -> bool {
        let n = self.k.dim();
        let s = x[n] / d;
        if s.abs() > 1.0 + MEMBERSHIP_SLACK {
            return false;
        }
        let lam = self.section_scale(s.clamp(-1.0, 1.0)).unwrap_or(0.0);
        self.k.gauge_of(&x[..n]) <= d * lam + MEMBERSHIP_SLACK
    }
}

impl Body for SupportBody {
    fn dim(&self) -> usize {
        self.k.dim() + 1
    }

    fn support_of(&self, x: &[f64]) -> f64 {
        SupportBody::support_of(self, x)
    }

    fn contains_scaled(&self, x: &[f64], d: f64) -> bool {
        SupportBody::contains_scaled(self, x, d)
    }

    fn axis_extent(&self, axis: usize) -> f64 {
        if axis == self.k.dim() {
            1.0
        } else {
            // the widest section is the middle one
            self.section_scale(0.0).unwrap_or(0.0) * self.k.axis_extent(axis)
        }
    }
}

/// Builds the body `C` representing `Φ` over `K` up to `h_K(y) ≤ M`.
///
/// Parameters: `m = Φ′⁺(M)` (or the first positive slope past the zero set of `Φ`
/// when that is zero), `q = Φ(M) − mM ≤ 0`, and `b = 1` if `q = 0`, otherwise
/// `min(1, −1/(2q))` so that `1 + bq ≥ 1/2`.
pub fn build_phi_body(phi: &YoungFunction, k: &ConvexBody, big_m: f64) -> Result<SupportBody> {
    if !(big_m > 0.0) || !big_m.is_finite() {
        return Err(Error::InvalidYoung(format!("M must be positive, got {big_m}")));
    }
    let phi_m = phi.value(big_m);
    if !phi_m.is_finite() {
        return Err(Error::InvalidYoung(format!("Φ(M) = ∞ at M = {big_m}")));
    }
    let mut m = phi.right_derivative(big_m);
    if !(m > 0.0) {
        let z = phi.zero_set_sup();
        m = phi.right_derivative(z);
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::InvalidYoung("Φ ≡ 0: no positive slope to continue with".into()));
        }
    }
    if !m.is_finite() {
        return Err(Error::InvalidYoung(format!("Φ′⁺(M) = ∞ at M = {big_m}")));
    }
    let q = phi_m - m * big_m;
    // Ψ convex and nonnegative: q ≤ 0 and m at least the left slope at M
    let left = if big_m > 1e-9 { (phi_m - phi.value(big_m * (1.0 - 1e-9))) / (big_m * 1e-9) } else { 0.0 };
    if q > 1e-12 * (1.0 + phi_m) || m < left * (1.0 - 1e-6) - 1e-12 {
        return Err(Error::InvalidYoung(format!("extension of Φ beyond M is not convex (m = {m}, q = {q})")));
    }
    let q = q.min(0.0);
    let b = if q == 0.0 { 1.0 } else { (-1.0 / (2.0 * q)).min(1.0) };
    Ok(SupportBody { phi: phi.clone(), k: k.clone(), big_m, m, q, b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid, GridSet};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn catalogue() -> Vec<YoungFunction> {
        vec![
            YoungFunction::power(1.0).unwrap(),
            YoungFunction::power(2.0).unwrap(),
            YoungFunction::power(3.5).unwrap(),
            YoungFunction::SqrtShift,
            YoungFunction::PhiMin,
            YoungFunction::PhiMax,
            YoungFunction::piecewise(vec![(0.0, 0.0), (1.0, 0.5), (2.0, 2.0), (3.0, 5.0)]).unwrap(),
            YoungFunction::power(2.0).unwrap().truncate(1.5).unwrap(),
            YoungFunction::SqrtShift.truncate(2.0).unwrap(),
        ]
    }

    #[test]
    fn eval_examples() {
        assert_eq!(YoungFunction::power(2.0).unwrap().eval(3.0).unwrap(), 9.0);
        assert_eq!(YoungFunction::PhiMin.eval(0.5).unwrap(), 0.0);
        assert_eq!(YoungFunction::PhiMin.eval(3.0).unwrap(), 2.0);
        assert_eq!(YoungFunction::PhiMax.eval(2.0).unwrap(), f64::INFINITY);
        assert_eq!(YoungFunction::PhiMax.eval(1.0).unwrap(), 1.0);
        assert!(matches!(YoungFunction::SqrtShift.eval(-1.0), Err(Error::NegativeArgument(_))));
        let s = YoungFunction::SqrtShift.eval(3.0).unwrap();
        assert!((s - (10f64.sqrt() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn invalid_functions() {
        assert!(YoungFunction::power(0.5).is_err());
        assert!(YoungFunction::piecewise(vec![(0.0, 0.0), (1.0, 2.0), (2.0, 2.5)]).is_err());
        assert!(YoungFunction::piecewise(vec![(0.0, 0.0), (1.0, 0.0)]).is_err());
        assert!(YoungFunction::piecewise(vec![(1.0, 0.0)]).is_err());
    }

    #[test]
    fn convexity_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for phi in catalogue() {
            for _ in 0..10_000 {
                let s: f64 = rng.gen_range(0.0..6.0);
                let t: f64 = rng.gen_range(0.0..6.0);
                let (a, b) = (phi.value(s), phi.value(t));
                if !(a.is_finite() && b.is_finite()) {
                    continue;
                }
                let mid = phi.value(0.5 * (s + t));
                assert!(mid <= 0.5 * (a + b) + 1e-12 * (1.0 + a + b), "{phi:?} at {s}, {t}");
            }
            assert_eq!(phi.value(0.0), 0.0);
        }
    }

    #[test]
    fn conjugate_pairs() {
        let phimin = YoungFunction::PhiMin;
        assert_eq!(phimin.conjugate().unwrap(), YoungFunction::PhiMax);
        assert_eq!(YoungFunction::PhiMax.conjugate().unwrap(), phimin);
        // the same pair through the piecewise-linear breakpoint exchange
        let pl_min = YoungFunction::PiecewiseLinear(PiecewiseLinear::new(vec![(0.0, 0.0), (1.0, 0.0)], Tail::Linear(1.0)).unwrap());
        let c = pl_min.conjugate().unwrap();
        for t in [0.0, 0.25, 0.5, 1.0, 1.0001, 3.0] {
            assert_eq!(c.value(t), YoungFunction::PhiMax.value(t), "t = {t}");
        }
        // Φ(s) = s: Ψ = 0 on [0, 1], ∞ beyond
        let psi = YoungFunction::power(1.0).unwrap().conjugate().unwrap();
        for t in [0.0, 0.3, 1.0] {
            assert_eq!(psi.value(t), 0.0);
        }
        assert_eq!(psi.value(1.0 + 1e-9), f64::INFINITY);
        // closed-form power duals
        let psi = YoungFunction::power(3.0).unwrap().conjugate().unwrap();
        for t in [0.1, 1.0, 2.5] {
            let brute = (0..200_000).map(|i| i as f64 * 1e-5).map(|s| s * t - s.powi(3)).fold(0.0, f64::max);
            assert!((psi.value(t) - brute).abs() < 1e-8, "{t}");
        }
    }

    #[test]
    fn half_square_is_self_conjugate() {
        // dense piecewise-linear s²/2 on [0, 4]; the sampling oracle brackets the error
        let step = 1.0 / 64.0;
        let pts: Vec<(f64, f64)> = (0..=256).map(|i| i as f64 * step).map(|s| (s, s * s / 2.0)).collect();
        let phi = YoungFunction::piecewise(pts).unwrap();
        let psi = phi.conjugate().unwrap();
        for i in 0..=300 {
            let t = i as f64 * 0.0125;
            // chord interpolation of s²/2 overestimates by at most step²/8
            assert!((psi.value(t) - t * t / 2.0).abs() <= step * step / 8.0 + 1e-12, "t = {t}");
        }
    }

    #[test]
    fn young_inequality_and_biconjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for phi in catalogue() {
            let psi = phi.conjugate().unwrap();
            let sampled = matches!(phi, YoungFunction::SqrtShift | YoungFunction::Truncated { .. });
            let rtol = if sampled { 1e-6 } else { 1e-9 };
            for _ in 0..2000 {
                let s: f64 = rng.gen_range(0.0..5.0);
                let t: f64 = rng.gen_range(0.0..5.0);
                let rhs = phi.value(s) + psi.value(t);
                assert!(s * t <= rhs + rtol * (1.0 + rhs.min(1e300)), "{phi:?} {s} {t}");
            }
            if phi.is_real_valued() {
                let back = psi.conjugate().unwrap();
                // chord error of the geometric sampling grid: spacing times the slope
                // increase across the neighbouring cells
                let ratio = (CONJUGATE_GRID_MAX / CONJUGATE_GRID_MIN).powf(1.0 / (CONJUGATE_GRID_POINTS - 1) as f64);
                for _ in 0..500 {
                    let s: f64 = rng.gen_range(0.0..5.0);
                    let (a, b) = (phi.value(s), back.value(s));
                    let jump = phi.right_derivative(s * ratio * ratio) - phi.right_derivative(s / (ratio * ratio));
                    let tol = (ratio - 1.0) * s * ratio * jump / 2.0 + 1e-9 * (1.0 + a);
                    assert!((a - b).abs() <= tol, "{phi:?} at {s}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn sqrt_shift_conjugate_matches_closed_form() {
        // sup_s (st − √(1+s²) + 1) = 1 − √(1 − t²) for t < 1
        let psi = YoungFunction::SqrtShift.conjugate().unwrap();
        for t in [0.1, 0.5, 0.9, 0.99] {
            let want = 1.0 - (1.0f64 - t * t).sqrt();
            assert!((psi.value(t) - want).abs() < 1e-4, "{t}");
        }
        assert!(psi.value(1.01).is_infinite());
    }

    #[test]
    fn truncation() {
        let phi = YoungFunction::power(2.0).unwrap();
        let pr = phi.truncate(1.0).unwrap();
        for t in [0.0f64, 0.5, 0.999, 1.0, 1.5, 4.0] {
            let want = if t < 1.0 { (t * t - 1.0).max(0.0) } else { (2.0 * t - 2.0).max(0.0) };
            assert!((pr.value(t) - want).abs() < 1e-15, "{t}");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for (base, r) in [(phi.clone(), 2.0), (YoungFunction::SqrtShift, 3.0), (YoungFunction::PhiMin, 2.5)] {
            let pr = base.truncate(r).unwrap();
            let (t0, delta) = pr.linear_bounds().unwrap();
            assert!(delta > 0.0 && t0 > 0.0);
            for _ in 0..1000 {
                let t: f64 = rng.gen_range(0.0..20.0);
                assert!(pr.value(t) <= base.value(t) + 1e-12);
                if t >= t0 {
                    let v = pr.value(t);
                    assert!(delta * (t - t0) <= v + 1e-12 && v <= (t - t0) / delta + 1e-12, "{t}");
                }
            }
        }
        assert!(YoungFunction::PhiMax.truncate(2.0).is_err());
        assert!(YoungFunction::PhiMin.truncate(0.5).is_err());
    }

    #[test]
    fn luxemburg_examples() {
        let g = Grid::centered(2, 0.05, 1.0).unwrap();
        let a = GridSet::from_fn(g, |x| x[0].abs() < 0.42 && x[1].abs() < 0.3);
        let f = a.indicator();
        for p in [1.0, 2.0, 3.0] {
            let n = luxemburg_norm(&YoungFunction::power(p).unwrap(), &f);
            assert!((n - a.measure().powf(1.0 / p)).abs() < 1e-8 * n, "{p}");
        }
        assert_eq!(luxemburg_norm(&YoungFunction::SqrtShift, &GridFunction::zeros(g)), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let bump = GridFunction::from_fn(g, |x| (0.8 - x[0].hypot(x[1])).max(0.0) * 3.0).unwrap();
        for phi in [YoungFunction::SqrtShift, YoungFunction::PhiMax, YoungFunction::power(1.5).unwrap()] {
            let base = luxemburg_norm(&phi, &bump);
            for _ in 0..5 {
                let c: f64 = rng.gen_range(0.1..10.0);
                let scaled = luxemburg_norm(&phi, &bump.scale(c).unwrap());
                assert!((scaled - c * base).abs() <= 3e-10 * c * base, "{phi:?}");
            }
            // defining equivalence: ‖f‖ ≤ 1 ⇔ modular ≤ 1
            for c in [0.3, 1.0, 3.0] {
                let fc = bump.scale(c).unwrap();
                let norm = luxemburg_norm(&phi, &fc);
                let modular = modular(&phi, fc.values(), g.cell_volume(), 1.0);
                if (norm - 1.0).abs() > 1e-8 {
                    assert_eq!(norm <= 1.0, modular <= 1.0);
                }
            }
        }
    }

    #[test]
    fn phi_body_identity_and_planes() {
        let k = ConvexBody::unit_ball(2);
        let phi = YoungFunction::power(2.0).unwrap();
        let c = build_phi_body(&phi, &k, 1.0).unwrap();
        let (_, m, q, b) = c.params();
        assert_eq!((m, q), (2.0, -1.0));
        assert!(1.0 + b * q > 0.0);
        assert!((c.support(&[0.0, 0.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((c.support(&[0.0, 0.0, -1.0]).unwrap() - 1.0).abs() < 1e-15);
        for r in [0.0, 0.3, 0.99, 1.0] {
            let y = [r * 0.6, r * 0.8, 1.0];
            assert!((c.support_of(&y) - (1.0 + b * r * r)).abs() < 1e-12);
        }
        // cylinder branch
        let y = [3.0, 0.0, 1.0];
        assert!((c.support_of(&y) - (b * m * 3.0 + (1.0 + b * q))).abs() < 1e-12);
        assert!(matches!(build_phi_body(&YoungFunction::PhiMax, &k, 2.0), Err(Error::InvalidYoung(_))));
    }

    #[test]
    fn phi_body_branches_agree_and_subadditive() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let bodies = [ConvexBody::unit_ball(2), ConvexBody::regular_polygon(6, 1.0, 0.1).unwrap(), ConvexBody::ball(vec![0.3, 0.1], 1.0).unwrap()];
        let phis = [YoungFunction::power(1.0).unwrap(), YoungFunction::power(2.0).unwrap(), YoungFunction::SqrtShift, YoungFunction::PhiMin];
        for k in &bodies {
            for phi in &phis {
                let c = build_phi_body(phi, k, 1.5).unwrap();
                for _ in 0..1000 {
                    let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-3.0..3.0)).collect();
                    let y: Vec<f64> = (0..3).map(|_| rng.gen_range(-3.0..3.0)).collect();
                    let s: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
                    let (hx, hy, hs) = (c.support_of(&x), c.support_of(&y), c.support_of(&s));
                    assert!(hs <= hx + hy + 1e-9 * (hx + hy), "{phi:?}");
                    let lam: f64 = rng.gen_range(0.1..5.0);
                    let lx: Vec<f64> = x.iter().map(|v| v * lam).collect();
                    assert!((c.support_of(&lx) - lam * hx).abs() < 1e-9 * lam * hx.max(1.0));
                    let hk = k.support_of(&x[..2]);
                    assert!((c.support_from(hk, x[2]) - c.support_branchwise(hk, x[2])).abs() < 1e-12 * (1.0 + hx));
                }
            }
        }
    }

    #[test]
    fn phi_body_sections_are_dilates() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let k = ConvexBody::regular_polygon(5, 1.0, 0.0).unwrap();
        for phi in [YoungFunction::power(2.0).unwrap(), YoungFunction::power(1.0).unwrap(), YoungFunction::SqrtShift] {
            let c = build_phi_body(&phi, &k, 1.0).unwrap();
            let (_, _, _, b) = c.params();
            assert_eq!(c.section_scale(1.0), Some(b * phi.right_derivative(0.0)));
            for i in 1..20 {
                let s = -1.0 + i as f64 * 0.1;
                let lam = c.section_scale(s).unwrap();
                // oracle: λ(s) = min_t (h(1, t) − s t) by dense sampling in t
                let dense = (-40_000..=40_000)
                    .map(|j| j as f64 * 1e-3)
                    .map(|t| c.support_from(1.0, t) - s * t)
                    .fold(f64::INFINITY, f64::min);
                assert!(lam <= dense + 1e-9 && dense - lam < 1e-6, "{phi:?} s={s}: {lam} vs {dense}");
                // section boundary points λ(s)·v, v ∈ ∂K, satisfy every sampled support inequality
                if lam > 0.0 {
                    for v in k.vertices().unwrap() {
                        let z = [lam * v[0], lam * v[1], s];
                        for _ in 0..300 {
                            let u: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
                            let lhs = z[0] * u[0] + z[1] * u[1] + z[2] * u[2];
                            assert!(lhs <= c.support_of(&u) + 1e-6);
                        }
                    }
                }
            }
            assert!(c.section_scale(1.5).is_none());
        }
    }
}
