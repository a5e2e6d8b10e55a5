//! Convex bodies containing the origin in their interior.
//!
//! A body is either an analytic ball or a polytope given by its vertices. Support,
//! gauge and radial functions are evaluated exactly for both; polytope facets are
//! derived once at construction (edges in 2D, brute-force plane enumeration in 3D).
//!
//! Conventions
//! - `support(K, x) = max{x·y : y ∈ K}`.
//! - `gauge(K, x) = inf{λ ≥ 0 : x ∈ λK}`, which equals `support(K°, x)`.
//! - `radial(K, x) = 1 / gauge(K, x)` for `x ≠ 0`.
//! - Membership `x ∈ dK` is tested as `gauge(K, x) ≤ d + MEMBERSHIP_SLACK`.

use crate::error::{Error, Result};
use crate::grid::GridSet;
use crate::morph::{self, StructuringElement};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Absolute slack on `gauge ≤ d` membership tests, so that lattice points lying
/// exactly on `∂(dK)` are not lost to rounding.
pub const MEMBERSHIP_SLACK: f64 = 1e-12;

/// Number of tangent directions used to polarise an off-centre disk.
pub const OFF_CENTER_POLAR_SIDES: usize = 720;

const GEOM_EPS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Ball { center: Vec<f64>, radius: f64 },
    Polytope { vertices: Vec<Vec<f64>> },
}

/// Closed half-space `normal · x ≤ offset`, `normal` of unit length, `offset > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Facet {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvexBody {
    dim: usize,
    shape: Shape,
    facets: Vec<Facet>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn cross3(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

impl ConvexBody {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        let dim = center.len();
        check_dim(dim)?;
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidBody(format!("ball radius must be positive, got {radius}")));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidBody("non-finite ball centre".into()));
        }
        if norm(&center) >= radius - GEOM_EPS {
            return Err(Error::OriginNotInterior);
        }
        Ok(Self { dim, shape: Shape::Ball { center, radius }, facets: Vec::new() })
    }

    pub fn unit_ball(dim: usize) -> Self {
        Self::ball(vec![0.0; dim], 1.0).expect("unit ball is valid")
    }

    /// Polytope from its vertex list. In 2D the vertices must be in strictly
    /// convex position and counterclockwise.
    pub fn polytope(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let dim = vertices.first().map(Vec::len).unwrap_or(0);
        check_dim(dim)?;
        if vertices.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidBody("vertices of mixed dimension".into()));
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidBody("non-finite vertex coordinate".into()));
        }
        if vertices.len() < dim + 1 {
            return Err(Error::InvalidBody(format!(
                "need at least {} vertices in dimension {dim}",
                dim + 1
            )));
        }
        let facets = match dim {
            1 => facets_1d(&vertices)?,
            2 => facets_2d(&vertices)?,
            _ => facets_3d(&vertices)?,
        };
        if facets.iter().any(|f| f.offset <= GEOM_EPS) {
            return Err(Error::OriginNotInterior);
        }
        Ok(Self { dim, shape: Shape::Polytope { vertices }, facets })
    }

    /// Convex hull of a planar point cloud, as a counterclockwise polygon.
    pub fn polygon_hull(points: &[[f64; 2]]) -> Result<Self> {
        let hull = convex_hull_2d(points);
        Self::polytope(hull.into_iter().map(|p| p.to_vec()).collect())
    }

    /// Axis-parallel square `[-half, half]^2`.
    pub fn square(half: f64) -> Result<Self> {
        Self::polytope(vec![
            vec![-half, -half],
            vec![half, -half],
            vec![half, half],
            vec![-half, half],
        ])
    }

    /// Axis-parallel square centred at the origin whose area equals that of the unit disk.
    pub fn square_of_area_pi() -> Self {
        Self::square(PI.sqrt() / 2.0).expect("valid square")
    }

    /// Regular `n`-gon with the given circumradius, first vertex at angle `phase`.
    pub fn regular_polygon(n: usize, circumradius: f64, phase: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidBody("a polygon needs at least 3 vertices".into()));
        }
        let vertices = (0..n)
            .map(|i| {
                let t = phase + 2.0 * PI * i as f64 / n as f64;
                vec![circumradius * t.cos(), circumradius * t.sin()]
            })
            .collect();
        Self::polytope(vertices)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn vertices(&self) -> Option<&[Vec<f64>]> {
        match &self.shape {
            Shape::Polytope { vertices } => Some(vertices),
            Shape::Ball { .. } => None,
        }
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(())
    }

    pub fn support(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        Ok(self.support_of(x))
    }

    pub fn gauge(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        Ok(self.gauge_of(x))
    }

    pub fn radial(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        if x.iter().all(|&c| c == 0.0) {
            return Err(Error::ZeroVector);
        }
        Ok(1.0 / self.gauge_of(x))
    }

    /// Unchecked support function; `x.len()` must equal `dim`.
    #[inline]
    pub fn support_of(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match &self.shape {
            Shape::Ball { center, radius } => dot(x, center) + radius * norm(x),
            Shape::Polytope { vertices } => {
                vertices.iter().map(|v| dot(x, v)).fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    /// Unchecked gauge function; `x.len()` must equal `dim`.
    #[inline]
    pub fn gauge_of(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match &self.shape {
            Shape::Ball { center, radius } => {
                // smallest λ ≥ 0 with ‖x − λc‖ ≤ λr
                let xx = dot(x, x);
                if xx == 0.0 {
                    return 0.0;
                }
                let xc = dot(x, center);
                let a = radius * radius - dot(center, center);
                (-xc + (xc * xc + a * xx).sqrt()) / a
            }
            Shape::Polytope { .. } => self
                .facets
                .iter()
                .map(|f| dot(&f.normal, x) / f.offset)
                .fold(0.0, f64::max),
        }
    }

    #[inline]
    pub fn gauge2(&self, x: f64, y: f64) -> f64 {
        self.gauge_of(&[x, y])
    }

    #[inline]
    pub fn support2(&self, x: f64, y: f64) -> f64 {
        self.support_of(&[x, y])
    }

    /// `x ∈ dK` with the documented absolute slack.
    #[inline]
    pub fn contains_scaled(&self, x: &[f64], d: f64) -> bool {
        self.gauge_of(x) <= d + MEMBERSHIP_SLACK
    }

    /// Polar body `K° = {x : x·y ≤ 1 for y ∈ K}`.
    ///
    /// Exact for polytopes (facet/vertex duality) and origin-centred balls. An
    /// off-centre disk is replaced by the polygon with vertices `u / h_K(u)` for
    /// `OFF_CENTER_POLAR_SIDES` equally spaced unit directions `u`; those points lie
    /// on `∂K°`, so the result is inscribed in the true polar.
    pub fn polar(&self) -> Result<Self> {
        match &self.shape {
            Shape::Ball { center, radius } => {
                if center.iter().all(|&c| c == 0.0) {
                    return Self::ball(vec![0.0; self.dim], 1.0 / radius);
                }
                if self.dim != 2 {
                    return Err(Error::Unsupported(
                        "polar of an off-centre ball is only approximated in 2D".into(),
                    ));
                }
                let vertices = (0..OFF_CENTER_POLAR_SIDES)
                    .map(|i| {
                        let t = 2.0 * PI * i as f64 / OFF_CENTER_POLAR_SIDES as f64;
                        let u = [t.cos(), t.sin()];
                        let h = self.support_of(&u);
                        vec![u[0] / h, u[1] / h]
                    })
                    .collect();
                Self::polytope(vertices)
            }
            Shape::Polytope { .. } => {
                let vertices = self
                    .facets
                    .iter()
                    .map(|f| f.normal.iter().map(|n| n / f.offset).collect())
                    .collect();
                Self::polytope(vertices)
            }
        }
    }

    /// The reflection `−K`.
    pub fn neg(&self) -> Self {
        match &self.shape {
            Shape::Ball { center, radius } => {
                Self::ball(center.iter().map(|c| -c).collect(), *radius).expect("reflection of a valid ball")
            }
            Shape::Polytope { vertices } => {
                // point reflection preserves orientation in 2D
                let v = vertices.iter().map(|v| v.iter().map(|c| -c).collect()).collect();
                Self::polytope(v).expect("reflection of a valid polytope")
            }
        }
    }

    /// `λK` for `λ > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) {
            return Err(Error::InvalidBody(format!("scale factor must be positive, got {factor}")));
        }
        match &self.shape {
            Shape::Ball { center, radius } => {
                Self::ball(center.iter().map(|c| c * factor).collect(), radius * factor)
            }
            Shape::Polytope { vertices } => Self::polytope(
                vertices.iter().map(|v| v.iter().map(|c| c * factor).collect()).collect(),
            ),
        }
    }

    /// `K + t`; fails if the origin leaves the interior.
    pub fn translated(&self, t: &[f64]) -> Result<Self> {
        self.check(t)?;
        match &self.shape {
            Shape::Ball { center, radius } => {
                Self::ball(center.iter().zip(t).map(|(c, s)| c + s).collect(), *radius)
            }
            Shape::Polytope { vertices } => Self::polytope(
                vertices.iter().map(|v| v.iter().zip(t).map(|(c, s)| c + s).collect()).collect(),
            ),
        }
    }

    /// Lebesgue measure (length, area or volume) of the continuum body.
    pub fn volume(&self) -> f64 {
        match (&self.shape, self.dim) {
            (Shape::Ball { radius, .. }, 1) => 2.0 * radius,
            (Shape::Ball { radius, .. }, 2) => PI * radius * radius,
            (Shape::Ball { radius, .. }, _) => 4.0 / 3.0 * PI * radius.powi(3),
            (Shape::Polytope { vertices }, 1) => {
                let (lo, hi) = vertices.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| {
                    (l.min(v[0]), h.max(v[0]))
                });
                hi - lo
            }
            (Shape::Polytope { vertices }, 2) => {
                let n = vertices.len();
                0.5 * (0..n)
                    .map(|i| {
                        let (a, b) = (&vertices[i], &vertices[(i + 1) % n]);
                        a[0] * b[1] - a[1] * b[0]
                    })
                    .sum::<f64>()
            }
            (Shape::Polytope { .. }, _) => {
                // cone decomposition from the origin over the facets
                self.facets.iter().map(|f| f.offset * self.facet_area_3d(f) / 3.0).sum()
            }
        }
    }

    fn facet_area_3d(&self, facet: &Facet) -> f64 {
        let Some(vertices) = self.vertices() else { return 0.0 };
        let on: Vec<&Vec<f64>> = vertices
            .iter()
            .filter(|v| (dot(&facet.normal, v) - facet.offset).abs() < 1e-9)
            .collect();
        if on.len() < 3 {
            return 0.0;
        }
        // order the facet vertices by angle around their centroid
        let c: Vec<f64> = (0..3).map(|k| on.iter().map(|v| v[k]).sum::<f64>() / on.len() as f64).collect();
        let e1 = {
            let d = sub(on[0], &c);
            let l = norm(&d);
            d.iter().map(|x| x / l).collect::<Vec<_>>()
        };
        let e2 = cross3(&facet.normal, &e1);
        let mut ang: Vec<(f64, &Vec<f64>)> = on
            .iter()
            .map(|v| {
                let d = sub(v, &c);
                (dot(&d, &e2).atan2(dot(&d, &e1)), *v)
            })
            .collect();
        ang.sort_by(|a, b| a.0.total_cmp(&b.0));
        let m = ang.len();
        let mut acc = [0.0; 3];
        for i in 0..m {
            let cr = cross3(&sub(ang[i].1, &c), &sub(ang[(i + 1) % m].1, &c));
            for k in 0..3 {
                acc[k] += cr[k];
            }
        }
        0.5 * dot(&acc, &facet.normal).abs()
    }

    /// True when `K = −K` (vertex sets compared up to 1e-9).
    pub fn is_o_symmetric(&self) -> bool {
        match &self.shape {
            Shape::Ball { center, .. } => center.iter().all(|c| c.abs() < 1e-12),
            Shape::Polytope { vertices } => vertices.iter().all(|v| {
                vertices
                    .iter()
                    .any(|w| v.iter().zip(w).all(|(a, b)| (a + b).abs() < 1e-9))
            }),
        }
    }

    /// Largest `|x_axis|` over `K`, i.e. `max(h_K(e_axis), h_K(−e_axis))`.
    pub fn axis_extent(&self, axis: usize) -> f64 {
        let mut e = vec![0.0; self.dim];
        e[axis] = 1.0;
        let plus = self.support_of(&e);
        e[axis] = -1.0;
        plus.max(self.support_of(&e))
    }

    /// Radii `(r, R)` with `rB ⊆ K ⊆ RB`.
    pub fn inner_outer_radii(&self) -> (f64, f64) {
        match &self.shape {
            Shape::Ball { center, radius } => (radius - norm(center), radius + norm(center)),
            Shape::Polytope { vertices } => {
                let inner = self.facets.iter().map(|f| f.offset).fold(f64::INFINITY, f64::min);
                let outer = vertices.iter().map(|v| norm(v)).fold(0.0, f64::max);
                (inner, outer)
            }
        }
    }
}

/// What the morphology kernels need from a convex body: membership in `d·K`
/// and a bounding box.
pub trait Body: Sync {
    fn dim(&self) -> usize;
    fn support_of(&self, x: &[f64]) -> f64;
    fn contains_scaled(&self, x: &[f64], d: f64) -> bool;
    /// Largest `|x_axis|` over the body.
    fn axis_extent(&self, axis: usize) -> f64;
}

impl Body for ConvexBody {
    fn dim(&self) -> usize {
        self.dim
    }

    fn support_of(&self, x: &[f64]) -> f64 {
        ConvexBody::support_of(self, x)
    }

    fn contains_scaled(&self, x: &[f64], d: f64) -> bool {
        ConvexBody::contains_scaled(self, x, d)
    }

    fn axis_extent(&self, axis: usize) -> f64 {
        ConvexBody::axis_extent(self, axis)
    }
}

/// Discrete Minkowski sum `A ⊕ dK`: cell `c` is included iff `center(c) − center(a) ∈ dK`
/// for some `a ∈ A`. Fails if the result reaches the outermost ring of cells.
pub fn dilate_set(a: &GridSet, k: &ConvexBody, d: f64) -> Result<GridSet> {
    let grid = *a.grid();
    if k.dim() != grid.dim() {
        return Err(Error::DimensionMismatch { expected: grid.dim(), got: k.dim() });
    }
    if !(d >= 0.0) {
        return Err(Error::InvalidBody(format!("dilation radius must be nonnegative, got {d}")));
    }
    let se = StructuringElement::from_body(k, d, grid.h());
    let cells = morph::dilate_binary(&a.to_u8(), grid.dims3(), &se);
    let out = GridSet::new(grid, cells.into_iter().map(|v| v != 0).collect())?;
    if out.margin() == Some(0) {
        return Err(Error::MarginOverflow(format!("A ⊕ {d}K reaches the grid edge")));
    }
    Ok(out)
}

fn check_dim(dim: usize) -> Result<()> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidBody(format!("dimension must be 1, 2 or 3, got {dim}")));
    }
    Ok(())
}

fn facets_1d(vertices: &[Vec<f64>]) -> Result<Vec<Facet>> {
    let lo = vertices.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
    let hi = vertices.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= GEOM_EPS {
        return Err(Error::InvalidBody("degenerate interval".into()));
    }
    Ok(vec![
        Facet { normal: vec![1.0], offset: hi },
        Facet { normal: vec![-1.0], offset: -lo },
    ])
}

fn facets_2d(vertices: &[Vec<f64>]) -> Result<Vec<Facet>> {
    let n = vertices.len();
    let mut facets = Vec::with_capacity(n);
    for i in 0..n {
        let a = &vertices[i];
        let b = &vertices[(i + 1) % n];
        let c = &vertices[(i + 2) % n];
        let turn = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
        if turn <= GEOM_EPS {
            return Err(Error::InvalidBody(format!(
                "polygon vertices must be in strictly convex counterclockwise order (vertex {})",
                (i + 1) % n
            )));
        }
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let len = dx.hypot(dy);
        let normal = vec![dy / len, -dx / len];
        let offset = dot(&normal, a);
        facets.push(Facet { normal, offset });
    }
    Ok(facets)
}

fn facets_3d(vertices: &[Vec<f64>]) -> Result<Vec<Facet>> {
    let n = vertices.len();
    let scale = vertices.iter().map(|v| norm(v)).fold(0.0, f64::max).max(1.0);
    let tol = 1e-9 * scale;
    let mut facets: Vec<Facet> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let cr = cross3(&sub(&vertices[j], &vertices[i]), &sub(&vertices[k], &vertices[i]));
                let len = norm(&cr);
                if len <= tol * scale {
                    continue;
                }
                let mut normal: Vec<f64> = cr.iter().map(|c| c / len).collect();
                let mut offset = dot(&normal, &vertices[i]);
                let (mut above, mut below) = (false, false);
                for v in vertices {
                    let s = dot(&normal, v) - offset;
                    above |= s > tol;
                    below |= s < -tol;
                }
                if above && below {
                    continue;
                }
                if above {
                    normal.iter_mut().for_each(|c| *c = -*c);
                    offset = -offset;
                }
                let dup = facets.iter().any(|f| {
                    (f.offset - offset).abs() < tol && f.normal.iter().zip(&normal).all(|(a, b)| (a - b).abs() < 1e-9)
                });
                if !dup {
                    facets.push(Facet { normal, offset });
                }
            }
        }
    }
    if facets.len() < 4 {
        return Err(Error::InvalidBody("vertices are not affinely spanning".into()));
    }
    // every vertex must be extreme: on at least three facets
    for v in vertices {
        let on = facets.iter().filter(|f| (dot(&f.normal, v) - f.offset).abs() < tol).count();
        if on < 3 {
            return Err(Error::InvalidBody("vertices are not in convex position".into()));
        }
    }
    Ok(facets)
}

/// Andrew's monotone chain; counterclockwise, without collinear points.
pub fn convex_hull_2d(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 1e-14 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}
