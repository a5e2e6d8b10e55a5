//! Analytic test functions, sampled onto grids at any resolution.
//!
//! Checks that refine `h → h/2` need the function itself rather than one sampling
//! of it, so scenarios and batteries carry a [`FunctionSpec`].

use crate::convex::ConvexBody;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, GridSet};
use rand::Rng;
use std::f64::consts::FRAC_PI_2;

#[derive(Clone, Debug, PartialEq)]
pub enum FunctionSpec {
    /// `height·(1 − ‖x − center‖_K)⁺`.
    Cone { body: ConvexBody, height: f64, center: Vec<f64> },
    /// `height·Π_k (1 − |x_k − c_k| / w_k)⁺`.
    Tent { center: Vec<f64>, half_widths: Vec<f64>, height: f64 },
    /// `height·cos²(π r / 2R)` for `r = |x − center| < R`.
    Bump { center: Vec<f64>, radius: f64, height: f64 },
    /// `height·1_K`.
    Indicator { body: ConvexBody, height: f64 },
    Sum(Vec<FunctionSpec>),
    /// Explicit cell values in storage order; only valid on the grid they were made for.
    Samples { values: Vec<f64> },
}

impl FunctionSpec {
    pub fn cone(body: ConvexBody) -> Self {
        let dim = body.dim();
        Self::Cone { body, height: 1.0, center: vec![0.0; dim] }
    }

    /// Value at a point, for the analytic variants.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let sub = |c: &[f64], k: usize| x[k] - c.get(k).copied().unwrap_or(0.0);
        Ok(match self {
            Self::Cone { body, height, center } => {
                let y: Vec<f64> = (0..x.len()).map(|k| sub(center, k)).collect();
                height * (1.0 - body.gauge_of(&y)).max(0.0)
            }
            Self::Tent { center, half_widths, height } => {
                height * (0..x.len()).map(|k| (1.0 - sub(center, k).abs() / half_widths[k]).max(0.0)).product::<f64>()
            }
            Self::Bump { center, radius, height } => {
                let r = (0..x.len()).map(|k| sub(center, k).powi(2)).sum::<f64>().sqrt();
                if r < *radius {
                    height * (FRAC_PI_2 * r / radius).cos().powi(2)
                } else {
                    0.0
                }
            }
            Self::Indicator { body, height } => {
                if body.contains_scaled(x, 1.0) {
                    *height
                } else {
                    0.0
                }
            }
            Self::Sum(parts) => {
                let mut acc = 0.0;
                for p in parts {
                    acc += p.eval(x)?;
                }
                acc
            }
            Self::Samples { .. } => return Err(Error::Unsupported("explicit samples have no pointwise formula".into())),
        })
    }

    fn validate(&self, dim: usize) -> Result<()> {
        let pos = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidGrid(format!("{what} must be positive, got {v}")))
            }
        };
        let len = |v: &[f64], what: &str| {
            if v.len() == dim {
                Ok(())
            } else {
                Err(Error::InvalidGrid(format!("{what} has {} coordinates on a {dim}-dimensional grid", v.len())))
            }
        };
        match self {
            Self::Cone { body, height, center } => {
                if body.dim() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: body.dim() });
                }
                len(center, "center")?;
                pos(*height, "height")
            }
            Self::Tent { center, half_widths, height } => {
                len(center, "center")?;
                len(half_widths, "half_widths")?;
                half_widths.iter().try_for_each(|&w| pos(w, "half width"))?;
                pos(*height, "height")
            }
            Self::Bump { center, radius, height } => {
                len(center, "center")?;
                pos(*radius, "radius")?;
                pos(*height, "height")
            }
            Self::Indicator { body, height } => {
                if body.dim() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: body.dim() });
                }
                pos(*height, "height")
            }
            Self::Sum(parts) => parts.iter().try_for_each(|p| p.validate(dim)),
            Self::Samples { .. } => Ok(()),
        }
    }

    pub fn sample(&self, grid: &Grid) -> Result<GridFunction> {
        self.validate(grid.dim())?;
        match self {
            Self::Samples { values } => GridFunction::new(*grid, values.clone()),
            _ => {
                let values = (0..grid.len())
                    .map(|c| self.eval(&grid.center(c)[..grid.dim()]))
                    .collect::<Result<Vec<f64>>>()?;
                GridFunction::new(*grid, values)
            }
        }
    }

    /// Whether [`sample`](Self::sample) works at any spacing.
    pub fn is_analytic(&self) -> bool {
        match self {
            Self::Samples { .. } => false,
            Self::Sum(parts) => parts.iter().all(Self::is_analytic),
            _ => true,
        }
    }
}

/// Ten Lipschitz functions on the plane supported in the disk of radius 1.3:
/// cones, tents, bumps and sums of them.
pub fn battery() -> Vec<(String, FunctionSpec)> {
    let disk = ConvexBody::unit_ball(2);
    let ellipse_like = ConvexBody::polytope(vec![vec![1.0, 0.0], vec![0.0, 0.6], vec![-0.8, 0.0], vec![0.0, -0.7]]).unwrap();
    let hexagon = ConvexBody::regular_polygon(6, 0.9, 0.2).unwrap();
    let cone_at = |body: &ConvexBody, c: [f64; 2], height: f64| FunctionSpec::Cone { body: body.clone(), height, center: c.to_vec() };
    let tent = |c: [f64; 2], w: [f64; 2], height: f64| FunctionSpec::Tent { center: c.to_vec(), half_widths: w.to_vec(), height };
    let bump = |c: [f64; 2], radius: f64, height: f64| FunctionSpec::Bump { center: c.to_vec(), radius, height };
    vec![
        ("cone".into(), FunctionSpec::cone(disk.clone())),
        ("cone_shifted".into(), cone_at(&disk.scaled(0.8).unwrap(), [0.2, -0.1], 0.9)),
        ("cone_quad".into(), cone_at(&ellipse_like, [0.1, 0.0], 1.0)),
        ("cone_hexagon".into(), cone_at(&hexagon, [0.0, 0.1], 1.2)),
        ("tent".into(), tent([0.0, 0.0], [0.9, 0.6], 1.0)),
        ("tent_offset".into(), tent([-0.2, 0.15], [0.5, 1.0], 0.7)),
        ("bump".into(), bump([0.0, 0.0], 1.0, 1.0)),
        ("bump_pair".into(), FunctionSpec::Sum(vec![bump([-0.4, 0.1], 0.6, 1.0), bump([0.45, -0.2], 0.5, 0.6)])),
        ("cone_plus_bump".into(), FunctionSpec::Sum(vec![cone_at(&disk.scaled(0.9).unwrap(), [0.0, 0.0], 0.5), bump([0.3, 0.3], 0.5, 0.5)])),
        ("tent_plus_cone".into(), FunctionSpec::Sum(vec![tent([0.3, 0.0], [0.6, 0.6], 0.6), cone_at(&hexagon, [-0.3, -0.1], 0.5)])),
    ]
}

/// Random nonnegative field: each cell at distance ≥ `margin` cells from the edge
/// is nonzero with probability `density`, with a value uniform in `(0, 1]`.
pub fn random_field<R: Rng>(grid: &Grid, rng: &mut R, density: f64, margin: usize) -> Result<GridFunction> {
    let values = (0..grid.len())
        .map(|c| {
            let roll: f64 = rng.gen();
            let v: f64 = rng.gen();
            if grid.edge_distance(c) >= margin && roll < density {
                1.0 - v
            } else {
                0.0
            }
        })
        .collect();
    GridFunction::new(*grid, values)
}

/// Union of `count` random disks with centres within `spread` of the origin and
/// radii in `[r_min, r_max]`.
pub fn random_blob<R: Rng>(grid: &Grid, rng: &mut R, count: usize, spread: f64, radii: (f64, f64)) -> GridSet {
    let disks: Vec<([f64; 2], f64)> = (0..count)
        .map(|_| ([rng.gen_range(-spread..=spread), rng.gen_range(-spread..=spread)], rng.gen_range(radii.0..=radii.1)))
        .collect();
    GridSet::from_fn(*grid, |x| {
        let y = if x.len() == 2 { x[1] } else { 0.0 };
        disks.iter().any(|(c, r)| (x[0] - c[0]).hypot(y - c[1]) <= *r)
    })
}
