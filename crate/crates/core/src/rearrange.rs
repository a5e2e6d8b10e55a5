//! Rearrangements of grid functions and their induced set maps.
//!
//! Every kind except polarization is a *cell ordering* rearrangement: cells are
//! ranked once (by distance to a centre, by the gauge of `K`, or per line), a set
//! `A` maps to the first `|A|` cells of the ranking, and a function maps by
//! sending its values, sorted decreasingly, to the ranked cells. Prefixes nest,
//! so superlevel sets of `Tf` are exactly the images of those of `f`.
//!
//! Ties are broken lexicographically on `(key, row, column)`.

use crate::convex::ConvexBody;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, GridSet};
use crate::par;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::cmp::Ordering;

/// Which side of a polarization hyperplane receives the larger value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    /// `H⁺ = {x_axis > offset}`.
    Plus,
    /// `H⁺ = {x_axis < offset}`.
    Minus,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Rearrangement {
    Identity,
    /// Symmetric decreasing rearrangement about a cell centre.
    SymDecreasing { center: Vec<f64> },
    /// (1, n)-Steiner: symmetric decreasing rearrangement of every line parallel
    /// to `axis`, about the hyperplane `x_axis = center`.
    Steiner { axis: usize, center: f64 },
    /// Schwarz rearrangement (the `k = n` Steiner case, i.e. symmetric decreasing).
    Schwarz { center: Vec<f64> },
    /// Superlevel sets become discrete dilates of `K` about the origin.
    KSchwarz { body: ConvexBody },
    /// Two-point symmetrization across `{x_axis = offset}`; the offset must be an
    /// integer or half-integer multiple of `h`.
    Polarization { axis: usize, offset: f64, positive_side: Side },
    /// Applied left to right.
    Composite(Vec<Rearrangement>),
}

impl Rearrangement {
    pub fn sym_decreasing(dim: usize) -> Self {
        Self::SymDecreasing { center: vec![0.0; dim] }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Identity => "identity".into(),
            Self::SymDecreasing { .. } => "sym_decreasing".into(),
            Self::Steiner { axis, .. } => format!("steiner_{axis}"),
            Self::Schwarz { .. } => "schwarz".into(),
            Self::KSchwarz { .. } => "k_schwarz".into(),
            Self::Polarization { axis, offset, positive_side } => {
                format!("polarization_{axis}_{offset}_{}", if *positive_side == Side::Plus { "+" } else { "-" })
            }
            Self::Composite(parts) => parts.iter().map(|p| p.name()).collect::<Vec<_>>().join("+"),
        }
    }

    /// The set map `∂_T` prepared for a grid.
    pub fn set_map(&self, grid: &Grid) -> Result<SetMap> {
        Ok(SetMap { grid: *grid, prepared: prepare(self, grid)? })
    }
}

/// `∂_T` with its cell rankings computed once for a grid.
#[derive(Clone, Debug)]
pub struct SetMap {
    grid: Grid,
    prepared: Prepared,
}

#[derive(Clone, Debug)]
enum Prepared {
    Identity,
    Order(Vec<usize>),
    Gauge(Gauge),
    Lines(Vec<Vec<usize>>),
    Polar(Polar),
    Composite(Vec<Prepared>),
}

/// K-Schwarz: sets take the first cells in gauge order; a function takes at each
/// cell its quantile at measure `|K|·‖x‖_K^n`, so superlevel sets are homothets of
/// `K` with the continuum volume rather than lattice counts.
#[derive(Clone, Debug)]
struct Gauge {
    order: Vec<usize>,
    /// Fractional rank `|K|·‖x‖_K^n / hⁿ − ½` per cell.
    position: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
struct Polar {
    axis: usize,
    /// Twice the plane position in cell units (integer).
    twice: i64,
    plus: bool,
}

fn lattice_center(grid: &Grid, center: &[f64]) -> Result<[i64; 2]> {
    if center.len() != grid.dim() {
        return Err(Error::DimensionMismatch { expected: grid.dim(), got: center.len() });
    }
    let mut k = [0i64; 2];
    for (slot, &c) in k.iter_mut().zip(center) {
        let r = (c / grid.h()).round();
        if (c / grid.h() - r).abs() > 1e-9 {
            return Err(Error::InvalidGrid(format!("centre coordinate {c} is not a cell centre at h = {}", grid.h())));
        }
        *slot = r as i64;
    }
    Ok(k)
}

fn rank<K, F>(grid: &Grid, key: F) -> Vec<usize>
where
    K: Send,
    F: Fn(usize) -> K + Send + Sync,
    K: PartialOrd,
{
    let keys: Vec<K> = par::map_range(grid.len(), key);
    let mut order: Vec<usize> = (0..grid.len()).collect();
    // storage index is row-major, so ties fall back to (row, column) order
    order.sort_by(|&a, &b| keys[a].partial_cmp(&keys[b]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    order
}

fn prepare(t: &Rearrangement, grid: &Grid) -> Result<Prepared> {
    let dim = grid.dim();
    Ok(match t {
        Rearrangement::Identity => Prepared::Identity,
        Rearrangement::SymDecreasing { center } | Rearrangement::Schwarz { center } => {
            let c = lattice_center(grid, center)?;
            let g = *grid;
            Prepared::Order(rank(grid, |cell| {
                let k = g.coords(cell);
                let (dx, dy) = (k[0] - c[0], k[1] - c[1]);
                dx * dx + dy * dy
            }))
        }
        Rearrangement::KSchwarz { body } => {
            if body.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: body.dim() });
            }
            let g = *grid;
            let gauge = |cell: usize| body.gauge_of(&g.center(cell)[..dim]);
            let scale = body.volume() / grid.cell_volume();
            let position = par::map_range(grid.len(), |cell| scale * gauge(cell).powi(dim as i32) - 0.5);
            Prepared::Gauge(Gauge { order: rank(grid, gauge), position })
        }
        Rearrangement::Steiner { axis, center } => {
            if *axis >= dim {
                return Err(Error::InvalidGrid(format!("Steiner axis {axis} on a {dim}-dimensional grid")));
            }
            let mut cvec = vec![0.0; dim];
            cvec[*axis] = *center;
            let c = lattice_center(grid, &cvec)?[*axis];
            let [n0, n1] = grid.shape();
            let lo = grid.lo()[*axis];
            let (count, len) = if *axis == 0 { (n1, n0) } else { (n0, n1) };
            let lines = (0..count)
                .map(|line| {
                    let mut idx: Vec<usize> = (0..len).collect();
                    idx.sort_by_key(|&p| ((lo + p as i64 - c).abs(), p));
                    idx.into_iter()
                        .map(|p| if *axis == 0 { grid.flat(p, line) } else { grid.flat(line, p) })
                        .collect()
                })
                .collect();
            Prepared::Lines(lines)
        }
        Rearrangement::Polarization { axis, offset, positive_side } => {
            if *axis >= dim {
                return Err(Error::InvalidGrid(format!("polarization axis {axis} on a {dim}-dimensional grid")));
            }
            let twice = 2.0 * offset / grid.h();
            let r = twice.round();
            if (twice - r).abs() > 1e-9 {
                return Err(Error::InvalidGrid(format!(
                    "hyperplane offset {offset} is not a multiple of h/2 = {}",
                    grid.h() / 2.0
                )));
            }
            Prepared::Polar(Polar { axis: *axis, twice: r as i64, plus: *positive_side == Side::Plus })
        }
        Rearrangement::Composite(parts) => {
            Prepared::Composite(parts.iter().map(|p| prepare(p, grid)).collect::<Result<_>>()?)
        }
    })
}

fn check_margin_set(a: &GridSet) -> Result<()> {
    if a.margin() == Some(0) {
        return Err(Error::MarginOverflow("rearranged set reaches the grid edge".into()));
    }
    Ok(())
}

impl Polar {
    /// Reflected cell, `None` if it lies off the grid; `Some(c)` for cells on H.
    fn partner(&self, grid: &Grid, c: usize) -> Option<usize> {
        let mut k = grid.coords(c);
        k[self.axis] = self.twice - k[self.axis];
        grid.cell_at(k)
    }

    /// `1` on the side receiving the maximum, `-1` on the other, `0` on H.
    fn side(&self, grid: &Grid, c: usize) -> i32 {
        let s = (2 * grid.coords(c)[self.axis] - self.twice).signum() as i32;
        if self.plus {
            s
        } else {
            -s
        }
    }

    fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        let g = *f.grid();
        let v = f.values();
        let mut out = vec![0.0; v.len()];
        for c in 0..v.len() {
            let side = self.side(&g, c);
            if side == 0 {
                out[c] = v[c];
                continue;
            }
            match self.partner(&g, c) {
                Some(p) => out[c] = if side > 0 { v[c].max(v[p]) } else { v[c].min(v[p]) },
                None => {
                    if side > 0 {
                        out[c] = v[c];
                    } else if v[c] > 0.0 {
                        return Err(Error::MarginOverflow("polarization would move mass off the grid".into()));
                    }
                }
            }
        }
        GridFunction::new(g, out)
    }

    fn apply_set(&self, a: &GridSet) -> Result<GridSet> {
        let g = *a.grid();
        let mut out = vec![false; g.len()];
        for (c, slot) in out.iter_mut().enumerate() {
            let side = self.side(&g, c);
            let here = a.contains(c);
            if side == 0 {
                *slot = here;
                continue;
            }
            let there = self.partner(&g, c).is_some_and(|p| a.contains(p));
            if side < 0 && here && self.partner(&g, c).is_none() {
                return Err(Error::MarginOverflow("polarization would move a cell off the grid".into()));
            }
            *slot = if side > 0 { here || there } else { here && there };
        }
        GridSet::new(g, out)
    }
}

impl Prepared {
    fn apply_set(&self, a: &GridSet) -> Result<GridSet> {
        let g = *a.grid();
        let out = match self {
            Prepared::Identity => a.clone(),
            Prepared::Order(order) | Prepared::Gauge(Gauge { order, .. }) => GridSet::from_indices(g, order[..a.count()].iter().copied()),
            Prepared::Lines(lines) => {
                let mut cells = vec![false; g.len()];
                for line in lines {
                    let k = line.iter().filter(|&&c| a.contains(c)).count();
                    for &c in &line[..k] {
                        cells[c] = true;
                    }
                }
                GridSet::new(g, cells)?
            }
            Prepared::Polar(p) => p.apply_set(a)?,
            Prepared::Composite(parts) => {
                let mut cur = a.clone();
                for p in parts {
                    cur = p.apply_set(&cur)?;
                }
                cur
            }
        };
        check_margin_set(&out)?;
        Ok(out)
    }

    fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        let g = *f.grid();
        match self {
            Prepared::Identity => Ok(f.clone()),
            Prepared::Order(order) => {
                let mut sorted = f.sorted_values();
                sorted.reverse();
                let mut out = vec![0.0; g.len()];
                for (&c, &v) in order.iter().zip(&sorted) {
                    out[c] = v;
                }
                GridFunction::new(g, out)
            }
            Prepared::Gauge(Gauge { position, .. }) => {
                let mut sorted = f.sorted_values();
                sorted.reverse();
                let at = |i: usize| sorted.get(i).copied().unwrap_or(0.0);
                let out = position
                    .iter()
                    .map(|&p| {
                        let p = p.max(0.0);
                        let i = p.floor() as usize;
                        let w = p - i as f64;
                        at(i) + (at(i + 1) - at(i)) * w
                    })
                    .collect();
                GridFunction::new(g, out)
            }
            Prepared::Lines(lines) => {
                let v = f.values();
                let mut out = vec![0.0; g.len()];
                for line in lines {
                    let mut vals: Vec<f64> = line.iter().map(|&c| v[c]).collect();
                    vals.sort_by(|a, b| b.total_cmp(a));
                    for (&c, &x) in line.iter().zip(&vals) {
                        out[c] = x;
                    }
                }
                GridFunction::new(g, out)
            }
            Prepared::Polar(p) => p.apply(f),
            Prepared::Composite(parts) => {
                let mut cur = f.clone();
                for p in parts {
                    cur = p.apply(&cur)?;
                }
                Ok(cur)
            }
        }
    }
}

impl SetMap {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn apply(&self, a: &GridSet) -> Result<GridSet> {
        check_grid(&self.grid, a.grid())?;
        self.prepared.apply_set(a)
    }
}

fn check_grid(expected: &Grid, got: &Grid) -> Result<()> {
    if expected != got {
        return Err(Error::InvalidGrid("set map prepared for a different grid".into()));
    }
    Ok(())
}

/// `∂_T A`.
pub fn apply_set(t: &Rearrangement, a: &GridSet) -> Result<GridSet> {
    t.set_map(a.grid())?.apply(a)
}

/// `Tf`.
pub fn apply(t: &Rearrangement, f: &GridFunction) -> Result<GridFunction> {
    prepare(t, f.grid())?.apply(f)
}

/// Two-point symmetrization `P_H f`.
pub fn polarize(f: &GridFunction, axis: usize, offset: f64, positive_side: Side) -> Result<GridFunction> {
    apply(&Rearrangement::Polarization { axis, offset, positive_side }, f)
}

/// `Tf(x) = max{t ∈ values(f), t > 0 : x ∈ ∂_T{f ≥ t}}` (0 where no level applies).
///
/// Fails with [`Error::NotNested`] if the images of consecutive superlevel sets
/// are not nested.
pub fn layer_cake_reconstruct(s: &SetMap, f: &GridFunction) -> Result<GridFunction> {
    check_grid(&s.grid, f.grid())?;
    let g = *f.grid();
    let levels: Vec<f64> = f.distinct_values_desc().into_iter().filter(|&t| t > 0.0).collect();
    let mut out = vec![0.0; g.len()];
    let mut prev: Option<GridSet> = None;
    let mut cells_above = vec![false; g.len()];
    // superlevel sets grow as t decreases; build them incrementally
    let mut by_value: Vec<usize> = (0..g.len()).collect();
    by_value.sort_by(|&a, &b| f.at(b).total_cmp(&f.at(a)));
    let mut cursor = 0;
    for &t in &levels {
        while cursor < by_value.len() && f.at(by_value[cursor]) >= t {
            cells_above[by_value[cursor]] = true;
            cursor += 1;
        }
        let image = s.apply(&GridSet::new(g, cells_above.clone())?)?;
        if let Some(p) = &prev {
            if !p.is_subset(&image) {
                return Err(Error::NotNested { level: t });
            }
        }
        for c in image.indices() {
            if out[c] == 0.0 {
                out[c] = t;
            }
        }
        prev = Some(image);
    }
    GridFunction::new(g, out)
}

/// Result of a polarization flow run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowTrace {
    /// `‖f_k − f^#‖_{L²}` for `k = 0..=steps`.
    pub distances: Vec<f64>,
    /// `(axis, offset)` of the hyperplane used at each step.
    pub planes: Vec<(usize, f64)>,
}

/// Applies `steps` random polarizations oriented toward the origin and records the
/// `L²` distance to the symmetric decreasing rearrangement after each step.
///
/// Hyperplanes are axis-aligned at a uniformly chosen multiple of `h/2` within the
/// current support's bounding box (planes through the origin excluded), on a
/// uniformly chosen axis; the origin side receives the maximum. Randomness comes
/// from `ChaCha8Rng::seed_from_u64(seed)`.
pub fn polarization_flow(f: &GridFunction, steps: usize, seed: u64) -> Result<FlowTrace> {
    if steps == 0 {
        return Err(Error::InvalidGrid("polarization flow needs at least one step".into()));
    }
    let g = *f.grid();
    let target = apply(&Rearrangement::sym_decreasing(g.dim()), f)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cur = f.clone();
    let mut distances = vec![cur.l2_distance(&target)];
    let mut planes = Vec::with_capacity(steps);
    for _ in 0..steps {
        let axis = rng.gen_range(0..g.dim());
        let (lo, hi) = support_range(&cur, axis);
        // candidate planes 2·offset/h ∈ [2·lo, 2·hi] \ {0}
        let twice = loop {
            let k = rng.gen_range(2 * lo..=2 * hi);
            if k != 0 {
                break k;
            }
            if lo == hi {
                break 1;
            }
        };
        let offset = twice as f64 * g.h() / 2.0;
        // the origin lies on the + side iff offset < 0
        let side = if twice < 0 { Side::Plus } else { Side::Minus };
        cur = polarize(&cur, axis, offset, side)?;
        distances.push(cur.l2_distance(&target));
        planes.push((axis, offset));
    }
    Ok(FlowTrace { distances, planes })
}

fn support_range(f: &GridFunction, axis: usize) -> (i64, i64) {
    let g = f.grid();
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    for c in 0..g.len() {
        if f.at(c) > 0.0 {
            let k = g.coords(c)[axis];
            lo = lo.min(k);
            hi = hi.max(k);
        }
    }
    if lo > hi {
        (0, 0)
    } else {
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridfn::{distribution, superlevel};

    fn grid(h: f64, half: f64) -> Grid {
        Grid::centered(2, h, half).unwrap()
    }

    fn blob(g: Grid, seed: u64) -> GridFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let centres: Vec<(f64, f64, f64)> = (0..4).map(|_| (rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4), rng.gen_range(0.2..1.0))).collect();
        GridFunction::from_fn(g, |x| {
            centres.iter().map(|&(cx, cy, a)| a * (0.5 - (x[0] - cx).hypot(x[1] - cy)).max(0.0)).sum()
        })
        .unwrap()
    }

    #[test]
    fn sym_decreasing_picks_nearest_cells() {
        let g = grid(0.1, 1.0);
        let five = GridSet::from_indices(g, [0 + 3 * 21 + 3, 50, 77, 120, 200]);
        let out = apply_set(&Rearrangement::sym_decreasing(2), &five).unwrap();
        let o = g.cell_near(&[0.0, 0.0]).unwrap();
        // origin, then the four axis neighbours
        let want = [o, o - 21, o - 1, o + 1, o + 21];
        assert_eq!(out, GridSet::from_indices(g, want));
    }

    #[test]
    fn value_transport_is_equimeasurable() {
        let g = grid(0.05, 1.0);
        let f = blob(g, 1);
        let kinds = [
            Rearrangement::sym_decreasing(2),
            Rearrangement::Steiner { axis: 0, center: 0.0 },
            Rearrangement::Steiner { axis: 1, center: 0.1 },
            Rearrangement::Polarization { axis: 1, offset: 0.025, positive_side: Side::Minus },
        ];
        for t in &kinds {
            let tf = apply(t, &f).unwrap();
            assert_eq!(tf.sorted_values(), f.sorted_values(), "{}", t.name());
            assert_eq!(distribution(&tf), distribution(&f));
        }
    }

    #[test]
    fn level_sets_commute_and_layer_cake_agrees() {
        let g = grid(0.05, 1.0);
        let f = blob(g, 2);
        let kinds = [
            Rearrangement::sym_decreasing(2),
            Rearrangement::Steiner { axis: 1, center: 0.0 },
            Rearrangement::Polarization { axis: 0, offset: -0.1, positive_side: Side::Plus },
            Rearrangement::Composite(vec![Rearrangement::Steiner { axis: 0, center: 0.0 }, Rearrangement::Steiner { axis: 1, center: 0.0 }]),
        ];
        for t in &kinds {
            let tf = apply(t, &f).unwrap();
            let map = t.set_map(&g).unwrap();
            for &level in f.distinct_values_desc().iter().step_by(97) {
                if level > 0.0 {
                    assert_eq!(superlevel(&tf, level), map.apply(&superlevel(&f, level)).unwrap(), "{}", t.name());
                }
            }
            assert!(layer_cake_reconstruct(&map, &f).unwrap() == tf, "{}", t.name());
        }
    }

    #[test]
    fn kschwarz_levels_are_homothets() {
        let g = grid(0.025, 1.0);
        let f = blob(g, 4);
        let k = ConvexBody::regular_polygon(6, 1.0, 0.0).unwrap();
        let t = Rearrangement::KSchwarz { body: k.clone() };
        let tf = apply(&t, &f).unwrap();
        // a nonincreasing function of the gauge
        let mut cells: Vec<usize> = (0..g.len()).collect();
        cells.sort_by(|&a, &b| k.gauge_of(&g.center(a)[..2]).total_cmp(&k.gauge_of(&g.center(b)[..2])));
        for w in cells.windows(2) {
            assert!(tf.at(w[1]) <= tf.at(w[0]) + 1e-15);
        }
        assert_eq!(tf.max(), f.max());
        // level sets match the set map up to a rim of cells
        let (df, dt) = (distribution(&f), distribution(&tf));
        let map = t.set_map(&g).unwrap();
        for &level in f.distinct_values_desc().iter().step_by(211) {
            let want = map.apply(&superlevel(&f, level)).unwrap();
            let got = superlevel(&tf, level);
            let rim = 6.0 * (want.measure() / k.volume()).sqrt();
            assert!((got.measure() - want.measure()).abs() <= 2.0 * g.h() * rim, "{level}");
            assert!((df.at(level) - dt.at(level)).abs() <= 2.0 * g.h() * rim);
        }
    }

    #[test]
    fn polarization_basics() {
        let g = grid(0.1, 1.0);
        let right = GridFunction::from_fn(g, |x| (0.3 - (x[0] - 0.5).hypot(x[1])).max(0.0)).unwrap();
        assert_eq!(polarize(&right, 0, 0.05, Side::Plus).unwrap(), right);
        let left = GridFunction::from_fn(g, |x| (0.3 - (x[0] + 0.4).hypot(x[1])).max(0.0)).unwrap();
        let moved = polarize(&left, 0, 0.05, Side::Plus).unwrap();
        let mirrored = GridFunction::from_fn(g, |x| (0.3 - (0.1 - x[0] + 0.4).hypot(x[1])).max(0.0)).unwrap();
        assert!(moved.sup_distance(&mirrored) < 1e-12);
        let p = polarize(&left, 1, 0.3, Side::Minus).unwrap();
        assert_eq!(polarize(&p, 1, 0.3, Side::Minus).unwrap(), p);
        assert!(matches!(polarize(&left, 0, 0.03, Side::Plus), Err(Error::InvalidGrid(_))));
        let sym = GridSet::from_fn(g, |x| x[0].hypot(x[1]) < 0.5);
        let t = Rearrangement::Polarization { axis: 0, offset: 0.0, positive_side: Side::Minus };
        assert_eq!(apply_set(&t, &sym).unwrap(), sym);
    }

    #[test]
    fn margin_overflow_is_reported() {
        let g = grid(0.1, 1.0);
        let wide = GridFunction::from_fn(g, |x| if x[0] > 0.5 && x[0] < 0.95 && x[1].abs() < 0.9 { 1.0 } else { 0.0 }).unwrap();
        assert!(matches!(polarize(&wide, 0, -0.6, Side::Minus), Err(Error::MarginOverflow(_))));
        let big = GridSet::from_fn(g, |x| x[0].abs() < 0.95 && x[1].abs() < 0.95);
        assert!(matches!(apply_set(&Rearrangement::KSchwarz { body: ConvexBody::unit_ball(2) }, &big), Err(Error::MarginOverflow(_))));
    }

    #[test]
    fn kschwarz_of_cone_is_the_pyramid() {
        let h = 4.0 / 256.0;
        let g = grid(h, 2.0);
        let cone = GridFunction::from_fn(g, |x| 1.0 - x[0].hypot(x[1])).unwrap();
        let k = ConvexBody::square_of_area_pi();
        let tf = apply(&Rearrangement::KSchwarz { body: k.clone() }, &cone).unwrap();
        let pyramid = GridFunction::from_fn(g, |x| 1.0 - k.gauge_of(x)).unwrap();
        assert!(tf.sup_distance(&pyramid) <= 2.0 * h, "{}", tf.sup_distance(&pyramid));
        // radial already; equal lattice distances may differ by an ulp in hypot
        let tf = apply(&Rearrangement::sym_decreasing(2), &cone).unwrap();
        assert!(tf.sup_distance(&cone) < 1e-12);
    }

    #[test]
    fn polarization_flow_decreases_distance() {
        let g = grid(0.05, 1.0);
        let f = blob(g, 3);
        let trace = polarization_flow(&f, 200, 42).unwrap();
        assert_eq!(trace.distances.len(), 201);
        for w in trace.distances.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        assert!(trace.distances[200] < trace.distances[0]);
        assert_eq!(polarization_flow(&f, 200, 42).unwrap(), trace);
        let sharp = apply(&Rearrangement::sym_decreasing(2), &f).unwrap();
        let fixed = polarization_flow(&sharp, 50, 7).unwrap();
        assert!(fixed.distances.iter().all(|&d| d == 0.0));
    }
}
