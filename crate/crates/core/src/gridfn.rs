//! Operations on grid functions and grid sets: level sets, distributions,
//! finite-difference energies, moduli of continuity, and Minkowski-content
//! estimators in ℝⁿ and for subgraphs in ℝⁿ⁺¹.

use crate::convex::{dilate_set, Body, ConvexBody};
use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSet};
use crate::morph::{self, StructuringElement};
use crate::par;
use crate::young::YoungFunction;
use serde::Serialize;

/// Default cap on subgraph voxel lattices (192³).
pub const VOXEL_BUDGET: usize = 192 * 192 * 192;

/// Cells with `f ≥ t`.
pub fn superlevel(f: &GridFunction, t: f64) -> GridSet {
    GridSet::new(*f.grid(), f.values().iter().map(|&v| v >= t).collect()).expect("same grid")
}

/// Cells with `f > t`.
pub fn strict_superlevel(f: &GridFunction, t: f64) -> GridSet {
    GridSet::new(*f.grid(), f.values().iter().map(|&v| v > t).collect()).expect("same grid")
}

pub fn measure(a: &GridSet) -> f64 {
    a.measure()
}

/// Distribution function `t ↦ |{f > t}|`, tabulated at the distinct values of `f`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Distribution {
    /// Distinct values of `f`, increasing.
    pub levels: Vec<f64>,
    /// `|{f > levels[i]}|`.
    pub measures: Vec<f64>,
    /// Measure of the whole grid, `|{f > t}|` for `t` below every value.
    pub total: f64,
}

impl Distribution {
    /// `|{f > t}|` for any `t` (right-continuous step function).
    pub fn at(&self, t: f64) -> f64 {
        let k = self.levels.partition_point(|&v| v <= t);
        if k == 0 {
            self.total
        } else {
            self.measures[k - 1]
        }
    }
}

pub fn distribution(f: &GridFunction) -> Distribution {
    let sorted = f.sorted_values();
    let cell = f.grid().cell_volume();
    let n = sorted.len();
    let mut levels = Vec::new();
    let mut measures = Vec::new();
    let mut k = 0;
    while k < n {
        let v = sorted[k];
        let mut e = k;
        while e < n && sorted[e] == v {
            e += 1;
        }
        levels.push(v);
        measures.push((n - e) as f64 * cell);
        k = e;
    }
    Distribution { levels, measures, total: n as f64 * cell }
}

/// Nearest midpoint between consecutive distinct values of `f` to `a`, so that
/// `{f = level}` is empty.
pub fn snap_level(f: &GridFunction, a: f64) -> Result<f64> {
    let mut vals = f.distinct_values_desc();
    vals.reverse();
    vals.windows(2)
        .map(|w| 0.5 * (w[0] + w[1]))
        .filter(|&m| m > 0.0)
        .min_by(|x, y| (x - a).abs().total_cmp(&(y - a).abs()))
        .ok_or(Error::EmptySet)
}

/// Forward-difference gradient per cell (values beyond the grid are 0).
pub fn gradient(f: &GridFunction) -> Vec<[f64; 2]> {
    let g = *f.grid();
    let [n0, n1] = g.shape();
    let h = g.h();
    let v = f.values();
    let rows: Vec<Vec<[f64; 2]>> = par::map_range(n1, |j| {
        (0..n0)
            .map(|i| {
                let c = g.flat(i, j);
                let right = if i + 1 < n0 { v[c + 1] } else { 0.0 };
                let up = if g.dim() == 2 && j + 1 < n1 { v[c + n0] } else { 0.0 };
                let dy = if g.dim() == 2 { (up - v[c]) / h } else { 0.0 };
                [(right - v[c]) / h, dy]
            })
            .collect()
    });
    rows.concat()
}

/// Integrand argument: `‖∇f‖`, or `h_{−K}(∇f) = h_K(−∇f)` for anisotropic energies.
#[inline]
fn grad_norm(grad: [f64; 2], dim: usize, k: Option<&ConvexBody>) -> f64 {
    match k {
        None => grad[0].hypot(grad[1]),
        Some(k) => {
            let neg = [-grad[0], -grad[1]];
            k.support_of(&neg[..dim]).max(0.0)
        }
    }
}

/// `Σ Φ(‖∇f‖)·hⁿ` (or `Φ(h_{−K}(∇f))` with `K`); `∞` propagates.
pub fn gradient_energy(f: &GridFunction, phi: &YoungFunction, k: Option<&ConvexBody>) -> f64 {
    gradient_energy_above(f, phi, k, None)
}

/// As [`gradient_energy`], restricted to `{f ≥ a}` when `level = Some(a)`.
pub fn gradient_energy_above(f: &GridFunction, phi: &YoungFunction, k: Option<&ConvexBody>, level: Option<f64>) -> f64 {
    let g = *f.grid();
    let grad = gradient(f);
    let [n0, n1] = g.shape();
    let v = f.values();
    let total = par::sum_rows(n1, |j| {
        let mut acc = 0.0;
        for c in g.flat(0, j)..g.flat(0, j) + n0 {
            if level.is_some_and(|a| v[c] < a) {
                continue;
            }
            acc += phi.value(grad_norm(grad[c], g.dim(), k));
        }
        acc
    });
    total * g.cell_volume()
}

/// The `p = ∞` energy: `max ‖∇f‖` (or `max h_{−K}(∇f)`) over cells.
pub fn gradient_sup(f: &GridFunction, k: Option<&ConvexBody>) -> f64 {
    let g = *f.grid();
    let grad = gradient(f);
    par::max_range(grad.len(), 0.0, |c| grad_norm(grad[c], g.dim(), k))
}

/// Largest difference quotient `|f(x) − f(y)| / |x − y|` over axis and diagonal
/// neighbours (values beyond the grid are 0): the grid Lipschitz constant used in
/// tolerances. Never exceeds the Lipschitz constant of a sampled function.
pub fn lipschitz(f: &GridFunction) -> f64 {
    let g = *f.grid();
    let v = f.values();
    let offsets: &[[i64; 2]] = if g.dim() == 1 { &[[1, 0]] } else { &[[1, 0], [0, 1], [1, 1], [1, -1]] };
    par::max_range(g.len(), 0.0, |c| {
        let k = g.coords(c);
        offsets
            .iter()
            .map(|o| {
                let other = g.cell_at([k[0] + o[0], k[1] + o[1]]).map_or(0.0, |n| v[n]);
                let len = ((o[0] * o[0] + o[1] * o[1]) as f64).sqrt() * g.h();
                (v[c] - other).abs() / len
            })
            .fold(0.0, f64::max)
    })
}

/// `Σ_{f ≥ a} √(1 + ‖∇f‖²)·hⁿ`.
pub fn graph_area(f: &GridFunction, a: f64) -> f64 {
    gradient_energy_above(f, &YoungFunction::SqrtShift, None, Some(a)) + superlevel(f, a).measure()
}

/// `ω_{K,d}(f) = max{|f(x) − f(y)| : ‖x − y‖_K ≤ d}` over lattice points, with `f`
/// extended by zero beyond the grid.
///
/// Computed exactly as `max_x [f(x) − min{f(y) : x − y ∈ dK or y − x ∈ dK}]`,
/// the inner minimum being two flat erosions with the lattice points of `dK`.
pub fn modulus(f: &GridFunction, k: &ConvexBody, d: f64) -> Result<f64> {
    let g = *f.grid();
    if k.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), got: k.dim() });
    }
    let se = StructuringElement::from_body(k, d, g.h());
    if se.len() <= 1 {
        return Err(Error::Unresolvable(format!("d = {d} resolves no lattice offset at h = {}", g.h())));
    }
    let dims = g.dims3();
    let lo = morph::filter(f.values(), dims, &se, 0.0, f64::INFINITY, morph::min_f64);
    let lo_rev = morph::filter(f.values(), dims, &se.reflected(), 0.0, f64::INFINITY, morph::min_f64);
    let v = f.values();
    Ok(par::max_range(v.len(), 0.0, |c| v[c] - lo[c].min(lo_rev[c])))
}

/// `f_A(x) = (d − d_K(x, A))⁺` with `d_K(x, A) = min_{a ∈ A} ‖x − a‖_K`.
pub fn kcontraction_test_fn(a: &GridSet, k: &ConvexBody, d: f64) -> Result<GridFunction> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let g = *a.grid();
    let support = dilate_set(a, k, d)?;
    let members: Vec<[i64; 2]> = a.indices().map(|c| g.coords(c)).collect();
    let h = g.h();
    let dim = g.dim();
    let values = par::map_range(g.len(), |c| {
        if a.contains(c) {
            return d;
        }
        if !support.contains(c) {
            return 0.0;
        }
        let x = g.coords(c);
        let dist = members
            .iter()
            .map(|m| {
                let z = [(x[0] - m[0]) as f64 * h, (x[1] - m[1]) as f64 * h];
                k.gauge_of(&z[..dim])
            })
            .fold(f64::INFINITY, f64::min);
        (d - dist).max(0.0)
    });
    GridFunction::new(g, values)
}

/// How a content value is extracted from the dilation measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Extrapolation {
    /// Quotient at the smallest `ε`.
    None,
    /// `D′(0)` of the least-squares polynomial `D(ε) ≈ c₀ + c₁ε + … + c_nεⁿ`
    /// (`n` = ambient dimension, capped by the number of radii minus one) fitted
    /// to the dilation measures. The free `c₀` absorbs the lattice bias of the
    /// dilated measure, which otherwise dominates `(D(ε) − D(0))/ε` at small `ε`.
    Richardson,
    /// Intercept of a least-squares fit in the effective radius `r(ε)` of
    /// `(D(ε) − D(0) − |E_ε|) / r(ε)`, where `E_ε` is the lattice element for `εC`.
    /// Removing `|E_ε|` drops the top Steiner term; what remains is affine in `r`
    /// for convex sets in the plane and in space (degree `n − 2`). Used for
    /// subgraph voxels, whose normals spread over the sphere; for sets with
    /// axis-aligned normals the mean support misjudges the element.
    Steiner,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContentEstimate {
    pub value: f64,
    /// Strictly decreasing radii.
    pub epsilons: Vec<f64>,
    /// Mean support of the lattice element relative to `C`, per radius.
    pub effective_radii: Vec<f64>,
    /// `(measure(A ⊕ εC) − measure(A)) / ε` per radius.
    pub quotients: Vec<f64>,
    pub base_measure: f64,
    pub dilated_measures: Vec<f64>,
    pub extrapolation: Extrapolation,
}

fn validate_eps(eps: &[f64], h: f64) -> Result<Vec<f64>> {
    let mut e = eps.to_vec();
    e.sort_by(|a, b| b.total_cmp(a));
    e.dedup();
    if e.is_empty() {
        return Err(Error::InvalidGrid("no dilation radii given".into()));
    }
    if let Some(bad) = e.iter().find(|&&x| !(x >= 2.0 * h * (1.0 - 1e-9))) {
        return Err(Error::Unresolvable(format!("radius {bad} is below 2h = {}", 2.0 * h)));
    }
    Ok(e)
}

/// Nominal radius, effective radius and element measure for each dilation.
struct Element {
    eps: f64,
    radius: f64,
    measure: f64,
}

fn element<B: Body + ?Sized>(c: &B, eps: f64, h: f64) -> (StructuringElement, Element) {
    let se = StructuringElement::from_body(c, eps, h);
    let info = Element { eps, radius: se.effective_radius(c, h), measure: se.len() as f64 * h.powi(c.dim() as i32) };
    (se, info)
}

fn estimate(base: f64, elements: Vec<Element>, dilated: Vec<f64>, dim: usize, mode: Extrapolation) -> ContentEstimate {
    let eps: Vec<f64> = elements.iter().map(|e| e.eps).collect();
    let quotients: Vec<f64> = eps.iter().zip(&dilated).map(|(e, m)| (m - base) / e).collect();
    let radii: Vec<f64> = elements.iter().map(|e| e.radius).collect();
    let (value, extrapolation) = if dim < 2 || eps.len() == 1 {
        (*quotients.last().expect("nonempty"), Extrapolation::None)
    } else if mode == Extrapolation::Richardson {
        (fit_coefficient(&eps, &dilated, dim.min(eps.len() - 1), 1), Extrapolation::Richardson)
    } else {
        let reduced: Vec<f64> = elements.iter().zip(&dilated).map(|(e, m)| (m - base - e.measure) / e.radius).collect();
        let degree = (dim - 2).min(eps.len() - 1);
        (fit_coefficient(&radii, &reduced, degree, 0), Extrapolation::Steiner)
    };
    ContentEstimate { value, epsilons: eps, effective_radii: radii, quotients, base_measure: base, dilated_measures: dilated, extrapolation }
}

/// Coefficient of `x^power` in the least-squares polynomial of the given degree through `(x, y)`.
fn fit_coefficient(x: &[f64], y: &[f64], degree: usize, power: usize) -> f64 {
    let scale = x.iter().copied().fold(0.0, f64::max);
    let m = degree + 1;
    let mut a = vec![vec![0.0; m + 1]; m];
    for (&xi, &yi) in x.iter().zip(y) {
        let t = xi / scale;
        let pows: Vec<f64> = (0..m).map(|k| t.powi(k as i32)).collect();
        for r in 0..m {
            for c in 0..m {
                a[r][c] += pows[r] * pows[c];
            }
            a[r][m] += pows[r] * yi;
        }
    }
    // Gauss-Jordan with partial pivoting on the normal equations
    for col in 0..m {
        let piv = (col..m).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs())).expect("nonempty");
        a.swap(col, piv);
        for r in 0..m {
            if r != col {
                let factor = a[r][col] / a[col][col];
                for c in col..=m {
                    a[r][c] -= factor * a[col][c];
                }
            }
        }
    }
    a[power][m] / a[power][power] / scale.powi(power as i32)
}

/// Outer Minkowski content of `A` with respect to `C` from the dilations `A ⊕ εC`.
pub fn outer_minkowski_content(a: &GridSet, c: &ConvexBody, eps: &[f64]) -> Result<ContentEstimate> {
    let g = *a.grid();
    let eps = validate_eps(eps, g.h())?;
    let elements: Vec<Element> = eps.iter().map(|&e| element(c, e, g.h()).1).collect();
    let dilated = eps.iter().map(|&e| dilate_set(a, c, e).map(|s| s.measure())).collect::<Result<Vec<_>>>()?;
    Ok(estimate(a.measure(), elements, dilated, g.dim(), Extrapolation::Richardson))
}

/// Voxelised subgraph `K_f ∩ {x_{n+1} ≥ a}` on the lattice `h·ℤⁿ⁺¹` shifted so that
/// level `k` sits at height `a + k·h`; voxel `(x, k)` is filled iff `a + k·h ≤ f(x)`.
/// The lattice is cropped to the bounding box of `{f ≥ a}` plus `pad` cells per side.
#[derive(Clone, Debug, PartialEq)]
pub struct Voxels {
    /// Lattice shape, axis 0 fastest; the vertical axis is axis `n`.
    pub dims: [usize; 3],
    pub cells: Vec<u8>,
    pub h: f64,
    pub dim: usize,
}

impl Voxels {
    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&v| v != 0).count()
    }

    pub fn measure(&self) -> f64 {
        self.count() as f64 * self.h.powi(self.dim as i32)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// `V ⊕ SE`, with an error if the dilation reaches the lattice boundary.
    pub fn dilate(&self, se: &StructuringElement) -> Result<Voxels> {
        let cells = morph::dilate_binary(&self.cells, self.dims, se);
        let out = Voxels { dims: self.dims, cells, h: self.h, dim: self.dim };
        if out.touches_boundary() {
            return Err(Error::MarginOverflow("subgraph dilation reaches the voxel lattice boundary".into()));
        }
        Ok(out)
    }

    fn touches_boundary(&self) -> bool {
        let [n0, n1, n2] = self.dims;
        let used = self.dim;
        (0..self.cells.len()).any(|c| {
            if self.cells[c] == 0 {
                return false;
            }
            let idx = [c % n0, (c / n0) % n1, c / (n0 * n1)];
            let n = [n0, n1, n2];
            (0..used).any(|k| idx[k] == 0 || idx[k] + 1 == n[k])
        })
    }
}

/// Builds [`Voxels`] for `f` above level `a`, padded by `pad` cells on every side.
pub fn subgraph_voxels(f: &GridFunction, a: f64, pad: usize, budget: usize) -> Result<Voxels> {
    let g = *f.grid();
    let v = f.values();
    let h = g.h();
    let above = superlevel(f, a);
    if above.is_empty() {
        return Err(Error::EmptySet);
    }
    let (mut i0, mut i1, mut j0, mut j1) = (usize::MAX, 0, usize::MAX, 0);
    for c in above.indices() {
        let (i, j) = g.unflat(c);
        i0 = i0.min(i);
        i1 = i1.max(i);
        j0 = j0.min(j);
        j1 = j1.max(j);
    }
    let levels = ((f.max() - a) / h + 1e-9).floor() as usize + 1;
    let wx = i1 - i0 + 1 + 2 * pad;
    let (wy, wz) = if g.dim() == 2 { (j1 - j0 + 1 + 2 * pad, levels + 2 * pad) } else { (levels + 2 * pad, 1) };
    let needed = wx * wy * wz;
    if needed > budget {
        return Err(Error::VoxelBudget { needed, budget });
    }
    let mut cells = vec![0u8; needed];
    // height index of the top filled voxel per column, or none
    let top = |i: usize, j: usize| -> Option<usize> {
        let val = v[g.flat(i, j)];
        if val >= a {
            Some(((val - a) / h + 1e-12).floor() as usize)
        } else {
            None
        }
    };
    for (ci, i) in (i0..=i1).enumerate() {
        for (cj, j) in (j0..=j1).enumerate() {
            if let Some(t) = top(i, j) {
                for k in 0..=t {
                    let idx = if g.dim() == 2 {
                        (ci + pad) + wx * ((cj + pad) + wy * (k + pad))
                    } else {
                        (ci + pad) + wx * (k + pad)
                    };
                    cells[idx] = 1;
                }
            }
        }
    }
    Ok(Voxels { dims: [wx, wy, wz], cells, h, dim: g.dim() + 1 })
}

/// Measure of `(K_f ∩ {x_{n+1} ≥ a}) ⊕ dC` on the voxel lattice.
pub fn subgraph_dilation_measure<B: Body + ?Sized>(f: &GridFunction, a: f64, c: &B, d: f64, budget: usize) -> Result<f64> {
    check_subgraph_body(f, c)?;
    let se = StructuringElement::from_body(c, d, f.grid().h());
    let pad = se.reach().into_iter().max().unwrap_or(0) as usize + 1;
    let vox = subgraph_voxels(f, a, pad, budget)?;
    Ok(vox.dilate(&se)?.measure())
}

fn check_subgraph_body<B: Body + ?Sized>(f: &GridFunction, c: &B) -> Result<()> {
    let want = f.grid().dim() + 1;
    if c.dim() != want {
        return Err(Error::DimensionMismatch { expected: want, got: c.dim() });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubgraphContent {
    pub dilation: ContentEstimate,
    pub graph_integral: f64,
}

/// Radii used for subgraph contents when the caller does not supply any.
pub fn default_subgraph_eps(h: f64) -> Vec<f64> {
    [16.0, 14.0, 12.0, 10.0, 8.0, 6.0, 5.0, 4.0, 3.0, 2.0].iter().map(|k| k * h).collect()
}

/// `Σ_{f > a} h_C(−∇f, 1)·hⁿ + h_C(0, −1)·|{f ≥ a}|`.
pub fn graph_integral<B: Body + ?Sized>(f: &GridFunction, a: f64, c: &B) -> Result<f64> {
    check_subgraph_body(f, c)?;
    let g = *f.grid();
    let n = g.dim();
    let grad = gradient(f);
    let v = f.values();
    let [n0, n1] = g.shape();
    let top = par::sum_rows(n1, |j| {
        let mut acc = 0.0;
        let mut x = [0.0; 3];
        for c_idx in g.flat(0, j)..g.flat(0, j) + n0 {
            if v[c_idx] > a {
                x[0] = -grad[c_idx][0];
                x[1] = -grad[c_idx][1];
                x[n] = 1.0;
                acc += c.support_of(&x[..n + 1]);
            }
        }
        acc
    });
    let mut down = [0.0; 3];
    down[n] = -1.0;
    Ok(top * g.cell_volume() + c.support_of(&down[..n + 1]) * superlevel(f, a).measure())
}

/// Both estimators of the anisotropic outer Minkowski content of the subgraph above `a`.
pub fn subgraph_content<B: Body + ?Sized>(f: &GridFunction, a: f64, c: &B, eps: &[f64], budget: usize) -> Result<SubgraphContent> {
    check_subgraph_body(f, c)?;
    let h = f.grid().h();
    let eps = validate_eps(eps, h)?;
    let reach = StructuringElement::from_body(c, eps[0], h).reach().into_iter().max().unwrap_or(0) as usize;
    let vox = subgraph_voxels(f, a, reach + 1, budget)?;
    let base = vox.measure();
    let mut elements = Vec::with_capacity(eps.len());
    let mut dilated = Vec::with_capacity(eps.len());
    for &e in &eps {
        let (se, info) = element(c, e, h);
        dilated.push(vox.dilate(&se)?.measure());
        elements.push(info);
    }
    Ok(SubgraphContent { dilation: estimate(base, elements, dilated, vox.dim, Extrapolation::Steiner), graph_integral: graph_integral(f, a, c)? })
}
