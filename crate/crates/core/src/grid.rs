//! Uniform grids over ℝ¹ and ℝ², and the discrete sets and functions that live on them.
//!
//! Cell centres sit at integer multiples of the spacing `h`, so the origin is always a
//! cell centre. A grid is described by its spacing and an inclusive index range per
//! axis; `extent` in scenario files is converted with [`Grid::from_extent`].
//! Storage is row-major with axis 0 (the column index `i`) fastest; in 1D there is a
//! single row.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    h: f64,
    /// Index of the first cell per axis; cell `i` on axis `k` is centred at `(lo[k] + i)·h`.
    lo: [i64; 2],
    n: [usize; 2],
}

impl Grid {
    pub fn new(dim: usize, h: f64, lo: [i64; 2], n: [usize; 2]) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidGrid(format!("grid dimension must be 1 or 2, got {dim}")));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {h}")));
        }
        let n = if dim == 1 { [n[0], 1] } else { n };
        let lo = if dim == 1 { [lo[0], 0] } else { lo };
        if n[0] < 3 || n[1] < if dim == 1 { 1 } else { 3 } {
            return Err(Error::InvalidGrid("grid needs at least 3 cells per axis".into()));
        }
        Ok(Self { dim, h, lo, n })
    }

    /// Grid whose cell centres are the multiples of `h` inside `extent[k] = [min, max]`.
    /// Both ends must be multiples of `h` (relative tolerance 1e-9).
    pub fn from_extent(h: f64, extent: &[[f64; 2]]) -> Result<Self> {
        let dim = extent.len();
        let mut lo = [0i64; 2];
        let mut n = [1usize; 2];
        for (k, &[a, b]) in extent.iter().enumerate().take(2) {
            if !(b > a) {
                return Err(Error::InvalidGrid(format!("empty extent on axis {k}: [{a}, {b}]")));
            }
            let ia = snap(a / h).ok_or_else(|| Error::InvalidGrid(format!("h = {h} does not divide extent bound {a}")))?;
            let ib = snap(b / h).ok_or_else(|| Error::InvalidGrid(format!("h = {h} does not divide extent bound {b}")))?;
            lo[k] = ia;
            n[k] = (ib - ia + 1) as usize;
        }
        Self::new(dim, h, lo, n)
    }

    /// Square grid `[-half, half]^dim`.
    pub fn centered(dim: usize, h: f64, half: f64) -> Result<Self> {
        Self::from_extent(h, &vec![[-half, half]; dim])
    }

    /// Same physical extent at spacing `h / 2`.
    pub fn refined(&self) -> Self {
        let lo = [self.lo[0] * 2, self.lo[1] * 2];
        let n = [self.n[0] * 2 - 1, if self.dim == 1 { 1 } else { self.n[1] * 2 - 1 }];
        Self { dim: self.dim, h: self.h / 2.0, lo, n }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn shape(&self) -> [usize; 2] {
        self.n
    }

    pub fn lo(&self) -> [i64; 2] {
        self.lo
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cell volume `hⁿ`.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    pub fn dims3(&self) -> [usize; 3] {
        [self.n[0], self.n[1], 1]
    }

    #[inline]
    pub fn flat(&self, i: usize, j: usize) -> usize {
        j * self.n[0] + i
    }

    #[inline]
    pub fn unflat(&self, c: usize) -> (usize, usize) {
        (c % self.n[0], c / self.n[0])
    }

    /// Integer lattice coordinates of cell `c` (centre = coords · h).
    #[inline]
    pub fn coords(&self, c: usize) -> [i64; 2] {
        let (i, j) = self.unflat(c);
        [self.lo[0] + i as i64, self.lo[1] + j as i64]
    }

    #[inline]
    pub fn center(&self, c: usize) -> [f64; 2] {
        let k = self.coords(c);
        [k[0] as f64 * self.h, k[1] as f64 * self.h]
    }

    /// Centre as a `dim`-length slice-compatible vector.
    pub fn center_vec(&self, c: usize) -> Vec<f64> {
        self.center(c)[..self.dim].to_vec()
    }

    /// Cell with the given lattice coordinates, if inside the grid.
    pub fn cell_at(&self, k: [i64; 2]) -> Option<usize> {
        let i = k[0] - self.lo[0];
        let j = if self.dim == 1 { 0 } else { k[1] - self.lo[1] };
        if self.dim == 1 && k[1] != 0 {
            return None;
        }
        if i < 0 || j < 0 || i >= self.n[0] as i64 || j >= self.n[1] as i64 {
            return None;
        }
        Some(self.flat(i as usize, j as usize))
    }

    /// Cell whose centre is nearest to the point `x`, if inside the grid.
    pub fn cell_near(&self, x: &[f64]) -> Option<usize> {
        let k0 = (x[0] / self.h).round() as i64;
        let k1 = if self.dim == 2 { (x[1] / self.h).round() as i64 } else { 0 };
        self.cell_at([k0, k1])
    }

    /// Number of cells between `c` and the nearest grid edge (0 for edge cells).
    pub fn edge_distance(&self, c: usize) -> usize {
        let (i, j) = self.unflat(c);
        let dx = i.min(self.n[0] - 1 - i);
        if self.dim == 1 {
            dx
        } else {
            dx.min(j.min(self.n[1] - 1 - j))
        }
    }

    pub fn same_geometry(&self, other: &Grid) -> bool {
        self == other
    }
}

fn snap(x: f64) -> Option<i64> {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        Some(r as i64)
    } else {
        None
    }
}

/// Binary set on a grid: the discrete stand-in for a measurable set of finite measure.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSet {
    grid: Grid,
    cells: Vec<bool>,
}

impl GridSet {
    pub fn new(grid: Grid, cells: Vec<bool>) -> Result<Self> {
        if cells.len() != grid.len() {
            return Err(Error::InvalidGrid(format!("{} membership flags for {} cells", cells.len(), grid.len())));
        }
        Ok(Self { grid, cells })
    }

    pub fn empty(grid: Grid) -> Self {
        Self { grid, cells: vec![false; grid.len()] }
    }

    /// Cells whose centre satisfies `pred`.
    pub fn from_fn(grid: Grid, pred: impl Fn(&[f64]) -> bool) -> Self {
        let cells = (0..grid.len()).map(|c| pred(&grid.center(c)[..grid.dim()])).collect();
        Self { grid, cells }
    }

    pub fn from_indices(grid: Grid, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(grid);
        for c in idx {
            s.cells[c] = true;
        }
        s
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    #[inline]
    pub fn contains(&self, c: usize) -> bool {
        self.cells[c]
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|&b| b)
    }

    /// Discrete measure `count · hⁿ`.
    pub fn measure(&self) -> f64 {
        self.count() as f64 * self.grid.cell_volume()
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.cells.iter().enumerate().filter(|(_, &b)| b).map(|(c, _)| c)
    }

    pub fn is_subset(&self, other: &GridSet) -> bool {
        self.cells.iter().zip(&other.cells).all(|(&a, &b)| !a || b)
    }

    pub fn union(&self, other: &GridSet) -> GridSet {
        let cells = self.cells.iter().zip(&other.cells).map(|(&a, &b)| a || b).collect();
        GridSet { grid: self.grid, cells }
    }

    pub fn intersection(&self, other: &GridSet) -> GridSet {
        let cells = self.cells.iter().zip(&other.cells).map(|(&a, &b)| a && b).collect();
        GridSet { grid: self.grid, cells }
    }

    /// Smallest distance (in cells) between a member and the grid edge; `None` when empty.
    pub fn margin(&self) -> Option<usize> {
        self.indices().map(|c| self.grid.edge_distance(c)).min()
    }

    pub fn to_u8(&self) -> Vec<u8> {
        self.cells.iter().map(|&b| b as u8).collect()
    }

    /// Indicator function `1_A`.
    pub fn indicator(&self) -> GridFunction {
        GridFunction {
            grid: self.grid,
            values: self.cells.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        }
    }

    /// Members with at least one 4-neighbour (or grid edge) outside the set.
    pub fn boundary_cells(&self) -> Vec<usize> {
        let g = &self.grid;
        let [n0, n1] = g.shape();
        self.indices()
            .filter(|&c| {
                let (i, j) = g.unflat(c);
                let mut nb = vec![];
                if i > 0 { nb.push(g.flat(i - 1, j)); }
                if i + 1 < n0 { nb.push(g.flat(i + 1, j)); }
                if g.dim() == 2 {
                    if j > 0 { nb.push(g.flat(i, j - 1)); }
                    if j + 1 < n1 { nb.push(g.flat(i, j + 1)); }
                }
                nb.len() < 2 * g.dim() || nb.iter().any(|&d| !self.cells[d])
            })
            .collect()
    }
}

/// Nonnegative function on a grid, zero on the outermost ring of cells.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!("{} values for {} cells", values.len(), grid.len())));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidGrid(format!("grid function values must be finite and nonnegative, got {v}")));
        }
        let f = Self { grid, values };
        if f.support_margin().is_some_and(|m| m == 0) {
            return Err(Error::MarginOverflow("function support touches the grid edge".into()));
        }
        Ok(f)
    }

    /// Samples `f` at cell centres; negative samples are clamped to 0.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|c| f(&grid.center(c)[..grid.dim()]).max(0.0)).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, c: usize) -> f64 {
        self.values[c]
    }

    /// Value at the cell centred nearest to `x` (0 outside the grid).
    pub fn value_near(&self, x: &[f64]) -> f64 {
        self.grid.cell_near(x).map_or(0.0, |c| self.values[c])
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn support(&self) -> GridSet {
        GridSet { grid: self.grid, cells: self.values.iter().map(|&v| v > 0.0).collect() }
    }

    /// Distance in cells between the support and the grid edge; `None` for `f ≡ 0`.
    pub fn support_margin(&self) -> Option<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(|(c, _)| self.grid.edge_distance(c))
            .min()
    }

    /// `Σ f · hⁿ`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn map(&self, phi: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| phi(v)).collect())
    }

    pub fn scale(&self, alpha: f64) -> Result<Self> {
        self.map(|v| alpha * v)
    }

    pub fn sorted_values(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Distinct values in decreasing order.
    pub fn distinct_values_desc(&self) -> Vec<f64> {
        let mut v = self.sorted_values();
        v.dedup();
        v.reverse();
        v
    }

    pub fn sup_distance(&self, other: &GridFunction) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn l2_distance(&self, other: &GridFunction) -> f64 {
        (self.values.iter().zip(&other.values).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    pub fn pointwise_le(&self, other: &GridFunction) -> bool {
        self.values.iter().zip(&other.values).all(|(a, b)| a <= b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extent_conversion() {
        let g = Grid::centered(2, 4.0 / 256.0, 2.0).unwrap();
        assert_eq!(g.shape(), [257, 257]);
        let o = g.cell_near(&[0.0, 0.0]).unwrap();
        assert_eq!(g.center(o), [0.0, 0.0]);
        assert_eq!(g.refined().shape(), [513, 513]);
        assert!(Grid::from_extent(0.3, &[[-1.0, 1.0]]).is_err());
        let g1 = Grid::from_extent(0.25, &[[-1.0, 2.0]]).unwrap();
        assert_eq!(g1.shape(), [13, 1]);
        assert_eq!(g1.center(0)[0], -1.0);
    }

    #[test]
    fn measures() {
        let g = Grid::centered(2, 0.5, 2.0).unwrap();
        assert_eq!(GridSet::empty(g).measure(), 0.0);
        let s = GridSet::from_indices(g, [0, 3, 7]);
        assert_eq!(s.measure(), 3.0 * 0.25);
        let h = 1.0 / 64.0;
        let g = Grid::centered(2, h, 1.25).unwrap();
        let disk = GridSet::from_fn(g, |x| x[0] * x[0] + x[1] * x[1] <= 1.0);
        assert!((disk.measure() / std::f64::consts::PI - 1.0).abs() < 0.015);
    }

    #[test]
    fn function_validation() {
        let g = Grid::centered(2, 0.25, 1.0).unwrap();
        assert!(GridFunction::from_fn(g, |_| 1.0).is_err());
        assert!(GridFunction::new(g, vec![-1.0; g.len()]).is_err());
        let f = GridFunction::from_fn(g, |x| 0.5 - x[0].abs().max(x[1].abs())).unwrap();
        assert_eq!(f.max(), 0.5);
        assert_eq!(f.support_margin(), Some(3));
    }
}
