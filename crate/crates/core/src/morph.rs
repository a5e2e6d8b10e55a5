//! Flat morphology on lattices of dimension 1 to 3 with convex structuring elements.
//!
//! A convex structuring element meets every lattice line parallel to axis 0 in a
//! contiguous run of offsets, so it is stored as one `[lo, hi]` run per
//! `(dy, dz)` line offset. Filtering is then a per-line sliding extremum
//! (van Herk / Gil–Werman) for each distinct run width, combined across line
//! offsets. Cost is `O(N · (#widths + #runs))` instead of `O(N · |SE|)`.

use crate::convex::Body;
use crate::par;

/// Lattice offsets `z` (in cell units) of a convex set, stored as runs along axis 0.
#[derive(Clone, Debug, PartialEq)]
pub struct StructuringElement {
    /// `(dy, dz, lo, hi)`: offsets `(dx, dy, dz)` with `lo ≤ dx ≤ hi`.
    pub runs: Vec<(i64, i64, i64, i64)>,
}

impl StructuringElement {
    /// Offsets `z` with `predicate(z)` over the box `|z_k| ≤ reach[k]`. The predicate
    /// must describe a convex set; only the first and last hit per line are kept.
    pub fn from_predicate<F>(reach: [i64; 3], predicate: F) -> Self
    where
        F: Fn(i64, i64, i64) -> bool,
    {
        let mut runs = Vec::new();
        for dz in -reach[2]..=reach[2] {
            for dy in -reach[1]..=reach[1] {
                let mut lo = None;
                let mut hi = None;
                for dx in -reach[0]..=reach[0] {
                    if predicate(dx, dy, dz) {
                        lo.get_or_insert(dx);
                        hi = Some(dx);
                    }
                }
                if let (Some(lo), Some(hi)) = (lo, hi) {
                    runs.push((dy, dz, lo, hi));
                }
            }
        }
        Self { runs }
    }

    /// Lattice offsets `z` with `z·h ∈ r·K` (gauge test with the global slack).
    pub fn from_body<B: Body + ?Sized>(body: &B, r: f64, h: f64) -> Self {
        let dim = body.dim();
        let mut reach = [0i64; 3];
        for (axis, slot) in reach.iter_mut().enumerate().take(dim) {
            *slot = (r * body.axis_extent(axis) / h + 1e-9).floor() as i64 + 1;
        }
        Self::from_predicate(reach, |dx, dy, dz| {
            let z = [dx as f64 * h, dy as f64 * h, dz as f64 * h];
            body.contains_scaled(&z[..dim], r)
        })
    }

    pub fn reflected(&self) -> Self {
        let mut runs: Vec<_> = self.runs.iter().map(|&(dy, dz, lo, hi)| (-dy, -dz, -hi, -lo)).collect();
        runs.sort_by_key(|&(dy, dz, _, _)| (dz, dy));
        Self { runs }
    }

    pub fn len(&self) -> usize {
        self.runs.iter().map(|&(_, _, lo, hi)| (hi - lo + 1) as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    /// Largest `|offset|` per axis.
    pub fn reach(&self) -> [i64; 3] {
        self.runs.iter().fold([0; 3], |r, &(dy, dz, lo, hi)| {
            [r[0].max(lo.abs()).max(hi.abs()), r[1].max(dy.abs()), r[2].max(dz.abs())]
        })
    }

    /// Average over unit directions `u` of `h_E(u) / h_K(u)` for the offsets `E`
    /// scaled by `h`: the radius `r` with `E ≈ r·K`. Lattice elements are thinner
    /// than `r·K` off the axes, so this is below the nominal radius.
    pub fn effective_radius<B: Body + ?Sized>(&self, body: &B, h: f64) -> f64 {
        let dim = body.dim();
        let dirs = directions(dim);
        let (mut sum, mut count) = (0.0, 0usize);
        for u in &dirs {
            let hk = body.support_of(&u[..dim]);
            if hk <= 1e-12 {
                continue;
            }
            let he = self
                .runs
                .iter()
                .map(|&(dy, dz, lo, hi)| (lo as f64 * u[0]).max(hi as f64 * u[0]) + dy as f64 * u[1] + dz as f64 * u[2])
                .fold(f64::NEG_INFINITY, f64::max);
            sum += he * h / hk;
            count += 1;
        }
        if count == 0 {
            0.0
        } else {
            sum / count as f64
        }
    }

    pub fn contains(&self, dx: i64, dy: i64, dz: i64) -> bool {
        self.runs.iter().any(|&(y, z, lo, hi)| y == dy && z == dz && lo <= dx && dx <= hi)
    }
}

/// Sliding extremum of width `w` over `line` padded by `pad` on both sides.
/// Returns `out` with `out[s + w - 1] = ext(line[s..s + w])` for `s ∈ [1 − w, n − 1]`.
fn sliding<T: Copy>(line: &[T], w: usize, pad: T, ext: fn(T, T) -> T) -> Vec<T> {
    let n = line.len();
    let m = n + 2 * (w - 1);
    let at = |t: usize| -> T {
        if t < w - 1 || t >= w - 1 + n {
            pad
        } else {
            line[t - (w - 1)]
        }
    };
    let mut fwd = Vec::with_capacity(m);
    let mut bwd = vec![pad; m];
    for t in 0..m {
        let v = at(t);
        fwd.push(if t % w == 0 { v } else { ext(fwd[t - 1], v) });
    }
    for t in (0..m).rev() {
        let v = at(t);
        bwd[t] = if t % w == w - 1 || t == m - 1 { v } else { ext(bwd[t + 1], v) };
    }
    (0..n + w - 1).map(|t| ext(bwd[t], fwd[t + w - 1])).collect()
}

/// `out(c) = ext_{z ∈ se} in(c − z)`, with `pad` outside the lattice; `identity`
/// is the neutral element of `ext` (the result for an empty element).
///
/// `dims = [n0, n1, n2]`, data laid out with axis 0 fastest.
pub fn filter<T>(data: &[T], dims: [usize; 3], se: &StructuringElement, pad: T, identity: T, ext: fn(T, T) -> T) -> Vec<T>
where
    T: Copy + Send + Sync,
{
    let [n0, n1, n2] = dims;
    assert_eq!(data.len(), n0 * n1 * n2);
    let lines = n1 * n2;
    let mut out = vec![identity; data.len()];
    if se.is_empty() {
        return out;
    }
    let mut widths: Vec<usize> = se.runs.iter().map(|&(_, _, lo, hi)| (hi - lo + 1) as usize).collect();
    widths.sort_unstable();
    widths.dedup();
    for w in widths {
        let slid: Vec<Vec<T>> = par::map_range(lines, |l| sliding(&data[l * n0..(l + 1) * n0], w, pad, ext));
        let runs: Vec<_> = se.runs.iter().filter(|r| (r.3 - r.2 + 1) as usize == w).copied().collect();
        par::for_each_chunk_mut(&mut out, n0, |l, row| {
            let (j, k) = ((l % n1) as i64, (l / n1) as i64);
            for &(dy, dz, _lo, hi) in &runs {
                let (sj, sk) = (j - dy, k - dz);
                if sj < 0 || sk < 0 || sj >= n1 as i64 || sk >= n2 as i64 {
                    for v in row.iter_mut() {
                        *v = ext(*v, pad);
                    }
                    continue;
                }
                let src = &slid[(sj as usize) + (sk as usize) * n1];
                for (i, v) in row.iter_mut().enumerate() {
                    // window start s = i − hi, stored at s + w − 1
                    let t = i as i64 - hi + w as i64 - 1;
                    let x = if t < 0 || t as usize >= src.len() { pad } else { src[t as usize] };
                    *v = ext(*v, x);
                }
            }
        });
    }
    out
}

/// Evenly spread unit directions: both signs on the line, a regular polygon in
/// the plane, a Fibonacci lattice on the sphere.
fn directions(dim: usize) -> Vec<[f64; 3]> {
    match dim {
        1 => vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]],
        2 => (0..360)
            .map(|k| {
                let t = std::f64::consts::TAU * (k as f64 + 0.5) / 360.0;
                [t.cos(), t.sin(), 0.0]
            })
            .collect(),
        _ => {
            let n = 600;
            let golden = std::f64::consts::PI * (1.0 + 5f64.sqrt());
            (0..n)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
                    let r = (1.0 - z * z).sqrt();
                    let t = golden * (k as f64 + 0.5);
                    [r * t.cos(), r * t.sin(), z]
                })
                .collect()
        }
    }
}

pub fn max_f64(a: f64, b: f64) -> f64 {
    a.max(b)
}

pub fn min_f64(a: f64, b: f64) -> f64 {
    a.min(b)
}

pub fn max_u8(a: u8, b: u8) -> u8 {
    a.max(b)
}

/// Binary dilation `A ⊕ SE` on a lattice.
pub fn dilate_binary(cells: &[u8], dims: [usize; 3], se: &StructuringElement) -> Vec<u8> {
    filter(cells, dims, se, 0, 0, max_u8)
}
