//! Uniform midpoint grids, cube geometry, and quadrature.
//!
//! A [`GridDomain`] is an axis-aligned box `[corner, corner + side]^n`
//! (`n` is 1 or 2) carrying `points` cells per axis; every cell contributes
//! its midpoint as a node. Functions are sampled at nodes and treated as
//! constant on their cells, so the composite midpoint rule doubles as exact
//! integration of the piecewise-constant extension: a region integral is the
//! sum of node values times cell volume, with cells that straddle the region
//! boundary weighted by the overlap fraction of the cell.
//!
//! Cube averages for maximal operators and weight constants come from a
//! [`CellTable`], a prefix-sum (integral image) over the cell values. A
//! clipped axis range decomposes into at most one full index range plus two
//! fractional boundary cells per axis, so any cube integral costs O(1)
//! lookups while matching the direct weighted sum to the last bit.

use serde::{Deserialize, Serialize};

use crate::corpus::CorpusExpr;
use crate::error::FraclabError;
use crate::exec;
use crate::Result;

/// A point; only the first `n` coordinates are meaningful.
pub type Point = [f64; 2];

/// Euclidean norm of the first `n` coordinates.
pub fn norm_n(x: Point, n: usize) -> f64 {
    if n == 1 {
        x[0].abs()
    } else {
        x[0].hypot(x[1])
    }
}

/// Euclidean distance between the first `n` coordinates of two points.
pub fn dist_n(x: Point, y: Point, n: usize) -> f64 {
    if n == 1 {
        (x[0] - y[0]).abs()
    } else {
        (x[0] - y[0]).hypot(x[1] - y[1])
    }
}

/// Uniform midpoint grid on an axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridDomain {
    n: usize,
    corner: [f64; 2],
    side: f64,
    points: usize,
}

impl GridDomain {
    /// Builds a grid; `points` must be a power of two and at least 8, and
    /// `n` must be 1 or 2.
    pub fn new(n: usize, corner: &[f64], side: f64, points: usize) -> Result<GridDomain> {
        if n != 1 && n != 2 {
            return Err(FraclabError::invalid(format!(
                "domain.n must be 1 or 2, got {n}"
            )));
        }
        if corner.len() != n {
            return Err(FraclabError::invalid(format!(
                "domain.corner needs {n} coordinates, got {}",
                corner.len()
            )));
        }
        if !(side > 0.0) || !side.is_finite() {
            return Err(FraclabError::invalid(format!(
                "domain.side must be positive, got {side}"
            )));
        }
        if !points.is_power_of_two() || points < 8 {
            return Err(FraclabError::invalid(format!(
                "domain.points must be a power of two >= 8, got {points}"
            )));
        }
        let mut c = [0.0; 2];
        c[..n].copy_from_slice(corner);
        Ok(GridDomain {
            n,
            corner: c,
            side,
            points,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn corner(&self) -> [f64; 2] {
        self.corner
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    /// Cells (and nodes) per axis.
    pub fn points_per_axis(&self) -> usize {
        self.points
    }

    /// Cell width.
    pub fn h(&self) -> f64 {
        self.side / self.points as f64
    }

    /// Cell volume `h^n`.
    pub fn cell_volume(&self) -> f64 {
        self.h().powi(self.n as i32)
    }

    /// Upper box corner.
    pub fn high(&self) -> [f64; 2] {
        let mut hi = self.corner;
        for axis in 0..self.n {
            hi[axis] += self.side;
        }
        hi
    }

    /// Total node count `points^n`.
    pub fn node_count(&self) -> usize {
        self.points.pow(self.n as u32)
    }

    /// Node coordinates for a row-major node index.
    pub fn node(&self, idx: usize) -> Point {
        let h = self.h();
        match self.n {
            1 => [self.corner[0] + (idx as f64 + 0.5) * h, 0.0],
            _ => {
                let i = idx / self.points;
                let j = idx % self.points;
                [
                    self.corner[0] + (i as f64 + 0.5) * h,
                    self.corner[1] + (j as f64 + 0.5) * h,
                ]
            }
        }
    }

    /// Same box with `factor` times more cells per axis.
    pub fn refined(&self, factor: usize) -> GridDomain {
        GridDomain {
            points: self.points * factor,
            ..*self
        }
    }

    /// Grid shifted by half a cell per axis. Output grids for singular
    /// integral operators are built this way so output nodes interleave the
    /// input nodes and never hit the kernel diagonal.
    pub fn offset_half_cell(&self) -> GridDomain {
        let half = 0.5 * self.h();
        let mut corner = self.corner;
        for axis in 0..self.n {
            corner[axis] += half;
        }
        GridDomain { corner, ..*self }
    }

    /// True when the two grids have equal spacing and their node lattices
    /// coincide, which would put singular-kernel evaluation points exactly
    /// on input nodes.
    pub fn nodes_collide(&self, other: &GridDomain) -> bool {
        if self.n != other.n {
            return false;
        }
        let h = self.h();
        if ((other.h() - h) / h).abs() > 1e-12 {
            return false;
        }
        (0..self.n).all(|axis| {
            let shift = (other.corner[axis] - self.corner[axis]) / h;
            (shift - shift.round()).abs() < 1e-9
        })
    }

    /// Per-node mask of nodes at distance at least `margin` from the box
    /// boundary on every axis.
    pub fn interior_mask(&self, margin: f64) -> Vec<bool> {
        let hi = self.high();
        (0..self.node_count())
            .map(|idx| {
                let x = self.node(idx);
                (0..self.n).all(|a| x[a] - self.corner[a] >= margin && hi[a] - x[a] >= margin)
            })
            .collect()
    }

    /// `(cells on axis 0, cells on axis 1)`; axis 1 degenerates to a single
    /// cell for n = 1 so tables can treat both dimensions uniformly.
    fn axis_cells(&self) -> (usize, usize) {
        if self.n == 1 {
            (self.points, 1)
        } else {
            (self.points, self.points)
        }
    }
}

/// Function sampled at the nodes of a grid, optionally remembering the
/// closed form it was sampled from.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    domain: GridDomain,
    values: Vec<f64>,
    expr: Option<CorpusExpr>,
}

impl SampledFunction {
    /// Samples a catalog expression at every node.
    pub fn from_expr(expr: CorpusExpr, domain: GridDomain) -> SampledFunction {
        let n = domain.dim();
        let values = exec::map_indexed(domain.node_count(), |idx| expr.eval(domain.node(idx), n));
        SampledFunction {
            domain,
            values,
            expr: Some(expr),
        }
    }

    /// Wraps raw node values.
    pub fn from_values(domain: GridDomain, values: Vec<f64>) -> Result<SampledFunction> {
        if values.len() != domain.node_count() {
            return Err(FraclabError::GridMismatch(format!(
                "expected {} node values, got {}",
                domain.node_count(),
                values.len()
            )));
        }
        Ok(SampledFunction {
            domain,
            values,
            expr: None,
        })
    }

    pub fn zeros(domain: GridDomain) -> SampledFunction {
        SampledFunction {
            domain,
            values: vec![0.0; domain.node_count()],
            expr: None,
        }
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn expr(&self) -> Option<&CorpusExpr> {
        self.expr.as_ref()
    }

    /// Nodewise map; the closed form is dropped because it no longer
    /// describes the values.
    pub fn map(&self, f: impl Fn(f64) -> f64 + Sync + Send) -> SampledFunction {
        let values = exec::map_indexed(self.values.len(), |i| f(self.values[i]));
        SampledFunction {
            domain: self.domain,
            values,
            expr: None,
        }
    }

    /// `|f|^p` node values.
    pub fn powered_abs(&self, p: f64) -> Vec<f64> {
        exec::map_indexed(self.values.len(), |i| self.values[i].abs().powf(p))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Axis-aligned cube given by center and side length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    pub center: [f64; 2],
    pub side: f64,
}

impl Cube {
    pub fn new(center: [f64; 2], side: f64) -> Cube {
        Cube { center, side }
    }

    pub fn low(&self, axis: usize) -> f64 {
        self.center[axis] - 0.5 * self.side
    }

    pub fn high(&self, axis: usize) -> f64 {
        self.center[axis] + 0.5 * self.side
    }

    /// Closed containment on the first `n` axes.
    pub fn contains(&self, x: Point, n: usize) -> bool {
        (0..n).all(|a| (x[a] - self.center[a]).abs() <= 0.5 * self.side)
    }

    /// Concentric dilation `factor * Q`.
    pub fn dilated(&self, factor: f64) -> Cube {
        Cube {
            center: self.center,
            side: self.side * factor,
        }
    }

    /// `|Q ∩ box|`; zero when the cube misses the box.
    pub fn clipped_measure(&self, domain: &GridDomain) -> f64 {
        let hi = domain.high();
        let mut measure = 1.0;
        for axis in 0..domain.dim() {
            let lo = self.low(axis).max(domain.corner()[axis]);
            let up = self.high(axis).min(hi[axis]);
            if up <= lo {
                return 0.0;
            }
            measure *= up - lo;
        }
        measure
    }

    /// True when the cube lies entirely inside the box.
    pub fn fits_box(&self, domain: &GridDomain) -> bool {
        let hi = domain.high();
        (0..domain.dim())
            .all(|a| self.low(a) >= domain.corner()[a] - 1e-12 && self.high(a) <= hi[a] + 1e-12)
    }

    /// Number of grid nodes inside the (closed) cube.
    pub fn node_count(&self, domain: &GridDomain) -> usize {
        let h = domain.h();
        let mut count = 1usize;
        for axis in 0..domain.dim() {
            let a = (self.low(axis) - domain.corner()[axis]) / h - 0.5;
            let b = (self.high(axis) - domain.corner()[axis]) / h - 0.5;
            let lo = snap(a).ceil().max(0.0);
            let hi = snap(b).floor().min(domain.points_per_axis() as f64 - 1.0);
            if hi < lo {
                return 0;
            }
            count *= (hi - lo) as usize + 1;
        }
        count
    }
}

/// Snaps values that sit within 1e-9 of an integer onto it, so cube edges
/// that align with the cell lattice up to float noise are treated as exact.
fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r
    } else {
        x
    }
}

/// Decomposition of one clipped axis range into full cells plus fractional
/// boundary cells, in cell-index space.
#[derive(Debug, Clone, Copy)]
struct AxisParts {
    /// Full-weight index range `[full_lo, full_hi)`.
    full_lo: usize,
    full_hi: usize,
    /// Up to two `(index, weight)` fractional cells.
    partial: [(usize, f64); 2],
    partial_len: usize,
}

impl AxisParts {
    fn empty() -> AxisParts {
        AxisParts {
            full_lo: 0,
            full_hi: 0,
            partial: [(0, 0.0); 2],
            partial_len: 0,
        }
    }

    /// Splits `[lo, hi]` (already clipped to `[0, cells]`) into parts.
    fn split(lo: f64, hi: f64, cells: usize) -> AxisParts {
        let lo = snap(lo.max(0.0));
        let hi = snap(hi.min(cells as f64));
        if hi <= lo {
            return AxisParts::empty();
        }
        let mut parts = AxisParts::empty();
        let first = lo.floor();
        let last = hi.ceil() - 1.0;
        if first == last {
            // Range inside a single cell.
            parts.partial[0] = (first as usize, hi - lo);
            parts.partial_len = 1;
            return parts;
        }
        let mut full_lo = lo.ceil();
        let full_hi = hi.floor();
        if lo > first {
            parts.partial[parts.partial_len] = (first as usize, full_lo - lo);
            parts.partial_len += 1;
        } else {
            full_lo = first;
        }
        if hi > full_hi {
            parts.partial[parts.partial_len] = (full_hi as usize, hi - full_hi);
            parts.partial_len += 1;
        }
        parts.full_lo = full_lo as usize;
        parts.full_hi = full_hi.max(full_lo) as usize;
        parts
    }

    /// Iterates `(index range, weight)` groups: the full range once, then
    /// each fractional cell as a singleton range.
    fn groups(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let full = if self.full_hi > self.full_lo {
            Some((self.full_lo, self.full_hi, 1.0))
        } else {
            None
        };
        full.into_iter().chain(
            self.partial[..self.partial_len]
                .iter()
                .map(|&(i, w)| (i, i + 1, w)),
        )
    }

    fn weight_sum(&self) -> f64 {
        let mut s = (self.full_hi - self.full_lo) as f64;
        for &(_, w) in &self.partial[..self.partial_len] {
            s += w;
        }
        s
    }
}

fn axis_parts_for(domain: &GridDomain, cube: &Cube, axis: usize) -> AxisParts {
    let (nx, ny) = domain.axis_cells();
    let cells = if axis == 0 { nx } else { ny };
    if axis >= domain.dim() {
        // Degenerate axis: one full cell.
        return AxisParts {
            full_lo: 0,
            full_hi: cells,
            partial: [(0, 0.0); 2],
            partial_len: 0,
        };
    }
    let h = domain.h();
    let lo = (cube.low(axis) - domain.corner()[axis]) / h;
    let hi = (cube.high(axis) - domain.corner()[axis]) / h;
    AxisParts::split(lo, hi, cells)
}

/// Prefix-sum table over cell values, built once per (function, power) and
/// shared across all cube queries.
pub struct CellTable {
    domain: GridDomain,
    nx: usize,
    ny: usize,
    /// `(nx+1) x (ny+1)` integral image: `prefix[i][j] = sum of v[i'][j']`
    /// over `i' < i`, `j' < j`.
    prefix: Vec<f64>,
}

impl CellTable {
    /// Builds the table from node values laid out row-major.
    pub fn new(domain: GridDomain, values: &[f64]) -> CellTable {
        let (nx, ny) = domain.axis_cells();
        assert_eq!(values.len(), nx * ny, "value count must match grid");
        let w = ny + 1;
        let mut prefix = vec![0.0; (nx + 1) * w];
        for i in 0..nx {
            let mut row = 0.0;
            for j in 0..ny {
                row += values[i * ny + j];
                prefix[(i + 1) * w + (j + 1)] = prefix[i * w + (j + 1)] + row;
            }
        }
        CellTable {
            domain,
            nx,
            ny,
            prefix,
        }
    }

    pub fn for_function(f: &SampledFunction) -> CellTable {
        CellTable::new(*f.domain(), f.values())
    }

    /// Builds the table for `|f|^p`.
    pub fn for_powered(f: &SampledFunction, p: f64) -> CellTable {
        CellTable::new(*f.domain(), &f.powered_abs(p))
    }

    fn block_sum(&self, i0: usize, i1: usize, j0: usize, j1: usize) -> f64 {
        let w = self.ny + 1;
        self.prefix[i1 * w + j1] - self.prefix[i0 * w + j1] - self.prefix[i1 * w + j0]
            + self.prefix[i0 * w + j0]
    }

    /// `(∫_{Q ∩ box} v dx, |Q ∩ box|)` with identical weight arithmetic for
    /// both outputs, so constant functions average exactly.
    pub fn integral_and_measure(&self, cube: &Cube) -> (f64, f64) {
        let p0 = axis_parts_for(&self.domain, cube, 0);
        let p1 = axis_parts_for(&self.domain, cube, 1);
        let mut sum = 0.0;
        let mut weight = 0.0;
        for (i0, i1, w0) in p0.groups() {
            for (j0, j1, w1) in p1.groups() {
                let w = w0 * w1;
                sum += w * self.block_sum(i0, i1, j0, j1);
                weight += w * ((i1 - i0) * (j1 - j0)) as f64;
            }
        }
        let vol = self.domain.cell_volume();
        (sum * vol, weight * vol)
    }

    /// Clipped cube integral.
    pub fn integral_over(&self, cube: &Cube) -> f64 {
        self.integral_and_measure(cube).0
    }

    /// Clipped cube average; zero when the overlap is empty.
    pub fn average_over(&self, cube: &Cube) -> f64 {
        let (int, meas) = self.integral_and_measure(cube);
        if meas > 0.0 {
            int / meas
        } else {
            0.0
        }
    }

    /// Integral over the whole box.
    pub fn integral_box(&self) -> f64 {
        self.block_sum(0, self.nx, 0, self.ny) * self.domain.cell_volume()
    }
}

/// Calls `f(node_index, overlap_fraction)` for every cell meeting the
/// clipped cube. Used where an integrand depends on a per-cube quantity
/// (mean oscillation) and prefix sums do not apply.
pub(crate) fn for_cells_in(domain: &GridDomain, cube: &Cube, mut f: impl FnMut(usize, f64)) {
    let p0 = axis_parts_for(domain, cube, 0);
    let p1 = axis_parts_for(domain, cube, 1);
    let (_, ny) = domain.axis_cells();
    for (i0, i1, w0) in p0.groups() {
        for (j0, j1, w1) in p1.groups() {
            let w = w0 * w1;
            for i in i0..i1 {
                for j in j0..j1 {
                    f(i * ny + j, w);
                }
            }
        }
    }
}

/// Sum of per-axis weight products for a clipped cube; equals
/// `|Q ∩ box| / h^n`.
pub(crate) fn clipped_weight(domain: &GridDomain, cube: &Cube) -> f64 {
    let p0 = axis_parts_for(domain, cube, 0);
    let p1 = axis_parts_for(domain, cube, 1);
    p0.weight_sum() * p1.weight_sum()
}

/// Integral of `f` over `Q ∩ box`: node values weighted by cell overlap.
pub fn integrate_region(f: &SampledFunction, cube: &Cube) -> f64 {
    let mut sum = 0.0;
    for_cells_in(f.domain(), cube, |idx, w| {
        sum += w * f.values()[idx];
    });
    sum * f.domain().cell_volume()
}

/// Integral of `f` over its whole box.
pub fn integrate_box(f: &SampledFunction) -> f64 {
    let s: f64 = f.values().iter().sum();
    s * f.domain().cell_volume()
}

/// Dyadic cube family over a grid box.
///
/// Level `j` (for `j = 0..=levels`) holds cubes of side `L * 2^-j` centered
/// on the lattice of stride half a side, so consecutive cubes overlap by
/// half and every point of the box lies in at least one cube per level.
/// Cubes may stick out of the box; averages clip to it.
#[derive(Debug, Clone)]
pub struct CubeFamily {
    cubes: Vec<Cube>,
    levels: usize,
    domain: GridDomain,
}

impl CubeFamily {
    /// Builds the family; requires `levels >= 1` and smallest side
    /// `L * 2^-levels >= 2h` so the deepest cubes still hold two cells per
    /// axis.
    pub fn new(domain: &GridDomain, levels: usize) -> Result<CubeFamily> {
        if levels < 1 {
            return Err(FraclabError::invalid("cube family needs levels >= 1"));
        }
        let smallest = domain.side() / (1u64 << levels) as f64;
        if smallest < 2.0 * domain.h() - 1e-12 {
            return Err(FraclabError::invalid(format!(
                "cube family too deep: smallest side {} is below 2h = {}",
                smallest,
                2.0 * domain.h()
            )));
        }
        let n = domain.dim();
        let mut cubes = Vec::new();
        for j in 0..=levels {
            let side = domain.side() / (1u64 << j) as f64;
            let stride = 0.5 * side;
            let lattice = 2 * (1usize << j) + 1;
            let centers: Vec<f64> = (0..lattice)
                .map(|k| domain.corner()[0] + k as f64 * stride)
                .collect();
            if n == 1 {
                for &c in &centers {
                    cubes.push(Cube::new([c, 0.0], side));
                }
            } else {
                let centers1: Vec<f64> = (0..lattice)
                    .map(|k| domain.corner()[1] + k as f64 * stride)
                    .collect();
                for &c0 in &centers {
                    for &c1 in &centers1 {
                        cubes.push(Cube::new([c0, c1], side));
                    }
                }
            }
        }
        Ok(CubeFamily {
            cubes,
            levels,
            domain: *domain,
        })
    }

    pub fn cubes(&self) -> &[Cube] {
        &self.cubes
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    /// Indices of cubes holding at least `min_nodes` grid nodes; BMO and
    /// Muckenhoupt scans use 4 to keep averages meaningful.
    pub fn indices_with_min_nodes(&self, min_nodes: usize) -> Vec<usize> {
        (0..self.cubes.len())
            .filter(|&i| self.cubes[i].node_count(&self.domain) >= min_nodes)
            .collect()
    }
}
