//! Regular Cartesian grids, region descriptors and their discrete footprints.
//!
//! Nodes sit at `min + i·h` along each axis and are stored row-major with the
//! last axis fastest. A *cell* is the box spanned by a node (its base) and the
//! node one step further along every axis. Regions are discretized with a sharp
//! indicator: a cell belongs to a region when its center does.

use crate::error::{Error, Result};

/// A point in up to three dimensions; unused trailing coordinates are zero.
pub type Point = [f64; 3];

/// Minimum number of points per axis.
pub const MIN_POINTS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    min: Point,
    max: Point,
    n: [usize; 3],
    h: [f64; 3],
}

impl Grid {
    pub fn new(dim: usize, min: &[f64], max: &[f64], n: &[usize]) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidGrid(format!("dimension must be 2 or 3, got {dim}")));
        }
        if min.len() != dim || max.len() != dim || n.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "expected {dim} entries for min, max and n"
            )));
        }
        let mut g = Grid {
            dim,
            min: [0.0; 3],
            max: [0.0; 3],
            n: [1; 3],
            h: [1.0; 3],
        };
        for a in 0..dim {
            if n[a] < MIN_POINTS {
                return Err(Error::InvalidGrid(format!(
                    "axis {a} has {} points, need at least {MIN_POINTS}",
                    n[a]
                )));
            }
            if !(max[a] > min[a]) || !min[a].is_finite() || !max[a].is_finite() {
                return Err(Error::InvalidGrid(format!("axis {a} has an empty extent")));
            }
            g.min[a] = min[a];
            g.max[a] = max[a];
            g.n[a] = n[a];
            g.h[a] = (max[a] - min[a]) / (n[a] - 1) as f64;
        }
        Ok(g)
    }

    /// Same extent and point count on every axis.
    pub fn uniform(dim: usize, lo: f64, hi: f64, n: usize) -> Result<Self> {
        Grid::new(dim, &vec![lo; dim], &vec![hi; dim], &vec![n; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> &[usize] {
        &self.n[..self.dim]
    }

    pub fn h(&self) -> &[f64] {
        &self.h[..self.dim]
    }

    pub fn min(&self) -> &[f64] {
        &self.min[..self.dim]
    }

    pub fn max(&self) -> &[f64] {
        &self.max[..self.dim]
    }

    pub fn h_min(&self) -> f64 {
        self.h().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn h_max(&self) -> f64 {
        self.h().iter().copied().fold(0.0, f64::max)
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.n().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Volume of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.h().iter().product()
    }

    pub fn strides(&self) -> [usize; 3] {
        let mut s = [0; 3];
        let mut acc = 1;
        for a in (0..self.dim).rev() {
            s[a] = acc;
            acc *= self.n[a];
        }
        s
    }

    pub fn index(&self, ijk: &[usize]) -> usize {
        let s = self.strides();
        (0..self.dim).map(|a| ijk[a] * s[a]).sum()
    }

    pub fn coords(&self, mut idx: usize) -> [usize; 3] {
        let mut c = [0; 3];
        for a in (0..self.dim).rev() {
            c[a] = idx % self.n[a];
            idx /= self.n[a];
        }
        c
    }

    pub fn point(&self, idx: usize) -> Point {
        let c = self.coords(idx);
        let mut p = [0.0; 3];
        for a in 0..self.dim {
            p[a] = self.min[a] + c[a] as f64 * self.h[a];
        }
        p
    }

    /// Center of the cell whose base node is `idx`.
    pub fn cell_center(&self, idx: usize) -> Point {
        let mut p = self.point(idx);
        for a in 0..self.dim {
            p[a] += 0.5 * self.h[a];
        }
        p
    }

    /// Whether `idx` is the base node of a cell (not on the upper face of any axis).
    pub fn is_cell_base(&self, idx: usize) -> bool {
        let c = self.coords(idx);
        (0..self.dim).all(|a| c[a] + 1 < self.n[a])
    }

    /// Whether the node lies on the outer boundary of the grid.
    pub fn is_edge(&self, idx: usize) -> bool {
        let c = self.coords(idx);
        (0..self.dim).any(|a| c[a] == 0 || c[a] + 1 == self.n[a])
    }

    /// Linear offsets of the `2^dim` corners of a cell relative to its base node.
    /// Bit `a` of the corner number selects the upper node along axis `a`.
    pub fn corner_offsets(&self) -> Vec<usize> {
        let s = self.strides();
        (0..1usize << self.dim)
            .map(|k| (0..self.dim).filter(|a| k >> a & 1 == 1).map(|a| s[a]).sum())
            .collect()
    }

    /// Starting node index of every line along the last axis.
    pub fn rows(&self) -> impl Iterator<Item = usize> + '_ {
        let row_len = self.n[self.dim - 1];
        (0..self.len() / row_len).map(move |r| r * row_len)
    }

    pub fn row_len(&self) -> usize {
        self.n[self.dim - 1]
    }

    /// Euclidean distance from the grid's outer boundary to the closest point of `region`.
    pub fn margin_to(&self, region: &Region) -> f64 {
        let (lo, hi) = region.bounding_box(self.dim);
        (0..self.dim)
            .map(|a| (lo[a] - self.min[a]).min(self.max[a] - hi[a]))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Axis-aligned box or ball.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Ball { center: Point, radius: f64 },
    Box { min: Point, max: Point },
}

impl Region {
    pub fn ball(center: &[f64], radius: f64) -> Self {
        Region::Ball {
            center: to_point(center),
            radius,
        }
    }

    pub fn cuboid(min: &[f64], max: &[f64]) -> Self {
        Region::Box {
            min: to_point(min),
            max: to_point(max),
        }
    }

    /// Negative inside, zero on the boundary, positive outside.
    pub fn signed_distance(&self, p: &Point, dim: usize) -> f64 {
        match self {
            Region::Ball { center, radius } => dist(p, center, dim) - radius,
            Region::Box { min, max } => {
                let mut outside = 0.0;
                let mut inside = f64::NEG_INFINITY;
                for a in 0..dim {
                    let d = (min[a] - p[a]).max(p[a] - max[a]);
                    if d > 0.0 {
                        outside += d * d;
                    }
                    inside = inside.max(d);
                }
                if outside > 0.0 {
                    outside.sqrt()
                } else {
                    inside
                }
            }
        }
    }

    pub fn contains(&self, p: &Point, dim: usize) -> bool {
        self.signed_distance(p, dim) < 0.0
    }

    pub fn outward_normal(&self, p: &Point, dim: usize) -> Point {
        let mut n = [0.0; 3];
        match self {
            Region::Ball { center, .. } => {
                for a in 0..dim {
                    n[a] = p[a] - center[a];
                }
            }
            Region::Box { min, max } => {
                let sd = self.signed_distance(p, dim);
                for a in 0..dim {
                    let lo = min[a] - p[a];
                    let hi = p[a] - max[a];
                    if (lo - sd).abs() < 1e-12 || lo > 0.0 {
                        n[a] = -1.0;
                    } else if (hi - sd).abs() < 1e-12 || hi > 0.0 {
                        n[a] = 1.0;
                    }
                }
            }
        }
        let len = n.iter().map(|v| v * v).sum::<f64>().sqrt();
        if len > 0.0 {
            n.iter_mut().for_each(|v| *v /= len);
        }
        n
    }

    pub fn bounding_box(&self, dim: usize) -> (Point, Point) {
        match self {
            Region::Ball { center, radius } => {
                let mut lo = *center;
                let mut hi = *center;
                for a in 0..dim {
                    lo[a] -= radius;
                    hi[a] += radius;
                }
                (lo, hi)
            }
            Region::Box { min, max } => (*min, *max),
        }
    }

    /// Centroid of the region.
    pub fn center(&self, dim: usize) -> Point {
        match self {
            Region::Ball { center, .. } => *center,
            Region::Box { min, max } => {
                let mut c = [0.0; 3];
                for a in 0..dim {
                    c[a] = 0.5 * (min[a] + max[a]);
                }
                c
            }
        }
    }

    /// Largest Euclidean extent (diameter of the ball or diagonal of the box).
    pub fn diameter(&self, dim: usize) -> f64 {
        let (lo, hi) = self.bounding_box(dim);
        match self {
            Region::Ball { radius, .. } => 2.0 * radius,
            Region::Box { .. } => dist(&lo, &hi, dim),
        }
    }

    /// Smallest distance from any point of `inner` to the boundary of `self`.
    /// Negative when `inner` is not contained in `self`.
    pub fn inner_separation(&self, inner: &Region, dim: usize) -> f64 {
        match (self, inner) {
            (
                Region::Ball { center, radius },
                Region::Ball {
                    center: c0,
                    radius: r0,
                },
            ) => radius - dist(center, c0, dim) - r0,
            (Region::Ball { center, radius }, Region::Box { .. }) => {
                let (lo, hi) = inner.bounding_box(dim);
                let far = (0..1usize << dim)
                    .map(|k| {
                        let mut p = [0.0; 3];
                        for a in 0..dim {
                            p[a] = if k >> a & 1 == 1 { hi[a] } else { lo[a] };
                        }
                        dist(&p, center, dim)
                    })
                    .fold(0.0, f64::max);
                radius - far
            }
            (Region::Box { min, max }, _) => {
                let (lo, hi) = inner.bounding_box(dim);
                (0..dim)
                    .map(|a| (lo[a] - min[a]).min(max[a] - hi[a]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}

fn to_point(v: &[f64]) -> Point {
    let mut p = [0.0; 3];
    p[..v.len()].copy_from_slice(v);
    p
}

pub(crate) fn dist(p: &Point, q: &Point, dim: usize) -> f64 {
    (0..dim).map(|a| (p[a] - q[a]).powi(2)).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    Outside,
    Boundary,
    Interior,
}

/// Discrete footprint of a region on a grid.
#[derive(Debug, Clone)]
pub struct RegionMask {
    /// Indexed by the base node of each cell.
    cell_in: Vec<bool>,
    nodes: Vec<NodeClass>,
}

impl RegionMask {
    pub fn new(grid: &Grid, region: &Region) -> Self {
        let dim = grid.dim();
        let cell_in: Vec<bool> = (0..grid.len())
            .map(|i| grid.is_cell_base(i) && region.contains(&grid.cell_center(i), dim))
            .collect();
        Self::from_cells(grid, cell_in)
    }

    /// Mask from an explicit cell selection, indexed by base node.
    pub fn from_cells(grid: &Grid, mut cell_in: Vec<bool>) -> Self {
        let dim = grid.dim();
        cell_in.resize(grid.len(), false);
        for (i, c) in cell_in.iter_mut().enumerate() {
            *c = *c && grid.is_cell_base(i);
        }
        let offsets = grid.corner_offsets();
        let mut touching = vec![0u32; grid.len()];
        for (i, _) in cell_in.iter().enumerate().filter(|(_, &c)| c) {
            for off in &offsets {
                touching[i + off] += 1;
            }
        }
        let full = 1u32 << dim;
        let nodes = touching
            .iter()
            .map(|&t| match t {
                0 => NodeClass::Outside,
                t if t == full => NodeClass::Interior,
                _ => NodeClass::Boundary,
            })
            .collect();
        RegionMask { cell_in, nodes }
    }

    pub fn cell_in(&self, base: usize) -> bool {
        self.cell_in[base]
    }

    pub fn cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.cell_in
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(|(i, _)| i)
    }

    pub fn class(&self, node: usize) -> NodeClass {
        self.nodes[node]
    }

    pub fn classes(&self) -> &[NodeClass] {
        &self.nodes
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        self.nodes_of(NodeClass::Interior)
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        self.nodes_of(NodeClass::Boundary)
    }

    /// Nodes of the closure (interior and boundary).
    pub fn closure_contains(&self, node: usize) -> bool {
        self.nodes[node] != NodeClass::Outside
    }

    fn nodes_of(&self, class: NodeClass) -> Vec<usize> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == class)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Discrete observation surface: the boundary nodes of Ω in index order.
#[derive(Debug, Clone, PartialEq)]
pub struct Surface {
    pub nodes: Vec<usize>,
    pub points: Vec<Point>,
    pub normals: Vec<Point>,
}

impl Surface {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// The measurement domain Ω, the source region Ω₀ and the surface ∂Ω.
#[derive(Debug, Clone)]
pub struct DomainSpec {
    grid: Grid,
    omega: Region,
    omega0: Region,
    omega_mask: RegionMask,
    omega0_mask: RegionMask,
    surface: Surface,
}

impl DomainSpec {
    pub fn new(grid: &Grid, omega: Region, omega0: Region) -> Result<Self> {
        let dim = grid.dim();
        if grid.margin_to(&omega) < grid.h_max() {
            return Err(Error::InvalidDomain(
                "omega must stay at least one cell inside the grid".into(),
            ));
        }
        let sep = omega.inner_separation(&omega0, dim);
        if sep < 2.0 * grid.h_max() * (1.0 - 1e-12) {
            return Err(Error::InvalidDomain(format!(
                "omega0 must sit at least 2h = {:.4} inside omega (separation {sep:.4})",
                2.0 * grid.h_max()
            )));
        }
        let omega_mask = RegionMask::new(grid, &omega);
        let omega0_mask = RegionMask::new(grid, &omega0);
        if omega0_mask.interior_nodes().is_empty() {
            return Err(Error::InvalidDomain(
                "omega0 has no interior nodes at this resolution".into(),
            ));
        }
        let nodes = omega_mask.boundary_nodes();
        let points: Vec<Point> = nodes.iter().map(|&i| grid.point(i)).collect();
        let normals = points
            .iter()
            .map(|p| omega.outward_normal(p, dim))
            .collect();
        Ok(DomainSpec {
            grid: grid.clone(),
            omega,
            omega0,
            omega_mask,
            omega0_mask,
            surface: Surface {
                nodes,
                points,
                normals,
            },
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn omega(&self) -> &Region {
        &self.omega
    }

    pub fn omega0(&self) -> &Region {
        &self.omega0
    }

    pub fn omega_mask(&self) -> &RegionMask {
        &self.omega_mask
    }

    pub fn omega0_mask(&self) -> &RegionMask {
        &self.omega0_mask
    }

    pub fn surface(&self) -> &Surface {
        &self.surface
    }

    /// Distance from Ω to the outer boundary of the grid, in cells of the coarsest axis.
    pub fn margin_cells(&self) -> f64 {
        self.grid.margin_to(&self.omega) / self.grid.h_max()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_matches_extent() {
        let g = Grid::new(2, &[-1.0, 0.0], &[1.0, 3.0], &[11, 16]).unwrap();
        assert!((g.h()[0] - 0.2).abs() < 1e-15);
        assert!((g.h()[1] - 0.2).abs() < 1e-15);
        assert_eq!(g.len(), 176);
        assert_eq!(g.strides()[..2], [16, 1]);
        let idx = g.index(&[3, 7]);
        assert_eq!(g.coords(idx)[..2], [3, 7]);
        let p = g.point(idx);
        assert!((p[0] + 0.4).abs() < 1e-14 && (p[1] - 1.4).abs() < 1e-14);
    }

    #[test]
    fn rejects_small_or_degenerate_grids() {
        assert!(Grid::uniform(2, 0.0, 1.0, 7).is_err());
        assert!(Grid::uniform(4, 0.0, 1.0, 9).is_err());
        assert!(Grid::new(2, &[0.0, 1.0], &[1.0, 1.0], &[9, 9]).is_err());
    }

    #[test]
    fn region_membership_is_nested() {
        let g = Grid::uniform(2, -1.5, 1.5, 48).unwrap();
        let d = DomainSpec::new(
            &g,
            Region::ball(&[0.0, 0.0], 1.0),
            Region::ball(&[0.0, 0.0], 0.5),
        )
        .unwrap();
        for i in 0..g.len() {
            if d.omega0_mask().closure_contains(i) {
                assert_eq!(d.omega_mask().class(i), NodeClass::Interior);
            }
        }
        // boundary nodes of a staircase ball are within half a cell diagonal of the sphere
        let tol = 0.5 * g.h_max() * 2f64.sqrt() + 1e-12;
        for p in &d.surface().points {
            assert!(d.omega().signed_distance(p, 2).abs() <= tol);
        }
        for (p, n) in d.surface().points.iter().zip(&d.surface().normals) {
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            assert!((n[0] - p[0] / r).abs() < 1e-12 && (n[1] - p[1] / r).abs() < 1e-12);
        }
    }

    #[test]
    fn box_surface_is_exact() {
        let g = Grid::uniform(2, 0.0, 1.0, 21).unwrap();
        let d = DomainSpec::new(
            &g,
            Region::cuboid(&[0.2, 0.2], &[0.8, 0.8]),
            Region::cuboid(&[0.4, 0.4], &[0.6, 0.6]),
        )
        .unwrap();
        assert_eq!(d.surface().len(), 4 * 12);
        for p in &d.surface().points {
            assert!(d.omega().signed_distance(p, 2).abs() < 1e-12);
        }
    }

    #[test]
    fn compact_containment_is_enforced() {
        let g = Grid::uniform(2, -1.5, 1.5, 31).unwrap();
        // gap 0.1 < 2h = 0.2
        let err = DomainSpec::new(
            &g,
            Region::ball(&[0.0, 0.0], 1.0),
            Region::ball(&[0.0, 0.0], 0.9),
        );
        assert!(matches!(err, Err(Error::InvalidDomain(_))));
        let err = DomainSpec::new(
            &g,
            Region::ball(&[0.0, 0.0], 1.45),
            Region::ball(&[0.0, 0.0], 0.5),
        );
        assert!(matches!(err, Err(Error::InvalidDomain(_))));
    }

    #[test]
    fn box_signed_distance() {
        let r = Region::cuboid(&[0.0, 0.0], &[1.0, 2.0]);
        assert!((r.signed_distance(&[0.5, 1.0, 0.0], 2) + 0.5).abs() < 1e-15);
        assert!((r.signed_distance(&[2.0, 3.0, 0.0], 2) - 2f64.sqrt()).abs() < 1e-15);
        let n = r.outward_normal(&[1.0, 1.0, 0.0], 2);
        assert_eq!(n[..2], [1.0, 0.0]);
    }
}
