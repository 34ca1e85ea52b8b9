//! Displacement-valued grid functions and wave states.

use crate::error::{Error, Result};
use crate::grid::{Grid, Point, Region, RegionMask};

/// Values below this magnitude count as zero when checking supports.
pub const SUPPORT_TOL: f64 = 1e-14;

/// A `d`-component vector field on a `d`-dimensional grid.
///
/// Components are interleaved per node: `data[node * d + c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    data: Vec<f64>,
    support: Option<Region>,
}

impl VectorField {
    pub fn zeros(grid: &Grid) -> Self {
        VectorField {
            grid: grid.clone(),
            data: vec![0.0; grid.len() * grid.dim()],
            support: None,
        }
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: &Grid, mut f: impl FnMut(&Point) -> [f64; 3]) -> Self {
        let d = grid.dim();
        let mut data = Vec::with_capacity(grid.len() * d);
        for i in 0..grid.len() {
            let v = f(&grid.point(i));
            data.extend_from_slice(&v[..d]);
        }
        VectorField {
            grid: grid.clone(),
            data,
            support: None,
        }
    }

    pub fn from_data(grid: &Grid, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() * grid.dim() {
            return Err(Error::GridMismatch);
        }
        Ok(VectorField {
            grid: grid.clone(),
            data,
            support: None,
        })
    }

    /// Builds a field from `d` separate component arrays.
    pub fn from_components(grid: &Grid, comps: &[Vec<f64>]) -> Result<Self> {
        let d = grid.dim();
        if comps.len() != d || comps.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::GridMismatch);
        }
        let mut data = vec![0.0; grid.len() * d];
        for (c, comp) in comps.iter().enumerate() {
            for (i, v) in comp.iter().enumerate() {
                data[i * d + c] = *v;
            }
        }
        Ok(VectorField {
            grid: grid.clone(),
            data,
            support: None,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, node: usize, c: usize) -> f64 {
        self.data[node * self.dim() + c]
    }

    pub fn set(&mut self, node: usize, c: usize, v: f64) {
        let d = self.dim();
        self.data[node * d + c] = v;
    }

    pub fn node(&self, node: usize) -> &[f64] {
        let d = self.dim();
        &self.data[node * d..(node + 1) * d]
    }

    pub fn component(&self, c: usize) -> Vec<f64> {
        let d = self.dim();
        self.data.iter().skip(c).step_by(d).copied().collect()
    }

    pub fn support(&self) -> Option<&Region> {
        self.support.as_ref()
    }

    /// Declares a support region after verifying the field vanishes outside it.
    pub fn with_support(mut self, region: &Region) -> Result<Self> {
        let mask = RegionMask::new(&self.grid, region);
        self.check_vanishes_outside(&mask, "declared support")?;
        self.support = Some(region.clone());
        Ok(self)
    }

    /// Errors if any value exceeds [`SUPPORT_TOL`] (relative to the peak, floored at one)
    /// on a node outside the closure of `mask`.
    pub fn check_vanishes_outside(&self, mask: &RegionMask, what: &str) -> Result<()> {
        let tol = SUPPORT_TOL * self.max_abs().max(1.0);
        let d = self.dim();
        for (i, v) in self.data.chunks(d).enumerate() {
            if !mask.closure_contains(i) {
                if let Some(x) = v.iter().find(|x| x.abs() > tol) {
                    return Err(Error::SupportViolation(format!(
                        "value {x:e} at {:?} lies outside the {what}",
                        &self.grid.point(i)[..d]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn same_grid(&self, other: &VectorField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    pub fn scaled(&self, s: f64) -> VectorField {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &VectorField) -> Result<()> {
        self.same_grid(x)?;
        self.data
            .iter_mut()
            .zip(&x.data)
            .for_each(|(s, v)| *s += a * v);
        Ok(())
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        out.support = None;
        Ok(out)
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField> {
        let mut out = self.clone();
        out.axpy(1.0, other)?;
        out.support = None;
        Ok(out)
    }

    /// Zeroes every node outside the closure of `mask`.
    pub fn restrict_to(&mut self, mask: &RegionMask) {
        let d = self.dim();
        for (i, v) in self.data.chunks_mut(d).enumerate() {
            if !mask.closure_contains(i) {
                v.iter_mut().for_each(|x| *x = 0.0);
            }
        }
    }
}

/// The pair `(u, u_t)` at one time instant.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    pub u: VectorField,
    pub ut: VectorField,
    pub time: f64,
}

impl WaveState {
    pub fn new(u: VectorField, ut: VectorField, time: f64) -> Result<Self> {
        u.same_grid(&ut)?;
        Ok(WaveState { u, ut, time })
    }

    pub fn zeros(grid: &Grid, time: f64) -> Self {
        WaveState {
            u: VectorField::zeros(grid),
            ut: VectorField::zeros(grid),
            time,
        }
    }
}
