//! Elastic extension `𝓔_U h` (the Δ*-harmonic field with boundary values `h`)
//! and the projector `𝒫_U f = f − 𝓔_U(f|∂U)`.
//!
//! The discrete harmonic condition is taken in the variational sense of the
//! energy form: `(𝓔h, w)_H(U) = 0` for every `w` vanishing on the boundary nodes
//! of `U`. That makes `𝒫_U` exactly the H-orthogonal projection onto fields
//! vanishing on ∂U, so idempotence, non-expansiveness and the Pythagorean
//! identity hold up to the linear-solver tolerance.

use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::grid::{Region, RegionMask};
use crate::medium::Medium;
use crate::norms::{h_inner_masked, Element};

/// Default relative residual target of the conjugate-gradient solve.
pub const DEFAULT_RTOL: f64 = 1e-9;

/// Convergence record of the last solve.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CgStats {
    pub iterations: usize,
    /// `‖r‖ / ‖b‖` at exit.
    pub relative_residual: f64,
}

/// Reusable solver for one medium and region.
pub struct ExtensionSolver<'a> {
    medium: &'a Medium,
    mask: RegionMask,
    el: Element,
    cells: Vec<usize>,
    interior: Vec<usize>,
    boundary: Vec<usize>,
    inv_diag: Vec<f64>,
    pub rtol: f64,
    pub max_iter: usize,
}

impl<'a> ExtensionSolver<'a> {
    pub fn new(medium: &'a Medium, region: &Region) -> Result<Self> {
        Self::from_mask(medium, RegionMask::new(medium.grid(), region))
    }

    pub fn from_mask(medium: &'a Medium, mask: RegionMask) -> Result<Self> {
        let grid = medium.grid();
        let d = grid.dim();
        let el = Element::new(grid);
        let cells: Vec<usize> = mask.cells().collect();
        let interior = mask.interior_nodes();
        let boundary = mask.boundary_nodes();
        if boundary.is_empty() {
            return Err(Error::InvalidDomain("region covers no grid cells".into()));
        }
        let mut diag = vec![0.0; grid.len() * d];
        for &b in &cells {
            el.diagonal_cell(medium, b, &mut diag);
        }
        let inv_diag = interior
            .iter()
            .flat_map(|&i| (0..d).map(move |c| (i, c)))
            .map(|(i, c)| 1.0 / diag[i * d + c])
            .collect();
        let n = interior.len();
        Ok(ExtensionSolver {
            medium,
            mask,
            el,
            cells,
            max_iter: ((200.0 * (n as f64).sqrt()).ceil() as usize).max(50),
            interior,
            boundary,
            inv_diag,
            rtol: DEFAULT_RTOL,
        })
    }

    pub fn mask(&self) -> &RegionMask {
        &self.mask
    }

    /// Boundary nodes of the region in index order; `extend` takes values in this order.
    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary
    }

    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }

    fn d(&self) -> usize {
        self.medium.grid().dim()
    }

    /// `y = K full` restricted to interior rows.
    fn apply_full(&self, full: &[f64], scratch: &mut [f64], y: &mut [f64]) {
        let d = self.d();
        scratch.iter_mut().for_each(|v| *v = 0.0);
        for &b in &self.cells {
            self.el.apply_cell(self.medium, full, b, scratch);
        }
        for (k, &i) in self.interior.iter().enumerate() {
            y[k * d..(k + 1) * d].copy_from_slice(&scratch[i * d..(i + 1) * d]);
        }
    }

    fn scatter(&self, x: &[f64], full: &mut [f64]) {
        let d = self.d();
        for (k, &i) in self.interior.iter().enumerate() {
            full[i * d..(i + 1) * d].copy_from_slice(&x[k * d..(k + 1) * d]);
        }
    }

    /// Extension of `values` (`d` numbers per boundary node, in
    /// [`boundary_nodes`](Self::boundary_nodes) order); zero outside the region.
    pub fn extend(&self, values: &[f64]) -> Result<(VectorField, CgStats)> {
        let grid = self.medium.grid();
        let d = self.d();
        if values.len() != self.boundary.len() * d {
            return Err(Error::GridMismatch);
        }
        let len = grid.len() * d;
        let mut full = vec![0.0; len];
        for (k, &i) in self.boundary.iter().enumerate() {
            full[i * d..(i + 1) * d].copy_from_slice(&values[k * d..(k + 1) * d]);
        }
        let n = self.interior.len() * d;
        let mut scratch = vec![0.0; len];
        let mut b = vec![0.0; n];
        self.apply_full(&full, &mut scratch, &mut b);
        b.iter_mut().for_each(|v| *v = -*v);
        let (x, stats) = self.cg(&b)?;
        self.scatter(&x, &mut full);
        Ok((VectorField::from_data(grid, full)?, stats))
    }

    /// Interior block of the stiffness: `K_II x` for `x` laid out per interior node.
    pub(crate) fn apply_interior(&self, x: &[f64]) -> Vec<f64> {
        let len = self.medium.grid().len() * self.d();
        let mut full = vec![0.0; len];
        let mut scratch = vec![0.0; len];
        let mut y = vec![0.0; x.len()];
        self.scatter(x, &mut full);
        self.apply_full(&full, &mut scratch, &mut y);
        y
    }

    /// Preconditioned CG on `K_II x = b`.
    fn cg(&self, b: &[f64]) -> Result<(Vec<f64>, CgStats)> {
        let n = b.len();
        let bnorm = norm(b);
        let mut x = vec![0.0; n];
        if bnorm == 0.0 {
            return Ok((x, CgStats::default()));
        }
        let len = self.medium.grid().len() * self.d();
        let mut full = vec![0.0; len];
        let mut scratch = vec![0.0; len];
        let mut r = b.to_vec();
        let mut z: Vec<f64> = r.iter().zip(&self.inv_diag).map(|(r, m)| r * m).collect();
        let mut p = z.clone();
        let mut q = vec![0.0; n];
        let mut rz = dot(&r, &z);
        let mut rel = 1.0;
        for it in 1..=self.max_iter {
            self.scatter(&p, &mut full);
            self.apply_full(&full, &mut scratch, &mut q);
            let alpha = rz / dot(&p, &q);
            for k in 0..n {
                x[k] += alpha * p[k];
                r[k] -= alpha * q[k];
            }
            rel = norm(&r) / bnorm;
            if rel <= self.rtol {
                return Ok((
                    x,
                    CgStats {
                        iterations: it,
                        relative_residual: rel,
                    },
                ));
            }
            for k in 0..n {
                z[k] = r[k] * self.inv_diag[k];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..n {
                p[k] = z[k] + beta * p[k];
            }
        }
        Err(Error::SolverDivergence {
            iterations: self.max_iter,
            residual: rel,
            rtol: self.rtol,
        })
    }

    /// Extension of the boundary values of `f`.
    pub fn extend_field(&self, f: &VectorField) -> Result<VectorField> {
        Ok(self.extend(&self.boundary_values(f)?)?.0)
    }

    pub fn boundary_values(&self, f: &VectorField) -> Result<Vec<f64>> {
        if f.grid() != self.medium.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .boundary
            .iter()
            .flat_map(|&i| f.node(i).iter().copied())
            .collect())
    }

    /// `𝒫_U f`: `f − 𝓔(f|∂U)` on interior nodes, zero elsewhere.
    pub fn project(&self, f: &VectorField) -> Result<VectorField> {
        let e = self.extend_field(f)?;
        Ok(self.project_with(f, &e))
    }

    fn project_with(&self, f: &VectorField, ext: &VectorField) -> VectorField {
        let d = self.d();
        let mut out = VectorField::zeros(f.grid());
        for &i in &self.interior {
            for c in 0..d {
                out.set(i, c, f.get(i, c) - ext.get(i, c));
            }
        }
        out
    }

    /// `|‖𝒫f‖² + ‖𝓔f‖² − ‖f‖²| / max(1, ‖f‖²)` in the H(U) form.
    pub fn orthogonality_defect(&self, f: &VectorField) -> Result<f64> {
        let e = self.extend_field(f)?;
        let p = self.project_with(f, &e);
        let h = |a: &VectorField| h_inner_masked(self.medium, a, a, &self.mask);
        let ff = h(f)?;
        Ok((h(&p)? + h(&e)? - ff).abs() / ff.max(1.0))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `𝓔_U h` for boundary values listed per boundary node of `region` in index order.
pub fn elastic_extension(medium: &Medium, boundary_values: &[f64], region: &Region) -> Result<VectorField> {
    Ok(ExtensionSolver::new(medium, region)?.extend(boundary_values)?.0)
}

pub fn project(medium: &Medium, f: &VectorField, region: &Region) -> Result<VectorField> {
    ExtensionSolver::new(medium, region)?.project(f)
}

pub fn extension_orthogonality_defect(medium: &Medium, f: &VectorField, region: &Region) -> Result<f64> {
    ExtensionSolver::new(medium, region)?.orthogonality_defect(f)
}
