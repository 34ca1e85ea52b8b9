//! The elastic energy form
//!
//! ```text
//! (f, g)_H(U) = ∫_U λ (∇·f)(∇·g) + μ/2 [∇f + ∇fᵀ] : [∇g + ∇gᵀ]
//! ```
//!
//! its semi-norm, a lumped L² norm and the quadratic energy `‖u‖²_H + ‖u_t‖²`.
//!
//! Integrals run over the cells of `U` (a cell belongs to `U` when its center
//! does). On each cell the nodal values are read as a multilinear (Q1)
//! interpolant and the integrand is evaluated at the `2^d` Gauss points, with λ
//! and μ interpolated the same way. This form is exact for linear fields, has no
//! spurious zero-energy modes, and its stiffness matrix is what the elliptic
//! extension inverts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{VectorField, WaveState};
use crate::grid::{NodeClass, Region, RegionMask};
use crate::medium::Medium;
use crate::solver::discrete_elastic_operator;

/// Reference Q1 element for one grid: shape values and gradients at the Gauss points.
pub(crate) struct Element {
    pub d: usize,
    pub offsets: Vec<usize>,
    /// `shape[gp][k]`
    pub shape: Vec<Vec<f64>>,
    /// `grad[gp][k][a]`
    pub grad: Vec<Vec<[f64; 3]>>,
    pub weight: f64,
}

impl Element {
    pub(crate) fn new(grid: &crate::grid::Grid) -> Self {
        let d = grid.dim();
        let nc = 1usize << d;
        let off = 0.5 / 3f64.sqrt();
        let mut shape = Vec::with_capacity(nc);
        let mut grad = Vec::with_capacity(nc);
        for gp in 0..nc {
            let xi: Vec<f64> = (0..d)
                .map(|a| if gp >> a & 1 == 1 { 0.5 + off } else { 0.5 - off })
                .collect();
            let factor = |k: usize, a: usize| if k >> a & 1 == 1 { xi[a] } else { 1.0 - xi[a] };
            let mut s = Vec::with_capacity(nc);
            let mut g = Vec::with_capacity(nc);
            for k in 0..nc {
                s.push((0..d).map(|a| factor(k, a)).product());
                let mut gk = [0.0; 3];
                for a in 0..d {
                    let sign = if k >> a & 1 == 1 { 1.0 } else { -1.0 };
                    let rest: f64 = (0..d).filter(|&b| b != a).map(|b| factor(k, b)).product();
                    gk[a] = sign * rest / grid.h()[a];
                }
                g.push(gk);
            }
            shape.push(s);
            grad.push(g);
        }
        Element {
            d,
            offsets: grid.corner_offsets(),
            shape,
            grad,
            weight: grid.cell_volume() / nc as f64,
        }
    }

    pub(crate) fn gauss_points(&self) -> usize {
        self.shape.len()
    }

    /// `G[c][a] = ∂_a u_c` at a Gauss point of the cell with base node `base`.
    #[inline]
    pub(crate) fn gradient(&self, u: &[f64], base: usize, gp: usize) -> [[f64; 3]; 3] {
        let d = self.d;
        let mut g = [[0.0; 3]; 3];
        for (k, off) in self.offsets.iter().enumerate() {
            let node = base + off;
            let dn = &self.grad[gp][k];
            for c in 0..d {
                let v = u[node * d + c];
                for a in 0..d {
                    g[c][a] += v * dn[a];
                }
            }
        }
        g
    }

    #[inline]
    pub(crate) fn interpolate(&self, s: &[f64], base: usize, gp: usize) -> f64 {
        self.offsets
            .iter()
            .zip(&self.shape[gp])
            .map(|(off, n)| s[base + off] * n)
            .sum()
    }

    /// Energy density `λ div f div g + μ/2 S_f : S_g`; symmetric in `(f, g)` bit for bit.
    #[inline]
    pub(crate) fn density(&self, lam: f64, mu: f64, gf: &[[f64; 3]; 3], gg: &[[f64; 3]; 3]) -> f64 {
        let d = self.d;
        let (mut df, mut dg) = (0.0, 0.0);
        for c in 0..d {
            df += gf[c][c];
            dg += gg[c][c];
        }
        let mut ss = 0.0;
        for c in 0..d {
            for a in 0..d {
                ss += (gf[c][a] + gf[a][c]) * (gg[c][a] + gg[a][c]);
            }
        }
        lam * (df * dg) + 0.5 * mu * ss
    }

    /// Adds the cell's stiffness times `u` to `y`: `y_(k,c) += Σ_gp w σ_ca ∂_a N_k`
    /// with stress `σ = λ div u I + μ (∇u + ∇uᵀ)`.
    pub(crate) fn apply_cell(&self, medium: &Medium, u: &[f64], base: usize, y: &mut [f64]) {
        let d = self.d;
        for gp in 0..self.gauss_points() {
            let lam = self.interpolate(&medium.lambda, base, gp);
            let mu = self.interpolate(&medium.mu, base, gp);
            let g = self.gradient(u, base, gp);
            let div: f64 = (0..d).map(|c| g[c][c]).sum();
            let mut sigma = [[0.0; 3]; 3];
            for c in 0..d {
                for a in 0..d {
                    sigma[c][a] = mu * (g[c][a] + g[a][c]);
                }
                sigma[c][c] += lam * div;
            }
            for (k, off) in self.offsets.iter().enumerate() {
                let node = base + off;
                let dn = &self.grad[gp][k];
                for c in 0..d {
                    let mut acc = 0.0;
                    for a in 0..d {
                        acc += sigma[c][a] * dn[a];
                    }
                    y[node * d + c] += self.weight * acc;
                }
            }
        }
    }

    /// Adds the diagonal of the cell stiffness to `diag`.
    pub(crate) fn diagonal_cell(&self, medium: &Medium, base: usize, diag: &mut [f64]) {
        let d = self.d;
        for gp in 0..self.gauss_points() {
            let lam = self.interpolate(&medium.lambda, base, gp);
            let mu = self.interpolate(&medium.mu, base, gp);
            for (k, off) in self.offsets.iter().enumerate() {
                let node = base + off;
                let dn = &self.grad[gp][k];
                let n2: f64 = dn[..d].iter().map(|x| x * x).sum();
                for c in 0..d {
                    diag[node * d + c] +=
                        self.weight * (lam * dn[c] * dn[c] + mu * (n2 + dn[c] * dn[c]));
                }
            }
        }
    }
}

fn check_grids(medium: &Medium, f: &VectorField) -> Result<()> {
    if f.grid() != medium.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// `(f, g)_H(U)` over the cells of `mask`.
pub fn h_inner_masked(
    medium: &Medium,
    f: &VectorField,
    g: &VectorField,
    mask: &RegionMask,
) -> Result<f64> {
    check_grids(medium, f)?;
    f.same_grid(g)?;
    let el = Element::new(medium.grid());
    let mut sum = 0.0;
    for base in mask.cells() {
        for gp in 0..el.gauss_points() {
            let lam = el.interpolate(&medium.lambda, base, gp);
            let mu = el.interpolate(&medium.mu, base, gp);
            let gf = el.gradient(f.data(), base, gp);
            let gg = el.gradient(g.data(), base, gp);
            sum += el.weight * el.density(lam, mu, &gf, &gg);
        }
    }
    Ok(sum)
}

pub fn h_inner(medium: &Medium, f: &VectorField, g: &VectorField, region: &Region) -> Result<f64> {
    h_inner_masked(medium, f, g, &RegionMask::new(medium.grid(), region))
}

pub fn h_seminorm_masked(medium: &Medium, f: &VectorField, mask: &RegionMask) -> Result<f64> {
    Ok(h_inner_masked(medium, f, f, mask)?.max(0.0).sqrt())
}

pub fn h_seminorm(medium: &Medium, f: &VectorField, region: &Region) -> Result<f64> {
    h_seminorm_masked(medium, f, &RegionMask::new(medium.grid(), region))
}

/// Lumped L² inner product: each cell of `mask` contributes `|cell| / 2^d` times
/// the pointwise product at each of its corners.
pub fn l2_inner_masked(f: &VectorField, g: &VectorField, mask: &RegionMask) -> Result<f64> {
    f.same_grid(g)?;
    let grid = f.grid();
    let d = grid.dim();
    let offsets = grid.corner_offsets();
    let w = grid.cell_volume() / offsets.len() as f64;
    let mut sum = 0.0;
    for base in mask.cells() {
        for off in &offsets {
            let n = base + off;
            let mut p = 0.0;
            for c in 0..d {
                p += f.data()[n * d + c] * g.data()[n * d + c];
            }
            sum += w * p;
        }
    }
    Ok(sum)
}

pub fn l2_norm_masked(f: &VectorField, mask: &RegionMask) -> Result<f64> {
    Ok(l2_inner_masked(f, f, mask)?.sqrt())
}

pub fn l2_norm(f: &VectorField, region: &Region) -> Result<f64> {
    l2_norm_masked(f, &RegionMask::new(f.grid(), region))
}

/// `E_U = ‖u‖²_H(U) + ‖u_t‖²_L²(U)`.
pub fn quadratic_energy_masked(medium: &Medium, state: &WaveState, mask: &RegionMask) -> Result<f64> {
    let h = h_inner_masked(medium, &state.u, &state.u, mask)?;
    let l = l2_inner_masked(&state.ut, &state.ut, mask)?;
    Ok(h + l)
}

pub fn quadratic_energy(medium: &Medium, state: &WaveState, region: &Region) -> Result<f64> {
    quadratic_energy_masked(medium, state, &RegionMask::new(medium.grid(), region))
}

/// `∫_U |∇f|²` with the same quadrature as the energy form.
pub fn h1_seminorm_sq(f: &VectorField, mask: &RegionMask) -> f64 {
    let el = Element::new(f.grid());
    let d = el.d;
    let mut sum = 0.0;
    for base in mask.cells() {
        for gp in 0..el.gauss_points() {
            let g = el.gradient(f.data(), base, gp);
            let mut s = 0.0;
            for row in g.iter().take(d) {
                for v in row.iter().take(d) {
                    s += v * v;
                }
            }
            sum += el.weight * s;
        }
    }
    sum
}

/// `|(−Δ*f, g)_L²(U) − (f, g)_H(U)| / max(1, |(f, g)_H(U)|)` with the solver's
/// finite-difference Δ*. Requires `g` to vanish within `2h` of ∂U.
pub fn discrete_adjointness_defect(
    medium: &Medium,
    f: &VectorField,
    g: &VectorField,
    region: &Region,
) -> Result<f64> {
    check_grids(medium, f)?;
    f.same_grid(g)?;
    let grid = medium.grid();
    let d = grid.dim();
    let margin = 2.0 * grid.h_max();
    for i in 0..grid.len() {
        if grid_value_nonzero(g, i) && region.signed_distance(&grid.point(i), d) > -margin {
            return Err(Error::SupportViolation(format!(
                "g is nonzero at {:?}, within 2h of the region boundary",
                &grid.point(i)[..d]
            )));
        }
    }
    let mask = RegionMask::new(grid, region);
    let mut lf = discrete_elastic_operator(medium, f)?;
    lf.scale(-1.0);
    let lhs = l2_inner_masked(&lf, g, &mask)?;
    let rhs = h_inner_masked(medium, f, g, &mask)?;
    Ok((lhs - rhs).abs() / rhs.abs().max(1.0))
}

fn grid_value_nonzero(g: &VectorField, i: usize) -> bool {
    g.node(i).iter().any(|v| v.abs() > crate::field::SUPPORT_TOL)
}

/// Estimates the discrete Korn constant `c_K` in `‖f‖²_H ≥ c_K ∫|∇f|²` by
/// minimizing the Rayleigh quotient over random trial fields that vanish within
/// `2h` of ∂U. Trials range from nodal noise to fields smoothed by repeated
/// neighbour averaging.
pub fn korn_constant(medium: &Medium, region: &Region, trials: usize, seed: u64) -> Result<f64> {
    let grid = medium.grid();
    let d = grid.dim();
    let mask = RegionMask::new(grid, region);
    let margin = 2.0 * grid.h_max();
    let admissible: Vec<usize> = (0..grid.len())
        .filter(|&i| {
            mask.class(i) == NodeClass::Interior
                && region.signed_distance(&grid.point(i), d) <= -margin
        })
        .collect();
    if admissible.is_empty() {
        return Err(Error::InvalidDomain(
            "region has no nodes 2h inside its boundary".into(),
        ));
    }
    let mut inside = vec![false; grid.len()];
    admissible.iter().for_each(|&i| inside[i] = true);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let strides = grid.strides();
    let mut best = f64::INFINITY;
    for t in 0..trials {
        let mut f = VectorField::zeros(grid);
        for &i in &admissible {
            for c in 0..d {
                f.set(i, c, rng.random_range(-1.0..1.0));
            }
        }
        for _ in 0..(t % 8) * 4 {
            let src = f.clone();
            for &i in &admissible {
                for c in 0..d {
                    let mut acc = src.get(i, c);
                    for a in 0..d {
                        acc += src.get(i + strides[a], c) + src.get(i - strides[a], c);
                    }
                    f.set(i, c, acc / (2 * d + 1) as f64);
                }
            }
            for i in 0..grid.len() {
                if !inside[i] {
                    for c in 0..d {
                        f.set(i, c, 0.0);
                    }
                }
            }
        }
        let denom = h1_seminorm_sq(&f, &mask);
        if denom > 0.0 {
            best = best.min(h_inner_masked(medium, &f, &f, &mask)? / denom);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn unit_square() -> (Grid, Medium, Region) {
        let g = Grid::uniform(2, -0.25, 1.25, 31).unwrap();
        let m = Medium::homogeneous(&g, 1.0, 1.0).unwrap();
        (g, m, Region::cuboid(&[0.0, 0.0], &[1.0, 1.0]))
    }

    #[test]
    fn linear_field_energy_is_exact() {
        let (g, m, r) = unit_square();
        let f = VectorField::from_fn(&g, |p| [p[0], 0.0, 0.0]);
        let n = h_seminorm(&m, &f, &r).unwrap();
        assert!((n - 3f64.sqrt()).abs() < 1e-12, "{n}");
    }

    #[test]
    fn constants_are_in_the_kernel() {
        let (g, m, r) = unit_square();
        let f = VectorField::from_fn(&g, |_| [1.0, 1.0, 0.0]);
        assert!(h_seminorm(&m, &f, &r).unwrap() <= 1e-12);
        let z = VectorField::zeros(&g);
        assert_eq!(h_seminorm(&m, &z, &r).unwrap(), 0.0);
    }

    #[test]
    fn lumped_l2_of_constant_is_area() {
        let (g, _, r) = unit_square();
        let f = VectorField::from_fn(&g, |_| [1.0, 0.0, 0.0]);
        assert!((l2_norm(&f, &r).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn korn_constant_is_positive() {
        let g = Grid::uniform(2, -1.0, 1.0, 25).unwrap();
        let m = Medium::homogeneous(&g, 1.0, 1.0).unwrap();
        let c = korn_constant(&m, &Region::ball(&[0.0, 0.0], 0.8), 16, 3).unwrap();
        // for λ, μ = 1 and compact fields the continuum bound is μ
        assert!(c > 0.5, "{c}");
    }

    #[test]
    fn mismatched_grids() {
        let (g, m, r) = unit_square();
        let other = VectorField::zeros(&Grid::uniform(2, 0.0, 1.0, 9).unwrap());
        let f = VectorField::zeros(&g);
        assert!(matches!(h_inner(&m, &f, &other, &r), Err(Error::GridMismatch)));
    }
}
