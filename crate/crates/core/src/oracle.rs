//! Brute-force matrices of `Λ`, `A` and `K = I − AΛ` on tiny grids.
//!
//! Unknowns are the components at the interior nodes of Ω₀ (the discrete
//! stand-in for fields vanishing on ∂Ω₀). The operator norm of `K̂` is measured
//! in the energy inner product `⟨x, y⟩_M = xᵀ M y` with `M` the H(Ω₀) Gram matrix.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::grid::DomainSpec;
use crate::medium::Medium;
use crate::neumann::NeumannOperator;
use crate::solver::{BoundaryTrace, SolverConfig};

pub const MAX_POINTS_PER_AXIS: usize = 20;
pub const MAX_UNKNOWNS: usize = 2000;

/// Power-iteration limits.
pub const POWER_ITERS: usize = 200;
pub const POWER_STAGNATION: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SmallOracle {
    /// Interior nodes of Ω₀ in index order; unknown `k·d + c` is component `c` at `nodes[k]`.
    pub nodes: Vec<usize>,
    /// `trace length × unknowns`
    pub lambda_hat: DMatrix<f64>,
    /// `unknowns × trace length`
    pub a_hat: DMatrix<f64>,
    pub k_hat: DMatrix<f64>,
    /// H(Ω₀) Gram matrix of the unknowns.
    pub gram: DMatrix<f64>,
    /// `‖K̂‖_H` by power iteration on `M⁻¹ K̂ᵀ M K̂`.
    pub h_norm: f64,
    pub power_iterations: usize,
    /// `‖K̂‖_H` from the SVD of `Lᵀ K̂ L⁻ᵀ` with `M = L Lᵀ`.
    pub h_norm_svd: f64,
    /// Largest eigenvalue modulus of `K̂`.
    pub spectral_radius: f64,
}

impl SmallOracle {
    pub fn unknowns(&self) -> usize {
        self.nodes.len() * self.dim()
    }

    fn dim(&self) -> usize {
        if self.nodes.is_empty() {
            1
        } else {
            self.k_hat.nrows() / self.nodes.len()
        }
    }

    /// Nodal vector of a field (interior Ω₀ values only).
    pub fn restrict(&self, f: &VectorField) -> DVector<f64> {
        let d = f.dim();
        DVector::from_iterator(
            self.nodes.len() * d,
            self.nodes.iter().flat_map(|&i| f.node(i).iter().copied()),
        )
    }

    pub fn extend(&self, x: &DVector<f64>, template: &VectorField) -> VectorField {
        let d = template.dim();
        let mut f = VectorField::zeros(template.grid());
        for (k, &i) in self.nodes.iter().enumerate() {
            for c in 0..d {
                f.set(i, c, x[k * d + c]);
            }
        }
        f
    }

    /// `Σ_{j ≤ n} K̂ʲ Â g`.
    pub fn truncated_series(&self, g: &BoundaryTrace, n: usize) -> DVector<f64> {
        let ag = &self.a_hat * DVector::from_column_slice(&g.values);
        let mut term = ag.clone();
        let mut sum = ag;
        for _ in 0..n {
            term = &self.k_hat * term;
            sum += &term;
        }
        sum
    }
}

/// Assembles `Λ̂` and `Â` column by column (in parallel, deterministic order)
/// and measures `K̂ = I − ÂΛ̂`.
pub fn assemble_small_oracle(
    medium: &Medium,
    domain: &DomainSpec,
    config: &SolverConfig,
) -> Result<SmallOracle> {
    let grid = domain.grid();
    let d = grid.dim();
    if let Some(&n) = grid.n().iter().find(|&&n| n > MAX_POINTS_PER_AXIS) {
        return Err(Error::TooLarge {
            unknowns: n,
            cap: MAX_POINTS_PER_AXIS,
        });
    }
    let nodes = domain.omega0_mask().interior_nodes();
    let unknowns = nodes.len() * d;
    if unknowns > MAX_UNKNOWNS {
        return Err(Error::TooLarge {
            unknowns,
            cap: MAX_UNKNOWNS,
        });
    }
    let op = NeumannOperator::new(medium, domain, config)?;
    let zero_trace = op.forward(&VectorField::zeros(grid))?;
    let trace_len = zero_trace.values.len();

    let cols: Vec<Vec<f64>> = (0..unknowns)
        .into_par_iter()
        .map(|j| {
            let mut e = VectorField::zeros(grid);
            e.set(nodes[j / d], j % d, 1.0);
            Ok(op.forward(&e)?.values)
        })
        .collect::<Result<_>>()?;
    let lambda_hat = DMatrix::from_fn(trace_len, unknowns, |r, c| cols[c][r]);

    let a_cols: Vec<Vec<f64>> = (0..trace_len)
        .into_par_iter()
        .map(|j| {
            let mut g = zero_trace.clone();
            g.values[j] = 1.0;
            let f = op.apply_a(&g)?;
            Ok(nodes.iter().flat_map(|&i| f.node(i).to_vec()).collect())
        })
        .collect::<Result<_>>()?;
    let a_hat = DMatrix::from_fn(unknowns, trace_len, |r, c| a_cols[c][r]);

    let k_hat = DMatrix::identity(unknowns, unknowns) - &a_hat * &lambda_hat;

    let ext = op.omega0_extension();
    let gram_cols: Vec<Vec<f64>> = (0..unknowns)
        .map(|j| {
            let mut x = vec![0.0; unknowns];
            x[j] = 1.0;
            ext.apply_interior(&x)
        })
        .collect();
    let gram = DMatrix::from_fn(unknowns, unknowns, |r, c| gram_cols[c][r]);

    let (h_norm, power_iterations) = power_h_norm(&k_hat, &gram)?;
    let h_norm_svd = svd_h_norm(&k_hat, &gram)?;
    let spectral_radius = k_hat
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    Ok(SmallOracle {
        nodes,
        lambda_hat,
        a_hat,
        k_hat,
        gram,
        h_norm,
        power_iterations,
        h_norm_svd,
        spectral_radius,
    })
}

fn cholesky(gram: &DMatrix<f64>) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    gram.clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidDomain("energy Gram matrix is not positive definite".into()))
}

/// Power iteration on `B = M⁻¹ K̂ᵀ M K̂`, self-adjoint in the M inner product;
/// returns `√λ_max(B)` and the iteration count.
pub fn power_h_norm(k: &DMatrix<f64>, gram: &DMatrix<f64>) -> Result<(f64, usize)> {
    let n = k.nrows();
    if n == 0 {
        return Ok((0.0, 0));
    }
    let chol = cholesky(gram)?;
    // deterministic start with every mode represented
    let mut x = DVector::from_fn(n, |i, _| 1.0 + ((i * 7919) % 101) as f64 / 101.0);
    let mnorm = |v: &DVector<f64>| v.dot(&(gram * v)).sqrt();
    let scale = mnorm(&x);
    x /= scale;
    let mut rho = 0.0;
    let mut iters = 0;
    for it in 1..=POWER_ITERS {
        iters = it;
        let kx = k * &x;
        let rq = mnorm(&kx).powi(2);
        let mut y = chol.solve(&(k.transpose() * (gram * &kx)));
        let ny = mnorm(&y);
        if ny == 0.0 {
            return Ok((0.0, it));
        }
        y /= ny;
        x = y;
        if it > 1 && (rq - rho).abs() <= POWER_STAGNATION * rq.abs() {
            rho = rq;
            break;
        }
        rho = rq;
    }
    // final Rayleigh quotient at the converged vector
    let kx = k * &x;
    let rq = mnorm(&kx).powi(2).max(rho);
    Ok((rq.sqrt(), iters))
}

/// Exact `‖K̂‖_H = ‖Lᵀ K̂ L⁻ᵀ‖₂` with `M = L Lᵀ`.
pub fn svd_h_norm(k: &DMatrix<f64>, gram: &DMatrix<f64>) -> Result<f64> {
    if k.nrows() == 0 {
        return Ok(0.0);
    }
    let l = cholesky(gram)?.l();
    let lt = l.transpose();
    // (K̂ L⁻ᵀ)ᵀ = L⁻¹ K̂ᵀ
    let kt_inv = l
        .solve_lower_triangular(&k.transpose())
        .ok_or_else(|| Error::InvalidDomain("singular Cholesky factor".into()))?;
    let b = &lt * kt_inv.transpose();
    Ok(b.singular_values().max())
}
