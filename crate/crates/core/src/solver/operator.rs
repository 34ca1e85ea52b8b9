//! Flux-form finite-difference discretization of
//! `Δ*u = ∇·[μ(∇u + ∇uᵀ)] + ∇(λ ∇·u)`.
//!
//! Component `c` at node `i`:
//!
//! ```text
//! (Δ*u)_c = Σ_a D⁺_a(A_ca D⁻_a u_c) + Σ_{a≠c} [D⁰_a(μ D⁰_c u_a) + D⁰_c(λ D⁰_a u_a)]
//! ```
//!
//! with `A_cc = λ + 2μ`, `A_ca = μ` and half-point coefficients averaged from the
//! two neighbouring nodes. The operator is symmetric on fields vanishing at the
//! grid edge; edge nodes always map to zero.

use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::medium::Medium;

pub(crate) struct Stencil<'a> {
    lam: &'a [f64],
    mu: &'a [f64],
    d: usize,
    s: [usize; 3],
    inv_h2: [f64; 3],
    inv_2h: [f64; 3],
}

impl<'a> Stencil<'a> {
    pub(crate) fn new(medium: &'a Medium) -> Self {
        let g = medium.grid();
        let mut inv_h2 = [0.0; 3];
        let mut inv_2h = [0.0; 3];
        for a in 0..g.dim() {
            inv_h2[a] = 1.0 / (g.h()[a] * g.h()[a]);
            inv_2h[a] = 0.5 / g.h()[a];
        }
        Stencil {
            lam: &medium.lambda,
            mu: &medium.mu,
            d: g.dim(),
            s: g.strides(),
            inv_h2,
            inv_2h,
        }
    }

    /// Contributions to `(Δ*u)_c` at node `i` grouped by the axis of the outer
    /// difference; their sum is the full operator.
    #[inline]
    pub(crate) fn axis_terms(&self, u: &[f64], i: usize, c: usize) -> [f64; 3] {
        let d = self.d;
        let (lam, mu) = (self.lam, self.mu);
        let mut out = [0.0; 3];
        for a in 0..d {
            let sa = self.s[a];
            let (ip, im) = (i + sa, i - sa);
            let coef = |j: usize| if a == c { lam[j] + 2.0 * mu[j] } else { mu[j] };
            let ci = coef(i);
            let cp = 0.5 * (ci + coef(ip));
            let cm = 0.5 * (ci + coef(im));
            let uc = u[i * d + c];
            let mut v = (cp * (u[ip * d + c] - uc) - cm * (uc - u[im * d + c])) * self.inv_h2[a];
            if a != c {
                let sc = self.s[c];
                let dcu = |j: usize| (u[(j + sc) * d + a] - u[(j - sc) * d + a]) * self.inv_2h[c];
                v += (mu[ip] * dcu(ip) - mu[im] * dcu(im)) * self.inv_2h[a];
            } else {
                for b in (0..d).filter(|&b| b != c) {
                    let sb = self.s[b];
                    let dbu =
                        |j: usize| (u[(j + sb) * d + b] - u[(j - sb) * d + b]) * self.inv_2h[b];
                    v += (lam[ip] * dbu(ip) - lam[im] * dbu(im)) * self.inv_2h[c];
                }
            }
            out[a] = v;
        }
        out
    }

    #[inline]
    pub(crate) fn apply_at(&self, u: &[f64], i: usize, c: usize) -> f64 {
        let t = self.axis_terms(u, i, c);
        t[..self.d].iter().sum()
    }
}

/// Applies the discrete elastic operator on the whole grid.
pub fn discrete_elastic_operator(medium: &Medium, u: &VectorField) -> Result<VectorField> {
    let grid = medium.grid();
    if u.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let st = Stencil::new(medium);
    let d = grid.dim();
    let mut out = VectorField::zeros(grid);
    let data = out.data_mut();
    for i in 0..grid.len() {
        if grid.is_edge(i) {
            continue;
        }
        for c in 0..d {
            data[i * d + c] = st.apply_at(u.data(), i, c);
        }
    }
    Ok(out)
}
