use crate::error::{Error, Result};
use crate::field::{VectorField, WaveState};
use crate::grid::{DomainSpec, RegionMask};
use crate::medium::Medium;
use crate::norms::{h_inner_masked, l2_inner_masked};

use super::config::SolverConfig;
use super::operator::Stencil;
use super::trace::BoundaryTrace;

/// Magnitude beyond which a run is declared unstable.
pub const BLOWUP: f64 = 1e12;

/// Tolerance of the final-data consistency check `φ|_𝒮 = g(T)`.
pub const CONSISTENCY_TOL: f64 = 1e-9;

const NO_SLOT: u32 = u32::MAX;

/// Forward and time-reversed leapfrog integrators bound to one medium, domain
/// and configuration.
///
/// The forward run covers the whole grid (edge nodes pinned to zero). The
/// absorbing layer solves `u_tt + 2σ u_t = Δ*u`,
///
/// ```text
/// (1 + σ dt) u⁺ = 2u − (1 − σ dt) u⁻ + dt² Δ*u
/// ```
///
/// with `σ = Σ_a strength · (depth_a / width)³` summed over the axes whose layer
/// the node lies in. The damping term only removes energy, so the layer is
/// stable for any strength. Outside the layer this is the plain leapfrog
/// `u⁺ = 2u − u⁻ + dt² Δ*u`.
pub struct ElasticSolver<'a> {
    medium: &'a Medium,
    domain: &'a DomainSpec,
    config: SolverConfig,
    steps: usize,
    active: Vec<usize>,
    slot: Vec<u32>,
    sigma: Vec<f64>,
    omega_interior: Vec<usize>,
}

/// One row of the energy bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRow {
    pub t: f64,
    /// `E_Ω(u, t)`
    pub inside: f64,
    /// Energy in the exterior annulus between ∂Ω and the absorbing layer.
    pub outside: f64,
    /// `E(0) − inside − outside`: what the layer has taken (plus discretization drift).
    pub absorbed: f64,
}

impl<'a> ElasticSolver<'a> {
    pub fn new(medium: &'a Medium, domain: &'a DomainSpec, config: &SolverConfig) -> Result<Self> {
        let grid = medium.grid();
        if grid != domain.grid() {
            return Err(Error::GridMismatch);
        }
        let steps = config.validate(medium)?;
        let w = config.pml_width;
        if w > 0 && domain.margin_cells() + 1e-9 < w as f64 {
            return Err(Error::config(
                "pml_width",
                format!(
                    "omega is only {:.2} cells from the grid edge, less than the layer width {w}",
                    domain.margin_cells()
                ),
            ));
        }
        let d = grid.dim();
        let mut active = Vec::new();
        let mut slot = vec![NO_SLOT; grid.len()];
        let mut sigma = Vec::new();
        for i in 0..grid.len() {
            if grid.is_edge(i) {
                continue;
            }
            active.push(i);
            if w == 0 {
                continue;
            }
            let ijk = grid.coords(i);
            let mut s = 0.0;
            for a in 0..d {
                let depth = ijk[a].min(grid.n()[a] - 1 - ijk[a]) as f64;
                if depth < w as f64 {
                    let r = (w as f64 - depth) / w as f64;
                    s += config.pml_strength * r * r * r;
                }
            }
            if s > 0.0 {
                slot[i] = sigma.len() as u32;
                sigma.push(s);
            }
        }
        Ok(ElasticSolver {
            medium,
            domain,
            config: config.clone(),
            steps,
            active,
            slot,
            sigma,
            omega_interior: domain.omega_mask().interior_nodes(),
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn samples(&self) -> usize {
        self.steps / self.config.record_stride + 1
    }

    pub fn medium(&self) -> &Medium {
        self.medium
    }

    pub fn domain(&self) -> &DomainSpec {
        self.domain
    }

    /// Integrates from `(f, 0)` to `T`; returns `Λf` and `(u(T), u_t(T))`.
    pub fn forward(&self, f: &VectorField) -> Result<(BoundaryTrace, WaveState)> {
        self.forward_observed(f, |_, _, _, _| {})
    }

    /// Forward run calling `obs(n, u^{n−1}, u^n, u^{n+1})` for `n = 0..=N`
    /// (with `u^{−1} = u^1`, which encodes `u_t(0) = 0`).
    pub fn forward_observed(
        &self,
        f: &VectorField,
        mut obs: impl FnMut(usize, &[f64], &[f64], &[f64]),
    ) -> Result<(BoundaryTrace, WaveState)> {
        let grid = self.medium.grid();
        if f.grid() != grid {
            return Err(Error::GridMismatch);
        }
        f.check_vanishes_outside(self.domain.omega0_mask(), "source region omega0")?;
        let d = grid.dim();
        let dt = self.config.dt;
        let stride = self.config.record_stride;
        let st = Stencil::new(self.medium);
        let surface = self.domain.surface();
        let mut trace = BoundaryTrace::zeros(surface, d, dt * stride as f64, self.samples());
        record(&mut trace, 0, f.data(), &surface.nodes, d);

        let mut prev = vec![0.0; grid.len() * d];
        let mut cur = f.data().to_vec();
        let mut next = vec![0.0; grid.len() * d];

        self.step(&st, &prev, &cur, &mut next, true);
        check_blowup(&next, 1)?;
        prev.copy_from_slice(&next);

        let mut final_ut = vec![0.0; grid.len() * d];
        for n in 0..=self.steps {
            if n > 0 {
                self.step(&st, &prev, &cur, &mut next, false);
                check_blowup(&next, n + 1)?;
            }
            obs(n, &prev, &cur, &next);
            if n == self.steps {
                for ((o, a), b) in final_ut.iter_mut().zip(&next).zip(&prev) {
                    *o = (a - b) / (2.0 * dt);
                }
                break;
            }
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
            if (n + 1) % stride == 0 {
                record(&mut trace, (n + 1) / stride, &cur, &surface.nodes, d);
            }
        }
        let state = WaveState {
            u: VectorField::from_data(grid, cur)?,
            ut: VectorField::from_data(grid, final_ut)?,
            time: self.config.t_final,
        };
        Ok((trace, state))
    }

    /// One leapfrog step; `first` applies the start-up formula `u¹ = u⁰ + dt²/2 Δ*u⁰`.
    fn step(&self, st: &Stencil, prev: &[f64], cur: &[f64], next: &mut [f64], first: bool) {
        let d = self.medium.grid().dim();
        let dt = self.config.dt;
        let dt2 = dt * dt;
        for &i in &self.active {
            let s = self.slot[i];
            let sd = if s == NO_SLOT { 0.0 } else { self.sigma[s as usize] * dt };
            for c in 0..d {
                let k = i * d + c;
                let lu = st.apply_at(cur, i, c);
                next[k] = if first {
                    cur[k] + 0.5 * dt2 * lu
                } else if sd == 0.0 {
                    2.0 * cur[k] - prev[k] + dt2 * lu
                } else {
                    (2.0 * cur[k] - (1.0 - sd) * prev[k] + dt2 * lu) / (1.0 + sd)
                };
            }
        }
    }

    /// Solves backward from `v(T) = φ`, `v_t(T) = 0` with `v|_𝒮 = g`; returns `(v(0), v_t(0))`.
    pub fn time_reversal(&self, g: &BoundaryTrace, phi: &VectorField) -> Result<WaveState> {
        let state = WaveState {
            u: phi.clone(),
            ut: VectorField::zeros(phi.grid()),
            time: self.config.t_final,
        };
        self.time_reversal_from(g, &state)
    }

    /// Time reversal from an arbitrary final state `(v(T), v_t(T))`.
    ///
    /// Runs the unsplit leapfrog on the interior nodes of Ω, overwriting the
    /// surface nodes with `g` (linearly interpolated between samples) each step.
    pub fn time_reversal_from(&self, g: &BoundaryTrace, last: &WaveState) -> Result<WaveState> {
        let grid = self.medium.grid();
        let d = grid.dim();
        if last.u.grid() != grid || last.ut.grid() != grid {
            return Err(Error::GridMismatch);
        }
        self.check_trace(g)?;
        let surface = self.domain.surface();
        let stride = self.config.record_stride;
        let n_steps = self.steps;
        let dt = self.config.dt;
        let dt2 = dt * dt;
        let gt = g.sample(g.samples() - 1);
        let mut deviation: f64 = 0.0;
        for (s, &node) in surface.nodes.iter().enumerate() {
            for c in 0..d {
                deviation = deviation.max((last.u.get(node, c) - gt[s * d + c]).abs());
            }
        }
        if deviation > CONSISTENCY_TOL {
            return Err(Error::InconsistentData { deviation });
        }

        let mask = self.domain.omega_mask();
        let st = Stencil::new(self.medium);
        let mut cur = last.u.data().to_vec();
        for (p, v) in cur.chunks_mut(d).enumerate() {
            if !mask.closure_contains(p) {
                v.iter_mut().for_each(|x| *x = 0.0);
            }
        }
        let mut gbuf = vec![0.0; surface.len() * d];
        let inject = |v: &mut [f64], m: usize, gbuf: &mut [f64]| {
            g.at_step(m, stride, gbuf);
            for (s, &node) in surface.nodes.iter().enumerate() {
                v[node * d..(node + 1) * d].copy_from_slice(&gbuf[s * d..(s + 1) * d]);
            }
        };
        inject(&mut cur, n_steps, &mut gbuf);

        // v^{N−1} = v^N − dt v_t(T) + dt²/2 Δ*v^N
        let mut prev = vec![0.0; cur.len()];
        for &i in &self.omega_interior {
            for c in 0..d {
                let k = i * d + c;
                prev[k] = cur[k] - dt * last.ut.data()[k] + 0.5 * dt2 * st.apply_at(&cur, i, c);
            }
        }
        if n_steps == 0 {
            return Ok(WaveState {
                u: VectorField::from_data(grid, cur)?,
                ut: last.ut.clone(),
                time: 0.0,
            });
        }
        inject(&mut prev, n_steps - 1, &mut gbuf);
        // `later` holds v^{m+1}, `cur` v^m
        let mut later = cur;
        let mut cur = prev;
        let mut earlier = vec![0.0; later.len()];
        for m in (1..n_steps).rev() {
            for &i in &self.omega_interior {
                for c in 0..d {
                    let k = i * d + c;
                    earlier[k] = 2.0 * cur[k] - later[k] + dt2 * st.apply_at(&cur, i, c);
                }
            }
            inject(&mut earlier, m - 1, &mut gbuf);
            check_blowup(&earlier, n_steps - m + 1)?;
            std::mem::swap(&mut later, &mut cur);
            std::mem::swap(&mut cur, &mut earlier);
        }
        // cur = v^0, later = v^1; v_t(0) = (v^1 − v^{−1}) / 2dt
        let mut ut = vec![0.0; cur.len()];
        for &i in &self.omega_interior {
            for c in 0..d {
                let k = i * d + c;
                ut[k] = (later[k] - cur[k]) / dt - 0.5 * dt * st.apply_at(&cur, i, c);
            }
        }
        for &node in &surface.nodes {
            for c in 0..d {
                let k = node * d + c;
                ut[k] = (later[k] - cur[k]) / dt;
            }
        }
        Ok(WaveState {
            u: VectorField::from_data(grid, cur)?,
            ut: VectorField::from_data(grid, ut)?,
            time: 0.0,
        })
    }

    fn check_trace(&self, g: &BoundaryTrace) -> Result<()> {
        let expect_dt = self.config.dt * self.config.record_stride as f64;
        if &g.surface != self.domain.surface() || g.dim != self.medium.grid().dim() {
            return Err(Error::config("trace", "surface does not match the domain"));
        }
        if g.samples() != self.samples() {
            return Err(Error::config(
                "trace",
                format!("{} samples, expected {}", g.samples(), self.samples()),
            ));
        }
        if (g.dt_sample - expect_dt).abs() > 1e-12 * expect_dt {
            return Err(Error::config(
                "trace",
                format!("sample spacing {} differs from dt * record_stride = {expect_dt}", g.dt_sample),
            ));
        }
        Ok(())
    }

    /// Cells outside Ω whose corners all lie outside the absorbing layer.
    pub fn exterior_mask(&self) -> RegionMask {
        let grid = self.medium.grid();
        let w = self.config.pml_width;
        let omega = self.domain.omega_mask();
        let cells = (0..grid.len())
            .map(|i| {
                if !grid.is_cell_base(i) || omega.cell_in(i) {
                    return false;
                }
                let ijk = grid.coords(i);
                (0..grid.dim()).all(|a| ijk[a] >= w && ijk[a] + 1 + w < grid.n()[a])
            })
            .collect();
        RegionMask::from_cells(grid, cells)
    }

    /// Energies inside Ω and in the exterior annulus at every recorded sample.
    pub fn energy_flux_report(&self, f: &VectorField) -> Result<Vec<EnergyRow>> {
        let grid = self.medium.grid();
        let dt = self.config.dt;
        let stride = self.config.record_stride;
        let omega = self.domain.omega_mask();
        let ext = self.exterior_mask();
        let mut rows = Vec::new();
        let mut err = None;
        self.forward_observed(f, |n, prev, cur, next| {
            if n % stride != 0 || err.is_some() {
                return;
            }
            let ut: Vec<f64> = next.iter().zip(prev).map(|(a, b)| (a - b) / (2.0 * dt)).collect();
            let r = (|| -> Result<(f64, f64)> {
                let u = VectorField::from_data(grid, cur.to_vec())?;
                let ut = VectorField::from_data(grid, ut)?;
                let e = |m: &RegionMask| -> Result<f64> {
                    Ok(h_inner_masked(self.medium, &u, &u, m)? + l2_inner_masked(&ut, &ut, m)?)
                };
                Ok((e(omega)?, e(&ext)?))
            })();
            match r {
                Ok((inside, outside)) => rows.push(EnergyRow {
                    t: n as f64 * dt,
                    inside,
                    outside,
                    absorbed: 0.0,
                }),
                Err(e) => err = Some(e),
            }
        })?;
        if let Some(e) = err {
            return Err(e);
        }
        let e0 = rows.first().map(|r| r.inside + r.outside).unwrap_or(0.0);
        for r in &mut rows {
            r.absorbed = e0 - r.inside - r.outside;
        }
        Ok(rows)
    }
}

fn record(trace: &mut BoundaryTrace, k: usize, u: &[f64], nodes: &[usize], d: usize) {
    let out = trace.sample_mut(k);
    for (s, &node) in nodes.iter().enumerate() {
        out[s * d..(s + 1) * d].copy_from_slice(&u[node * d..(node + 1) * d]);
    }
}

fn check_blowup(u: &[f64], step: usize) -> Result<()> {
    let m = u.iter().fold(0.0f64, |m, v| if v.is_nan() { f64::INFINITY } else { m.max(v.abs()) });
    if m > BLOWUP {
        return Err(Error::UnstableStep { step, magnitude: m });
    }
    Ok(())
}

/// `Λf` and the final state.
pub fn forward_solve(
    medium: &Medium,
    domain: &DomainSpec,
    f: &VectorField,
    config: &SolverConfig,
) -> Result<(BoundaryTrace, WaveState)> {
    ElasticSolver::new(medium, domain, config)?.forward(f)
}

/// `(v(0), v_t(0))` for final data `φ` and boundary data `g`.
pub fn time_reversal_solve(
    medium: &Medium,
    domain: &DomainSpec,
    g: &BoundaryTrace,
    phi: &VectorField,
    config: &SolverConfig,
) -> Result<WaveState> {
    ElasticSolver::new(medium, domain, config)?.time_reversal(g, phi)
}

pub fn energy_flux_report(
    medium: &Medium,
    domain: &DomainSpec,
    f: &VectorField,
    config: &SolverConfig,
) -> Result<Vec<EnergyRow>> {
    ElasticSolver::new(medium, domain, config)?.energy_flux_report(f)
}
