use crate::error::{Error, Result};
use crate::medium::Medium;

/// Largest admissible Courant factor.
pub const MAX_CFL: f64 = 0.9;

/// Time-stepping and absorbing-layer parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub cfl: f64,
    pub t_final: f64,
    /// Absorbing layer thickness in cells; zero disables it.
    pub pml_width: usize,
    /// Peak damping rate of the cubic ramp (1/time).
    pub pml_strength: f64,
    pub record_stride: usize,
}

impl SolverConfig {
    /// Largest step allowed by `cfl` for this medium.
    pub fn dt_limit(medium: &Medium, cfl: f64) -> f64 {
        let g = medium.grid();
        cfl * g.h_min() / (medium.c_plus * (g.dim() as f64).sqrt())
    }

    /// Picks the largest stable `dt` that divides `t_final` evenly, a 10-cell
    /// absorbing layer and its default strength.
    pub fn for_medium(medium: &Medium, t_final: f64, cfl: f64) -> Self {
        let dt_max = Self::dt_limit(medium, cfl);
        let steps = (t_final / dt_max * (1.0 - 1e-12)).ceil().max(1.0);
        let pml_width = 10;
        SolverConfig {
            dt: t_final / steps,
            cfl,
            t_final,
            pml_width,
            pml_strength: default_strength(medium, pml_width),
            record_stride: 1,
        }
    }

    pub fn with_pml(mut self, width: usize, strength: f64) -> Self {
        self.pml_width = width;
        self.pml_strength = strength;
        self
    }

    pub fn without_pml(self) -> Self {
        self.with_pml(0, 0.0)
    }

    /// Checks stability and step-count consistency; returns the number of steps.
    pub fn validate(&self, medium: &Medium) -> Result<usize> {
        if !(self.cfl > 0.0 && self.cfl <= MAX_CFL) {
            return Err(Error::config("cfl", format!("must lie in (0, {MAX_CFL}], got {}", self.cfl)));
        }
        if !(self.t_final > 0.0) {
            return Err(Error::config("t_final", "must be positive"));
        }
        let limit = Self::dt_limit(medium, self.cfl);
        if !(self.dt > 0.0) || self.dt > limit * (1.0 + 1e-12) {
            return Err(Error::config(
                "dt",
                format!("{} violates the stability bound {limit} at cfl {}", self.dt, self.cfl),
            ));
        }
        let ratio = self.t_final / self.dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::config(
                "dt",
                format!("t_final / dt = {ratio} is not an integer"),
            ));
        }
        if self.record_stride == 0 || steps as usize % self.record_stride != 0 {
            return Err(Error::config(
                "record_stride",
                format!("must divide the step count {steps}"),
            ));
        }
        if self.pml_width > 0 && !(self.pml_strength > 0.0) {
            return Err(Error::config("pml_strength", "must be positive when the layer is on"));
        }
        Ok(steps as usize)
    }
}

/// `2 c₊ ln(1000) / L` for a cubic ramp of thickness `L = width · h`: the
/// damping a wave at speed `c₊` accumulates on a round trip through the layer
/// is about 1e-3. Sweeps on the 128² disk setup put the optimum within a
/// factor of two of this value.
pub fn default_strength(medium: &Medium, width: usize) -> f64 {
    if width == 0 {
        return 0.0;
    }
    let l = width as f64 * medium.grid().h_max();
    2.0 * medium.c_plus * 1000f64.ln() / l
}
