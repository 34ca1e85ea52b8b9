use crate::error::{Error, Result};
use crate::grid::Surface;

/// Displacement samples on the observation surface at `t_k = k · dt_sample`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    pub surface: Surface,
    pub dim: usize,
    pub dt_sample: f64,
    /// Time-major: `values[(k * surface.len() + s) * dim + c]`.
    pub values: Vec<f64>,
}

impl BoundaryTrace {
    pub fn zeros(surface: &Surface, dim: usize, dt_sample: f64, samples: usize) -> Self {
        BoundaryTrace {
            surface: surface.clone(),
            dim,
            dt_sample,
            values: vec![0.0; samples * surface.len() * dim],
        }
    }

    pub fn samples(&self) -> usize {
        let per = self.surface.len() * self.dim;
        if per == 0 {
            0
        } else {
            self.values.len() / per
        }
    }

    pub fn t_final(&self) -> f64 {
        (self.samples().saturating_sub(1)) as f64 * self.dt_sample
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.samples()).map(|k| k as f64 * self.dt_sample).collect()
    }

    pub fn sample(&self, k: usize) -> &[f64] {
        let per = self.surface.len() * self.dim;
        &self.values[k * per..(k + 1) * per]
    }

    pub fn sample_mut(&mut self, k: usize) -> &mut [f64] {
        let per = self.surface.len() * self.dim;
        &mut self.values[k * per..(k + 1) * per]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Values at step `m` of a scheme running `stride` steps per sample,
    /// linearly interpolated between samples.
    pub fn at_step(&self, m: usize, stride: usize, out: &mut [f64]) {
        let k = m / stride;
        let r = m % stride;
        if r == 0 {
            out.copy_from_slice(self.sample(k));
        } else {
            let w = r as f64 / stride as f64;
            for ((o, a), b) in out.iter_mut().zip(self.sample(k)).zip(self.sample(k + 1)) {
                *o = (1.0 - w) * a + w * b;
            }
        }
    }

    /// `α · self + β · other`, for linearity checks and oracle assembly.
    pub fn combine(&self, alpha: f64, other: &BoundaryTrace, beta: f64) -> Result<BoundaryTrace> {
        if self.surface != other.surface || self.values.len() != other.values.len() {
            return Err(Error::GridMismatch);
        }
        let mut out = self.clone();
        for (o, v) in out.values.iter_mut().zip(&other.values) {
            *o = alpha * *o + beta * v;
        }
        Ok(out)
    }
}
