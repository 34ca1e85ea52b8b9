//! Lamé parameter fields and the derived P/S wave speeds.

use crate::error::{Error, Mode, Result};
use crate::grid::{DomainSpec, Grid, Point};
use crate::visibility::{self, Sampling, SpeedField};

/// `amplitude · exp(−|x − center|² / spread)`
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBump {
    pub center: Point,
    pub amplitude: f64,
    pub spread: f64,
}

impl GaussianBump {
    pub fn new(center: &[f64], amplitude: f64, spread: f64) -> Self {
        let mut c = [0.0; 3];
        c[..center.len()].copy_from_slice(center);
        GaussianBump {
            center: c,
            amplitude,
            spread,
        }
    }

    fn value(&self, p: &Point, dim: usize) -> f64 {
        let r2: f64 = (0..dim).map(|a| (p[a] - self.center[a]).powi(2)).sum();
        self.amplitude * (-r2 / self.spread).exp()
    }

    fn gradient(&self, p: &Point, dim: usize) -> Point {
        let v = self.value(p, dim);
        let mut g = [0.0; 3];
        for a in 0..dim {
            g[a] = -2.0 * (p[a] - self.center[a]) / self.spread * v;
        }
        g
    }
}

/// How a scalar parameter field is specified.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldSpec {
    Constant(f64),
    /// A constant background plus additive Gaussian bumps.
    Bumps { base: f64, bumps: Vec<GaussianBump> },
    /// Nodal values read from a raw field file.
    Raw(Vec<f64>),
}

impl FieldSpec {
    pub fn is_analytic(&self) -> bool {
        !matches!(self, FieldSpec::Raw(_))
    }

    /// Closed-form value; `None` for raw fields.
    pub fn value_at(&self, p: &Point, dim: usize) -> Option<f64> {
        match self {
            FieldSpec::Constant(v) => Some(*v),
            FieldSpec::Bumps { base, bumps } => {
                Some(base + bumps.iter().map(|b| b.value(p, dim)).sum::<f64>())
            }
            FieldSpec::Raw(_) => None,
        }
    }

    pub fn gradient_at(&self, p: &Point, dim: usize) -> Option<Point> {
        match self {
            FieldSpec::Constant(_) => Some([0.0; 3]),
            FieldSpec::Bumps { bumps, .. } => {
                let mut g = [0.0; 3];
                for b in bumps {
                    let gb = b.gradient(p, dim);
                    for a in 0..dim {
                        g[a] += gb[a];
                    }
                }
                Some(g)
            }
            FieldSpec::Raw(_) => None,
        }
    }

    fn evaluate(&self, grid: &Grid) -> Result<Vec<f64>> {
        match self {
            FieldSpec::Raw(v) => {
                if v.len() != grid.len() {
                    return Err(Error::GridMismatch);
                }
                Ok(v.clone())
            }
            _ => Ok((0..grid.len())
                .map(|i| self.value_at(&grid.point(i), grid.dim()).unwrap())
                .collect()),
        }
    }
}

/// Heterogeneous isotropic elastic medium sampled on a grid.
#[derive(Debug, Clone)]
pub struct Medium {
    grid: Grid,
    lambda_spec: FieldSpec,
    mu_spec: FieldSpec,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub cp: Vec<f64>,
    pub cs: Vec<f64>,
    pub c_plus: f64,
    pub c_minus: f64,
}

/// Evaluates the parameter descriptors on `grid` and derives the wave speeds
/// `c_p = √(λ + 2μ)` and `c_s = √μ`.
pub fn build_medium(grid: &Grid, lambda_spec: FieldSpec, mu_spec: FieldSpec) -> Result<Medium> {
    let lambda = lambda_spec.evaluate(grid)?;
    let mu = mu_spec.evaluate(grid)?;
    for (name, values) in [("lambda", &lambda), ("mu", &mu)] {
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::NonPositiveParameter {
                parameter: name,
                index: grid.coords(i)[..grid.dim()].to_vec(),
                value: *v,
            });
        }
    }
    let cp: Vec<f64> = lambda
        .iter()
        .zip(&mu)
        .map(|(l, m)| (l + 2.0 * m).sqrt())
        .collect();
    let cs: Vec<f64> = mu.iter().map(|m| m.sqrt()).collect();
    let c_plus = cp.iter().copied().fold(0.0, f64::max);
    let c_minus = cs.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Medium {
        grid: grid.clone(),
        lambda_spec,
        mu_spec,
        lambda,
        mu,
        cp,
        cs,
        c_plus,
        c_minus,
    })
}

impl Medium {
    /// Constant Lamé parameters.
    pub fn homogeneous(grid: &Grid, lambda: f64, mu: f64) -> Result<Medium> {
        build_medium(grid, FieldSpec::Constant(lambda), FieldSpec::Constant(mu))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn lambda_spec(&self) -> &FieldSpec {
        &self.lambda_spec
    }

    pub fn mu_spec(&self) -> &FieldSpec {
        &self.mu_spec
    }

    /// Speed model of one mode for the ray tracer: closed form when both
    /// descriptors are analytic, cubic interpolation of the nodal speeds otherwise.
    pub fn speed(&self, mode: Mode) -> Box<dyn SpeedField + '_> {
        if self.lambda_spec.is_analytic() && self.mu_spec.is_analytic() {
            Box::new(AnalyticMediumSpeed {
                medium: self,
                mode,
            })
        } else {
            let values = match mode {
                Mode::P => &self.cp,
                Mode::S => &self.cs,
            };
            Box::new(visibility::GridSpeed::new(&self.grid, values.clone()))
        }
    }
}

struct AnalyticMediumSpeed<'a> {
    medium: &'a Medium,
    mode: Mode,
}

impl SpeedField for AnalyticMediumSpeed<'_> {
    fn dim(&self) -> usize {
        self.medium.grid.dim()
    }

    fn speed(&self, p: &Point) -> f64 {
        let d = self.dim();
        let mu = self.medium.mu_spec.value_at(p, d).unwrap();
        match self.mode {
            Mode::S => mu.sqrt(),
            Mode::P => (self.medium.lambda_spec.value_at(p, d).unwrap() + 2.0 * mu).sqrt(),
        }
    }

    fn gradient(&self, p: &Point) -> Point {
        let d = self.dim();
        let c = self.speed(p);
        let gm = self.medium.mu_spec.gradient_at(p, d).unwrap();
        let mut g = [0.0; 3];
        match self.mode {
            Mode::S => {
                for a in 0..d {
                    g[a] = gm[a] / (2.0 * c);
                }
            }
            Mode::P => {
                let gl = self.medium.lambda_spec.gradient_at(p, d).unwrap();
                for a in 0..d {
                    g[a] = (gl[a] + 2.0 * gm[a]) / (2.0 * c);
                }
            }
        }
        g
    }
}

/// Half the longest shear geodesic chord through Ω, i.e. the lower bound
/// `ℓ_s(Ω)/2` on admissible observation times, estimated by tracing shear rays
/// from sampled phase-space points.
pub fn smallest_shear_diameter(medium: &Medium, domain: &DomainSpec) -> Result<f64> {
    if medium.grid() != domain.grid() {
        return Err(Error::GridMismatch);
    }
    let speed = medium.speed(Mode::S);
    let sampling = Sampling::for_grid(domain.grid());
    visibility::half_chord_sup(speed.as_ref(), domain.omega(), &sampling)
}
