//! Ground-truth initial displacements supported in Ω₀.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::grid::{dist, DomainSpec, Point};
use crate::medium::Medium;
use crate::norms::{h_seminorm_masked, l2_norm_masked};

/// Below this relative amplitude a Gaussian is cut to exactly zero.
pub const GAUSSIAN_CUTOFF: f64 = 1e-14;

/// Radial profile of a bump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// `exp(−r² / 2σ²)`, cut to zero where it falls below [`GAUSSIAN_CUTOFF`].
    Gaussian { sigma: f64 },
    /// `(1 − r²/R²)⁴` for `r < R`: C³ with compact support.
    Compact { radius: f64 },
}

impl Profile {
    pub fn support_radius(&self) -> f64 {
        match *self {
            Profile::Gaussian { sigma } => sigma * (2.0 * (1.0 / GAUSSIAN_CUTOFF).ln()).sqrt(),
            Profile::Compact { radius } => radius,
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r >= self.support_radius() {
            return 0.0;
        }
        match *self {
            Profile::Gaussian { sigma } => (-r * r / (2.0 * sigma * sigma)).exp(),
            Profile::Compact { radius } => (1.0 - r * r / (radius * radius)).powi(4),
        }
    }
}

/// A vector-valued bump `amplitude · profile(|x − center|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bump {
    pub center: Point,
    pub amplitude: Point,
    pub profile: Profile,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PhantomKind {
    Bumps(Vec<Bump>),
    /// Radial displacement `a · ψ(r) x̂` with `ψ(r) = (1 − ((r − ρ)/w)²)⁴` on `|r − ρ| < w`.
    Annulus {
        center: Point,
        radius: f64,
        half_width: f64,
        amplitude: f64,
    },
    /// `count` compact bumps with random centers, radii and vector amplitudes.
    RandomSmooth {
        count: usize,
        min_radius: f64,
        max_radius: f64,
        amplitude: f64,
        seed: u64,
    },
}

fn check_fits(domain: &DomainSpec, center: &Point, reach: f64) -> Result<()> {
    let g = domain.grid();
    let d = g.dim();
    let margin = 2.0 * g.h_max();
    let sd = domain.omega0().signed_distance(center, d);
    if sd + reach > -margin {
        return Err(Error::SupportViolation(format!(
            "phantom component at {:?} with reach {reach:.4} leaves omega0 shrunk by 2h = {margin:.4}",
            &center[..d]
        )));
    }
    Ok(())
}

/// Builds a phantom, verifying that it fits inside Ω₀ with a `2h` margin.
pub fn make_phantom(kind: &PhantomKind, domain: &DomainSpec) -> Result<VectorField> {
    let grid = domain.grid();
    let d = grid.dim();
    let bumps = match kind {
        PhantomKind::Bumps(b) => b.clone(),
        PhantomKind::Annulus {
            center,
            radius,
            half_width,
            amplitude,
        } => {
            if !(*half_width > 0.0 && *half_width < *radius) {
                return Err(Error::config(
                    "phantom.half_width",
                    "must be positive and smaller than the radius",
                ));
            }
            check_fits(domain, center, radius + half_width)?;
            let (c, rho, w, a) = (*center, *radius, *half_width, *amplitude);
            let f = VectorField::from_fn(grid, |p| {
                let r = dist(p, &c, d);
                let t = (r - rho) / w;
                let mut v = [0.0; 3];
                if t.abs() < 1.0 && a != 0.0 {
                    let psi = a * (1.0 - t * t).powi(4);
                    for k in 0..d {
                        v[k] = psi * (p[k] - c[k]) / r;
                    }
                }
                v
            });
            return f.with_support(domain.omega0());
        }
        PhantomKind::RandomSmooth {
            count,
            min_radius,
            max_radius,
            amplitude,
            seed,
        } => random_bumps(domain, *count, *min_radius, *max_radius, *amplitude, *seed)?,
    };
    for b in &bumps {
        check_fits(domain, &b.center, b.profile.support_radius())?;
    }
    let f = VectorField::from_fn(grid, |p| {
        let mut v = [0.0; 3];
        for b in &bumps {
            let s = b.profile.eval(dist(p, &b.center, d));
            if s != 0.0 {
                for k in 0..d {
                    v[k] += b.amplitude[k] * s;
                }
            }
        }
        v
    });
    f.with_support(domain.omega0())
}

fn random_bumps(
    domain: &DomainSpec,
    count: usize,
    min_radius: f64,
    max_radius: f64,
    amplitude: f64,
    seed: u64,
) -> Result<Vec<Bump>> {
    if !(min_radius > 0.0 && max_radius >= min_radius) {
        return Err(Error::config(
            "phantom.min_radius",
            "need 0 < min_radius <= max_radius",
        ));
    }
    let grid = domain.grid();
    let d = grid.dim();
    let margin = 2.0 * grid.h_max();
    let (lo, hi) = domain.omega0().bounding_box(d);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        if attempts > 10_000 * count.max(1) {
            return Err(Error::SupportViolation(
                "cannot place random bumps inside omega0 with the 2h margin".into(),
            ));
        }
        let radius = rng.random_range(min_radius..=max_radius);
        let mut center = [0.0; 3];
        for a in 0..d {
            center[a] = rng.random_range(lo[a]..=hi[a]);
        }
        let mut amp = [0.0; 3];
        for v in amp.iter_mut().take(d) {
            *v = amplitude * rng.random_range(-1.0..=1.0);
        }
        if domain.omega0().signed_distance(&center, d) + radius <= -margin {
            out.push(Bump {
                center,
                amplitude: amp,
                profile: Profile::Compact { radius },
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    H,
    L2,
}

/// `‖f̂ − f‖ / ‖f‖` over Ω₀.
pub fn relative_error(
    medium: &Medium,
    domain: &DomainSpec,
    f_hat: &VectorField,
    f_true: &VectorField,
    norm: Norm,
) -> Result<f64> {
    let mask = domain.omega0_mask();
    let diff = f_hat.sub(f_true)?;
    let measure = |f: &VectorField| match norm {
        Norm::H => h_seminorm_masked(medium, f, mask),
        Norm::L2 => l2_norm_masked(f, mask),
    };
    let denom = measure(f_true)?;
    if denom <= 1e-14 {
        return Err(Error::ZeroTruth);
    }
    Ok(measure(&diff)? / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid, Region};

    fn domain() -> DomainSpec {
        let g = Grid::uniform(2, -1.5, 1.5, 61).unwrap();
        DomainSpec::new(&g, Region::ball(&[0.0, 0.0], 1.0), Region::ball(&[0.0, 0.0], 0.6)).unwrap()
    }

    #[test]
    fn gaussian_peak_and_cutoff() {
        let dom = domain();
        let b = Bump {
            center: [0.0; 3],
            amplitude: [0.7, -0.2, 0.0],
            profile: Profile::Gaussian { sigma: 0.05 },
        };
        let f = make_phantom(&PhantomKind::Bumps(vec![b.clone()]), &dom).unwrap();
        let i = dom.grid().index(&[30, 30]);
        assert_eq!(f.node(i), &[0.7, -0.2]);
        assert!(b.profile.eval(0.9999 * b.profile.support_radius()) < 1.01 * GAUSSIAN_CUTOFF);
    }

    #[test]
    fn oversized_bump_is_rejected() {
        let dom = domain();
        let b = Bump {
            center: [0.3, 0.0, 0.0],
            amplitude: [1.0, 0.0, 0.0],
            profile: Profile::Compact { radius: 0.3 },
        };
        assert!(matches!(
            make_phantom(&PhantomKind::Bumps(vec![b]), &dom),
            Err(Error::SupportViolation(_))
        ));
    }

    #[test]
    fn zero_amplitude_gives_zero() {
        let dom = domain();
        let f = make_phantom(
            &PhantomKind::Annulus {
                center: [0.0; 3],
                radius: 0.3,
                half_width: 0.1,
                amplitude: 0.0,
            },
            &dom,
        )
        .unwrap();
        assert_eq!(f.max_abs(), 0.0);
    }

    #[test]
    fn relative_error_scaling() {
        let dom = domain();
        let m = Medium::homogeneous(dom.grid(), 1.0, 1.0).unwrap();
        let f = make_phantom(
            &PhantomKind::RandomSmooth {
                count: 3,
                min_radius: 0.1,
                max_radius: 0.2,
                amplitude: 1.0,
                seed: 42,
            },
            &dom,
        )
        .unwrap();
        for norm in [Norm::H, Norm::L2] {
            assert_eq!(relative_error(&m, &dom, &f, &f, norm).unwrap(), 0.0);
            let zero = VectorField::zeros(dom.grid());
            assert!((relative_error(&m, &dom, &zero, &f, norm).unwrap() - 1.0).abs() < 1e-14);
            let e = relative_error(&m, &dom, &f.scaled(1.1), &f, norm).unwrap();
            assert!((e - 0.1).abs() < 1e-12);
            assert!(matches!(
                relative_error(&m, &dom, &f, &zero, norm),
                Err(Error::ZeroTruth)
            ));
        }
    }
}
