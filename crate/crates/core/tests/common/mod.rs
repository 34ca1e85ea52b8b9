#![allow(dead_code)]

use elastic_tr::phantom::{Bump, Profile};
use elastic_tr::{DomainSpec, Grid, Medium, Region, VectorField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `[-1.5, 1.5]^2` grid, Ω = unit disk, Ω₀ = centered disk of radius `r0`.
pub fn disk(n: usize, r0: f64) -> (Grid, DomainSpec) {
    let g = Grid::uniform(2, -1.5, 1.5, n).unwrap();
    let d = DomainSpec::new(&g, Region::ball(&[0.0, 0.0], 1.0), Region::ball(&[0.0, 0.0], r0)).unwrap();
    (g, d)
}

pub fn unit_medium(g: &Grid) -> Medium {
    Medium::homogeneous(g, 1.0, 1.0).unwrap()
}

pub fn compact(center: [f64; 2], radius: f64, amp: [f64; 2]) -> Bump {
    Bump {
        center: [center[0], center[1], 0.0],
        amplitude: [amp[0], amp[1], 0.0],
        profile: Profile::Compact { radius },
    }
}

pub fn gaussian(center: [f64; 2], sigma: f64, amp: [f64; 2]) -> Bump {
    Bump {
        center: [center[0], center[1], 0.0],
        amplitude: [amp[0], amp[1], 0.0],
        profile: Profile::Gaussian { sigma },
    }
}

/// A smooth field on the whole grid: a few random low-frequency modes per
/// component plus a random affine part. Nonzero on every region boundary.
pub fn random_smooth(g: &Grid, rng: &mut ChaCha8Rng) -> VectorField {
    let d = g.dim();
    let modes: Vec<(usize, [f64; 3], f64, f64)> = (0..4 * d)
        .map(|k| {
            let mut kv = [0.0; 3];
            for v in kv.iter_mut().take(d) {
                *v = rng.random_range(-3.0..3.0);
            }
            (k % d, kv, rng.random_range(0.0..6.3), rng.random_range(-1.0..1.0))
        })
        .collect();
    let affine: Vec<f64> = (0..d * (d + 1)).map(|_| rng.random_range(-0.5..0.5)).collect();
    VectorField::from_fn(g, |p| {
        let mut v = [0.0; 3];
        for &(c, kv, phase, a) in &modes {
            let arg: f64 = (0..d).map(|i| kv[i] * p[i]).sum::<f64>() + phase;
            v[c] += a * arg.sin();
        }
        for c in 0..d {
            v[c] += affine[c * (d + 1)] + (0..d).map(|i| affine[c * (d + 1) + 1 + i] * p[i]).sum::<f64>();
        }
        v
    })
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_elastic-tr")
}

/// A 2-D disk configuration for the command-line tool.
pub fn cli_config(n: usize, t_final: f64, extra: &str) -> String {
    format!(
        r#"[grid]
dim = 2
min = [-1.5, -1.5]
max = [1.5, 1.5]
n = {n}

[medium]
lambda = 1.0
mu = 1.0

[domain]
omega = "ball"
omega_center = [0.0, 0.0]
omega_radius = 1.0
omega0 = "ball"
omega0_center = [0.0, 0.0]
omega0_radius = 0.6

[solver]
t_final = {t_final}
cfl = 0.5

{extra}"#
    )
}

pub const BUMP_PHANTOM: &str = r#"[phantom]
kind = "bumps"
centers = [[0.1, 0.05]]
amplitudes = [[1.0, 0.5]]
radii = [0.35]
"#;
