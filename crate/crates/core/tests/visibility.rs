mod common;

use common::*;
use elastic_tr::visibility::{
    certify_visibility, certify_with, half_chord_sup, refine_sharp_time, AnalyticSpeed, ConstantSpeed, GridSpeed,
    Sampling, Verdict,
};
use elastic_tr::{smallest_shear_diameter, DomainSpec, FieldSpec, GaussianBump, Grid, Mode, Point, Region};

fn unit_disk() -> Region {
    Region::ball(&[0.0, 0.0], 1.0)
}

fn coarse() -> Sampling {
    Sampling {
        spacing: 0.2,
        directions: 32,
        jitter: 0.25,
        seed: 3,
    }
}

/// `1 + 0.3 sin(πx) sin(πy)` on the unit square.
fn wavy() -> impl elastic_tr::visibility::SpeedField {
    use std::f64::consts::PI;
    AnalyticSpeed::new(
        2,
        |p: &Point| 1.0 + 0.3 * (PI * p[0]).sin() * (PI * p[1]).sin(),
        |p: &Point| {
            [
                0.3 * PI * (PI * p[0]).cos() * (PI * p[1]).sin(),
                0.3 * PI * (PI * p[0]).sin() * (PI * p[1]).cos(),
                0.0,
            ]
        },
    )
}

#[test]
fn half_chord_of_the_disk_scales_with_speed() {
    for (c, want) in [(1.0, 1.0), (0.5, 2.0)] {
        let h = half_chord_sup(&ConstantSpeed { dim: 2, c }, &unit_disk(), &coarse()).unwrap();
        assert!((h - want).abs() < 1e-6, "c = {c}: {h}");
    }
}

#[test]
fn half_chord_converges_under_refinement_in_a_wavy_medium() {
    let square = Region::cuboid(&[0.0, 0.0], &[1.0, 1.0]);
    let s = wavy();
    let a = half_chord_sup(&s, &square, &coarse()).unwrap();
    let b = half_chord_sup(&s, &square, &coarse().refined()).unwrap();
    assert!(b >= a - 1e-12);
    assert!((b - a).abs() < 1e-2, "{a} {b}");
    // the diagonal at the slowest speed bounds it from above
    assert!(b < 2f64.sqrt());
}

#[test]
fn sharp_time_estimates_settle() {
    let square = Region::cuboid(&[0.0, 0.0], &[1.0, 1.0]);
    let s = wavy();
    let est = refine_sharp_time(&s, &s, &square, &coarse(), 1e-2, 4).unwrap();
    let n = est.len();
    assert!(n >= 2 && (est[n - 1] - est[n - 2]).abs() < 1e-2, "{est:?}");
}

#[test]
fn certificate_brackets_the_homogeneous_sharp_time() {
    let (g, dom) = disk(64, 0.6);
    let m = unit_medium(&g);
    let pass = certify_visibility(&m, &dom, 1.1, &Sampling::for_grid(&g)).unwrap();
    assert_eq!(pass.verdict, Verdict::Pass);
    assert!((pass.worst_margin() - 0.1).abs() < 1e-6);
    let (x, _, mode) = pass.worst_sample;
    assert!(x[0].abs() < 1e-12 && x[1].abs() < 1e-12);
    assert_eq!(mode, Mode::S);
    let fail = certify_visibility(&m, &dom, 0.5, &Sampling::for_grid(&g)).unwrap();
    assert_eq!(fail.verdict, Verdict::Fail);
    assert!(fail.worst_margin() < 0.0);
    assert!(pass.trapped.is_empty());
}

#[test]
fn heterogeneous_sharp_time_is_stable_across_grids() {
    let mk = |n: usize| {
        let g = Grid::uniform(2, -1.5, 1.5, n).unwrap();
        let dom = DomainSpec::new(&g, unit_disk(), Region::ball(&[0.0, 0.0], 0.5)).unwrap();
        let mu = FieldSpec::Bumps {
            base: 1.0,
            bumps: vec![GaussianBump::new(&[0.2, 0.0], 0.5, 0.2)],
        };
        let m = elastic_tr::build_medium(&g, FieldSpec::Constant(1.0), mu).unwrap();
        let c = certify_visibility(&m, &dom, 10.0, &coarse()).unwrap();
        (c.sharp_t_estimate, m)
    };
    let (a, _) = mk(32);
    let (b, m) = mk(64);
    assert!((a - b).abs() < 1e-2, "{a} {b}");
    // the faster bump shortens the crossing time of the slowest mode
    assert!(b < 1.0);

    // interpolated nodal speeds agree with the closed form
    let s = m.speed(Mode::S);
    let grid_speed = GridSpeed::new(m.grid(), m.cs.clone());
    let interp = certify_with(&grid_speed, &grid_speed, &unit_disk(), 10.0, &coarse(), false).unwrap();
    let exact = certify_with(s.as_ref(), s.as_ref(), &unit_disk(), 10.0, &coarse(), false).unwrap();
    assert!((interp.sharp_t_estimate - exact.sharp_t_estimate).abs() < 1e-2);
}

#[test]
fn shear_diameter_matches_half_chord() {
    let (g, dom) = disk(64, 0.6);
    let m = elastic_tr::Medium::homogeneous(&g, 1.0, 4.0).unwrap();
    let d = smallest_shear_diameter(&m, &dom).unwrap();
    assert!((d - 0.5).abs() < 1e-6, "{d}");
}

#[test]
fn convex_region_has_no_reentering_rays() {
    let c = ConstantSpeed { dim: 2, c: 1.0 };
    let cert = certify_with(&c, &c, &unit_disk(), 2.5, &coarse(), true).unwrap();
    assert_eq!(cert.reentering, 0);
}
