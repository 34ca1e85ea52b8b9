mod common;

use common::*;
use elastic_tr::extension::ExtensionSolver;
use elastic_tr::io;
use elastic_tr::norms::{h_inner_masked, h_seminorm_masked};
use elastic_tr::phantom::{make_phantom, PhantomKind};
use elastic_tr::solver::{ElasticSolver, SolverConfig};
use elastic_tr::visibility::{path_travel_time, trace_geodesic, AnalyticSpeed, RayOptions};
use elastic_tr::{
    build_medium, DomainSpec, FieldSpec, GaussianBump, Grid, Medium, Mode, NodeClass, Point, Region, RegionMask,
    VectorField,
};
use proptest::prelude::*;

fn bumpy_medium(g: &Grid, lam: f64, mu: f64, amp: f64, cx: f64) -> Medium {
    let spec = |base: f64| FieldSpec::Bumps {
        base,
        bumps: vec![GaussianBump::new(&[cx, -0.3 * cx], amp * base, 0.3)],
    };
    build_medium(g, spec(lam), spec(mu)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn medium_speed_identities(lam in 0.1f64..5.0, mu in 0.1f64..5.0, amp in -0.5f64..2.0, cx in -1.0f64..1.0) {
        let g = Grid::uniform(2, -1.5, 1.5, 17).unwrap();
        let m = bumpy_medium(&g, lam, mu, amp, cx);
        for i in 0..g.len() {
            prop_assert!((m.cs[i] * m.cs[i] - m.mu[i]).abs() <= 1e-12 * m.mu[i]);
            prop_assert!((m.cp[i] * m.cp[i] - m.lambda[i] - 2.0 * m.mu[i]).abs() <= 1e-12 * m.cp[i] * m.cp[i]);
            prop_assert!(m.cp[i] > m.cs[i]);
            prop_assert!(m.cs[i] >= m.c_minus && m.cp[i] <= m.c_plus);
        }
        prop_assert!(m.c_minus > 0.0 && m.c_plus >= m.c_minus);
    }

    #[test]
    fn region_masks_are_consistent(n in 24usize..48, r in 0.6f64..1.2, frac in 0.3f64..1.0, x0 in -0.1f64..0.1) {
        // keep Ω₀ at least 0.3 > 2h inside Ω
        let r0 = frac * (r - x0.abs() - 0.3);
        let g = Grid::uniform(2, -1.5, 1.5, n).unwrap();
        let omega = Region::ball(&[0.0, 0.0], r);
        let omega0 = Region::ball(&[x0, 0.0], r0);
        let dom = DomainSpec::new(&g, omega.clone(), omega0).unwrap();
        let (m, m0) = (dom.omega_mask(), dom.omega0_mask());
        for i in 0..g.len() {
            if m0.class(i) != NodeClass::Outside {
                prop_assert_eq!(m.class(i), NodeClass::Interior);
            }
        }
        let tol = g.h_max() * 2f64.sqrt() / 2.0;
        for p in &dom.surface().points {
            prop_assert!(omega.signed_distance(p, 2).abs() <= tol + 1e-12);
        }
        let mut sorted = dom.surface().nodes.clone();
        sorted.sort_unstable();
        prop_assert_eq!(&sorted, &dom.surface().nodes);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn energy_form_is_symmetric_psd_with_constant_kernel(seed in 0u64..1000, amp in 0.0f64..1.5, c in prop::sample::select(vec![-1.0f64, 1.0, 2.0])) {
        let g = Grid::uniform(2, -1.0, 1.0, 21).unwrap();
        let m = bumpy_medium(&g, 1.3, 0.7, amp, 0.2);
        let mask = RegionMask::new(&g, &Region::ball(&[0.0, 0.0], 0.8));
        let mut r = rng(seed);
        let f = random_smooth(&g, &mut r);
        let h = random_smooth(&g, &mut r);
        let fg = h_inner_masked(&m, &f, &h, &mask).unwrap();
        let gf = h_inner_masked(&m, &h, &f, &mask).unwrap();
        prop_assert_eq!(fg, gf);
        prop_assert!(h_inner_masked(&m, &f, &f, &mask).unwrap() >= 0.0);
        let constant = VectorField::from_fn(&g, |_| [c, -0.5 * c, 0.0]);
        let scale = h_seminorm_masked(&m, &f, &mask).unwrap();
        prop_assert!(h_inner_masked(&m, &constant, &f, &mask).unwrap().abs() <= 1e-12 * scale.max(1.0));
        prop_assert!(h_seminorm_masked(&m, &constant, &mask).unwrap() <= 1e-12);
    }

    #[test]
    fn projection_is_an_orthogonal_projector(seed in 0u64..1000) {
        let g = Grid::uniform(2, -1.0, 1.0, 24).unwrap();
        let m = bumpy_medium(&g, 1.0, 1.0, 0.5, -0.2);
        let ext = ExtensionSolver::new(&m, &Region::ball(&[0.0, 0.0], 0.8)).unwrap();
        let f = random_smooth(&g, &mut rng(seed));
        let pf = ext.project(&f).unwrap();
        let ppf = ext.project(&pf).unwrap();
        let mask = ext.mask();
        let norm = |v: &VectorField| h_seminorm_masked(&m, v, mask).unwrap();
        prop_assert!(norm(&ppf.sub(&pf).unwrap()) <= 1e-8 * norm(&pf).max(1e-300));
        prop_assert!(norm(&pf) <= norm(&f) * (1.0 + 1e-9));
        prop_assert!(ext.orthogonality_defect(&f).unwrap() <= 1e-7);
    }

    #[test]
    fn io_round_trips(seed in 0u64..1000, n in 8usize..16, t in -10.0f64..10.0) {
        let g = Grid::new(2, &[-1.0, 0.0], &[2.0, 0.5], &[n, n + 3]).unwrap();
        let f = random_smooth(&g, &mut rng(seed));
        let back = io::decode_field(&io::encode_field(&f), &g).unwrap();
        prop_assert_eq!(back.data(), f.data());
        let ut = f.scaled(-t);
        let s = elastic_tr::WaveState::new(f.clone(), ut, t).unwrap();
        let back = io::decode_state(&io::encode_state(&s), &g).unwrap();
        prop_assert_eq!(back.time, t);
        prop_assert_eq!(back.ut.data(), s.ut.data());
    }

    #[test]
    fn csv_numbers_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        prop_assert_eq!(elastic_tr::cli::num(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn phantoms_are_supported_and_deterministic(seed in 0u64..10_000, count in 1usize..5) {
        let (_, dom) = disk(48, 0.6);
        let kind = PhantomKind::RandomSmooth { count, min_radius: 0.1, max_radius: 0.25, amplitude: 1.0, seed };
        let f = make_phantom(&kind, &dom).unwrap();
        let again = make_phantom(&kind, &dom).unwrap();
        prop_assert_eq!(again.data(), f.data());
        let mask = dom.omega0_mask();
        for i in 0..dom.grid().len() {
            if mask.class(i) != NodeClass::Interior {
                prop_assert!(f.node(i).iter().all(|v| *v == 0.0));
            }
        }
        prop_assert!(f.max_abs() > 0.0);
    }
}

fn radial(k: f64) -> impl elastic_tr::visibility::SpeedField {
    AnalyticSpeed::new(
        2,
        move |p: &Point| 1.0 + k * (p[0] * p[0] + p[1] * p[1]),
        move |p: &Point| [2.0 * k * p[0], 2.0 * k * p[1], 0.0],
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn geodesics_are_time_symmetric_and_metric(k in -0.3f64..0.5, r in 0.0f64..0.9, a in 0.0f64..std::f64::consts::TAU, b in 0.0f64..std::f64::consts::TAU) {
        let omega = Region::ball(&[0.0, 0.0], 1.0);
        let s = radial(k);
        let x = [r * a.cos(), r * a.sin(), 0.0];
        let xi = [b.cos(), b.sin(), 0.0];
        let mut opts = RayOptions::for_region(&s, &omega);
        opts.record_path = true;
        let fwd = trace_geodesic(&s, &omega, &x, &xi, Mode::S, &opts).unwrap();
        let rev = trace_geodesic(&s, &omega, &x, &[-xi[0], -xi[1], 0.0], Mode::S, &opts).unwrap();
        prop_assert!((fwd.tau_plus + rev.tau_minus).abs() <= 1e-6);
        prop_assert!((fwd.tau_minus + rev.tau_plus).abs() <= 1e-6);
        let metric = path_travel_time(&s, &fwd.path);
        prop_assert!((metric - fwd.tau_plus).abs() <= 1e-3 * fwd.tau_plus.max(1e-3));
    }

    #[test]
    fn pressure_rays_exit_no_later_than_shear_rays(lam in 0.0f64..4.0, mu in 0.2f64..3.0, r in 0.0f64..0.9, b in 0.0f64..std::f64::consts::TAU) {
        let g = Grid::uniform(2, -1.5, 1.5, 9).unwrap();
        let m = Medium::homogeneous(&g, lam, mu).unwrap();
        let omega = Region::ball(&[0.0, 0.0], 1.0);
        let x = [r, 0.0, 0.0];
        let xi = [b.cos(), b.sin(), 0.0];
        let (p, s) = (m.speed(Mode::P), m.speed(Mode::S));
        let tp = trace_geodesic(p.as_ref(), &omega, &x, &xi, Mode::P, &RayOptions::for_region(p.as_ref(), &omega)).unwrap();
        let ts = trace_geodesic(s.as_ref(), &omega, &x, &xi, Mode::S, &RayOptions::for_region(s.as_ref(), &omega)).unwrap();
        prop_assert!(tp.tau_plus <= ts.tau_plus + 1e-9);
        prop_assert!(-tp.tau_minus <= -ts.tau_minus + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn forward_map_is_linear(seed in 0u64..1000, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let (g, dom) = disk(64, 0.6);
        let m = unit_medium(&g);
        let s = ElasticSolver::new(&m, &dom, &SolverConfig::for_medium(&m, 0.6, 0.5)).unwrap();
        let f1 = make_phantom(&PhantomKind::RandomSmooth { count: 2, min_radius: 0.1, max_radius: 0.2, amplitude: 1.0, seed }, &dom).unwrap();
        let f2 = make_phantom(&PhantomKind::RandomSmooth { count: 2, min_radius: 0.1, max_radius: 0.2, amplitude: 1.0, seed: seed + 1 }, &dom).unwrap();
        let mut f = f1.scaled(a);
        f.axpy(b, &f2).unwrap();
        let t = s.forward(&f).unwrap().0;
        let combo = s.forward(&f1).unwrap().0.combine(a, &s.forward(&f2).unwrap().0, b).unwrap();
        let scale = combo.max_abs().max(t.max_abs());
        let diff = t.values.iter().zip(&combo.values).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        prop_assert!(diff <= 1e-11 * scale.max(1e-300));
    }
}
