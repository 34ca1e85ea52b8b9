//! Ground-truth phantoms and the relative error measures.

use elastic_tr::phantom::{make_phantom, relative_error, Bump, Norm, PhantomKind, Profile};
use elastic_tr::{DomainSpec, Grid, Medium, Region};

fn main() -> elastic_tr::Result<()> {
    let grid = Grid::uniform(2, -1.5, 1.5, 128)?;
    let domain = DomainSpec::new(&grid, Region::ball(&[0.0, 0.0], 1.0), Region::ball(&[0.0, 0.0], 0.6))?;
    let medium = Medium::homogeneous(&grid, 1.0, 1.0)?;

    let kinds = [
        (
            "gaussian",
            PhantomKind::Bumps(vec![Bump {
                center: [0.1, 0.0, 0.0],
                amplitude: [0.0, 1.0, 0.0],
                profile: Profile::Gaussian { sigma: 0.04 },
            }]),
        ),
        (
            "annulus",
            PhantomKind::Annulus {
                center: [0.0; 3],
                radius: 0.3,
                half_width: 0.15,
                amplitude: 1.0,
            },
        ),
        (
            "random",
            PhantomKind::RandomSmooth {
                count: 5,
                min_radius: 0.1,
                max_radius: 0.25,
                amplitude: 1.0,
                seed: 9,
            },
        ),
    ];
    for (name, kind) in &kinds {
        let f = make_phantom(kind, &domain)?;
        let noisy = f.scaled(1.01);
        println!(
            "{name:9} max {:.3}, 1% scaling error: H {:.4}, L2 {:.4}",
            f.max_abs(),
            relative_error(&medium, &domain, &noisy, &f, Norm::H)?,
            relative_error(&medium, &domain, &noisy, &f, Norm::L2)?
        );
    }

    // too close to the edge of the source region
    let wide = PhantomKind::Bumps(vec![Bump {
        center: [0.4, 0.0, 0.0],
        amplitude: [1.0, 0.0, 0.0],
        profile: Profile::Compact { radius: 0.3 },
    }]);
    println!("{}", make_phantom(&wide, &domain).unwrap_err());
    Ok(())
}
