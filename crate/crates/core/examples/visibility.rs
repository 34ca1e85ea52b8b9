//! Certify the visibility condition by tracing P and S rays.

use elastic_tr::visibility::{certify_visibility, Sampling, Verdict};
use elastic_tr::{build_medium, DomainSpec, FieldSpec, GaussianBump, Grid, Region};

fn main() -> elastic_tr::Result<()> {
    let grid = Grid::uniform(2, -1.5, 1.5, 64)?;
    let domain = DomainSpec::new(&grid, Region::ball(&[0.0, 0.0], 1.0), Region::ball(&[0.0, 0.0], 0.6))?;
    // a slow shear lens off-centre
    let mu = FieldSpec::Bumps {
        base: 1.0,
        bumps: vec![GaussianBump::new(&[0.3, 0.0], -0.4, 0.1)],
    };
    let medium = build_medium(&grid, FieldSpec::Constant(1.0), mu)?;
    let sampling = Sampling::for_grid(&grid);
    for t in [0.8, 1.0, 1.2, 1.5] {
        let c = certify_visibility(&medium, &domain, t, &sampling)?;
        let (x, xi, mode) = c.worst_sample;
        println!(
            "T = {t:.2}: {} (margin {:+.4}), sharp T ~ {:.4} from x = ({:.2}, {:.2}), xi = ({:.2}, {:.2}), {mode}",
            if c.verdict == Verdict::Pass { "pass" } else { "fail" },
            c.worst_margin(),
            c.sharp_t_estimate,
            x[0],
            x[1],
            xi[0],
            xi[1]
        );
    }
    Ok(())
}
