//! Run the wave backwards: exact reversal of a full final state, then the
//! practical back-projection `A` that only sees boundary data.

use elastic_tr::neumann::NeumannOperator;
use elastic_tr::phantom::{make_phantom, PhantomKind};
use elastic_tr::solver::SolverConfig;
use elastic_tr::{DomainSpec, Grid, Medium, Region};

fn main() -> elastic_tr::Result<()> {
    let grid = Grid::uniform(2, -1.5, 1.5, 96)?;
    let domain = DomainSpec::new(&grid, Region::ball(&[0.0, 0.0], 1.0), Region::ball(&[0.0, 0.0], 0.6))?;
    let medium = Medium::homogeneous(&grid, 1.0, 1.0)?;
    let f = make_phantom(
        &PhantomKind::Annulus {
            center: [0.0; 3],
            radius: 0.3,
            half_width: 0.15,
            amplitude: 1.0,
        },
        &domain,
    )?;
    let norm = |op: &NeumannOperator, v: &elastic_tr::VectorField| op.h_norm(v);

    // short run without absorption: leapfrog is exactly reversible
    let short = SolverConfig::for_medium(&medium, 0.3, 0.5).without_pml();
    let op = NeumannOperator::new(&medium, &domain, &short)?;
    let (g, last) = op.solver().forward(&f)?;
    let back = op.solver().time_reversal_from(&g, &last)?;
    println!("reversal error {:.2e}", norm(&op, &back.u.sub(&f)?)? / norm(&op, &f)?);

    // long run, boundary data only
    let long = SolverConfig::for_medium(&medium, 2.5, 0.5);
    let op = NeumannOperator::new(&medium, &domain, &long)?;
    let af = op.apply_a(&op.forward(&f)?)?;
    println!("|A Lambda f - f|_H / |f|_H = {:.3e}", norm(&op, &af.sub(&f)?)? / norm(&op, &f)?);
    Ok(())
}
