//! Simulate boundary data `Λf` and watch the energy leave the domain.

use elastic_tr::phantom::{make_phantom, Bump, PhantomKind, Profile};
use elastic_tr::solver::{ElasticSolver, SolverConfig};
use elastic_tr::{DomainSpec, Grid, Medium, Region};

fn main() -> elastic_tr::Result<()> {
    let grid = Grid::uniform(2, -1.5, 1.5, 96)?;
    let domain = DomainSpec::new(&grid, Region::ball(&[0.0, 0.0], 1.0), Region::ball(&[0.0, 0.0], 0.6))?;
    let medium = Medium::homogeneous(&grid, 1.0, 1.0)?;
    let f = make_phantom(
        &PhantomKind::Bumps(vec![Bump {
            center: [0.1, 0.05, 0.0],
            amplitude: [1.0, 0.5, 0.0],
            profile: Profile::Compact { radius: 0.35 },
        }]),
        &domain,
    )?;

    let config = SolverConfig::for_medium(&medium, 2.0, 0.5);
    let solver = ElasticSolver::new(&medium, &domain, &config)?;
    let (trace, last) = solver.forward(&f)?;
    println!(
        "{} surface nodes, {} samples, dt = {:.4e}, max |g| = {:.4}, max |u(T)| = {:.2e}",
        trace.surface.len(),
        trace.samples(),
        config.dt,
        trace.max_abs(),
        last.u.max_abs()
    );

    let rows = solver.energy_flux_report(&f)?;
    for r in rows.iter().step_by(rows.len() / 8) {
        println!("t = {:.3}  inside {:.4}  outside {:.4}  absorbed {:.4}", r.t, r.inside, r.outside, r.absorbed);
    }
    Ok(())
}
