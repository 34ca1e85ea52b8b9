//! Neumann-series reconstruction of an initial displacement from boundary data.

use elastic_tr::neumann::{NeumannOperator, ReconstructOptions};
use elastic_tr::phantom::{make_phantom, PhantomKind};
use elastic_tr::solver::SolverConfig;
use elastic_tr::{DomainSpec, Grid, Medium, Region};

fn main() -> elastic_tr::Result<()> {
    let n = std::env::args().nth(1).map_or(96, |s| s.parse().expect("grid size"));
    let grid = Grid::uniform(2, -1.5, 1.5, n)?;
    let domain = DomainSpec::new(&grid, Region::ball(&[0.0, 0.0], 1.0), Region::ball(&[0.0, 0.0], 0.6))?;
    let medium = Medium::homogeneous(&grid, 1.0, 1.0)?;
    let f = make_phantom(
        &PhantomKind::RandomSmooth {
            count: 4,
            min_radius: 0.15,
            max_radius: 0.3,
            amplitude: 1.0,
            seed: 42,
        },
        &domain,
    )?;

    let op = NeumannOperator::new(&medium, &domain, &SolverConfig::for_medium(&medium, 2.5, 0.5))?;
    let g = op.forward(&f)?;
    let opts = ReconstructOptions {
        ground_truth: Some(&f),
        ..Default::default()
    };
    let report = op.reconstruct(&g, &opts)?;
    println!(" j  increment    H-error     ratio");
    for r in &report.iterations {
        println!(
            "{:2}  {:.4e}  {:.4e}  {}",
            r.j,
            r.residual,
            r.error_h.unwrap(),
            r.ratio.map_or("-".into(), |x| format!("{x:.4}"))
        );
    }
    println!("converged: {}, |K| estimate {:.4}", report.converged, report.contraction_estimate);
    Ok(())
}
