//! Elastic extension of boundary values and the energy-orthogonal projection.

use elastic_tr::extension::ExtensionSolver;
use elastic_tr::norms::h_seminorm_masked;
use elastic_tr::{Grid, Medium, Region, VectorField};

fn main() -> elastic_tr::Result<()> {
    let grid = Grid::uniform(2, -1.0, 1.0, 64)?;
    let medium = Medium::homogeneous(&grid, 1.0, 1.0)?;
    let ext = ExtensionSolver::new(&medium, &Region::ball(&[0.0, 0.0], 0.8))?;

    // boundary values of a rotation-like field
    let values: Vec<f64> = ext
        .boundary_nodes()
        .iter()
        .flat_map(|&i| {
            let p = grid.point(i);
            [-p[1] + 0.1 * p[0] * p[0], p[0]]
        })
        .collect();
    let (phi, stats) = ext.extend(&values)?;
    println!("extension: {} CG iterations, residual {:.1e}", stats.iterations, stats.relative_residual);
    println!("|phi|_H = {:.4e}", h_seminorm_masked(&medium, &phi, ext.mask())?);

    let f = VectorField::from_fn(&grid, |p| [(3.0 * p[0]).sin() * p[1], (2.0 * p[1]).cos(), 0.0]);
    let pf = ext.project(&f)?;
    println!(
        "|f|_H = {:.4}, |Pf|_H = {:.4}, orthogonality defect {:.1e}",
        h_seminorm_masked(&medium, &f, ext.mask())?,
        h_seminorm_masked(&medium, &pf, ext.mask())?,
        ext.orthogonality_defect(&f)?
    );
    Ok(())
}
