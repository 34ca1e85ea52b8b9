//! The energy seminorm, its kernel and the discrete Korn constant.

use elastic_tr::norms::{h_seminorm, korn_constant, l2_norm, quadratic_energy};
use elastic_tr::{Grid, Medium, Region, VectorField, WaveState};

fn main() -> elastic_tr::Result<()> {
    let grid = Grid::uniform(2, -1.0, 1.0, 65)?;
    let medium = Medium::homogeneous(&grid, 2.0, 1.0)?;
    let disk = Region::ball(&[0.0, 0.0], 0.9);

    // rigid translations carry no elastic energy
    let shift = VectorField::from_fn(&grid, |_| [1.0, -2.0, 0.0]);
    println!("|translation|_H = {:.2e}", h_seminorm(&medium, &shift, &disk)?);

    // uniform stretch u = (x, y): density λ(div u)² + μ/2 |∇u + ∇uᵀ|² = 4(λ + μ)
    let stretch = VectorField::from_fn(&grid, |p| [p[0], p[1], 0.0]);
    let h = h_seminorm(&medium, &stretch, &disk)?;
    println!("|stretch|_H^2 = {:.4} (disk area x 4(lambda + mu) = {:.4})", h * h, std::f64::consts::PI * 0.81 * 12.0);

    let state = WaveState::new(stretch.clone(), stretch.scaled(0.5), 0.0)?;
    println!("E = {:.4}, |u|_L2 = {:.4}", quadratic_energy(&medium, &state, &disk)?, l2_norm(&stretch, &disk)?);
    println!("Korn constant ~ {:.4}", korn_constant(&medium, &disk, 20, 1)?);
    Ok(())
}
