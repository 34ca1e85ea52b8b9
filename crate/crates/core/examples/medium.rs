//! Lamé fields, wave speeds and the shear-diameter lower bound on `T`.

use elastic_tr::{build_medium, smallest_shear_diameter, DomainSpec, FieldSpec, GaussianBump, Grid, Region};

fn main() -> elastic_tr::Result<()> {
    let grid = Grid::uniform(2, -1.5, 1.5, 96)?;
    let domain = DomainSpec::new(&grid, Region::ball(&[0.0, 0.0], 1.0), Region::ball(&[0.0, 0.0], 0.6))?;

    // stiffer in the middle: λ = 2 + 12 exp(−|x|²/0.4), μ = 1
    let lambda = FieldSpec::Bumps {
        base: 2.0,
        bumps: vec![GaussianBump::new(&[0.0, 0.0], 12.0, 0.4)],
    };
    let medium = build_medium(&grid, lambda, FieldSpec::Constant(1.0))?;

    println!("c- = {:.4}, c+ = {:.4}, ratio {:.3}", medium.c_minus, medium.c_plus, medium.c_plus / medium.c_minus);
    println!("T must exceed l_s/2 = {:.4}", smallest_shear_diameter(&medium, &domain)?);
    Ok(())
}
