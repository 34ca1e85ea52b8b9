//! Assemble the error operator `K = I − AΛ` as a matrix on a tiny grid and
//! measure its norm.

use elastic_tr::oracle::assemble_small_oracle;
use elastic_tr::solver::{default_strength, SolverConfig};
use elastic_tr::{DomainSpec, Grid, Medium, Region};

fn main() -> elastic_tr::Result<()> {
    let grid = Grid::uniform(2, -1.5, 1.5, 20)?;
    let domain = DomainSpec::new(&grid, Region::ball(&[0.0, 0.0], 1.0), Region::ball(&[0.0, 0.0], 0.5))?;
    for lambda in [1.0, 14.0] {
        let medium = Medium::homogeneous(&grid, lambda, 1.0)?;
        let config = SolverConfig::for_medium(&medium, 2.5, 0.5).with_pml(3, default_strength(&medium, 3));
        let o = assemble_small_oracle(&medium, &domain, &config)?;
        println!(
            "c+/c- = {:.2}: {} unknowns, |K|_H = {:.4} (svd {:.4}), spectral radius {:.4}",
            medium.c_plus / medium.c_minus,
            o.unknowns(),
            o.h_norm,
            o.h_norm_svd,
            o.spectral_radius
        );
    }
    Ok(())
}
