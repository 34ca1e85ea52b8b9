//! Binary field, state and trace files.

use elastic_tr::io;
use elastic_tr::phantom::{make_phantom, PhantomKind};
use elastic_tr::solver::{ElasticSolver, SolverConfig};
use elastic_tr::{DomainSpec, Grid, Medium, Region};

fn main() -> elastic_tr::Result<()> {
    let grid = Grid::uniform(2, -1.5, 1.5, 64)?;
    let domain = DomainSpec::new(&grid, Region::ball(&[0.0, 0.0], 1.0), Region::ball(&[0.0, 0.0], 0.6))?;
    let medium = Medium::homogeneous(&grid, 1.0, 1.0)?;
    let f = make_phantom(
        &PhantomKind::RandomSmooth {
            count: 3,
            min_radius: 0.1,
            max_radius: 0.2,
            amplitude: 1.0,
            seed: 1,
        },
        &domain,
    )?;
    let solver = ElasticSolver::new(&medium, &domain, &SolverConfig::for_medium(&medium, 1.0, 0.5))?;
    let (trace, last) = solver.forward(&f)?;

    let dir = std::env::temp_dir().join("elastic-tr-file-io");
    std::fs::create_dir_all(&dir).map_err(|source| elastic_tr::Error::Io { path: dir.clone(), source })?;
    io::write_bytes(&dir.join("f.ewf"), &io::encode_field(&f))?;
    io::write_bytes(&dir.join("state.ews"), &io::encode_state(&last))?;
    io::write_bytes(&dir.join("trace.ebt"), &io::encode_trace(&trace))?;

    let f2 = io::decode_field(&io::read_bytes(&dir.join("f.ewf"))?, &grid)?;
    let s2 = io::decode_state(&io::read_bytes(&dir.join("state.ews"))?, &grid)?;
    let t2 = io::decode_trace(&io::read_bytes(&dir.join("trace.ebt"))?, domain.surface())?;
    println!(
        "round trip exact: field {}, state {}, trace {} (written to {})",
        f2.data() == f.data(),
        s2.u.data() == last.u.data() && s2.time == last.time,
        t2 == trace,
        dir.display()
    );
    Ok(())
}
