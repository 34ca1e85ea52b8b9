//! Leapfrog solvers for `u_tt = Δ*u`.

mod config;
mod operator;
mod propagate;
mod trace;

pub use config::{default_strength, SolverConfig, MAX_CFL};
pub use operator::discrete_elastic_operator;
pub use propagate::{
    energy_flux_report, forward_solve, time_reversal_solve, ElasticSolver, EnergyRow, BLOWUP,
    CONSISTENCY_TOL,
};
pub use trace::BoundaryTrace;
