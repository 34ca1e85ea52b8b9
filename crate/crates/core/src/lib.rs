//! Time-reversal and Neumann-series inversion of initial displacements for the
//! isotropic elastic wave equation, with a geodesic visibility certifier.

pub mod cli;
pub mod error;
pub mod extension;
pub mod field;
pub mod grid;
pub mod io;
pub mod medium;
pub mod neumann;
pub mod norms;
pub mod oracle;
pub mod phantom;
pub mod solver;
pub mod visibility;

pub use error::{Error, Mode, Result};
pub use field::{VectorField, WaveState};
pub use grid::{DomainSpec, Grid, NodeClass, Point, Region, RegionMask, Surface};
pub use medium::{build_medium, smallest_shear_diameter, FieldSpec, GaussianBump, Medium};
