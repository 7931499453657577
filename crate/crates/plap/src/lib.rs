//! Principal eigenvalues of quasilinear Schrödinger-type operators
//! `-Δ_p u + V |u|^{p-2} u` on bounded domains and on `ℝ^N` by exhaustion.

pub mod eigensolve;
pub mod error;
pub mod field;
pub mod functional;
pub mod limits;
pub mod certify;
pub mod experiments;
mod linesearch;
pub mod mesh;
pub mod potential;
pub mod verify;

pub use eigensolve::{principal_eig, solve_source, EigenPair, EigenSolver, Init, SolverConfig};
pub use error::{Error, Result};
pub use field::Field;
pub use mesh::{build_grid, DomainSpec, Grid};
pub use potential::PotentialSpec;
