//! Flux-conservative finite differences for `-div(a grad u) + sigma u = f`
//! on a truncated square, sparse direct and Krylov solves, and the
//! constant-coefficient convolution oracle the solver is checked against.

mod assemble;
mod direct;
mod grid;
mod oracle;
pub mod sparse;

pub use assemble::{assemble, discrete_flux_balance, BoundaryClosure, FluxBalance, LinearSystem};
pub use grid::{Grid, GridField};
pub use oracle::{conv_oracle, disk_integral};
pub use sparse::{SolveMethod, SolveOptions, SolveStats};

use num_complex::Complex64;

use crate::problem_model::SourceTerm;
use crate::Result;

/// Solve the assembled system for the source `f` with homogeneous boundary data.
pub fn solve(system: &LinearSystem, f: &SourceTerm, grid: &Grid) -> Result<GridField> {
    debug_assert_eq!(system.grid(), grid);
    let rhs = system.rhs(f, None);
    let solver = system.factor()?;
    let (data, _) = solver.solve(&rhs, None)?;
    Ok(GridField::new(*grid, data))
}

/// Sample `f` at the grid nodes.
pub fn sample_source(f: &SourceTerm, grid: &Grid) -> Vec<Complex64> {
    (0..grid.len()).map(|idx| f.eval(grid.node(idx))).collect()
}
