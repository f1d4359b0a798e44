//! Brute-force references: finite-difference diagonalization of the
//! stationary problem and step-by-step integration of the driven one.
//!
//! These are shipped with the library so every reference table can be
//! regenerated from the command line.

mod dynamics;
mod levels;

pub use dynamics::{
    reference_evolve_basis, reference_evolve_grid, reference_trajectory, BasisEvolution,
    GridEvolution, AUTO_STEP_PRODUCT, BASIS_DOUBLING_TOL, BASIS_NORM_DRIFT,
};
pub use levels::{
    grid_levels, grid_solve, GridLevels, GridSolution, GridSpec, DECAY_LENGTHS,
    LEVEL_WARN_THRESHOLD, MIN_LEVEL_POINTS,
};
