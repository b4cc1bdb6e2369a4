//! Finite-difference machinery for the filtering SPDE on a truncated domain.

mod grid;
mod loss;
mod model;
mod scheme;
mod tridiag;

pub use grid::{build_grid, BaseGrid, GridSpec, MAX_LEVEL};
pub use loss::{exact_density, exact_expected_loss, exact_loss_sample, loss, loss_rectangle, loss_trapezoidal};
pub use model::{Functional, ModelParams, Scheme};
pub use scheme::{
    evolve, initial_state, rhs_coefficients, step_periodic, step_scheme_a, step_scheme_b, DensityState, LaneWork,
    LevelSolver,
};
pub use tridiag::{ThomasFactors, TridiagonalOperator};
