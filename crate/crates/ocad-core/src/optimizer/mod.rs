//! Numeric machinery: moment matrices, the sharp bound `φ⋆`, optimality
//! certificates, the nonlinear moment system for high degrees, and
//! independent lower/upper bounding oracles.

pub mod criteria;
pub mod lp;
pub mod moments;
pub mod nonlinear;
pub mod sampling;

pub use criteria::{check_criterion_2, check_criterion_4, grid_minimum, max_on_nodes};
pub use lp::{lower_bound_lp, lower_bound_lp_1d, simplex_max, LpSolution};
pub use moments::{
    moment_matrices, moment_matrices_for, phi_of, phi_star_for, phi_star_sq, MomentBasis,
    MomentMatrices, PhiStarResult,
};
pub use nonlinear::{
    continuation_driver, continuation_path, continuation_with, solve_from, solve_ocad_system, ResidualEntry,
    ResidualLog, SolveOptions, DEFAULT_THETA_STEP,
};
pub use sampling::upper_bound_sampling;
