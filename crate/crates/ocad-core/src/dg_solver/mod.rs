//! Discontinuous Galerkin solver on uniform Cartesian meshes.
//!
//! The solution in every cell is a polynomial of total degree `k` in an
//! orthonormal Legendre basis, so the first coefficient is the cell
//! average. Fluxes are global Lax–Friedrichs, time stepping is SSP-RK3,
//! and a scaling limiter driven by any feasible CAD keeps the solution in
//! the invariant region under the CAD's time-step restriction.

pub mod basis;
mod dense;
pub mod field;
pub mod limiter;
pub mod mesh;
pub mod problem;
pub mod rhs;
pub mod run;
pub mod time;

pub use basis::ModalBasis;
pub use field::{l2_error, l2_error_of_averages, l2_project, DGField};
pub use limiter::{bp_limit_euler, bp_limit_scalar, tvb_limit, CheckSet, LimiterMode, LimiterStats};
pub use mesh::{Boundary, Mesh2D, Side};
pub use problem::{lf_flux, InitialCondition, InvariantRegion, ProblemKind, ProblemSpec, ShockVortex, State};
pub use rhs::{mean_rate_oracle, Discretization};
pub use run::{admissible, run_case, CadChoice, ErrorNorm, RunConfig, RunReport};
pub use time::{time_step, DtBound, DtChoice, Scheme};
