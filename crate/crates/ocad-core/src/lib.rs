//! Optimal cell average decompositions (CADs) on rectangular cells and a
//! bound-preserving discontinuous Galerkin solver that uses them.
//!
//! A CAD writes the cell average of a polynomial as a convex combination of
//! face averages and point values. The larger the boundary weight, the
//! larger the bound-preserving time step of a DG scheme; this crate builds
//! classic, optimal and quasi-optimal decompositions, certifies their
//! optimality, and runs 2D DG test problems with them.
//!
//! Modules:
//! * [`polyspace`] — polynomial spaces, averages, symmetry groups;
//! * [`quadrature`] — Gauss and Gauss–Lobatto rules;
//! * [`cad`] — decomposition types, feasibility, combination, time steps;
//! * [`constructors`] — closed-form decompositions;
//! * [`optimizer`] — `φ⋆`, certificates, numeric solver, bounding oracles;
//! * [`dg_solver`] — modal DG on Cartesian meshes with positivity limiters.

pub mod cad;
pub mod constructors;
pub mod dg_solver;
pub mod error;
pub mod optimizer;
pub mod polyspace;
pub mod quadrature;

pub use cad::{
    bp_cfl_dt, theta_of, verify_feasibility, CAD1D, FeasibilityReport, GeneralCAD, Provenance,
    SymmetricCAD, WeightedNode,
};
pub use error::{OcadError, Result};
pub use polyspace::{Family, OrbitKind, Polynomial1D, Polynomial2D, SpaceId, SymOrbit};
pub use quadrature::QuadRule1D;
