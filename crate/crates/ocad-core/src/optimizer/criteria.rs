//! Optimality certificates.
//!
//! * Criterion #2: a nonnegative `p⋆ ∈ P^k` vanishing at every internal node
//!   certifies that no feasible decomposition has a larger `ω̄`.
//! * Criterion #4: `ω̄ = φ⋆(θ)` certifies optimality directly.

use crate::cad::{expand, SymmetricCAD};
use crate::error::Result;
use crate::optimizer::moments::phi_star_for;
use crate::polyspace::Polynomial2D;

/// Vanishing tolerance at internal nodes.
pub const VANISH_TOL: f64 = 1e-8;
/// Nonnegativity tolerance on the sampling grid.
pub const NONNEG_TOL: f64 = -1e-10;
/// Sampling grid resolution for the nonnegativity spot-check.
pub const GRID_N: usize = 101;
/// Tolerance on `|ω̄ − φ⋆|`.
pub const PHI_TOL: f64 = 1e-10;

/// Largest `|p|` over the expanded internal nodes of `cad`.
pub fn max_on_nodes(cad: &SymmetricCAD, p: &Polynomial2D) -> f64 {
    expand(cad)
        .internal
        .iter()
        .map(|n| p.eval(n.x, n.y).abs())
        .fold(0.0, f64::max)
}

/// Smallest value of `p` on a uniform `GRID_N × GRID_N` grid of the cell.
pub fn grid_minimum(p: &Polynomial2D) -> f64 {
    let h = 2.0 / (GRID_N - 1) as f64;
    let mut m = f64::INFINITY;
    for i in 0..GRID_N {
        for j in 0..GRID_N {
            m = m.min(p.eval(-1.0 + i as f64 * h, -1.0 + j as f64 * h));
        }
    }
    m
}

/// `true` iff `p_star` is (spot-checked) nonnegative and vanishes at every
/// internal node of `cad`.
pub fn check_criterion_2(cad: &SymmetricCAD, p_star: &Polynomial2D) -> bool {
    max_on_nodes(cad, p_star) <= VANISH_TOL && grid_minimum(p_star) >= NONNEG_TOL
}

/// `true` iff `|ω̄ − φ⋆(θ)| ≤ PHI_TOL` for the decomposition's space.
pub fn check_criterion_4(cad: &SymmetricCAD) -> Result<bool> {
    let star = phi_star_for(cad.space, cad.theta)?;
    Ok((cad.boundary_weight - star.value).abs() <= PHI_TOL)
}
