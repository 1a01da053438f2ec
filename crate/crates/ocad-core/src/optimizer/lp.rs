//! Dense two-phase simplex and the grid-based lower-bound oracle.
//!
//! The oracle maximises the boundary weight `ω̄` over decompositions whose
//! internal nodes are restricted to a lattice in `[0,1]²` (one reflection
//! orbit per lattice point). Every optimum is a genuine feasible
//! decomposition, so the result is a lower bound on the optimal `ω̄`.

use crate::error::{OcadError, Result};
use crate::polyspace::{endpoint_mean_power, interval_mean_power, SpaceId};

/// Pivot tolerance of the simplex method.
const PIVOT_TOL: f64 = 1e-11;
/// Phase-one infeasibility tolerance.
const FEAS_TOL: f64 = 1e-9;
/// Iteration cap (per phase) as a multiple of the column count.
const MAX_ITER_FACTOR: usize = 50;

/// Solution of a linear program in standard form.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub objective: f64,
    pub x: Vec<f64>,
}

/// Maximise `cᵀz` subject to `Az = b`, `z ≥ 0` (dense two-phase simplex,
/// Dantzig pricing with Bland's rule after stalling).
///
/// `a` is row-major with `b.len()` rows and `c.len()` columns.
pub fn simplex_max(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<LpSolution> {
    let m = b.len();
    let n = c.len();
    if a.len() != m || a.iter().any(|r| r.len() != n) {
        return Err(OcadError::LinearProgram("dimension mismatch".into()));
    }
    // Tableau columns: n structural + m artificial + rhs.
    let width = n + m + 1;
    let mut t = vec![vec![0.0; width]; m];
    for i in 0..m {
        let s = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = s * a[i][j];
        }
        t[i][n + i] = 1.0;
        t[i][width - 1] = s * b[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Phase one: minimise the sum of artificials (maximise its negative).
    let mut cost1 = vec![0.0; n + m];
    for v in cost1.iter_mut().skip(n) {
        *v = -1.0;
    }
    run_phase(&mut t, &mut basis, &cost1, n + m, MAX_ITER_FACTOR * width)?;
    let infeas: f64 = basis
        .iter()
        .zip(&t)
        .filter(|(&bj, _)| bj >= n)
        .map(|(_, row)| row[width - 1])
        .sum();
    if infeas > FEAS_TOL {
        return Err(OcadError::LinearProgram(format!(
            "infeasible (phase-one residual {infeas:e})"
        )));
    }
    // Drive remaining (zero-level) artificials out of the basis.
    for r in 0..m {
        if basis[r] >= n {
            if let Some(j) = (0..n).find(|&j| t[r][j].abs() > PIVOT_TOL) {
                pivot(&mut t, &mut basis, r, j);
            }
        }
    }
    // Phase two on the structural columns only.
    let mut cost2 = c.to_vec();
    cost2.extend(std::iter::repeat(f64::NEG_INFINITY).take(m));
    run_phase(&mut t, &mut basis, &cost2, n, MAX_ITER_FACTOR * width)?;
    let mut x = vec![0.0; n];
    for (r, &bj) in basis.iter().enumerate() {
        if bj < n {
            x[bj] = t[r][width - 1];
        }
    }
    let objective = x.iter().zip(c).map(|(a, b)| a * b).sum();
    Ok(LpSolution { objective, x })
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], r: usize, j: usize) {
    let p = t[r][j];
    for v in t[r].iter_mut() {
        *v /= p;
    }
    let prow = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i != r {
            let f = row[j];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&prow) {
                    *v -= f * pv;
                }
            }
        }
    }
    basis[r] = j;
}

/// Maximise over the first `ncols` columns with the given cost vector
/// (costs of basic artificials may be `−∞` in phase two: they are never
/// basic with a nonzero value there).
fn run_phase(
    t: &mut [Vec<f64>],
    basis: &mut [usize],
    cost: &[f64],
    ncols: usize,
    max_iter: usize,
) -> Result<()> {
    let width = t.first().map_or(0, Vec::len);
    let cb = |bj: usize| {
        let c = cost[bj];
        if c.is_finite() {
            c
        } else {
            0.0
        }
    };
    let mut stall = 0usize;
    let mut last_obj = f64::NEG_INFINITY;
    for _ in 0..max_iter {
        // Reduced costs d_j = c_j − c_Bᵀ B⁻¹ a_j.
        let mut enter = None;
        let mut best = PIVOT_TOL;
        for j in 0..ncols {
            if basis.contains(&j) {
                continue;
            }
            let mut d = cost[j];
            for (r, &bj) in basis.iter().enumerate() {
                d -= cb(bj) * t[r][j];
            }
            if d > best {
                best = d;
                enter = Some(j);
                if stall > 20 {
                    break; // Bland: first improving column.
                }
            }
        }
        let Some(j) = enter else {
            return Ok(());
        };
        // Ratio test (smallest index among ties).
        let mut leave = None;
        let mut ratio = f64::INFINITY;
        for (r, row) in t.iter().enumerate() {
            if row[j] > PIVOT_TOL {
                let q = row[width - 1] / row[j];
                if q < ratio - 1e-15 {
                    ratio = q;
                    leave = Some(r);
                }
            }
        }
        let Some(r) = leave else {
            return Err(OcadError::LinearProgram("unbounded objective".into()));
        };
        pivot(t, basis, r, j);
        let obj: f64 = basis
            .iter()
            .enumerate()
            .map(|(r, &bj)| cb(bj) * t[r][width - 1])
            .sum();
        if obj <= last_obj + 1e-15 {
            stall += 1;
        } else {
            stall = 0;
        }
        last_obj = obj;
    }
    Err(OcadError::LinearProgram("iteration limit reached".into()))
}

/// Lower bound on the optimal boundary weight of `P^k` at `θ`, with
/// internal nodes restricted to a `grid_n × grid_n` lattice of `[0,1]²`.
pub fn lower_bound_lp(k: usize, theta: f64, grid_n: usize) -> Result<f64> {
    if grid_n < 2 {
        return Err(OcadError::InvalidArgument("grid_n must be at least 2".into()));
    }
    let space = SpaceId::p(k);
    let exps: Vec<(usize, usize)> = space
        .exponents()
        .into_iter()
        .filter(|&(i, j)| i % 2 == 0 && j % 2 == 0)
        .collect();
    let h = 1.0 / (grid_n - 1) as f64;
    let pts: Vec<(f64, f64)> = (0..grid_n)
        .flat_map(|i| (0..grid_n).map(move |j| (i as f64 * h, j as f64 * h)))
        .collect();
    // Column 0: ω̄. Columns 1..: reflection-orbit weights at lattice points.
    let mut a = Vec::with_capacity(exps.len());
    let mut b = Vec::with_capacity(exps.len());
    for &(i, j) in &exps {
        let bx = endpoint_mean_power(i) * interval_mean_power(j);
        let by = interval_mean_power(i) * endpoint_mean_power(j);
        let mut row = Vec::with_capacity(pts.len() + 1);
        row.push((1.0 + theta) * bx + (1.0 - theta) * by);
        row.extend(pts.iter().map(|&(x, y)| x.powi(i as i32) * y.powi(j as i32)));
        a.push(row);
        b.push(interval_mean_power(i) * interval_mean_power(j));
    }
    let mut c = vec![0.0; pts.len() + 1];
    c[0] = 1.0;
    Ok(simplex_max(&a, &b, &c)?.x[0])
}

/// One-dimensional analogue: largest end weight `ω` (equal at both ends)
/// with internal orbit weights on a lattice of `[0,1]`.
pub fn lower_bound_lp_1d(k: usize, grid_n: usize) -> Result<f64> {
    if grid_n < 2 {
        return Err(OcadError::InvalidArgument("grid_n must be at least 2".into()));
    }
    let h = 1.0 / (grid_n - 1) as f64;
    let pts: Vec<f64> = (0..grid_n).map(|i| i as f64 * h).collect();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for m in (0..=k).step_by(2) {
        let mut row = vec![2.0];
        row.extend(pts.iter().map(|&x| x.powi(m as i32)));
        a.push(row);
        b.push(interval_mean_power(m));
    }
    let mut c = vec![0.0; pts.len() + 1];
    c[0] = 1.0;
    Ok(simplex_max(&a, &b, &c)?.x[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lp() {
        // max x + y s.t. x + 2y + s1 = 4, 3x + y + s2 = 6.
        let a = vec![vec![1.0, 2.0, 1.0, 0.0], vec![3.0, 1.0, 0.0, 1.0]];
        let sol = simplex_max(&a, &[4.0, 6.0], &[1.0, 1.0, 0.0, 0.0]).unwrap();
        assert!((sol.objective - 2.8).abs() < 1e-12);
    }

    #[test]
    fn infeasible_lp_is_reported() {
        let a = vec![vec![1.0, 1.0]];
        assert!(simplex_max(&a, &[-1.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn one_dimensional_bound() {
        // k = 2: optimum 1/6 with an interior node at 0 (on the lattice).
        let w = lower_bound_lp_1d(2, 11).unwrap();
        assert!((w - 1.0 / 6.0).abs() < 1e-12);
    }
}
