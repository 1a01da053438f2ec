//! Commands behind the `ocad` binary: building and verifying decompositions,
//! reproducing the boundary-weight tables and driving solver runs.
//!
//! Every command returns plain data; formatting to CSV uses 12 significant
//! digits in exponent notation so output is locale independent.

use std::fmt::Write as _;

use ocad_core::cad::{bp_cfl_dt_general, expand};
use ocad_core::constructors::{
    build_checked, optimal_many, optimal_theta0, quasi_optimal,
};
use ocad_core::dg_solver::run::fmt12;
use ocad_core::optimizer::{
    check_criterion_2, check_criterion_4, lower_bound_lp, phi_star_for, phi_star_sq,
    upper_bound_sampling,
};
use ocad_core::polyspace::Family;
use ocad_core::quadrature::lobatto_end_weight;
use ocad_core::{
    verify_feasibility, FeasibilityReport, OcadError, Provenance, SpaceId, SymmetricCAD,
};

/// Default feasibility tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Largest degree for which optimal `P^k` decompositions are offered.
pub const MAX_OPTIMAL_DEGREE: usize = 9;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const VERIFICATION: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const NUMERIC: u8 = 3;
}

/// Exit code for a library error.
pub fn exit_code(e: &OcadError) -> u8 {
    match e {
        OcadError::SelfCheck(_) | OcadError::InvariantViolation { .. } => exit::VERIFICATION,
        OcadError::QuadratureNoConvergence { .. }
        | OcadError::Eigen(_)
        | OcadError::NonlinearSolve { .. }
        | OcadError::InfeasibleStationaryPoint { .. }
        | OcadError::LinearProgram(_)
        | OcadError::NonFinite { .. }
        | OcadError::UnboundedStep
        | OcadError::DegenerateAnisotropy => exit::NUMERIC,
        _ => exit::USAGE,
    }
}

/// Kind of decomposition requested from `build`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Classic,
    Optimal,
    Quasi,
}

impl Kind {
    fn provenance(self) -> Provenance {
        match self {
            Kind::Classic => Provenance::Classic,
            Kind::Optimal => Provenance::Optimal,
            Kind::Quasi => Provenance::QuasiOptimal,
        }
    }
}

/// Uniform grid `−1, −1 + h, …, 1` with `n` intervals, symmetric about 0.
pub fn theta_grid(n: usize) -> Vec<f64> {
    let n = n.max(1);
    // (2i − n)/n keeps the grid exactly antisymmetric in floating point.
    (0..=n).map(|i| (2 * i as i64 - n as i64) as f64 / n as f64 + 0.0).collect()
}

/// Build and verify a decomposition.
pub fn build(space: SpaceId, theta: f64, kind: Kind, tol: f64) -> Result<SymmetricCAD, OcadError> {
    if space.family == Family::P && kind != Kind::Classic && space.degree > MAX_OPTIMAL_DEGREE {
        return Err(OcadError::Unsupported(format!(
            "{} P^{} is available for k ≤ {MAX_OPTIMAL_DEGREE}; alternatives: classic P^{}, \
             or {} P^k with k ≤ {MAX_OPTIMAL_DEGREE}",
            kind.provenance().as_str(),
            space.degree,
            space.degree,
            kind.provenance().as_str()
        )));
    }
    build_checked(space, theta, kind.provenance(), tol)
}

/// Outcome of `verify`.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub feasibility: FeasibilityReport,
    pub boundary_weight: f64,
    /// Bound-preserving CFL factor of the expanded decomposition for wave
    /// speeds normalised to `a1/Δx + a2/Δy = 1`.
    pub g2: f64,
    /// `|ω̄ − φ⋆| ≤ 1e−10`.
    pub criterion_4: Option<bool>,
    /// The critical polynomial vanishes at every node (only reported when
    /// it is unique).
    pub criterion_2: Option<bool>,
    /// Whether the file claims optimality.
    pub claims_optimal: bool,
}

impl VerifyReport {
    /// Feasible, and certified when optimality is claimed.
    pub fn passed(&self) -> bool {
        self.feasibility.feasible()
            && (!self.claims_optimal
                || (self.criterion_4 != Some(false) && self.criterion_2 != Some(false)))
    }

    pub fn render(&self) -> String {
        let pf = |b: bool| if b { "PASS" } else { "FAIL" };
        let mut s = String::new();
        let f = &self.feasibility;
        let _ = writeln!(s, "max_residual: {}", fmt12(f.max_residual));
        let _ = writeln!(s, "weights_positive: {}", pf(f.weight_ok));
        let _ = writeln!(s, "nodes_in_cell: {}", pf(f.nodes_ok));
        let _ = writeln!(s, "tolerance: {}", fmt12(f.tol));
        let _ = writeln!(s, "boundary_weight: {}", fmt12(self.boundary_weight));
        let _ = writeln!(s, "g2: {}", fmt12(self.g2));
        if let Some(c) = self.criterion_2 {
            let _ = writeln!(s, "criterion#2: {}", pf(c));
        }
        if let Some(c) = self.criterion_4 {
            let _ = writeln!(s, "criterion#4: {}", pf(c));
        }
        let _ = writeln!(s, "verification: {}", pf(self.passed()));
        s
    }
}

/// Feasibility plus the available optimality certificates.
pub fn verify(cad: &SymmetricCAD, tol: f64) -> Result<VerifyReport, OcadError> {
    let feasibility = verify_feasibility(cad, tol);
    let th = cad.theta;
    let g2 = bp_cfl_dt_general(&expand(cad), 0.5 * (1.0 + th), 0.5 * (1.0 - th), 1.0, 1.0, 1.0)
        .unwrap_or(f64::NAN);
    let claims_optimal = matches!(cad.provenance, Provenance::Optimal | Provenance::Numeric);
    let star = phi_star_for(cad.space, th)?;
    let criterion_4 = Some(check_criterion_4(cad)?);
    let criterion_2 = (star.eigen_multiplicity == 1 && claims_optimal)
        .then(|| check_criterion_2(cad, &star.q_star.square()));
    Ok(VerifyReport {
        feasibility,
        boundary_weight: cad.boundary_weight,
        g2,
        criterion_4,
        criterion_2,
        claims_optimal,
    })
}

/// One row of the boundary-weight comparison at `θ = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Row {
    pub k: usize,
    /// Linear-stability CFL `1/(2k+1)`.
    pub linear: f64,
    /// Classic Gauss–Lobatto weight.
    pub classic: f64,
    /// Optimal weight `ω̄⋆(0, P^k)`.
    pub optimal: f64,
}

/// Rows `k = 1..=9`: closed forms for `k ≤ 7`, the eigenvalue bound
/// `φ⋆` for `k = 8, 9`.
pub fn table1() -> Result<Vec<Table1Row>, OcadError> {
    (1..=MAX_OPTIMAL_DEGREE)
        .map(|k| {
            let optimal = if k <= 7 {
                optimal_theta0(k)?.boundary_weight
            } else {
                phi_star_sq(k, 0.0)?.value
            };
            Ok(Table1Row {
                k,
                linear: 1.0 / (2 * k + 1) as f64,
                classic: lobatto_end_weight(k),
                optimal,
            })
        })
        .collect()
}

pub fn table1_csv(rows: &[Table1Row]) -> String {
    let mut s = String::from("k,linear_cfl,classic_weight,optimal_weight\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{}", r.k, fmt12(r.linear), fmt12(r.classic), fmt12(r.optimal));
    }
    s
}

/// One row of the boundary-weight ratio sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioRow {
    pub theta: f64,
    pub optimal: f64,
    /// Classic weight over optimal weight.
    pub classic_ratio: f64,
    /// Quasi-optimal weight over optimal weight.
    pub quasi_ratio: f64,
}

pub fn ratio_sweep(k: usize, thetas: &[f64]) -> Result<Vec<RatioRow>, OcadError> {
    if k == 0 || k > MAX_OPTIMAL_DEGREE {
        return Err(OcadError::InvalidArgument(format!(
            "ratio sweep needs 1 ≤ k ≤ {MAX_OPTIMAL_DEGREE}, got {k}"
        )));
    }
    let optima = optimal_many(k, thetas)?;
    let classic = lobatto_end_weight(k);
    thetas
        .iter()
        .zip(&optima)
        .map(|(&theta, opt)| {
            let w = opt.boundary_weight;
            Ok(RatioRow {
                theta,
                optimal: w,
                classic_ratio: classic / w,
                quasi_ratio: quasi_optimal(k, theta)?.boundary_weight / w,
            })
        })
        .collect()
}

pub fn ratio_csv(k: usize, rows: &[RatioRow]) -> String {
    let mut s = format!("# k={k}\ntheta,optimal_weight,classic_ratio,quasi_ratio\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            fmt12(r.theta),
            fmt12(r.optimal),
            fmt12(r.classic_ratio),
            fmt12(r.quasi_ratio)
        );
    }
    s
}

/// Independent bounds around the optimal weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Straddle {
    pub lower: f64,
    pub optimal: f64,
    pub upper: f64,
}

impl Straddle {
    pub fn holds(&self, tol: f64) -> bool {
        self.lower <= self.optimal + tol && self.optimal <= self.upper + tol
    }

    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

/// LP lower bound on a node grid, the optimal weight and a sampled upper
/// bound from random nonnegative polynomials.
pub fn straddle(k: usize, theta: f64, grid: usize, trials: usize, seed: u64) -> Result<Straddle, OcadError> {
    Ok(Straddle {
        lower: lower_bound_lp(k, theta, grid)?,
        optimal: optimal_many(k, &[theta])?[0].boundary_weight,
        upper: upper_bound_sampling(k, theta, trials, seed)?,
    })
}

pub fn straddle_csv(k: usize, theta: f64, grid: usize, trials: usize, seed: u64, s: &Straddle) -> String {
    format!(
        "# seed={seed} grid={grid} trials={trials}\nk,theta,lower_bound,optimal_weight,upper_bound\n{k},{},{},{},{}\n",
        fmt12(theta),
        fmt12(s.lower),
        fmt12(s.optimal),
        fmt12(s.upper)
    )
}

/// Parse a family letter.
pub fn parse_family(s: &str) -> Result<Family, OcadError> {
    match s {
        "P" | "p" => Ok(Family::P),
        "Q" | "q" => Ok(Family::Q),
        other => Err(OcadError::InvalidArgument(format!("unknown space '{other}' (expected P or Q)"))),
    }
}

/// Space identifier from family and degree.
pub fn space_id(family: Family, k: usize) -> SpaceId {
    match family {
        Family::P => SpaceId::p(k),
        Family::Q => SpaceId::q(k),
    }
}
