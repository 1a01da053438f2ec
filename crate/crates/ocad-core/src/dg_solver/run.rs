//! Configured solver runs: convergence studies, bound checks and field
//! dumps.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cad::{theta_of, SymmetricCAD};
use crate::constructors::{classic_2d, optimal, quasi_optimal};
use crate::dg_solver::field::{l2_error, l2_error_of_averages, l2_project, DGField};
use crate::dg_solver::limiter::{LimiterMode, LimiterStats};
use crate::dg_solver::mesh::{Boundary, Mesh2D};
use crate::dg_solver::problem::{InitialCondition, InvariantRegion, ProblemKind, ProblemSpec};
use crate::dg_solver::time::{DtBound, Scheme};
use crate::error::{OcadError, Result};
use crate::polyspace::SpaceId;

/// Which decomposition drives the limiter and the time step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum CadChoice {
    Classic,
    Optimal,
    Quasi,
    File(PathBuf),
}

impl From<CadChoice> for String {
    fn from(c: CadChoice) -> String {
        match c {
            CadChoice::Classic => "classic".into(),
            CadChoice::Optimal => "optimal".into(),
            CadChoice::Quasi => "quasi".into(),
            CadChoice::File(p) => format!("file:{}", p.display()),
        }
    }
}

impl TryFrom<String> for CadChoice {
    type Error = String;
    fn try_from(s: String) -> std::result::Result<Self, String> {
        match s.as_str() {
            "classic" => Ok(CadChoice::Classic),
            "optimal" => Ok(CadChoice::Optimal),
            "quasi" => Ok(CadChoice::Quasi),
            _ => match s.strip_prefix("file:") {
                Some(p) => Ok(CadChoice::File(PathBuf::from(p))),
                None => Err(format!(
                    "unknown cad `{s}` (expected classic, optimal, quasi or file:<path>)"
                )),
            },
        }
    }
}

impl CadChoice {
    /// Build the decomposition for `P^k` at anisotropy `theta`.
    pub fn build(&self, k: usize, theta: f64) -> Result<SymmetricCAD> {
        match self {
            CadChoice::Classic => classic_2d(SpaceId::p(k), theta),
            CadChoice::Optimal => optimal(k, theta),
            CadChoice::Quasi => quasi_optimal(k, theta),
            CadChoice::File(p) => SymmetricCAD::from_json(&std::fs::read_to_string(p)?),
        }
    }
}

/// Norm used for the error table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorNorm {
    /// Normalised `L²` norm of `u_h − u` over the domain.
    L2,
    /// Root-mean-square error of the cell averages.
    L2Averages,
}

fn default_bc() -> [Boundary; 4] {
    [
        Boundary::Periodic,
        Boundary::Periodic,
        Boundary::Periodic,
        Boundary::Periodic,
    ]
}
fn default_true() -> bool {
    true
}
fn default_one() -> f64 {
    1.0
}
fn default_bounds() -> [f64; 2] {
    [-1.0, 1.0]
}
fn default_limiter() -> LimiterMode {
    LimiterMode::Simplified
}
fn default_norm() -> ErrorNorm {
    ErrorNorm::L2
}

/// A solver run, as read from a JSON configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: ProblemKind,
    /// Invariant interval for scalar problems.
    #[serde(default = "default_bounds")]
    pub bounds: [f64; 2],
    pub initial: InitialCondition,
    pub k: usize,
    /// `(Nx, Ny)` for each run of the study, coarsest first.
    pub resolutions: Vec<[usize; 2]>,
    /// `[x_min, x_max, y_min, y_max]`.
    pub domain: [f64; 4],
    /// Boundary conditions `[left, right, bottom, top]`.
    #[serde(default = "default_bc")]
    pub boundary: [Boundary; 4],
    pub t_end: f64,
    pub cad: CadChoice,
    #[serde(default = "default_one")]
    pub c0: f64,
    #[serde(default = "default_one")]
    pub c_ssp: f64,
    #[serde(default = "default_limiter")]
    pub limiter: LimiterMode,
    /// TVB constant of the troubled-cell limiter (disabled when absent).
    #[serde(default)]
    pub tvb_m: Option<f64>,
    /// Refine the step as `Δt ∝ Δx^p` relative to the coarsest grid, so
    /// that the temporal error of a lower-order integrator does not mask
    /// the spatial order.
    #[serde(default)]
    pub time_step_power: Option<f64>,
    /// Use this fixed step instead of the CFL rule.
    #[serde(default)]
    pub fixed_dt: Option<f64>,
    /// Re-derive `θ` (and the decomposition) every step instead of once
    /// from the initial wave speeds.
    #[serde(default)]
    pub theta_per_step: bool,
    /// Apply the linear-stability cap `1/(2k+1)` to the step.
    #[serde(default = "default_true")]
    pub linear_cap: bool,
    /// Upper bound on `Δt` when wave speeds vanish.
    #[serde(default)]
    pub dt_max: Option<f64>,
    #[serde(default = "default_norm")]
    pub error_norm: ErrorNorm,
    /// Write a CSV of cell averages for every resolution.
    #[serde(default)]
    pub dump_fields: bool,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn problem_spec(&self) -> ProblemSpec {
        match self.problem {
            ProblemKind::Advection { a1, a2 } => {
                ProblemSpec::advection(a1, a2, self.bounds[0], self.bounds[1])
            }
            ProblemKind::Burgers => ProblemSpec::burgers(self.bounds[0], self.bounds[1]),
            ProblemKind::Euler { gamma } => ProblemSpec::euler(gamma),
        }
    }

    fn mesh(&self, res: [usize; 2]) -> Result<Mesh2D> {
        Mesh2D::new(res[0], res[1], self.domain, self.boundary.clone())
    }

    /// Exact solution at `t`, when known (linear advection of the sine
    /// plane wave).
    pub fn exact(&self, t: f64) -> Option<impl Fn(f64, f64) -> f64 + Sync> {
        match (self.problem, self.initial) {
            (ProblemKind::Advection { a1, a2 }, InitialCondition::SinePlane) => {
                Some(move |x: f64, y: f64| (std::f64::consts::PI * (x - a1 * t + y - a2 * t)).sin())
            }
            _ => None,
        }
    }
}

/// Outcome of one resolution.
#[derive(Debug, Clone)]
pub struct CaseResult {
    pub nx: usize,
    pub ny: usize,
    pub l2_error: Option<f64>,
    pub steps: usize,
    pub wall_ms: f64,
    pub final_time: f64,
    /// Bound that determined the (first) time step.
    pub dt_bound: DtBound,
    pub dt: f64,
    /// Limiter statistics merged over all stages of the run.
    pub stats: LimiterStats,
    pub field: DGField,
    pub mesh: Mesh2D,
}

/// Outcome of a configured run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub theta: f64,
    pub boundary_weight: f64,
    pub cases: Vec<CaseResult>,
}

impl RunReport {
    /// `log(e_{i−1}/e_i) / log(N_i/N_{i−1})` for consecutive resolutions.
    pub fn orders(&self) -> Vec<Option<f64>> {
        let mut out = vec![None];
        for w in self.cases.windows(2) {
            let o = match (w[0].l2_error, w[1].l2_error) {
                (Some(a), Some(b)) if a > 0.0 && b > 0.0 => {
                    Some((a / b).ln() / (w[1].nx as f64 / w[0].nx as f64).ln())
                }
                _ => None,
            };
            out.push(o);
        }
        out.truncate(self.cases.len());
        out
    }

    /// `errors.csv`: `N, l2_error, order, steps, wall_ms`.
    pub fn errors_csv(&self) -> String {
        let mut s = String::from("N,l2_error,order,steps,wall_ms\n");
        for (c, o) in self.cases.iter().zip(self.orders()) {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                c.nx,
                c.l2_error.map(fmt12).unwrap_or_default(),
                o.map(fmt12).unwrap_or_default(),
                c.steps,
                fmt12(c.wall_ms)
            );
        }
        s
    }

    /// `bounds.csv`: extremes of cell averages and check-point values.
    pub fn bounds_csv(&self) -> String {
        let mut s = String::from(
            "N,min_mean,max_mean,min_point,max_point,min_internal_energy,limited_cells,dt_bound\n",
        );
        for c in &self.cases {
            let st = &c.stats;
            let rhoe = if st.min_internal_energy.is_finite() {
                fmt12(st.min_internal_energy)
            } else {
                String::new()
            };
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                c.nx,
                fmt12(st.min_mean),
                fmt12(st.max_mean),
                fmt12(st.min_point),
                fmt12(st.max_point),
                rhoe,
                st.limited_cells,
                match c.dt_bound {
                    DtBound::Bp => "bp",
                    DtBound::Linear => "linear",
                    DtBound::Cap => "cap",
                }
            );
        }
        s
    }

    /// Write `errors.csv`, `bounds.csv` and (optionally) field dumps.
    pub fn write(&self, dir: &Path, dump_fields: bool) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("errors.csv"), self.errors_csv())?;
        std::fs::write(dir.join("bounds.csv"), self.bounds_csv())?;
        if dump_fields {
            for c in &self.cases {
                let name = format!("field_{}x{}.csv", c.nx, c.ny);
                std::fs::write(dir.join(name), field_csv(&c.field, &c.mesh))?;
            }
        }
        Ok(())
    }
}

/// Float with 12 significant digits in exponent notation.
pub fn fmt12(v: f64) -> String {
    format!("{v:.11e}")
}

/// Cell averages as CSV: `x, y, u0[, u1, u2, u3]`.
pub fn field_csv(field: &DGField, mesh: &Mesh2D) -> String {
    let mut s = String::from("x,y");
    for comp in 0..field.m {
        let _ = write!(s, ",u{comp}");
    }
    s.push('\n');
    for c in 0..field.n_cells {
        let (x, y) = mesh.center(c);
        let _ = write!(s, "{},{}", fmt12(x), fmt12(y));
        for comp in 0..field.m {
            let _ = write!(s, ",{}", fmt12(field.mean(c, comp)));
        }
        s.push('\n');
    }
    s
}

/// Initial anisotropy from the wave-speed maxima of the projected data.
fn initial_theta(scheme: &Scheme, field: &DGField) -> Result<f64> {
    let a = scheme.speeds(field);
    theta_of(a[0], a[1], scheme.disc.mesh.dx, scheme.disc.mesh.dy).or(Ok(0.0))
}

/// Run one resolution.
pub fn run_single(cfg: &RunConfig, res: [usize; 2], dx0: f64) -> Result<(CaseResult, f64, f64)> {
    if cfg.k == 0 {
        return Err(OcadError::InvalidArgument("k must be at least 1".into()));
    }
    if !(cfg.t_end > 0.0) {
        return Err(OcadError::InvalidArgument("t_end must be positive".into()));
    }
    let mesh = cfg.mesh(res)?;
    let problem = cfg.problem_spec();
    let m = problem.n_comp();
    let start = Instant::now();

    // Provisional decomposition to set up the basis; replaced once θ is known.
    let placeholder = classic_2d(SpaceId::p(cfg.k), 0.0)?;
    let mut scheme = Scheme::new(mesh.clone(), problem, placeholder, cfg.k, cfg.limiter)?;
    scheme.c0 = cfg.c0;
    scheme.c_ssp = cfg.c_ssp;
    scheme.tvb_m = cfg.tvb_m;
    scheme.dt_max = cfg.dt_max.unwrap_or(f64::INFINITY);
    scheme.linear_cap = cfg.linear_cap;

    let ic = cfg.initial;
    let mut u = l2_project(|x, y| ic.eval(x, y), &mesh, &scheme.disc.basis, m);
    let mut theta = initial_theta(&scheme, &u)?;
    scheme = rebuild(scheme, &cfg.cad, theta, cfg.limiter)?;

    let mut stats = scheme.limit(&mut u)?;
    let scale = match cfg.time_step_power {
        Some(p) => (mesh.dx / dx0).powf(p - 1.0),
        None => 1.0,
    };
    let first = scheme.compute_dt(&u);
    let (mut t, mut steps) = (0.0, 0usize);
    let t_end = cfg.t_end;
    while t < t_end * (1.0 - 1e-14) {
        if cfg.theta_per_step && steps > 0 {
            let th = initial_theta(&scheme, &u)?;
            if (th - theta).abs() > 1e-12 {
                theta = th;
                scheme = rebuild(scheme, &cfg.cad, theta, cfg.limiter)?;
            }
        }
        let mut dt = match cfg.fixed_dt {
            Some(dt) => dt,
            None => scheme.compute_dt(&u).dt * scale,
        };
        if t + dt > t_end {
            dt = t_end - t;
        }
        let (next, st) = scheme.ssp_rk3_step(&u, dt, t)?;
        stats.merge(&st);
        u = next;
        t += dt;
        steps += 1;
    }

    let l2 = cfg.exact(t).map(|exact| match cfg.error_norm {
        ErrorNorm::L2 => l2_error(&u, &mesh, &exact, 0),
        ErrorNorm::L2Averages => l2_error_of_averages(&u, &mesh, &exact, 0),
    });
    let case = CaseResult {
        nx: res[0],
        ny: res[1],
        l2_error: l2,
        steps,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        final_time: t,
        dt_bound: first.bound,
        dt: cfg.fixed_dt.unwrap_or(first.dt * scale),
        stats,
        field: u,
        mesh,
    };
    Ok((case, theta, scheme.cad.boundary_weight))
}

fn rebuild(mut scheme: Scheme, choice: &CadChoice, theta: f64, mode: LimiterMode) -> Result<Scheme> {
    let cad = choice.build(scheme.k(), theta)?;
    scheme.check = crate::dg_solver::limiter::CheckSet::new(&cad, &scheme.disc.basis, mode);
    scheme.cad = cad;
    Ok(scheme)
}

/// Execute every resolution of the configuration.
pub fn run_case(cfg: &RunConfig) -> Result<RunReport> {
    if cfg.resolutions.is_empty() {
        return Err(OcadError::InvalidArgument("no resolutions given".into()));
    }
    let dx0 = (cfg.domain[1] - cfg.domain[0]) / cfg.resolutions[0][0] as f64;
    let mut cases = Vec::new();
    let (mut theta, mut wbar) = (0.0, 0.0);
    for &res in &cfg.resolutions {
        let (case, th, w) = run_single(cfg, res, dx0)?;
        theta = th;
        wbar = w;
        cases.push(case);
    }
    Ok(RunReport {
        theta,
        boundary_weight: wbar,
        cases,
    })
}

/// Whether every cell average and every limiter check-point value of the
/// run stayed in the invariant region (within `tol` for intervals; strictly
/// positive density and internal energy for gas dynamics).
pub fn admissible(report: &RunReport, region: InvariantRegion, tol: f64) -> bool {
    report.cases.iter().all(|c| {
        let st = &c.stats;
        match region {
            InvariantRegion::Interval { min, max } => {
                st.min_mean >= min - tol
                    && st.max_mean <= max + tol
                    && st.min_point >= min - tol
                    && st.max_point <= max + tol
            }
            InvariantRegion::PositiveDensityEnergy => {
                st.min_mean > 0.0
                    && st.min_mean_internal_energy > 0.0
                    && st.min_point > 0.0
                    && st.min_internal_energy > 0.0
            }
        }
    })
}
