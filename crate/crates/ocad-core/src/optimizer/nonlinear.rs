//! Numeric optimal decompositions for `P^k`, `k ≥ 8`.
//!
//! With `ω̄ = φ⋆(θ)` fixed, an optimal decomposition places every internal
//! node on the zero set of the critical polynomial `q⋆`. The unknowns are
//! the reflection orbits `(ω_s, x_s, y_s)`, `s = 1..S`, and the equations are
//!
//! * `Σ_s ω_s x_s^{2a} y_s^{2b} = ⟨x^{2a}y^{2b}⟩_Ω − ω̄((1+θ)⟨·⟩^x + (1−θ)⟨·⟩^y)`
//!   for every even monomial of `P^k`, and
//! * `q⋆(x_s, y_s) = 0` for every orbit.
//!
//! The system is solved by damped Gauss–Newton (SVD pseudo-inverse, which
//! handles the redundant equation and any surplus unknowns) with a
//! Levenberg–Marquardt fallback, marching in `θ` from the analytic tensor
//! decomposition at `θ = −1`. When an orbit weight crosses zero the orbit
//! is removed (active-set step) and the step is repeated.

use nalgebra::{DMatrix, DVector};

use crate::cad::{reflect_theta, verify_feasibility, Provenance, SymmetricCAD, DEFAULT_TOL};
use crate::constructors::{classic_2d_with_gauss, ocad_pk_theta_pm1};
use crate::error::{OcadError, Result};
use crate::optimizer::criteria::max_on_nodes;
use crate::optimizer::moments::phi_star_sq;
use crate::polyspace::{
    endpoint_mean_power, interval_mean_power, invariant_exponents_gs, OrbitKind, Polynomial2D,
    SpaceId, SymOrbit,
};
use crate::quadrature::gauss_points_for_degree;

/// Default continuation increment in `θ`.
pub const DEFAULT_THETA_STEP: f64 = 0.05;

/// Solver controls.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Residual target (∞-norm).
    pub tol: f64,
    /// Iteration cap per `θ` value.
    pub max_iter: usize,
    /// Number of continuation steps from `θ = −1`; `None` uses
    /// [`DEFAULT_THETA_STEP`].
    pub steps: Option<usize>,
    /// Maximum number of step halvings when a continuation step fails.
    pub max_refinements: usize,
    /// Certificate tolerance `|q⋆(node)|` for the returned decomposition.
    pub certificate_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 200,
            steps: None,
            max_refinements: 6,
            certificate_tol: 1e-10,
        }
    }
}

/// One line of the residual history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualEntry {
    pub theta: f64,
    pub iter: usize,
    pub residual: f64,
}

/// Residual history of a solve, exportable as CSV.
#[derive(Debug, Clone, Default)]
pub struct ResidualLog {
    pub entries: Vec<ResidualEntry>,
}

impl ResidualLog {
    fn push(&mut self, theta: f64, iter: usize, residual: f64) {
        self.entries.push(ResidualEntry {
            theta,
            iter,
            residual,
        });
    }

    /// CSV with header `theta,iter,residual`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("theta,iter,residual\n");
        for e in &self.entries {
            s.push_str(&format!("{:.12e},{},{:.12e}\n", e.theta, e.iter, e.residual));
        }
        s
    }
}

/// Target data of the moment system at one `θ`.
struct System {
    exps: Vec<(usize, usize)>,
    rhs: Vec<f64>,
    q: Polynomial2D,
    qx: Polynomial2D,
    qy: Polynomial2D,
    wbar: f64,
}

fn derivative(p: &Polynomial2D, along_x: bool) -> Polynomial2D {
    let mut d = Polynomial2D::zero(p.space());
    for (i, j, c) in p.terms() {
        let r = if along_x {
            (i > 0).then(|| d.add_term(i - 1, j, c * i as f64))
        } else {
            (j > 0).then(|| d.add_term(i, j - 1, c * j as f64))
        };
        if let Some(r) = r {
            r.expect("lowering a degree stays in the space");
        }
    }
    d
}

impl System {
    fn new(k: usize, theta: f64) -> Result<Self> {
        let star = phi_star_sq(k, theta)?;
        let wbar = star.value;
        let exps = invariant_exponents_gs(SpaceId::p(k));
        let rhs = exps
            .iter()
            .map(|&(i, j)| {
                let cell = interval_mean_power(i) * interval_mean_power(j);
                let fx = endpoint_mean_power(i) * interval_mean_power(j);
                let fy = interval_mean_power(i) * endpoint_mean_power(j);
                cell - wbar * ((1.0 + theta) * fx + (1.0 - theta) * fy)
            })
            .collect();
        // Normalise q⋆ so its values are O(1) on the cell.
        let scale = star.q_star.max_abs_coeff();
        let q = star.q_star.scaled(1.0 / scale);
        Ok(Self {
            exps,
            rhs,
            qx: derivative(&q, true),
            qy: derivative(&q, false),
            q,
            wbar,
        })
    }

    fn residual(&self, u: &DVector<f64>, s: usize) -> DVector<f64> {
        let ne = self.exps.len();
        let mut f = DVector::zeros(ne + s);
        for (r, &(i, j)) in self.exps.iter().enumerate() {
            let mut v = -self.rhs[r];
            for o in 0..s {
                v += u[o] * u[s + o].powi(i as i32) * u[2 * s + o].powi(j as i32);
            }
            f[r] = v;
        }
        for o in 0..s {
            f[ne + o] = self.q.eval(u[s + o], u[2 * s + o]);
        }
        f
    }

    fn jacobian(&self, u: &DVector<f64>, s: usize) -> DMatrix<f64> {
        let ne = self.exps.len();
        let mut jac = DMatrix::zeros(ne + s, 3 * s);
        for (r, &(i, j)) in self.exps.iter().enumerate() {
            for o in 0..s {
                let (w, x, y) = (u[o], u[s + o], u[2 * s + o]);
                let xi = x.powi(i as i32);
                let yj = y.powi(j as i32);
                jac[(r, o)] = xi * yj;
                if i > 0 {
                    jac[(r, s + o)] = w * i as f64 * x.powi(i as i32 - 1) * yj;
                }
                if j > 0 {
                    jac[(r, 2 * s + o)] = w * j as f64 * xi * y.powi(j as i32 - 1);
                }
            }
        }
        for o in 0..s {
            let (x, y) = (u[s + o], u[2 * s + o]);
            jac[(ne + o, s + o)] = self.qx.eval(x, y);
            jac[(ne + o, 2 * s + o)] = self.qy.eval(x, y);
        }
        jac
    }
}

/// Reflect coordinates into `[0,1]` (orbits are symmetric, so `|x|` is the
/// same orbit) and cap at the cell boundary.
fn project(u: &mut DVector<f64>, s: usize) {
    for v in u.rows_mut(s, 2 * s).iter_mut() {
        *v = v.abs().min(1.0);
    }
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Damped Gauss–Newton with a Levenberg–Marquardt fallback.
fn newton(
    sys: &System,
    mut u: DVector<f64>,
    s: usize,
    theta: f64,
    opts: &SolveOptions,
    log: &mut ResidualLog,
) -> Result<DVector<f64>> {
    let mut f = sys.residual(&u, s);
    let mut res = inf_norm(&f);
    log.push(theta, 0, res);
    let mut mu = 1e-6;
    for it in 1..=opts.max_iter {
        if res <= opts.tol {
            return Ok(u);
        }
        let jac = sys.jacobian(&u, s);
        let svd = jac.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let step = svd
            .solve(&(-&f), smax * 1e-13)
            .map_err(|e| OcadError::NonlinearSolve {
                theta,
                residual: res,
                reason: format!("pseudo-inverse failed: {e}"),
            })?;
        let mut accepted = false;
        let mut alpha = 1.0;
        let norm0 = f.norm();
        for _ in 0..30 {
            let mut trial = &u + &step * alpha;
            project(&mut trial, s);
            let ft = sys.residual(&trial, s);
            if ft.norm() < norm0 * (1.0 - 1e-4 * alpha) || inf_norm(&ft) <= opts.tol {
                u = trial;
                f = ft;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // Levenberg–Marquardt: (JᵀJ + μI)δ = −Jᵀf, increasing μ.
            let jtj = jac.transpose() * &jac;
            let jtf = jac.transpose() * &f;
            for _ in 0..20 {
                let mut a = jtj.clone();
                for d in 0..a.nrows() {
                    a[(d, d)] += mu * (1.0 + jtj[(d, d)]);
                }
                if let Some(ch) = a.cholesky() {
                    let mut trial = &u - ch.solve(&jtf);
                    project(&mut trial, s);
                    let ft = sys.residual(&trial, s);
                    if ft.norm() < norm0 {
                        u = trial;
                        f = ft;
                        accepted = true;
                        mu = (mu * 0.1).max(1e-12);
                        break;
                    }
                }
                mu *= 10.0;
            }
        }
        res = inf_norm(&f);
        log.push(theta, it, res);
        if !accepted {
            return Err(OcadError::NonlinearSolve {
                theta,
                residual: res,
                reason: "no descent direction".into(),
            });
        }
    }
    if res <= opts.tol {
        return Ok(u);
    }
    Err(OcadError::NonlinearSolve {
        theta,
        residual: res,
        reason: format!("no convergence in {} iterations", opts.max_iter),
    })
}

fn pack(cad: &SymmetricCAD) -> (DVector<f64>, usize) {
    let s = cad.orbits.len();
    let mut u = DVector::zeros(3 * s);
    for (o, orb) in cad.orbits.iter().enumerate() {
        u[o] = orb.weight;
        u[s + o] = orb.x.abs();
        u[2 * s + o] = orb.y.abs();
    }
    (u, s)
}

fn unpack(k: usize, theta: f64, wbar: f64, u: &DVector<f64>, s: usize) -> SymmetricCAD {
    let orbits = (0..s)
        .map(|o| SymOrbit::new(u[s + o], u[2 * s + o], u[o], OrbitKind::Reflections))
        .collect();
    SymmetricCAD::new(SpaceId::p(k), theta, wbar, orbits, Provenance::Numeric)
}

fn check_even_k(k: usize) -> Result<()> {
    if k < 2 || k % 2 != 0 {
        return Err(OcadError::InvalidArgument(format!(
            "the numeric solver expects an even degree, got {k}"
        )));
    }
    Ok(())
}

fn check_theta_range(theta: f64) -> Result<()> {
    if !(-1.0..=0.0).contains(&theta) {
        return Err(OcadError::InvalidArgument(format!(
            "the numeric solver expects theta in [-1, 0], got {theta}"
        )));
    }
    Ok(())
}

/// Solve the moment system at one `θ ∈ [−1, 0]` from a warm start.
///
/// Without a warm start this runs the full continuation from `θ = −1`.
pub fn solve_ocad_system(
    k: usize,
    theta: f64,
    warm_start: Option<&SymmetricCAD>,
) -> Result<SymmetricCAD> {
    let opts = SolveOptions::default();
    match warm_start {
        Some(w) => solve_from(k, theta, w, &opts, &mut ResidualLog::default()),
        None => continuation_with(k, theta, &opts, &mut ResidualLog::default()),
    }
}

/// Solve at `θ` starting from `warm` and certify the result.
pub fn solve_from(
    k: usize,
    theta: f64,
    warm: &SymmetricCAD,
    opts: &SolveOptions,
    log: &mut ResidualLog,
) -> Result<SymmetricCAD> {
    check_even_k(k)?;
    check_theta_range(theta)?;
    let sys = System::new(k, theta)?;
    let (u0, s) = pack(warm);
    let u = newton(&sys, u0, s, theta, opts, log)?;
    let cad = unpack(k, theta, sys.wbar, &u, s);
    certify(&cad, &sys, theta, opts)?;
    Ok(cad)
}

fn certify(cad: &SymmetricCAD, sys: &System, theta: f64, opts: &SolveOptions) -> Result<()> {
    if let Some(o) = cad.orbits.iter().find(|o| o.weight < 0.0) {
        return Err(OcadError::InfeasibleStationaryPoint {
            theta,
            reason: format!("negative weight {:e} at ({}, {})", o.weight, o.x, o.y),
        });
    }
    let report = verify_feasibility(cad, DEFAULT_TOL);
    if !report.feasible() {
        return Err(OcadError::InfeasibleStationaryPoint {
            theta,
            reason: format!("feasibility check failed: {report:?}"),
        });
    }
    let cert = max_on_nodes(cad, &sys.q);
    if cert > opts.certificate_tol {
        return Err(OcadError::InfeasibleStationaryPoint {
            theta,
            reason: format!("critical polynomial is {cert:e} at a node"),
        });
    }
    Ok(())
}

/// Seeds at `θ = −1`: tensor decompositions with increasing Gauss counts,
/// ordered so the first has at least `⌈dim P^k(G_s) / 2⌉` orbits.
fn seeds(k: usize) -> Result<Vec<SymmetricCAD>> {
    let target = invariant_exponents_gs(SpaceId::p(k)).len().div_ceil(2);
    let mut q = gauss_points_for_degree(k);
    let mut out = Vec::new();
    while out.len() < 3 && q < 4 * k + 8 {
        let c = classic_2d_with_gauss(SpaceId::p(k), -1.0, q)?;
        if c.orbits.len() >= target && out.iter().all(|o: &SymmetricCAD| o.orbits.len() != c.orbits.len()) {
            out.push(c);
        }
        q += 1;
    }
    Ok(out)
}

/// March from the analytic `θ = −1` decomposition to `θ_target` in
/// `steps` equal increments (halving a step when it fails).
pub fn continuation_driver(k: usize, theta_target: f64, steps: usize) -> Result<SymmetricCAD> {
    let opts = SolveOptions {
        steps: Some(steps.max(1)),
        ..SolveOptions::default()
    };
    continuation_with(k, theta_target, &opts, &mut ResidualLog::default())
}

/// Continuation with explicit options and residual log.
pub fn continuation_with(
    k: usize,
    theta_target: f64,
    opts: &SolveOptions,
    log: &mut ResidualLog,
) -> Result<SymmetricCAD> {
    check_even_k(k)?;
    check_theta_range(theta_target)?;
    if theta_target == -1.0 {
        let mut c = ocad_pk_theta_pm1(k, -1)?.0;
        c.provenance = Provenance::Numeric;
        return Ok(c);
    }
    let steps = opts
        .steps
        .unwrap_or_else(|| ((theta_target + 1.0) / DEFAULT_THETA_STEP).ceil() as usize)
        .max(1);
    // The optimal support is not unique, so the active set met along the
    // path depends on the step grid; a grid that stalls where an orbit
    // leaves is retried on a staggered one.
    let mut last_err = None;
    for n in [steps, steps + 3, 2 * steps + 1] {
        for seed in seeds(k)? {
            match march(k, -1.0, theta_target, n, seed, opts, log) {
                Ok(c) => return Ok(c),
                Err(e) => last_err = Some(e),
            }
        }
    }
    Err(last_err.unwrap_or_else(|| OcadError::NonlinearSolve {
        theta: -1.0,
        residual: f64::NAN,
        reason: "no seed decomposition available".into(),
    }))
}

/// Decompositions at every `θ` of `thetas` (any sign) from a single
/// continuation sweep over the checkpoints `−|θ|` in increasing order;
/// positive values are obtained by reflection. Segments that stall are
/// re-solved from `θ = −1`.
pub fn continuation_path(
    k: usize,
    thetas: &[f64],
    opts: &SolveOptions,
    log: &mut ResidualLog,
) -> Result<Vec<SymmetricCAD>> {
    check_even_k(k)?;
    for &t in thetas {
        check_theta_range(-t.abs())?;
    }
    let mut checkpoints: Vec<f64> = thetas.iter().map(|t| -t.abs()).collect();
    checkpoints.sort_by(f64::total_cmp);
    checkpoints.dedup();
    let mut solved: Vec<(f64, SymmetricCAD)> = Vec::with_capacity(checkpoints.len());
    let mut prev: Option<(f64, SymmetricCAD)> = None;
    for &target in &checkpoints {
        let cad = match &prev {
            Some((start, warm)) if target > *start => {
                let n = ((target - start) / DEFAULT_THETA_STEP).ceil().max(1.0) as usize;
                march(k, *start, target, n, warm.clone(), opts, log)
                    .or_else(|_| march(k, *start, target, 2 * n + 1, warm.clone(), opts, log))
                    .or_else(|_| continuation_with(k, target, opts, log))?
            }
            _ => continuation_with(k, target, opts, log)?,
        };
        prev = Some((target, cad.clone()));
        solved.push((target, cad));
    }
    Ok(thetas
        .iter()
        .map(|&t| {
            let base = &solved
                .iter()
                .find(|(c, _)| *c == -t.abs())
                .expect("checkpoint solved")
                .1;
            if t > 0.0 {
                reflect_theta(base)
            } else {
                base.clone()
            }
        })
        .collect())
}

/// Re-solve at `theta` after removing the smallest-weight orbit of `warm`.
fn solve_dropping_weakest(
    k: usize,
    theta: f64,
    warm: &SymmetricCAD,
    opts: &SolveOptions,
    log: &mut ResidualLog,
) -> Result<SymmetricCAD> {
    let weakest = warm
        .orbits
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.weight.total_cmp(&b.1.weight))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut reduced = warm.clone();
    reduced.orbits.remove(weakest);
    solve_from(k, theta, &reduced, opts, log)
}

fn march(
    k: usize,
    start: f64,
    target: f64,
    steps: usize,
    seed: SymmetricCAD,
    opts: &SolveOptions,
    log: &mut ResidualLog,
) -> Result<SymmetricCAD> {
    let h0 = (target - start) / steps as f64;
    let mut cur = seed;
    let mut theta = start;
    let mut h = h0;
    let mut refinements = 0;
    let mut dropped = 0;
    while theta < target {
        let next = (theta + h).min(target);
        match solve_from(k, next, &cur, opts, log) {
            Ok(c) => {
                cur = c;
                theta = next;
                // Recover the nominal step after a success.
                h = (h * 2.0).min(h0);
            }
            Err(e) => {
                // Active set: an orbit whose weight crossed zero leaves the
                // decomposition; retry the same step without it.
                if matches!(e, OcadError::InfeasibleStationaryPoint { .. })
                    && cur.orbits.len() > 1
                    && dropped < cur.orbits.len()
                {
                    if let Ok(c) = solve_dropping_weakest(k, next, &cur, opts, log) {
                        cur = c;
                        theta = next;
                        dropped += 1;
                        continue;
                    }
                }
                refinements += 1;
                if refinements > opts.max_refinements * steps.max(1) || h < h0 / 64.0 {
                    return Err(e);
                }
                h *= 0.5;
            }
        }
    }
    Ok(cur)
}
