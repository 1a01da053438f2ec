//! Integration tests for the bound-preserving DG solver.

use ocad_core::constructors::{classic_2d, optimal, quasi_optimal};
use ocad_core::dg_solver::{
    bp_limit_euler, l2_error, l2_project, run_case, Boundary, CadChoice, CheckSet,
    InitialCondition, LimiterMode, Mesh2D, ModalBasis, ProblemKind, ProblemSpec, RunConfig,
    Scheme, ShockVortex, State,
};
use ocad_core::{SpaceId, SymmetricCAD};
use std::f64::consts::PI;

const SQUARE: [f64; 4] = [-1.0, 1.0, -1.0, 1.0];

fn sine(x: f64, y: f64) -> State {
    [(PI * (x + y)).sin(), 0.0, 0.0, 0.0]
}

fn scheme(n: usize, k: usize, problem: ProblemSpec, cad: SymmetricCAD, mode: LimiterMode) -> Scheme {
    Scheme::new(Mesh2D::periodic(n, n, SQUARE).unwrap(), problem, cad, k, mode).unwrap()
}

fn total(field: &ocad_core::dg_solver::DGField, comp: usize) -> f64 {
    field.averages(comp).iter().sum()
}

/// Advance `steps` steps with the CFL rule; returns the final field and the
/// extreme check-point values seen along the way.
fn advance(s: &Scheme, mut u: ocad_core::dg_solver::DGField, steps: usize) -> (ocad_core::dg_solver::DGField, f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut t = 0.0;
    for _ in 0..steps {
        let dt = s.compute_dt(&u).dt;
        let (next, st) = s.ssp_rk3_step(&u, dt, t).unwrap();
        lo = lo.min(st.min_point);
        hi = hi.max(st.max_point);
        u = next;
        t += dt;
    }
    (u, lo, hi)
}

#[test]
fn burgers_conserves_mass_for_every_decomposition() {
    let k = 2;
    let cads = [
        classic_2d(SpaceId::p(k), 0.0).unwrap(),
        optimal(k, 0.0).unwrap(),
        quasi_optimal(k, 0.0).unwrap(),
    ];
    for cad in cads {
        let s = scheme(12, k, ProblemSpec::burgers(-1.0, 1.0), cad, LimiterMode::Simplified);
        let mut u = l2_project(sine, &s.disc.mesh, &s.disc.basis, 1);
        s.limit(&mut u).unwrap();
        let m0 = total(&u, 0);
        let (u, _, _) = advance(&s, u, 100);
        let drift = (total(&u, 0) - m0).abs() / u.n_cells as f64;
        assert!(drift <= 1e-11, "mass drift {drift:e}");
    }
}

#[test]
fn burgers_respects_maximum_principle_only_with_limiter() {
    for k in [2, 4] {
        let cad = optimal(k, 0.0).unwrap();
        let s = scheme(16, k, ProblemSpec::burgers(-1.0, 1.0), cad.clone(), LimiterMode::Simplified);
        let mut u = l2_project(sine, &s.disc.mesh, &s.disc.basis, 1);
        s.limit(&mut u).unwrap();
        let (u, lo, hi) = advance(&s, u, 60);
        assert!(lo >= -1.0 - 1e-12 && hi <= 1.0 + 1e-12, "k={k}: [{lo}, {hi}]");
        let means = u.averages(0);
        assert!(means.iter().all(|m| m.abs() <= 1.0 + 1e-12));

        // Negative control: the same scheme without the limiter leaves
        // the invariant interval once the shock forms.
        let free = scheme(16, k, ProblemSpec::burgers(-1.0, 1.0), cad, LimiterMode::Off);
        let u0 = l2_project(sine, &free.disc.mesh, &free.disc.basis, 1);
        let (_, lo, hi) = advance(&free, u0, 60);
        assert!(lo < -1.0 - 1e-6 || hi > 1.0 + 1e-6, "k={k}: control stayed in [{lo}, {hi}]");
    }
}

#[test]
fn burgers_long_run_stays_in_bounds() {
    let k = 1;
    let s = scheme(8, k, ProblemSpec::burgers(-1.0, 1.0), optimal(k, 0.0).unwrap(), LimiterMode::Full);
    let mut u = l2_project(sine, &s.disc.mesh, &s.disc.basis, 1);
    s.limit(&mut u).unwrap();
    let (u, lo, hi) = advance(&s, u, 1000);
    assert!(lo >= -1.0 - 1e-12 && hi <= 1.0 + 1e-12);
    assert!(u.has_non_finite().is_none());
}

#[test]
fn decompositions_are_interchangeable_when_limiter_is_inactive() {
    // A small-amplitude smooth field never triggers the limiter, so the
    // choice of decomposition cannot affect the solution at a fixed step.
    let k = 2;
    let problem = ProblemSpec::advection(1.0, 1.0, -1.0, 1.0);
    let small = |x: f64, y: f64| [0.3 * (PI * (x + y)).sin(), 0.0, 0.0, 0.0];
    let mut results = Vec::new();
    for cad in [classic_2d(SpaceId::p(k), 0.0).unwrap(), optimal(k, 0.0).unwrap(), quasi_optimal(k, 0.0).unwrap()] {
        let s = scheme(10, k, problem, cad, LimiterMode::Simplified);
        let mut u = l2_project(small, &s.disc.mesh, &s.disc.basis, 1);
        let mut t = 0.0;
        for _ in 0..20 {
            let (next, st) = s.ssp_rk3_step(&u, 0.01, t).unwrap();
            assert_eq!(st.limited_cells, 0);
            u = next;
            t += 0.01;
        }
        results.push(u);
    }
    for r in &results[1..] {
        let diff = r.data.iter().zip(&results[0].data).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(diff <= 1e-12, "{diff:e}");
    }
}

#[test]
fn projection_converges_at_order_k_plus_one() {
    let k = 2;
    let basis = ModalBasis::new(k).unwrap();
    let errs: Vec<f64> = [8, 16, 32]
        .iter()
        .map(|&n| {
            let mesh = Mesh2D::periodic(n, n, SQUARE).unwrap();
            let u = l2_project(sine, &mesh, &basis, 1);
            l2_error(&u, &mesh, |x, y| sine(x, y)[0], 0)
        })
        .collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 2.9, "order {order}");
    }
}

fn advection_config(k: usize, ns: &[usize], c_ssp: f64) -> RunConfig {
    RunConfig {
        problem: ProblemKind::Advection { a1: 1.0, a2: 1.0 },
        bounds: [-1.0, 1.0],
        initial: InitialCondition::SinePlane,
        k,
        resolutions: ns.iter().map(|&n| [n, n]).collect(),
        domain: SQUARE,
        boundary: [Boundary::Periodic, Boundary::Periodic, Boundary::Periodic, Boundary::Periodic],
        t_end: 0.1,
        cad: CadChoice::Optimal,
        c0: 1.0,
        c_ssp,
        limiter: LimiterMode::Simplified,
        tvb_m: None,
        time_step_power: None,
        fixed_dt: None,
        theta_per_step: false,
        linear_cap: true,
        dt_max: None,
        error_norm: ocad_core::dg_solver::ErrorNorm::L2,
        dump_fields: false,
    }
}

#[test]
fn short_advection_run_converges() {
    let report = run_case(&advection_config(2, &[10, 20, 40], 1.0 / 3.0)).unwrap();
    let orders = report.orders();
    let last = orders.last().unwrap().unwrap();
    assert!(last >= 2.6, "orders {orders:?}");
    assert!(report.cases.iter().all(|c| c.stats.min_point >= -1.0 - 1e-12 && c.stats.max_point <= 1.0 + 1e-12));
}

#[test]
fn time_integrator_is_third_order() {
    // Refine Δt on a fixed mesh against a fine-step reference.
    let k = 2;
    let problem = ProblemSpec::advection(1.0, 1.0, -10.0, 10.0);
    let s = scheme(8, k, problem, optimal(k, 0.0).unwrap(), LimiterMode::Off);
    let u0 = l2_project(sine, &s.disc.mesh, &s.disc.basis, 1);
    let solve = |steps: usize| {
        let dt = 0.2 / steps as f64;
        let mut u = u0.clone();
        for i in 0..steps {
            u = s.ssp_rk3_step(&u, dt, i as f64 * dt).unwrap().0;
        }
        u
    };
    let reference = solve(1280);
    let err = |u: &ocad_core::dg_solver::DGField| {
        u.data.iter().zip(&reference.data).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    };
    let (e1, e2) = (err(&solve(20)), err(&solve(40)));
    let order = (e1 / e2).log2();
    assert!((2.8..=3.3).contains(&order), "temporal order {order}");
}

#[test]
fn constant_state_is_a_fixed_point() {
    let k = 3;
    let s = scheme(6, k, ProblemSpec::burgers(-1.0, 1.0), optimal(k, 0.3).unwrap(), LimiterMode::Full);
    let u = l2_project(|_, _| [0.4, 0.0, 0.0, 0.0], &s.disc.mesh, &s.disc.basis, 1);
    let (next, _) = s.ssp_rk3_step(&u, 0.05, 0.0).unwrap();
    let diff = next.data.iter().zip(&u.data).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(diff <= 1e-14, "{diff:e}");
}

#[test]
fn euler_limiter_restores_positivity() {
    let k = 2;
    let gamma = 1.4;
    let mesh = Mesh2D::periodic(4, 4, [0.0, 1.0, 0.0, 1.0]).unwrap();
    let basis = ModalBasis::new(k).unwrap();
    let check = CheckSet::new(&optimal(k, 0.0).unwrap(), &basis, LimiterMode::Simplified);
    let state = |rho: f64, p: f64| ocad_core::dg_solver::problem::conserved(rho, 0.5, -0.2, p, gamma);

    // Already admissible: untouched.
    let mut smooth = l2_project(|x, y| state(1.0 + 0.2 * (6.0 * x).sin() * y, 1.0), &mesh, &basis, 4);
    let before = smooth.clone();
    bp_limit_euler(&mut smooth, &basis, &check).unwrap();
    assert_eq!(smooth, before);

    // Steep slopes on density and energy make point values negative
    // while keeping the (admissible) cell averages.
    let mut u = l2_project(|x, _| state(1.0 + 0.1 * x, 1.0), &mesh, &basis, 4);
    let n = u.n_modes;
    for c in 0..u.n_cells {
        let cell = u.cell_mut(c);
        cell[1] = 0.8 * cell[0];
        cell[3 * n + 2] = -0.9 * cell[3 * n];
    }
    let mut pts = Vec::new();
    let negative = (0..u.n_cells).any(|c| {
        check.states(&basis, u.cell(c), 4, &mut pts);
        pts.iter().any(|s| s[0] < 0.0)
    });
    assert!(negative, "test data should violate positivity");
    let means: Vec<State> = (0..u.n_cells).map(|c| u.mean_state(c)).collect();
    bp_limit_euler(&mut u, &basis, &check).unwrap();
    for c in 0..u.n_cells {
        assert_eq!(u.mean_state(c), means[c]);
        check.states(&basis, u.cell(c), 4, &mut pts);
        let eps_rho = 1e-13f64.min(means[c][0]);
        for s in &pts {
            assert!(s[0] >= eps_rho - 1e-15, "cell {c}: rho {}", s[0]);
            assert!(ocad_core::dg_solver::problem::internal_energy(s) >= -1e-14, "cell {c}");
        }
    }
}

#[test]
fn coarse_shock_vortex_stays_admissible() {
    let sv = ShockVortex::default();
    let inflow = sv.left_state().to_vec();
    let cfg = RunConfig {
        problem: ProblemKind::Euler { gamma: sv.gamma },
        bounds: [-1.0, 1.0],
        initial: InitialCondition::ShockVortex(sv),
        k: 2,
        resolutions: vec![[24, 12]],
        domain: [0.0, 2.0, 0.0, 1.0],
        boundary: [Boundary::FixedInflow(inflow), Boundary::Outflow, Boundary::Outflow, Boundary::Outflow],
        t_end: 0.05,
        cad: CadChoice::Optimal,
        c0: 1.0,
        c_ssp: 1.0,
        limiter: LimiterMode::Simplified,
        tvb_m: Some(10.0),
        time_step_power: None,
        fixed_dt: None,
        theta_per_step: false,
        linear_cap: true,
        dt_max: None,
        error_norm: ocad_core::dg_solver::ErrorNorm::L2,
        dump_fields: false,
    };
    let report = run_case(&cfg).unwrap();
    let case = &report.cases[0];
    assert!(case.stats.min_mean > 0.0 && case.stats.min_mean_internal_energy > 0.0);
    assert!(case.field.has_non_finite().is_none());
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| run_case(&advection_config(2, &[24], 1.0)).unwrap().cases[0].field.clone())
    };
    assert_eq!(run(1).data, run(3).data);
}
