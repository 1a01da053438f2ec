//! Feasibility and optimality of the closed-form and numeric decompositions.

use ocad_core::cad::{verify_feasibility, DEFAULT_TOL};
use ocad_core::constructors::{
    boundary_weight_p4p5, boundary_weight_p6p7, critical_factor_p4p5, cubic_residual_p4p5,
    ocad_p4p5, ocad_pk_theta0, ocad_pk_theta_pm1, ocad_qk, optimal, p6p7_characteristic_factors,
    p6p7_root_factors, quasi_optimal,
};
use ocad_core::optimizer::{
    check_criterion_2, check_criterion_4, continuation_with, phi_of, phi_star_sq, ResidualLog,
    SolveOptions,
};
use ocad_core::polyspace::{Polynomial2D, SpaceId};
use ocad_core::quadrature::lobatto_end_weight;

fn theta_grid() -> Vec<f64> {
    (0..=20).map(|i| -1.0 + 0.1 * i as f64).collect()
}

#[test]
fn closed_forms_are_feasible_on_theta_grid() {
    for k in 1..=7 {
        for th in theta_grid() {
            let cad = optimal(k, th).unwrap();
            let r = verify_feasibility(&cad, DEFAULT_TOL);
            assert!(r.feasible(), "P^{k} theta={th}: {r:?}");
            assert!(cad.orbits.iter().all(|o| o.weight > 0.0));
        }
    }
}

#[test]
fn closed_forms_match_phi_star() {
    for k in 1..=7 {
        for th in theta_grid() {
            let cad = optimal(k, th).unwrap();
            assert!(check_criterion_4(&cad).unwrap(), "P^{k} theta={th}");
            let star = phi_star_sq(k, th).unwrap();
            assert!(check_criterion_2(&cad, &star.q_star.square()), "P^{k} theta={th}");
        }
    }
}

#[test]
fn printed_critical_polynomials_vanish_at_nodes() {
    for th in theta_grid() {
        let cad = ocad_p4p5(4, th).unwrap();
        let q = critical_factor_p4p5(&cad).unwrap();
        assert!(check_criterion_2(&cad, &q.square()), "theta={th}");
    }
    let s30 = 30f64.sqrt();
    let c = 2.0 * s30 - 30.0;
    let p3 = SpaceId::p(3);
    let q1 = Polynomial2D::from_terms(p3, &[(2, 1, 15.0), (0, 3, 35.0), (0, 1, c)]).unwrap();
    let q2 = Polynomial2D::from_terms(p3, &[(1, 2, 15.0), (3, 0, 35.0), (1, 0, c)]).unwrap();
    let cad = ocad_pk_theta0(6).unwrap();
    assert!(check_criterion_2(&cad, &q1.square()));
    assert!(check_criterion_2(&cad, &q2.square()));
    for k in 1..=9 {
        let (cad, p) = ocad_qk(k, 0.3).unwrap();
        assert!(check_criterion_2(&cad, &p));
        assert!(check_criterion_4(&cad).unwrap());
        let (cad, q) = ocad_pk_theta_pm1(k, -1).unwrap();
        assert!(check_criterion_2(&cad, &q.square()), "k={k}");
    }
}

#[test]
fn boundary_weight_roots() {
    for th in theta_grid() {
        assert!(cubic_residual_p4p5(th, boundary_weight_p4p5(th)).abs() <= 1e-12);
        let w = boundary_weight_p6p7(th);
        let (f3, f4) = p6p7_root_factors(th, w);
        let f = if th <= 0.0 { f3 } else { f4 };
        assert!(f.abs() <= 1e-10, "theta={th} residual={f}");
        // No smaller positive root of any factor.
        let n = 4000;
        for i in 1..n {
            let phi = w * i as f64 / n as f64;
            let vals = p6p7_characteristic_factors(th, phi);
            let vals0 = p6p7_characteristic_factors(th, 0.0);
            for (a, b) in vals.iter().zip(vals0) {
                assert!(a.signum() == b.signum(), "earlier root below {phi} at theta={th}");
            }
        }
    }
}

#[test]
fn classic_is_optimal_at_the_ends() {
    for k in 1..=7 {
        for th in [-1.0, 1.0] {
            assert!((optimal(k, th).unwrap().boundary_weight - lobatto_end_weight(k)).abs() < 1e-14);
        }
    }
}

#[test]
fn phi_star_of_q_star_recomputed() {
    for k in 1..=9 {
        for th in [-0.9, -0.3, 0.0, 0.6] {
            let r = phi_star_sq(k, th).unwrap();
            let p = r.q_star.square();
            assert!((phi_of(&p, th) - r.value).abs() <= 1e-10);
            assert!((phi_of(&p.scaled(7.5), th) - r.value).abs() <= 1e-10);
        }
    }
}

#[test]
fn quasi_optimal_quality() {
    for k in 1..=7 {
        for th in theta_grid() {
            let q = quasi_optimal(k, th).unwrap();
            let w = optimal(k, th).unwrap().boundary_weight;
            assert!(verify_feasibility(&q, DEFAULT_TOL).feasible(), "k={k} th={th}");
            assert!(q.boundary_weight <= w + 1e-12);
            assert!(q.boundary_weight >= 0.95 * w);
            if k <= 3 {
                assert!((q.boundary_weight - w).abs() < 1e-14);
            }
        }
    }
}

#[test]
fn numeric_continuation_k8() {
    let mut log = ResidualLog::default();
    let opts = SolveOptions::default();
    let cad = continuation_with(8, 0.0, &opts, &mut log).unwrap();
    assert!((cad.boundary_weight - 0.05767).abs() < 5e-5);
    assert!(verify_feasibility(&cad, DEFAULT_TOL).feasible());
    assert!(check_criterion_4(&cad).unwrap());
    assert!(!log.entries.is_empty());
}
