//! Property tests for the algebraic invariants of polynomials, decompositions,
//! `φ⋆` and the limiters.

use ocad_core::cad::{convex_combine, convex_combine_symmetric, expand, reflect_theta};
use ocad_core::constructors::{classic_2d, optimal, quasi_optimal};
use ocad_core::dg_solver::{
    bp_limit_scalar, l2_project, mean_rate_oracle, CheckSet, Discretization, LimiterMode, Mesh2D,
    ModalBasis, ProblemSpec,
};
use ocad_core::dg_solver::problem::{conserved, internal_energy};
use ocad_core::optimizer::{phi_of, phi_star_sq};
use ocad_core::polyspace::orbit_average;
use ocad_core::{verify_feasibility, Polynomial2D, Provenance, SpaceId, SymmetricCAD};
use proptest::prelude::*;

fn space() -> impl Strategy<Value = SpaceId> {
    (1usize..=7, any::<bool>()).prop_map(|(k, q)| if q { SpaceId::q(k) } else { SpaceId::p(k) })
}

fn poly_in(space: SpaceId) -> impl Strategy<Value = Polynomial2D> {
    prop::collection::vec(-1.0f64..1.0, space.dim())
        .prop_map(move |c| Polynomial2D::new(space, c).unwrap())
}

fn poly() -> impl Strategy<Value = Polynomial2D> {
    space().prop_flat_map(poly_in)
}

/// Analytic optimal decompositions (`k ≤ 7`) at a random anisotropy.
fn analytic_cad() -> impl Strategy<Value = SymmetricCAD> {
    (1usize..=7, -1.0f64..=1.0).prop_map(|(k, t)| optimal(k, t).unwrap())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cell_average_is_reflection_invariant(p in poly()) {
        let a = p.cell_average();
        for (fx, fy) in [(true, false), (false, true), (true, true)] {
            prop_assert!(close(p.reflected(fx, fy).cell_average(), a, 1e-14));
        }
        prop_assert!(close(p.swapped().cell_average(), a, 1e-14));
    }

    #[test]
    fn orbit_averages_are_group_invariant(p in poly(), x in 0.0f64..1.0, y in 0.0f64..1.0) {
        for kind in [ocad_core::OrbitKind::Reflections, ocad_core::OrbitKind::Full] {
            let o = ocad_core::SymOrbit::new(x, y, 1.0, kind);
            let base = orbit_average(&p, &o);
            for (fx, fy) in [(true, false), (false, true), (true, true)] {
                prop_assert!(close(orbit_average(&p.reflected(fx, fy), &o), base, 1e-13));
            }
            if kind == ocad_core::OrbitKind::Full {
                prop_assert!(close(orbit_average(&p.swapped(), &o), base, 1e-13));
            }
        }
    }

    #[test]
    fn cell_average_is_linear(
        (p, q) in space().prop_flat_map(|s| (poly_in(s), poly_in(s))),
        alpha in -3.0f64..3.0,
        beta in -3.0f64..3.0,
    ) {
        let lhs = p.lin_comb(alpha, &q, beta).unwrap().cell_average();
        let rhs = alpha * p.cell_average() + beta * q.cell_average();
        prop_assert!(close(lhs, rhs, 1e-14));
    }

    #[test]
    fn expansion_preserves_decomposition_value(cad in analytic_cad(), seed in prop::collection::vec(-1.0f64..1.0, 36)) {
        let coeffs = seed[..cad.space.dim()].to_vec();
        let p = Polynomial2D::new(cad.space, coeffs).unwrap();
        prop_assert!(close(cad.apply(&p), expand(&cad).apply(&p), 1e-12));
        prop_assert!(close(cad.apply(&p), p.cell_average(), 1e-10));
    }

    #[test]
    fn reflect_theta_is_an_involution(cad in analytic_cad()) {
        prop_assert_eq!(reflect_theta(&reflect_theta(&cad)), cad.clone());
        let r = reflect_theta(&cad);
        prop_assert!(verify_feasibility(&r, 1e-10).feasible());
    }

    #[test]
    fn convex_combination_stays_feasible(k in 1usize..=7, t1 in -1.0f64..=1.0, t2 in -1.0f64..=1.0, lambda in 0.0f64..=1.0) {
        let a = optimal(k, t1).unwrap();
        let b = classic_2d(SpaceId::p(k), t2).unwrap();
        let worst = verify_feasibility(&a, 1e-10).max_residual.max(verify_feasibility(&b, 1e-10).max_residual);
        let g = convex_combine(&expand(&a), &expand(&b), lambda).unwrap();
        prop_assert!(verify_feasibility(&g, 1e-10).max_residual <= worst + 1e-14);
        let s = convex_combine_symmetric(&a, &b, lambda, Provenance::User).unwrap();
        let rep = verify_feasibility(&s, 1e-10);
        prop_assert!(rep.feasible(), "{:?}", rep);
    }

    #[test]
    fn json_round_trip_is_exact(cad in analytic_cad()) {
        let back = SymmetricCAD::from_json(&cad.to_json()).unwrap();
        prop_assert_eq!(back, cad);
    }

    #[test]
    fn phi_star_is_even_in_theta(k in 1usize..=9, t in 0.0f64..=1.0) {
        let a = phi_star_sq(k, t).unwrap().value;
        let b = phi_star_sq(k, -t).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn phi_is_scale_invariant(k in 2usize..=9, t in -1.0f64..=1.0, c in 1e-3f64..1e3) {
        let q = phi_star_sq(k, t).unwrap().q_star;
        let p = q.square();
        prop_assert!(close(phi_of(&p.scaled(c), t), phi_of(&p, t), 1e-12));
    }

    #[test]
    fn quasi_optimal_is_nearly_optimal(k in 2usize..=7, t in -1.0f64..=1.0) {
        let star = optimal(k, t).unwrap().boundary_weight;
        let quasi = quasi_optimal(k, t).unwrap();
        prop_assert!(quasi.boundary_weight <= star + 1e-12);
        prop_assert!(quasi.boundary_weight >= 0.95 * star);
        prop_assert!(verify_feasibility(&quasi, 1e-10).feasible());
    }
}

proptest! {
    // Degree 8 goes through the numeric continuation, which is slow.
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn optimal_weight_is_monotone_in_degree(m in 1usize..=3, t in -1.0f64..=1.0) {
        let even = optimal(2 * m, t).unwrap().boundary_weight;
        let odd = optimal(2 * m + 1, t).unwrap().boundary_weight;
        let next = optimal(2 * m + 2, t).unwrap().boundary_weight;
        prop_assert!((even - odd).abs() <= 1e-12);
        prop_assert!(next <= even + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn euler_admissible_set_is_convex(
        a in (0.01f64..5.0, -3.0f64..3.0, -3.0f64..3.0, 0.01f64..5.0),
        b in (0.01f64..5.0, -3.0f64..3.0, -3.0f64..3.0, 0.01f64..5.0),
        lambda in 0.0f64..=1.0,
    ) {
        let euler = ProblemSpec::euler(1.4);
        let ua = conserved(a.0, a.1, a.2, a.3, 1.4);
        let ub = conserved(b.0, b.1, b.2, b.3, 1.4);
        let mut mix = [0.0; 4];
        for i in 0..4 {
            mix[i] = lambda * ua[i] + (1.0 - lambda) * ub[i];
        }
        prop_assert!(euler.admissible(&ua, 0.0) && euler.admissible(&ub, 0.0));
        prop_assert!(euler.admissible(&mix, 0.0), "{:?}", mix);
        // Internal energy is concave, hence bounded below by the chord.
        let chord = lambda * internal_energy(&ua) + (1.0 - lambda) * internal_energy(&ub);
        prop_assert!(internal_energy(&mix) >= chord - 1e-12 * (1.0 + chord.abs()));
    }

    #[test]
    fn limiter_preserves_means_and_enforces_bounds(
        k in 1usize..=4,
        t in -1.0f64..=1.0,
        amp in 0.5f64..3.0,
        shift in -0.5f64..0.5,
        full in any::<bool>(),
    ) {
        let mesh = Mesh2D::periodic(5, 4, [0.0, 1.0, 0.0, 1.0]).unwrap();
        let basis = ModalBasis::new(k).unwrap();
        let mut f = l2_project(
            |x, y| [shift + amp * (5.0 * x - 3.0 * y).sin() * (2.0 * y).cos(), 0.0, 0.0, 0.0],
            &mesh,
            &basis,
            1,
        );
        let s = f.stride();
        for c in 0..f.n_cells {
            f.data[c * s] = f.data[c * s].clamp(-0.999, 0.999);
        }
        let means = f.averages(0);
        let cad = optimal(k, t).unwrap();
        let mode = if full { LimiterMode::Full } else { LimiterMode::Simplified };
        let check = CheckSet::new(&cad, &basis, mode);
        let st = bp_limit_scalar(&mut f, &basis, &check, -1.0, 1.0).unwrap();
        prop_assert_eq!(f.averages(0), means);
        prop_assert!(st.min_point >= -1.0 - 1e-12 && st.max_point <= 1.0 + 1e-12);
        let mut pts = Vec::new();
        for c in 0..f.n_cells {
            check.states(&basis, f.cell(c), 1, &mut pts);
            prop_assert!(pts.iter().all(|p| p[0].abs() <= 1.0 + 1e-12));
        }
    }

    #[test]
    fn rhs_mean_mode_matches_flux_differences(
        k in 1usize..=4,
        coeffs in prop::collection::vec(-1.0f64..1.0, 6 * 5 * 15),
        burgers in any::<bool>(),
    ) {
        let mesh = Mesh2D::periodic(6, 5, [-1.0, 1.0, 0.0, 0.5]).unwrap();
        let problem = if burgers {
            ProblemSpec::burgers(-10.0, 10.0)
        } else {
            ProblemSpec::advection(0.7, -1.3, -10.0, 10.0)
        };
        let basis = ModalBasis::new(k).unwrap();
        let disc = Discretization { mesh: mesh.clone(), basis, problem };
        let mut f = l2_project(|_, _| [0.0; 4], &mesh, &disc.basis, 1);
        let n = f.data.len();
        f.data.copy_from_slice(&coeffs[..n]);
        let traces = disc.traces(&f);
        let alpha = disc.max_speeds(&f, &traces);
        let rate = disc.rhs(&f, &traces, alpha);
        let oracle = mean_rate_oracle(&disc, &f, alpha);
        for (c, o) in oracle.iter().enumerate() {
            prop_assert!((rate.mean(c, 0) - o[0]).abs() <= 1e-12, "cell {}: {} vs {}", c, rate.mean(c, 0), o[0]);
        }
    }
}
