//! Closed-form constructors for classic and optimal decompositions.
//!
//! * [`classic_1d`] / [`classic_2d`]: Gauss–Lobatto based decompositions with
//!   boundary weight `1/(L(L−1))`, `L = ⌈(k+3)/2⌉`.
//! * [`ocad_qk`]: optimal decomposition for `Q^k` (the classic one).
//! * [`ocad_pk_theta_pm1`], [`ocad_pk_theta0`], [`ocad_p2p3`], [`ocad_p4p5`],
//!   [`ocad_p6p7`]: optimal decompositions for `P^k`, `k ≤ 7`.
//! * [`quasi_optimal`]: convex combination of the `θ ∈ {−1, 0, 1}` optima.
//! * [`optimal`]: dispatcher over every supported `(k, θ)`, falling back to
//!   the numeric continuation solver for `k ≥ 8`.
//!
//! All `θ`-dependent constructors compute the `θ' = −|θ|` decomposition and
//! reflect it when `θ > 0`, which makes `ω̄(θ) = ω̄(−θ)` hold by construction.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::cad::{
    convex_combine_symmetric, reflect_theta, verify_feasibility, Provenance,
    SymmetricCAD, CAD1D,
};
use crate::error::{OcadError, Result};
use crate::optimizer;
use crate::polyspace::{OrbitKind, Polynomial1D, Polynomial2D, SpaceId, SymOrbit};
use crate::quadrature::{
    gauss, gauss_lobatto, gauss_points_for_degree, lobatto_end_weight, lobatto_points_for_degree,
};

/// Radicands this close below zero are treated as zero (closed forms that
/// are analytically nonnegative can round slightly negative).
pub const RADICAND_CLAMP: f64 = 1e-13;

/// Vanishing tolerance for certificate self-checks.
const CERTIFICATE_TOL: f64 = 1e-12;

fn check_theta(theta: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&theta) || !theta.is_finite() {
        return Err(OcadError::InvalidArgument(format!(
            "theta = {theta} outside [-1, 1]"
        )));
    }
    Ok(())
}

fn check_degree(k: usize, allowed: &[usize], what: &str) -> Result<()> {
    if !allowed.contains(&k) {
        return Err(OcadError::Unsupported(format!(
            "{what} is defined for k in {allowed:?}, got {k}"
        )));
    }
    Ok(())
}

/// `√v` with tiny negative rounding clamped to zero.
fn safe_sqrt(v: f64, what: &str) -> Result<f64> {
    if v >= 0.0 {
        Ok(v.sqrt())
    } else if v >= -RADICAND_CLAMP {
        Ok(0.0)
    } else {
        Err(OcadError::SelfCheck(format!(
            "negative radicand {v:e} in {what}"
        )))
    }
}

/// Reflect the `θ' = −|θ|` decomposition when `θ > 0`.
fn orient(mut cad: SymmetricCAD, theta: f64) -> SymmetricCAD {
    if theta > 0.0 {
        reflect_theta(&cad)
    } else {
        // Normalises `−0` to `0`.
        cad.theta = -theta.abs() + 0.0;
        cad
    }
}

// ---------------------------------------------------------------------------
// 1D
// ---------------------------------------------------------------------------

/// Classic (and optimal) 1D decomposition from the `L`-point Gauss–Lobatto
/// rule: `ω± = 1/(L(L−1))` plus the interior Lobatto nodes.
pub fn classic_1d(k: usize) -> Result<CAD1D> {
    if k == 0 {
        return Err(OcadError::InvalidArgument("degree must be at least 1".into()));
    }
    let l = lobatto_points_for_degree(k);
    let rule = gauss_lobatto(l)?;
    let internal = (1..l - 1)
        .map(|i| (rule.nodes[i], rule.weights[i]))
        .collect();
    Ok(CAD1D {
        degree: k,
        boundary: (rule.weights[0], rule.weights[l - 1]),
        internal,
    })
}

/// Optimality witness of the 1D decomposition:
/// `p⋆(x) = ∏_ℓ (x − x_ℓ)²` over the interior Lobatto nodes.
///
/// `p⋆` is nonnegative, vanishes at every interior node and has degree
/// `2(L−2) ≤ k`, so no feasible decomposition can have a larger end weight.
pub fn certificate_1d(cad: &CAD1D) -> Polynomial1D {
    let mut p = Polynomial1D::new(vec![1.0]);
    for &(x, _) in &cad.internal {
        let f = Polynomial1D::new(vec![-x, 1.0]);
        p = p.mul(&f).mul(&f);
    }
    p
}

// ---------------------------------------------------------------------------
// Classic 2D and Q^k
// ---------------------------------------------------------------------------

/// Classic 2D decomposition with the default Gauss count `Q = ⌈(k+1)/2⌉`.
pub fn classic_2d(space: SpaceId, theta: f64) -> Result<SymmetricCAD> {
    classic_2d_with_gauss(space, theta, gauss_points_for_degree(space.degree))
}

/// Classic 2D decomposition with an explicit Gauss count `q ≥ (k+1)/2`.
///
/// Internal nodes are `(x_q^G, y_ℓ^GL)` with weight `(1−θ)/2·ω_ℓ^GL ω_q^G`
/// and `(x_ℓ^GL, y_q^G)` with weight `(1+θ)/2·ω_ℓ^GL ω_q^G`, `ℓ` ranging over
/// interior Lobatto nodes; the boundary weight is `ω̄ = 1/(L(L−1))`.
pub fn classic_2d_with_gauss(space: SpaceId, theta: f64, q: usize) -> Result<SymmetricCAD> {
    check_theta(theta)?;
    let k = space.degree;
    if k == 0 {
        return Err(OcadError::InvalidArgument("degree must be at least 1".into()));
    }
    if 2 * q < k + 1 {
        return Err(OcadError::InvalidArgument(format!(
            "{q} Gauss points are not exact for degree {k}"
        )));
    }
    let l = lobatto_points_for_degree(k);
    let lob = gauss_lobatto(l)?;
    let gs = gauss(q)?;
    let lob_half: Vec<(f64, f64)> = (1..l - 1)
        .filter(|&i| lob.nodes[i] >= 0.0)
        .map(|i| (lob.nodes[i], lob.weights[i]))
        .collect();
    let gauss_half: Vec<(f64, f64)> = (0..q)
        .filter(|&i| gs.nodes[i] >= 0.0)
        .map(|i| (gs.nodes[i], gs.weights[i]))
        .collect();
    let mult = |a: f64, b: f64| {
        let m = |v: f64| if v > 0.0 { 2.0 } else { 1.0 };
        m(a) * m(b)
    };
    let wy = 0.5 * (1.0 - theta);
    let wx = 0.5 * (1.0 + theta);
    let mut orbits = Vec::new();
    for &(yl, wl) in &lob_half {
        for &(xq, wq) in &gauss_half {
            let m = mult(xq, yl);
            if wy > 0.0 {
                orbits.push(SymOrbit::new(xq, yl, m * wy * wl * wq, OrbitKind::Reflections));
            }
            if wx > 0.0 {
                orbits.push(SymOrbit::new(yl, xq, m * wx * wl * wq, OrbitKind::Reflections));
            }
        }
    }
    Ok(SymmetricCAD::new(
        space,
        theta,
        lobatto_end_weight(k),
        orbits,
        Provenance::Classic,
    ))
}

/// Interior Gauss–Lobatto nodes for degree `k`.
fn lobatto_interior(k: usize) -> Result<Vec<f64>> {
    let l = lobatto_points_for_degree(k);
    let lob = gauss_lobatto(l)?;
    Ok(lob.nodes[1..l - 1].to_vec())
}

/// `∏_ℓ (t − t_ℓ)` in the variable `x` (`along_x = true`) or `y`.
fn node_product(space: SpaceId, nodes: &[f64], along_x: bool) -> Result<Polynomial2D> {
    let lin = SpaceId {
        family: space.family,
        degree: 1,
    };
    let mut p = Polynomial2D::from_terms(
        SpaceId {
            family: space.family,
            degree: 0,
        },
        &[(0, 0, 1.0)],
    )?;
    for &t in nodes {
        let f = if along_x {
            Polynomial2D::from_terms(lin, &[(0, 0, -t), (1, 0, 1.0)])?
        } else {
            Polynomial2D::from_terms(lin, &[(0, 0, -t), (0, 1, 1.0)])?
        };
        p = p.mul(&f);
    }
    Ok(p)
}

/// Optimal decomposition for `Q^k` (the classic one, for any `θ`) together
/// with its critical polynomial `p⋆ = [∏(x−x_ℓ)·∏(y−y_ℓ)]²`.
pub fn ocad_qk(k: usize, theta: f64) -> Result<(SymmetricCAD, Polynomial2D)> {
    let space = SpaceId::q(k);
    let mut cad = classic_2d(space, theta)?;
    cad.provenance = Provenance::Optimal;
    let nodes = lobatto_interior(k)?;
    let q = node_product(space, &nodes, true)?.mul(&node_product(space, &nodes, false)?);
    let p_star = q.square();
    let worst = optimizer::max_on_nodes(&cad, &p_star);
    if worst > CERTIFICATE_TOL {
        return Err(OcadError::SelfCheck(format!(
            "Q^{k} certificate is {worst:e} at an internal node"
        )));
    }
    Ok((cad, p_star))
}

/// Optimal decomposition for `P^k` at `θ = ±1` (single-orientation tensor
/// rule) with its critical factor `q⋆ = ∏(y − y_ℓ)` (or the `x` version),
/// returned as an element of `P^{⌊k/2⌋}`.
pub fn ocad_pk_theta_pm1(k: usize, sign: i32) -> Result<(SymmetricCAD, Polynomial2D)> {
    if sign != 1 && sign != -1 {
        return Err(OcadError::InvalidArgument(format!(
            "sign must be ±1, got {sign}"
        )));
    }
    let space = SpaceId::p(k);
    let mut cad = classic_2d(space, -1.0)?;
    cad.provenance = Provenance::Optimal;
    let nodes = lobatto_interior(k)?;
    let q = node_product(space, &nodes, false)?.embed(space.half())?;
    if sign > 0 {
        Ok((reflect_theta(&cad), q.swapped()))
    } else {
        Ok((cad, q))
    }
}

// ---------------------------------------------------------------------------
// P^k closed forms
// ---------------------------------------------------------------------------

/// Fully symmetric optimal decomposition of `P^k` at `θ = 0`, `2 ≤ k ≤ 7`.
pub fn ocad_pk_theta0(k: usize) -> Result<SymmetricCAD> {
    check_degree(k, &[2, 3, 4, 5, 6, 7], "the closed-form θ = 0 decomposition")?;
    let space = SpaceId::p(k);
    let full = |x, y, w| SymOrbit::new(x, y, w, OrbitKind::Full);
    let (wbar, orbits) = match k {
        2 | 3 => (0.25, vec![full(0.0, 0.0, 0.5)]),
        4 | 5 => {
            let s14 = 14f64.sqrt();
            let a = ((7.0 - s14) / 15.0).sqrt();
            let r = ((14.0 - 2.0 * s14) / 15.0).sqrt();
            // The two axis orbits (r,0) and (0,r) of the printed form merge
            // into one fully symmetric orbit of twice the weight.
            (
                2.0 - s14 / 2.0,
                vec![
                    full(a, a, (5.0 * s14 - 15.0) / 7.0),
                    full(r, 0.0, 2.0 * (s14 - 3.0) / 7.0),
                ],
            )
        }
        _ => {
            let s30 = 30f64.sqrt();
            let a = (0.6 - s30 / 25.0).sqrt();
            let r = (6.0 / 7.0 - 2.0 * s30 / 35.0).sqrt();
            (
                1.0 - s30 / 6.0,
                vec![
                    full(a, a, (875.0 * s30 - 3125.0) / 4563.0),
                    full(r, 0.0, 2.0 * (343.0 * s30 - 1225.0) / 4563.0),
                    full(0.0, 0.0, (1012.0 - 40.0 * s30) / 4563.0),
                ],
            )
        }
    };
    Ok(SymmetricCAD::new(space, 0.0, wbar, orbits, Provenance::Optimal))
}

/// Optimal decomposition of `P²`/`P³` for any `θ`:
/// `ω̄ = 1/(4+2|θ|)`, one orbit of weight `(1+|θ|)/(2+|θ|)`.
pub fn ocad_p2p3(k: usize, theta: f64) -> Result<SymmetricCAD> {
    check_degree(k, &[2, 3], "the P2/P3 decomposition")?;
    check_theta(theta)?;
    let t = theta.abs();
    let wbar = 1.0 / (4.0 + 2.0 * t);
    let w1 = (1.0 + t) / (2.0 + t);
    let x1 = (2.0 * t / (3.0 + 3.0 * t)).sqrt();
    let cad = SymmetricCAD::new(
        SpaceId::p(k),
        -t,
        wbar,
        vec![SymOrbit::new(x1, 0.0, w1, OrbitKind::Reflections)],
        Provenance::Optimal,
    );
    Ok(orient(cad, theta))
}

/// Boundary weight of the `P⁴`/`P⁵` optimum: the trigonometric root of
/// `12(1−θ²)ω³ + (26θ²−50)ω² + 14ω − 1 = 0`.
pub fn boundary_weight_p4p5(theta: f64) -> f64 {
    let t2 = theta * theta;
    let r = 78.0 * t2 + 46.0;
    let arg = ((1476.0 * t2 - 244.0) / r.powf(1.5)).clamp(-1.0, 1.0);
    1.0 / (14.0 / 3.0 + 2.0 / 3.0 * r.sqrt() * (arg.acos() / 3.0).cos())
}

/// Residual of the `P⁴`/`P⁵` boundary-weight cubic.
pub fn cubic_residual_p4p5(theta: f64, wbar: f64) -> f64 {
    let t2 = theta * theta;
    12.0 * (1.0 - t2) * wbar.powi(3) + (26.0 * t2 - 50.0) * wbar * wbar + 14.0 * wbar - 1.0
}

/// Optimal decomposition of `P⁴`/`P⁵` for any `θ` (two orbits).
pub fn ocad_p4p5(k: usize, theta: f64) -> Result<SymmetricCAD> {
    check_degree(k, &[4, 5], "the P4/P5 decomposition")?;
    check_theta(theta)?;
    let t = theta.abs();
    let w = boundary_weight_p4p5(theta);
    let res = cubic_residual_p4p5(theta, w);
    if res.abs() > 1e-12 {
        return Err(OcadError::SelfCheck(format!(
            "boundary weight cubic residual {res:e} at theta = {theta}"
        )));
    }
    let a = 1.0 - 4.0 * w + 2.0 * t * w;
    let b = 1.0 - 6.0 * w + 4.0 * t * w;
    let w1 = 5.0 * a * a / (9.0 * b);
    let w2 = 1.0 - 2.0 * w - w1;
    let x1 = safe_sqrt(3.0 * b / (5.0 * a), "P4 node 1 (x)")?;
    let y1 = safe_sqrt((1.0 - 6.0 * w) / (3.0 * a), "P4 node 1 (y)")?;
    let y2 = safe_sqrt(
        (1.0 - 4.0 * w - 2.0 * t * w - 3.0 * w1 * y1 * y1) / (3.0 * w2),
        "P4 node 2 (y)",
    )?;
    let cad = SymmetricCAD::new(
        SpaceId::p(k),
        -t,
        w,
        vec![
            SymOrbit::new(x1, y1, w1, OrbitKind::Reflections),
            SymOrbit::new(0.0, y2, w2, OrbitKind::Reflections),
        ],
        Provenance::Optimal,
    );
    Ok(orient(cad, theta))
}

/// Critical factor of the `P⁴`/`P⁵` optimum:
/// `q⋆ = (y₂² − y₁²)x² + x₁²y² − x₁²y₂²` in the `θ ≤ 0` orientation
/// (swapped for `θ > 0`), as an element of `P²`.
pub fn critical_factor_p4p5(cad: &SymmetricCAD) -> Result<Polynomial2D> {
    if cad.orbits.len() != 2 {
        return Err(OcadError::InvalidArgument(
            "expected the two-orbit P4/P5 decomposition".into(),
        ));
    }
    let (c, flip) = if cad.theta > 0.0 {
        (reflect_theta(cad), true)
    } else {
        (cad.clone(), false)
    };
    let (x1, y1) = (c.orbits[0].x, c.orbits[0].y);
    let y2 = c.orbits[1].y;
    let q = Polynomial2D::from_terms(
        SpaceId::p(2),
        &[
            (2, 0, y2 * y2 - y1 * y1),
            (0, 2, x1 * x1),
            (0, 0, -x1 * x1 * y2 * y2),
        ],
    )?;
    Ok(if flip { q.swapped() } else { q })
}

/// Boundary weight of the `P⁶`/`P⁷` optimum (smallest root of the cubic
/// factor selected by the sign of `θ`).
pub fn boundary_weight_p6p7(theta: f64) -> f64 {
    let t = theta.abs();
    let r = 126.0 * t * t + 96.0 * t + 94.0;
    let arg = ((864.0 * t.powi(3) + 2916.0 * t * t + 288.0 * t - 532.0) / r.powf(1.5))
        .clamp(-1.0, 1.0);
    1.0 / (2.0 * t + 20.0 / 3.0 + 2.0 / 3.0 * r.sqrt() * (arg.acos() / 3.0).cos())
}

/// The cubic factors whose smallest real roots give the `P⁶`/`P⁷`
/// boundary weight: the first governs `θ ≤ 0`, the second `θ ≥ 0`.
pub fn p6p7_root_factors(theta: f64, phi: f64) -> (f64, f64) {
    let t = theta;
    let t2 = t * t;
    let t3 = t2 * t;
    let f3 = (12.0 * t3 - 48.0 * t2 - 12.0 * t + 48.0) * phi.powi(3)
        + (48.0 * t + 30.0 * t2 - 102.0) * phi * phi
        + (-6.0 * t + 20.0) * phi
        - 1.0;
    let f4 = (12.0 * t3 + 48.0 * t2 - 12.0 * t - 48.0) * phi.powi(3)
        + (48.0 * t - 30.0 * t2 + 102.0) * phi * phi
        + (-6.0 * t - 20.0) * phi
        + 1.0;
    (f3, f4)
}

/// All four factors of the characteristic polynomial whose smallest real
/// root is `φ⋆` for `(P³)²`: `6φ−1`, the `P⁴` cubic, and the two cubics of
/// [`p6p7_root_factors`].
pub fn p6p7_characteristic_factors(theta: f64, phi: f64) -> [f64; 4] {
    let (f3, f4) = p6p7_root_factors(theta, phi);
    [6.0 * phi - 1.0, -cubic_residual_p4p5(theta, phi), f3, f4]
}

/// Optimal decomposition of `P⁶`/`P⁷` for any `θ` (four orbits built from
/// the modified moments `m_ij`).
pub fn ocad_p6p7(k: usize, theta: f64) -> Result<SymmetricCAD> {
    check_degree(k, &[6, 7], "the P6/P7 decomposition")?;
    check_theta(theta)?;
    let th = -theta.abs();
    let w = boundary_weight_p6p7(theta);
    let m = |i: f64, j: f64| {
        1.0 / ((i + 1.0) * (j + 1.0)) - w * ((1.0 + th) / (1.0 + j) + (1.0 - th) / (1.0 + i))
    };
    let (m02, m04, m06) = (m(0.0, 2.0), m(0.0, 4.0), m(0.0, 6.0));
    let (m22, m42) = (m(2.0, 2.0), m(4.0, 2.0));
    let beta1 = 1.0 - m22 * m22 / (m42 * m02) + (30f64.sqrt() + 2.0) / 36.0 * th * th;
    let beta2 = m42 * m02 - m22 * m22;
    let beta3 = m06 * m02 - m04 * m04;
    let r12 = safe_sqrt((1.0 - beta1) * beta2 / beta1, "P6 node 1")?;
    let r13 = safe_sqrt((1.0 - beta1) * beta3 / beta1, "P6 node 1")?;
    let r22 = safe_sqrt(beta1 * beta2 / (1.0 - beta1), "P6 node 2")?;
    let r23 = safe_sqrt(beta1 * beta3 / (1.0 - beta1), "P6 node 2")?;
    let x1 = safe_sqrt((m22 - r12) / m02, "P6 node 1 (x)")?;
    let y1 = safe_sqrt((m04 + r13) / m02, "P6 node 1 (y)")?;
    let w1 = beta1 * m02 / (y1 * y1);
    let x2 = safe_sqrt((m22 + r22) / m02, "P6 node 2 (x)")?;
    let y2 = safe_sqrt((m04 - r23) / m02, "P6 node 2 (y)")?;
    let w2 = (1.0 - beta1) * m02 / (y2 * y2);
    let mk = |kk: i32| m(kk as f64, 0.0) - w1 * x1.powi(kk) - w2 * x2.powi(kk);
    let (m0, m2, m4, m6) = (mk(0), mk(2), mk(4), mk(6));
    let var = m4 * m0 - m2 * m2;
    let sd = safe_sqrt(var, "P6 axis nodes")?;
    let (w3, w4, x3, x4);
    if sd == 0.0 {
        // The two axis orbits collapse into one: all remaining mass sits at
        // the single abscissa √(m2/m0).
        w3 = m0;
        w4 = 0.0;
        x3 = safe_sqrt(m2 / m0, "P6 node 3")?;
        x4 = 0.0;
    } else {
        let beta4 = (m6 * m0 * m0 - 3.0 * m4 * m2 * m0 + 2.0 * m2.powi(3)) / var.powf(1.5);
        let s = beta4 / (beta4 * beta4 + 4.0).sqrt();
        w3 = 0.5 * m0 * (1.0 + s);
        w4 = 0.5 * m0 * (1.0 - s);
        x3 = safe_sqrt(m2 / m0 - (w4 / w3).sqrt() * sd / m0, "P6 node 3")?;
        x4 = safe_sqrt(m2 / m0 + (w3 / w4).sqrt() * sd / m0, "P6 node 4")?;
    }
    let gs = |x, y, w| SymOrbit::new(x, y, w, OrbitKind::Reflections);
    let cad = SymmetricCAD::new(
        SpaceId::p(k),
        th,
        w,
        vec![gs(x1, y1, w1), gs(x2, y2, w2), gs(x3, 0.0, w3), gs(x4, 0.0, w4)],
        Provenance::Optimal,
    );
    Ok(orient(cad, theta))
}

// ---------------------------------------------------------------------------
// Dispatchers and the quasi-optimal decomposition
// ---------------------------------------------------------------------------

/// Optimal decomposition of `P^k` at `θ = 0` for any `k ≥ 1`
/// (closed form for `k ≤ 7`, numeric continuation otherwise).
pub fn optimal_theta0(k: usize) -> Result<SymmetricCAD> {
    match k {
        0 => Err(OcadError::InvalidArgument("degree must be at least 1".into())),
        1 => {
            let mut c = classic_2d(SpaceId::p(1), 0.0)?;
            c.provenance = Provenance::Optimal;
            Ok(c)
        }
        2..=7 => ocad_pk_theta0(k),
        _ => optimal(k, 0.0),
    }
}

/// Optimal decomposition of `P^k` for any supported `(k, θ)`.
///
/// `k ≤ 7` uses closed forms; `k ≥ 8` solves the invariant moment system
/// by continuation in `θ` (odd `k` reuses the decomposition of `k − 1`,
/// which is also optimal for `k`).
pub fn optimal(k: usize, theta: f64) -> Result<SymmetricCAD> {
    check_theta(theta)?;
    match k {
        0 => Err(OcadError::InvalidArgument("degree must be at least 1".into())),
        1 => {
            let mut c = classic_2d(SpaceId::p(1), theta)?;
            c.provenance = Provenance::Optimal;
            Ok(c)
        }
        2 | 3 => ocad_p2p3(k, theta),
        4 | 5 => ocad_p4p5(k, theta),
        6 | 7 => ocad_p6p7(k, theta),
        _ => {
            if theta.abs() == 1.0 {
                return Ok(ocad_pk_theta_pm1(k, theta.signum() as i32)?.0);
            }
            let even = k - k % 2;
            let key = (even, (-theta.abs()).to_bits());
            let cached = numeric_cache().lock().expect("cache lock").get(&key).cloned();
            let mut cad = match cached {
                Some(c) => c,
                None => {
                    let c = optimizer::continuation_with(
                        even,
                        -theta.abs(),
                        &optimizer::SolveOptions::default(),
                        &mut optimizer::ResidualLog::default(),
                    )?;
                    numeric_cache().lock().expect("cache lock").insert(key, c.clone());
                    c
                }
            };
            cad.space = SpaceId::p(k);
            Ok(orient(cad, theta))
        }
    }
}

/// Numerically computed optima keyed by `(even degree, −|θ|)`; the
/// continuation is deterministic, so repeated requests reuse the result.
fn numeric_cache() -> &'static Mutex<HashMap<(usize, u64), SymmetricCAD>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), SymmetricCAD>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// [`optimal`] over a list of `θ` values. For `k ≥ 8` a single
/// continuation sweep serves the whole list.
pub fn optimal_many(k: usize, thetas: &[f64]) -> Result<Vec<SymmetricCAD>> {
    for &t in thetas {
        check_theta(t)?;
    }
    if k < 8 {
        return thetas.iter().map(|&t| optimal(k, t)).collect();
    }
    let even = k - k % 2;
    let interior: Vec<f64> = thetas.iter().copied().filter(|t| t.abs() < 1.0).collect();
    let path = optimizer::continuation_path(
        even,
        &interior,
        &optimizer::SolveOptions::default(),
        &mut optimizer::ResidualLog::default(),
    )?;
    {
        let mut cache = numeric_cache().lock().expect("cache lock");
        for (t, c) in interior.iter().zip(&path) {
            if *t <= 0.0 {
                cache.entry((even, (-t.abs()).to_bits())).or_insert_with(|| c.clone());
            }
        }
    }
    thetas.iter().map(|&t| optimal(k, t)).collect()
}

/// Mixing parameter `τ` and boundary weight `ω̄^Q` of the quasi-optimal
/// decomposition, from the `θ = 0` optimum `ω̄₀` and the Lobatto weight.
pub fn quasi_optimal_weights(wbar0: f64, w_gl: f64, theta: f64) -> (f64, f64) {
    let t = theta.abs();
    let d = wbar0 * t + w_gl * (1.0 - t);
    (wbar0 * t / d, wbar0 * w_gl / d)
}

/// Boundary weight `ω̄^Q` of the quasi-optimal decomposition (no nodes).
pub fn quasi_optimal_boundary_weight(k: usize, wbar0: f64, theta: f64) -> f64 {
    quasi_optimal_weights(wbar0, lobatto_end_weight(k), theta).1
}

/// Quasi-optimal decomposition: `τ·OCAD(θ=−1) + (1−τ)·OCAD(θ=0)`, reflected
/// for `θ > 0`.
pub fn quasi_optimal(k: usize, theta: f64) -> Result<SymmetricCAD> {
    let zero = optimal_theta0(k)?;
    quasi_optimal_from(k, theta, &zero)
}

/// Quasi-optimal decomposition from a precomputed `θ = 0` optimum.
pub fn quasi_optimal_from(k: usize, theta: f64, zero: &SymmetricCAD) -> Result<SymmetricCAD> {
    check_theta(theta)?;
    let minus_one = ocad_pk_theta_pm1(k, -1)?.0;
    let (tau, wq) = quasi_optimal_weights(zero.boundary_weight, minus_one.boundary_weight, theta);
    let mut zero = zero.clone();
    zero.space = SpaceId::p(k);
    let mut cad = convex_combine_symmetric(&minus_one, &zero, tau, Provenance::QuasiOptimal)?;
    // Pin the exact closed-form values against combination rounding.
    cad.boundary_weight = wq;
    cad.theta = -theta.abs();
    Ok(orient(cad, theta))
}

/// Build a decomposition by family/kind and run the feasibility check.
pub fn build_checked(
    space: SpaceId,
    theta: f64,
    kind: Provenance,
    tol: f64,
) -> Result<SymmetricCAD> {
    use crate::polyspace::Family;
    let cad = match (space.family, kind) {
        (_, Provenance::Classic) => classic_2d(space, theta)?,
        (Family::Q, Provenance::Optimal | Provenance::QuasiOptimal) => {
            let mut c = ocad_qk(space.degree, theta)?.0;
            c.provenance = kind;
            c
        }
        (Family::P, Provenance::Optimal) => optimal(space.degree, theta)?,
        (Family::P, Provenance::QuasiOptimal) => quasi_optimal(space.degree, theta)?,
        (_, other) => {
            return Err(OcadError::Unsupported(format!(
                "cannot build a '{}' decomposition; choose classic, optimal or quasi",
                other.as_str()
            )))
        }
    };
    let report = verify_feasibility(&cad, tol);
    if !report.feasible() {
        return Err(OcadError::SelfCheck(format!(
            "{space} {} decomposition at theta = {theta} failed verification (residual {:e})",
            kind.as_str(),
            report.max_residual
        )));
    }
    Ok(cad)
}
