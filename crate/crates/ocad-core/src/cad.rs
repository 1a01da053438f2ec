//! Cell average decompositions (CADs).
//!
//! A 2D CAD writes the cell mean of every polynomial of a space as
//!
//! ```text
//! ⟨p⟩_Ω = ω1⁻⟨p⟩^{-x} + ω1⁺⟨p⟩^{+x} + ω2⁻⟨p⟩^{-y} + ω2⁺⟨p⟩^{+y} + Σ ω_s p(x_s, y_s)
//! ```
//!
//! with nonnegative boundary weights, positive internal weights and internal
//! nodes inside the closed reference cell ([`GeneralCAD`]). The symmetric
//! form ([`SymmetricCAD`]) uses a single boundary weight `ω̄` split by the
//! anisotropy parameter `θ`,
//!
//! ```text
//! ⟨p⟩_Ω = ω̄[(1+θ)⟨p⟩^x + (1−θ)⟨p⟩^y] + Σ ω_s · (orbit average of p)
//! ```
//!
//! so that `ω1± = ω̄(1+θ)/2`, `ω2± = ω̄(1−θ)/2` and `2ω̄ + Σ ω_s = 1`.
//! The boundary weight directly scales the bound-preserving time step
//! ([`bp_cfl_dt`]).

use serde::{Deserialize, Serialize};

use crate::error::{OcadError, Result};
use crate::polyspace::{
    monomial_basis, orbit_average, powi, Face, Family, OrbitKind, Polynomial2D, SpaceId,
    SymOrbit,
};

/// Default feasibility tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Coordinates closer than this to zero (or to each other) are merged when
/// an orbit is expanded into points.
pub const MERGE_TOL: f64 = 1e-14;

/// Where a decomposition came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Classic,
    Optimal,
    QuasiOptimal,
    Numeric,
    User,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Classic => "classic",
            Provenance::Optimal => "optimal",
            Provenance::QuasiOptimal => "quasi_optimal",
            Provenance::Numeric => "numeric",
            Provenance::User => "user",
        }
    }
}

/// Symmetric CAD on the reference cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricCAD {
    pub space: SpaceId,
    pub theta: f64,
    pub boundary_weight: f64,
    pub orbits: Vec<SymOrbit>,
    pub provenance: Provenance,
}

/// An internal point with its weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedNode {
    pub x: f64,
    pub y: f64,
    pub weight: f64,
}

/// General (not necessarily symmetric) 2D CAD.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralCAD {
    pub space: SpaceId,
    /// `(ω1⁻, ω1⁺, ω2⁻, ω2⁺)` for the faces `x=-1, x=+1, y=-1, y=+1`.
    pub boundary_weights: [f64; 4],
    pub internal: Vec<WeightedNode>,
}

/// One-dimensional CAD: `mean(p) = ω⁻p(−1) + ω⁺p(1) + Σ w_s p(x_s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CAD1D {
    pub degree: usize,
    pub boundary: (f64, f64),
    pub internal: Vec<(f64, f64)>,
}

/// Outcome of a feasibility check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityReport {
    /// `max_b |⟨b⟩_Ω − decomposition(b)|` over the full monomial basis.
    pub max_residual: f64,
    /// All weights positive (boundary weights nonnegative) and summing to one.
    pub weight_ok: bool,
    /// All internal nodes inside the closed cell.
    pub nodes_ok: bool,
    /// Tolerance used.
    pub tol: f64,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        self.max_residual <= self.tol && self.weight_ok && self.nodes_ok
    }
}

impl SymmetricCAD {
    /// Build, dropping zero-weight orbits.
    pub fn new(
        space: SpaceId,
        theta: f64,
        boundary_weight: f64,
        orbits: Vec<SymOrbit>,
        provenance: Provenance,
    ) -> Self {
        let orbits = orbits.into_iter().filter(|o| o.weight != 0.0).collect();
        Self {
            space,
            theta,
            boundary_weight,
            orbits,
            provenance,
        }
    }

    /// Apply the decomposition to `p` in symmetric form.
    pub fn apply(&self, p: &Polynomial2D) -> f64 {
        let b = self.boundary_weight
            * ((1.0 + self.theta) * p.face_average_x() + (1.0 - self.theta) * p.face_average_y());
        b + self
            .orbits
            .iter()
            .map(|o| o.weight * orbit_average(p, o))
            .sum::<f64>()
    }

    /// `2ω̄ + Σ ω_s`.
    pub fn total_weight(&self) -> f64 {
        2.0 * self.boundary_weight + self.orbits.iter().map(|o| o.weight).sum::<f64>()
    }

    /// Boundary weights `(ω1⁻, ω1⁺, ω2⁻, ω2⁺)`.
    pub fn boundary_weights(&self) -> [f64; 4] {
        let w1 = 0.5 * self.boundary_weight * (1.0 + self.theta);
        let w2 = 0.5 * self.boundary_weight * (1.0 - self.theta);
        [w1, w1, w2, w2]
    }

    /// Internal weight `1 − 2ω̄`.
    pub fn internal_weight(&self) -> f64 {
        self.orbits.iter().map(|o| o.weight).sum()
    }
}

/// Distinct images of an orbit point; each receives an equal share.
pub fn orbit_points(o: &SymOrbit) -> Vec<(f64, f64)> {
    let snap = |v: f64| if v.abs() <= MERGE_TOL { 0.0 } else { v };
    let (x, y) = (snap(o.x), snap(o.y));
    let mut seeds = vec![(x, y)];
    if o.kind == OrbitKind::Full {
        seeds.push((y, x));
    }
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(8);
    for (a, b) in seeds {
        for (sa, sb) in [(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)] {
            let p = (sa * a, sb * b);
            let dup = pts
                .iter()
                .any(|q| (q.0 - p.0).abs() <= MERGE_TOL && (q.1 - p.1).abs() <= MERGE_TOL);
            if !dup {
                pts.push(p);
            }
        }
    }
    pts
}

/// Expand a symmetric CAD into its general form.
///
/// Orbits touching an axis or the origin produce fewer, merged points.
pub fn expand(cad: &SymmetricCAD) -> GeneralCAD {
    let mut internal = Vec::new();
    for o in &cad.orbits {
        let pts = orbit_points(o);
        let w = o.weight / pts.len() as f64;
        internal.extend(pts.into_iter().map(|(x, y)| WeightedNode { x, y, weight: w }));
    }
    GeneralCAD {
        space: cad.space,
        boundary_weights: cad.boundary_weights(),
        internal,
    }
}

impl GeneralCAD {
    /// Apply the decomposition to `p`.
    pub fn apply(&self, p: &Polynomial2D) -> f64 {
        let [a, b, c, d] = self.boundary_weights;
        let boundary = a * p.face_mean(Face::Left)
            + b * p.face_mean(Face::Right)
            + c * p.face_mean(Face::Bottom)
            + d * p.face_mean(Face::Top);
        boundary
            + self
                .internal
                .iter()
                .map(|n| n.weight * p.eval(n.x, n.y))
                .sum::<f64>()
    }

    pub fn total_weight(&self) -> f64 {
        self.boundary_weights.iter().sum::<f64>()
            + self.internal.iter().map(|n| n.weight).sum::<f64>()
    }
}

impl CAD1D {
    /// Apply to a monomial `x^m`.
    pub fn apply_power(&self, m: usize) -> f64 {
        self.boundary.0 * powi(-1.0, m)
            + self.boundary.1
            + self
                .internal
                .iter()
                .map(|&(x, w)| w * powi(x, m))
                .sum::<f64>()
    }
}

/// Anything that can be checked for feasibility.
pub trait Feasibility {
    fn feasibility(&self, tol: f64) -> FeasibilityReport;
}

fn weight_sum_ok(total: f64, tol: f64) -> bool {
    (total - 1.0).abs() <= tol.max(1e-14)
}

impl Feasibility for GeneralCAD {
    fn feasibility(&self, tol: f64) -> FeasibilityReport {
        let max_residual = monomial_basis(self.space)
            .iter()
            .map(|b| (b.cell_average() - self.apply(b)).abs())
            .fold(0.0, f64::max);
        let weight_ok = self.boundary_weights.iter().all(|&w| w >= 0.0)
            && self.internal.iter().all(|n| n.weight > 0.0)
            && weight_sum_ok(self.total_weight(), tol);
        let nodes_ok = self
            .internal
            .iter()
            .all(|n| n.x.abs() <= 1.0 && n.y.abs() <= 1.0 && n.x.is_finite() && n.y.is_finite());
        FeasibilityReport {
            max_residual,
            weight_ok,
            nodes_ok,
            tol,
        }
    }
}

impl Feasibility for SymmetricCAD {
    /// Checks the **full** monomial basis of the space (not only the
    /// invariant subspace), in symmetric form.
    fn feasibility(&self, tol: f64) -> FeasibilityReport {
        let max_residual = monomial_basis(self.space)
            .iter()
            .map(|b| (b.cell_average() - self.apply(b)).abs())
            .fold(0.0, f64::max);
        let weight_ok = self.boundary_weight > 0.0
            && self.theta.abs() <= 1.0
            && self.orbits.iter().all(|o| o.weight > 0.0)
            && weight_sum_ok(self.total_weight(), tol);
        let nodes_ok = self
            .orbits
            .iter()
            .all(|o| (0.0..=1.0).contains(&o.x) && (0.0..=1.0).contains(&o.y));
        FeasibilityReport {
            max_residual,
            weight_ok,
            nodes_ok,
            tol,
        }
    }
}

impl Feasibility for CAD1D {
    fn feasibility(&self, tol: f64) -> FeasibilityReport {
        let max_residual = (0..=self.degree)
            .map(|m| (crate::polyspace::interval_mean_power(m) - self.apply_power(m)).abs())
            .fold(0.0, f64::max);
        let total = self.boundary.0
            + self.boundary.1
            + self.internal.iter().map(|&(_, w)| w).sum::<f64>();
        let weight_ok = self.boundary.0 > 0.0
            && self.boundary.1 > 0.0
            && self.internal.iter().all(|&(_, w)| w > 0.0)
            && weight_sum_ok(total, tol);
        let nodes_ok = self.internal.iter().all(|&(x, _)| x.abs() <= 1.0);
        FeasibilityReport {
            max_residual,
            weight_ok,
            nodes_ok,
            tol,
        }
    }
}

/// Feasibility check over the full monomial basis.
pub fn verify_feasibility<C: Feasibility + ?Sized>(cad: &C, tol: f64) -> FeasibilityReport {
    cad.feasibility(tol)
}

/// The CAD for `−θ`: swap every orbit's coordinates.
pub fn reflect_theta(cad: &SymmetricCAD) -> SymmetricCAD {
    SymmetricCAD {
        space: cad.space,
        theta: -cad.theta,
        boundary_weight: cad.boundary_weight,
        orbits: cad.orbits.iter().map(SymOrbit::swapped).collect(),
        provenance: cad.provenance,
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) || !lambda.is_finite() {
        return Err(OcadError::InvalidArgument(format!(
            "convex combination parameter {lambda} outside [0, 1]"
        )));
    }
    Ok(())
}

/// `λ·a + (1−λ)·b` for general CADs.
pub fn convex_combine(a: &GeneralCAD, b: &GeneralCAD, lambda: f64) -> Result<GeneralCAD> {
    check_lambda(lambda)?;
    if a.space != b.space {
        return Err(OcadError::Incompatible(format!(
            "{} vs {}",
            a.space, b.space
        )));
    }
    let mut bw = [0.0; 4];
    for (i, w) in bw.iter_mut().enumerate() {
        *w = lambda * a.boundary_weights[i] + (1.0 - lambda) * b.boundary_weights[i];
    }
    let mut internal = Vec::with_capacity(a.internal.len() + b.internal.len());
    if lambda > 0.0 {
        internal.extend(a.internal.iter().map(|n| WeightedNode {
            weight: lambda * n.weight,
            ..*n
        }));
    }
    if lambda < 1.0 {
        internal.extend(b.internal.iter().map(|n| WeightedNode {
            weight: (1.0 - lambda) * n.weight,
            ..*n
        }));
    }
    Ok(GeneralCAD {
        space: a.space,
        boundary_weights: bw,
        internal,
    })
}

/// `λ·a + (1−λ)·b` for symmetric CADs, staying in symmetric form.
///
/// The result has `ω̄ = λω̄_a + (1−λ)ω̄_b` and
/// `θ = (λω̄_aθ_a + (1−λ)ω̄_bθ_b)/ω̄`, which reproduces the combined face
/// weights exactly. Orbit lists are concatenated with scaled weights.
pub fn convex_combine_symmetric(
    a: &SymmetricCAD,
    b: &SymmetricCAD,
    lambda: f64,
    provenance: Provenance,
) -> Result<SymmetricCAD> {
    check_lambda(lambda)?;
    if a.space != b.space {
        return Err(OcadError::Incompatible(format!(
            "{} vs {}",
            a.space, b.space
        )));
    }
    if lambda == 1.0 {
        return Ok(SymmetricCAD {
            provenance,
            ..a.clone()
        });
    }
    if lambda == 0.0 {
        return Ok(SymmetricCAD {
            provenance,
            ..b.clone()
        });
    }
    let wa = lambda * a.boundary_weight;
    let wb = (1.0 - lambda) * b.boundary_weight;
    let w = wa + wb;
    let theta = ((wa * a.theta + wb * b.theta) / w).clamp(-1.0, 1.0);
    let mut orbits: Vec<SymOrbit> = a
        .orbits
        .iter()
        .map(|o| SymOrbit {
            weight: lambda * o.weight,
            ..*o
        })
        .collect();
    orbits.extend(b.orbits.iter().map(|o| SymOrbit {
        weight: (1.0 - lambda) * o.weight,
        ..*o
    }));
    Ok(SymmetricCAD::new(a.space, theta, w, orbits, provenance))
}

/// A CAD transferred to a physical cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalCAD {
    pub center: (f64, f64),
    pub dx: f64,
    pub dy: f64,
    pub boundary_weights: [f64; 4],
    pub internal: Vec<WeightedNode>,
}

/// Map the reference nodes affinely onto the cell with the given centre
/// and sizes; weights are unchanged.
pub fn to_physical(cad: &GeneralCAD, dx: f64, dy: f64, center: (f64, f64)) -> Result<PhysicalCAD> {
    if dx <= 0.0 || dy <= 0.0 {
        return Err(OcadError::InvalidArgument(
            "cell sizes must be positive".into(),
        ));
    }
    let internal = cad
        .internal
        .iter()
        .map(|n| WeightedNode {
            x: center.0 + 0.5 * dx * n.x,
            y: center.1 + 0.5 * dy * n.y,
            weight: n.weight,
        })
        .collect();
    Ok(PhysicalCAD {
        center,
        dx,
        dy,
        boundary_weights: cad.boundary_weights,
        internal,
    })
}

/// Bound-preserving time step `Δt = c0·ω̄ / (a1/Δx + a2/Δy)`.
pub fn bp_cfl_dt(cad: &SymmetricCAD, a1: f64, a2: f64, dx: f64, dy: f64, c0: f64) -> Result<f64> {
    let rate = a1.max(0.0) / dx + a2.max(0.0) / dy;
    if rate <= 0.0 {
        return Err(OcadError::UnboundedStep);
    }
    Ok(c0 * cad.boundary_weight / rate)
}

/// Bound-preserving time step of a general CAD:
/// `Δt = c0 · min{ω1∓Δx/a1, ω2∓Δy/a2}` (terms with zero speed are skipped).
pub fn bp_cfl_dt_general(cad: &GeneralCAD, a1: f64, a2: f64, dx: f64, dy: f64, c0: f64) -> Result<f64> {
    let [w1m, w1p, w2m, w2p] = cad.boundary_weights;
    let mut g = f64::INFINITY;
    if a1 > 0.0 {
        g = g.min(w1m.min(w1p) * dx / a1);
    }
    if a2 > 0.0 {
        g = g.min(w2m.min(w2p) * dy / a2);
    }
    if g.is_infinite() {
        return Err(OcadError::UnboundedStep);
    }
    Ok(c0 * g)
}

/// Anisotropy `θ = (a1/Δx − a2/Δy)/(a1/Δx + a2/Δy)`.
pub fn theta_of(a1: f64, a2: f64, dx: f64, dy: f64) -> Result<f64> {
    let (r1, r2) = (a1 / dx, a2 / dy);
    let s = r1 + r2;
    if s <= 0.0 || !s.is_finite() {
        return Err(OcadError::DegenerateAnisotropy);
    }
    Ok(((r1 - r2) / s).clamp(-1.0, 1.0))
}

// ---------------------------------------------------------------------------
// JSON interchange
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct SpaceJson {
    family: Family,
    degree: usize,
}

#[derive(Serialize, Deserialize)]
struct CadJson {
    space: SpaceJson,
    theta: f64,
    boundary_weight: f64,
    orbits: Vec<SymOrbit>,
    provenance: Provenance,
}

/// Format a float with 17 significant digits as a JSON number.
fn f17(v: f64) -> String {
    format!("{v:.16e}")
}

impl SymmetricCAD {
    /// Serialise to the JSON interchange format (17 significant digits).
    pub fn to_json(&self) -> String {
        let fam = match self.space.family {
            Family::P => "P",
            Family::Q => "Q",
        };
        let mut s = String::new();
        s.push_str("{\n");
        s.push_str(&format!(
            "  \"space\": {{\"family\": \"{fam}\", \"degree\": {}}},\n",
            self.space.degree
        ));
        s.push_str(&format!("  \"theta\": {},\n", f17(self.theta)));
        s.push_str(&format!(
            "  \"boundary_weight\": {},\n",
            f17(self.boundary_weight)
        ));
        s.push_str("  \"orbits\": [");
        for (i, o) in self.orbits.iter().enumerate() {
            let kind = match o.kind {
                OrbitKind::Reflections => "gs",
                OrbitKind::Full => "gf",
            };
            s.push_str(if i == 0 { "\n" } else { ",\n" });
            s.push_str(&format!(
                "    {{\"x\": {}, \"y\": {}, \"weight\": {}, \"kind\": \"{kind}\"}}",
                f17(o.x),
                f17(o.y),
                f17(o.weight)
            ));
        }
        if !self.orbits.is_empty() {
            s.push_str("\n  ");
        }
        s.push_str("],\n");
        s.push_str(&format!(
            "  \"provenance\": \"{}\"\n",
            self.provenance.as_str()
        ));
        s.push_str("}\n");
        s
    }

    /// Parse the JSON interchange format.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: CadJson = serde_json::from_str(text)?;
        if raw.orbits.iter().any(|o| o.weight <= 0.0) {
            return Err(OcadError::Format(
                "orbit weights must be positive".into(),
            ));
        }
        Ok(SymmetricCAD {
            space: SpaceId {
                family: raw.space.family,
                degree: raw.space.degree,
            },
            theta: raw.theta,
            boundary_weight: raw.boundary_weight,
            orbits: raw.orbits,
            provenance: raw.provenance,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p2_theta0() -> SymmetricCAD {
        SymmetricCAD::new(
            SpaceId::p(2),
            0.0,
            0.25,
            vec![SymOrbit::new(0.0, 0.0, 0.5, OrbitKind::Full)],
            Provenance::Optimal,
        )
    }

    #[test]
    fn expand_origin_orbit() {
        let g = expand(&p2_theta0());
        assert_eq!(g.boundary_weights, [0.125; 4]);
        assert_eq!(g.internal.len(), 1);
        assert_eq!(g.internal[0].weight, 0.5);
    }

    #[test]
    fn expand_axis_orbit() {
        let o = SymOrbit::new(0.4, 0.0, 0.6, OrbitKind::Reflections);
        let pts = orbit_points(&o);
        assert_eq!(pts.len(), 2);
        let g = expand(&SymmetricCAD::new(
            SpaceId::p(2),
            1.0,
            0.2,
            vec![o],
            Provenance::User,
        ));
        assert!(g.internal.iter().all(|n| n.weight == 0.3));
        assert_eq!(g.boundary_weights[2], 0.0);
        assert_eq!(g.boundary_weights[3], 0.0);
    }

    #[test]
    fn full_orbit_point_counts() {
        assert_eq!(orbit_points(&SymOrbit::new(0.3, 0.3, 1.0, OrbitKind::Full)).len(), 4);
        assert_eq!(orbit_points(&SymOrbit::new(0.3, 0.0, 1.0, OrbitKind::Full)).len(), 4);
        assert_eq!(orbit_points(&SymOrbit::new(0.3, 0.7, 1.0, OrbitKind::Full)).len(), 8);
    }

    #[test]
    fn perturbed_boundary_weight_is_flagged() {
        let mut cad = p2_theta0();
        assert!(verify_feasibility(&cad, 1e-13).feasible());
        cad.boundary_weight += 1e-3;
        let r = verify_feasibility(&cad, DEFAULT_TOL);
        assert!(r.max_residual >= 1e-4);
        assert!(!r.feasible());
    }

    #[test]
    fn theta_and_time_step() {
        assert_eq!(theta_of(1.0, 1.0, 0.1, 0.1).unwrap(), 0.0);
        assert_eq!(theta_of(1.0, 0.0, 0.1, 0.1).unwrap(), 1.0);
        assert!((theta_of(1.0, 3.0, 1.0, 1.0).unwrap() + 0.5).abs() < 1e-15);
        assert!(theta_of(0.0, 0.0, 1.0, 1.0).is_err());
        let dt = bp_cfl_dt(&p2_theta0(), 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!((dt - 0.125).abs() < 1e-15);
        assert!(bp_cfl_dt(&p2_theta0(), 0.0, 0.0, 1.0, 1.0, 1.0).is_err());
        let g = expand(&p2_theta0());
        let dtg = bp_cfl_dt_general(&g, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!((dtg - dt).abs() < 1e-15);
    }

    #[test]
    fn physical_transfer() {
        let g = expand(&SymmetricCAD::new(
            SpaceId::p(2),
            0.0,
            0.25,
            vec![SymOrbit::new(1.0, 1.0, 0.5, OrbitKind::Reflections)],
            Provenance::User,
        ));
        let ph = to_physical(&g, 0.2, 0.4, (1.0, 2.0)).unwrap();
        let corner = ph
            .internal
            .iter()
            .find(|n| n.x > 1.0 && n.y > 2.0)
            .unwrap();
        assert!((corner.x - 1.1).abs() < 1e-15 && (corner.y - 2.2).abs() < 1e-15);
        assert!(ph.internal.iter().zip(&g.internal).all(|(a, b)| a.weight == b.weight));
        let c = to_physical(&expand(&p2_theta0()), 0.2, 0.4, (1.0, 2.0)).unwrap();
        assert_eq!((c.internal[0].x, c.internal[0].y), (1.0, 2.0));
    }

    #[test]
    fn json_round_trip() {
        let cad = SymmetricCAD::new(
            SpaceId::p(4),
            -0.3,
            0.1234567890123456789,
            vec![
                SymOrbit::new(0.1, 0.7, 0.3, OrbitKind::Reflections),
                SymOrbit::new(0.5, 0.5, 0.4530864, OrbitKind::Full),
            ],
            Provenance::Optimal,
        );
        let back = SymmetricCAD::from_json(&cad.to_json()).unwrap();
        assert_eq!(back, cad);
    }

    #[test]
    fn lambda_outside_unit_interval_is_rejected() {
        let g = expand(&p2_theta0());
        assert!(convex_combine(&g, &g, 1.5).is_err());
        assert!(convex_combine(&g, &g, -0.1).is_err());
    }
}
