//! Bound-preserving scaling limiters and a TVB minmod troubled-cell limiter.
//!
//! The scaling limiters replace the cell polynomial `p` by
//! `p̃ = δ(p − ū) + ū`, which keeps the cell average and, for `δ ∈ [0,1]`,
//! pulls every point value towards it. The check points are the face
//! Gauss points plus either the expanded internal nodes of the CAD
//! ("full") or the single value
//! `Π = (ū − Σ_f ω_f ⟨p⟩_f) / (1 − Σ_f ω_f)` implied by the CAD
//! ("simplified").

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cad::{expand, SymmetricCAD};
use crate::dg_solver::basis::ModalBasis;
use crate::dg_solver::dense::{gemm, BLOCK};
use crate::dg_solver::field::DGField;
use crate::dg_solver::mesh::{Mesh2D, Side};
use crate::dg_solver::problem::{internal_energy, State};
use crate::error::{OcadError, Result};

/// Slack allowed for cell averages outside the invariant region.
pub const MEAN_TOL: f64 = 1e-12;

/// Round-off guard of the Euler limiter, `ε = min{1e−13, value}`.
pub const EULER_EPS: f64 = 1e-13;

/// Internal weight below which `Π` is not used (the CAD is purely
/// boundary-based, as for `P¹`).
const PI_MIN_WEIGHT: f64 = 1e-14;

/// Which check points the scaling limiter uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimiterMode {
    /// Face Gauss points and all internal CAD nodes.
    Full,
    /// Face Gauss points and the CAD-implied value `Π`.
    Simplified,
    /// No limiting; statistics are still collected.
    Off,
}

/// Check points of the scaling limiter for one CAD.
#[derive(Debug, Clone)]
pub struct CheckSet {
    pub mode: LimiterMode,
    /// CAD boundary weights `[left, right, bottom, top]`.
    pub boundary_weights: [f64; 4],
    /// `1 − Σ_f ω_f`.
    pub interior_weight: f64,
    /// Basis values at the internal nodes, `[node][mode]` (full mode only).
    pub interior_phi: Vec<f64>,
    pub n_interior: usize,
    /// Linear functionals giving every check value from the modal
    /// coefficients, `[point][mode]`: face points, then internal nodes
    /// (full) or `Π` (simplified).
    pub table: Vec<f64>,
    pub n_points: usize,
}

impl CheckSet {
    pub fn new(cad: &SymmetricCAD, basis: &ModalBasis, mode: LimiterMode) -> Self {
        let boundary_weights = cad.boundary_weights();
        let interior_weight = 1.0 - boundary_weights.iter().sum::<f64>();
        let (interior_phi, n_interior) = if mode == LimiterMode::Full {
            let general = expand(cad);
            let phi: Vec<f64> = general
                .internal
                .iter()
                .flat_map(|n| basis.eval(n.x, n.y))
                .collect();
            (phi, general.internal.len())
        } else {
            (Vec::new(), 0)
        };
        let n = basis.n_modes();
        let nq = basis.n_face();
        let mut table = basis.face_phi_all.clone();
        match mode {
            LimiterMode::Full => table.extend_from_slice(&interior_phi),
            _ if interior_weight > PI_MIN_WEIGHT => {
                // Π = (c_0 − Σ_f ω_f Σ_q w_q p(f,q)) / (1 − Σ_f ω_f).
                let mut pi = vec![0.0; n];
                pi[0] = 1.0;
                for (fq, row) in basis.face_lift.chunks_exact(n).enumerate() {
                    let w = boundary_weights[fq / nq];
                    for (p, v) in pi.iter_mut().zip(row) {
                        *p -= w * v;
                    }
                }
                table.extend(pi.iter().map(|p| p / interior_weight));
            }
            _ => {}
        }
        let n_points = table.len() / n;
        Self {
            mode,
            boundary_weights,
            interior_weight,
            interior_phi,
            n_interior,
            table,
            n_points,
        }
    }

    /// Check values of a block of cells, `[comp][cell][point]`.
    fn block_values(&self, coeffs: &[f64], nb: usize, m: usize, n: usize) -> Vec<f64> {
        let stride = m * n;
        let np = self.n_points;
        let mut out = vec![0.0; m * nb * np];
        for (comp, oc) in out.chunks_exact_mut(nb * np).enumerate() {
            gemm((nb, n, np), 1.0, (&coeffs[comp * n..], stride, 1), (&self.table, 1, n), 0.0, (oc, np, 1));
        }
        out
    }

    /// Whether `Π` is defined (the CAD has internal weight).
    fn has_pi(&self) -> bool {
        self.interior_weight > PI_MIN_WEIGHT
    }

    /// States at every check point of one cell, by direct evaluation
    /// (reference path for the table-based kernels).
    pub fn states(&self, basis: &ModalBasis, coeffs: &[f64], m: usize, out: &mut Vec<State>) {
        out.clear();
        let n = basis.n_modes();
        let nq = basis.n_face();
        let mut face_means = [[0.0; 4]; 4];
        for (f, fm) in face_means.iter_mut().enumerate() {
            for q in 0..nq {
                let phi = &basis.face_phi[f][q * n..(q + 1) * n];
                let mut s = [0.0; 4];
                for comp in 0..m {
                    s[comp] = ModalBasis::combine(&coeffs[comp * n..(comp + 1) * n], phi);
                    fm[comp] += basis.face_weights[q] * s[comp];
                }
                out.push(s);
            }
        }
        match self.mode {
            LimiterMode::Full => {
                for node in 0..self.n_interior {
                    let phi = &self.interior_phi[node * n..(node + 1) * n];
                    let mut s = [0.0; 4];
                    for comp in 0..m {
                        s[comp] = ModalBasis::combine(&coeffs[comp * n..(comp + 1) * n], phi);
                    }
                    out.push(s);
                }
            }
            LimiterMode::Simplified | LimiterMode::Off if self.has_pi() => {
                let mut pi = [0.0; 4];
                for comp in 0..m {
                    let boundary: f64 = (0..4)
                        .map(|f| self.boundary_weights[f] * face_means[f][comp])
                        .sum();
                    pi[comp] = (coeffs[comp * n] - boundary) / self.interior_weight;
                }
                out.push(pi);
            }
            _ => {}
        }
    }
}

/// Extremes seen by a limiter pass (after limiting).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimiterStats {
    /// Cells whose polynomial was modified.
    pub limited_cells: usize,
    /// Smallest / largest check-point value of the first component.
    pub min_point: f64,
    pub max_point: f64,
    /// Smallest / largest cell average of the first component.
    pub min_mean: f64,
    pub max_mean: f64,
    /// Smallest internal energy at a check point (Euler only).
    pub min_internal_energy: f64,
    /// Smallest internal energy of a cell average (Euler only).
    pub min_mean_internal_energy: f64,
}

impl Default for LimiterStats {
    fn default() -> Self {
        Self {
            limited_cells: 0,
            min_point: f64::INFINITY,
            max_point: f64::NEG_INFINITY,
            min_mean: f64::INFINITY,
            max_mean: f64::NEG_INFINITY,
            min_internal_energy: f64::INFINITY,
            min_mean_internal_energy: f64::INFINITY,
        }
    }
}

impl LimiterStats {
    pub fn merge(&mut self, o: &LimiterStats) {
        self.limited_cells += o.limited_cells;
        self.min_point = self.min_point.min(o.min_point);
        self.max_point = self.max_point.max(o.max_point);
        self.min_mean = self.min_mean.min(o.min_mean);
        self.max_mean = self.max_mean.max(o.max_mean);
        self.min_internal_energy = self.min_internal_energy.min(o.min_internal_energy);
        self.min_mean_internal_energy = self.min_mean_internal_energy.min(o.min_mean_internal_energy);
    }
}

fn fold_stats(per_cell: Vec<Result<LimiterStats>>) -> Result<LimiterStats> {
    let mut total = LimiterStats::default();
    for s in per_cell {
        total.merge(&s?);
    }
    Ok(total)
}

/// Scale the non-constant modes of component `comp` by `delta`.
fn scale_modes(coeffs: &mut [f64], n: usize, comp: usize, delta: f64) {
    for v in &mut coeffs[comp * n + 1..(comp + 1) * n] {
        *v *= delta;
    }
}

/// Scalar bound-preserving limiter enforcing `[umin, umax]` at the check
/// points. With [`LimiterMode::Off`] the field is left untouched and only
/// the statistics are gathered.
pub fn bp_limit_scalar(
    field: &mut DGField,
    basis: &ModalBasis,
    check: &CheckSet,
    umin: f64,
    umax: f64,
) -> Result<LimiterStats> {
    let n = basis.n_modes();
    let stride = field.stride();
    let np = check.n_points;
    let active = check.mode != LimiterMode::Off;
    let per_block: Vec<Result<LimiterStats>> = field
        .data
        .par_chunks_mut(BLOCK * stride)
        .enumerate()
        .map(|(blk, coeffs)| {
            let nb = coeffs.len() / stride;
            let vals = check.block_values(coeffs, nb, 1, n);
            let mut st = LimiterStats::default();
            for (i, (cc, v)) in coeffs.chunks_exact_mut(stride).zip(vals.chunks_exact(np)).enumerate() {
                let mean = cc[0];
                if active && !(mean >= umin - MEAN_TOL && mean <= umax + MEAN_TOL) {
                    return Err(OcadError::InvariantViolation {
                        cell: blk * BLOCK + i,
                        detail: format!("cell average {mean:e} outside [{umin}, {umax}]"),
                    });
                }
                let (lo, hi) = v
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
                let mut delta: f64 = 1.0;
                if active {
                    if hi > umax {
                        delta = delta.min((umax - mean) / (hi - mean));
                    }
                    if lo < umin {
                        delta = delta.min((mean - umin) / (mean - lo));
                    }
                    delta = delta.clamp(0.0, 1.0);
                }
                if delta < 1.0 {
                    scale_modes(cc, n, 0, delta);
                    st.limited_cells += 1;
                }
                st.min_mean = st.min_mean.min(mean);
                st.max_mean = st.max_mean.max(mean);
                st.min_point = st.min_point.min(mean + delta * (lo - mean));
                st.max_point = st.max_point.max(mean + delta * (hi - mean));
            }
            Ok(st)
        })
        .collect();
    fold_stats(per_block)
}

/// Two-stage positivity limiter for the Euler equations: first the
/// density is scaled towards its mean until its minimum at the check
/// points is at least `ε1`, then the whole state until the internal energy
/// is at least `ε2`. Each stage is applied only when its quantity dips
/// below the threshold.
pub fn bp_limit_euler(field: &mut DGField, basis: &ModalBasis, check: &CheckSet) -> Result<LimiterStats> {
    let n = basis.n_modes();
    let stride = field.stride();
    let np = check.n_points;
    let active = check.mode != LimiterMode::Off;
    let per_block: Vec<Result<LimiterStats>> = field
        .data
        .par_chunks_mut(BLOCK * stride)
        .enumerate()
        .map(|(blk, coeffs)| {
            let nb = coeffs.len() / stride;
            let vals = check.block_values(coeffs, nb, 4, n);
            let mut st = LimiterStats::default();
            let mut pts: Vec<State> = vec![[0.0; 4]; np];
            for (i, cc) in coeffs.chunks_exact_mut(stride).enumerate() {
                let mean: State = std::array::from_fn(|comp| cc[comp * n]);
                let rho_bar = mean[0];
                let rhoe_bar = internal_energy(&mean);
                if !(rho_bar > 0.0 && rhoe_bar > 0.0) {
                    return Err(OcadError::InvariantViolation {
                        cell: blk * BLOCK + i,
                        detail: format!("cell average density {rho_bar:e}, internal energy {rhoe_bar:e}"),
                    });
                }
                for (p, s) in pts.iter_mut().enumerate() {
                    for (comp, v) in s.iter_mut().enumerate() {
                        *v = vals[(comp * nb + i) * np + p];
                    }
                }

                let rho_min = pts.iter().map(|s| s[0]).fold(f64::INFINITY, f64::min);
                let eps1 = EULER_EPS.min(rho_bar);
                let mut limited = false;
                if active && rho_min < eps1 {
                    let theta1 = ((rho_bar - eps1) / (rho_bar - rho_min)).abs().min(1.0);
                    scale_modes(cc, n, 0, theta1);
                    for s in pts.iter_mut() {
                        s[0] = rho_bar + theta1 * (s[0] - rho_bar);
                    }
                    limited = true;
                }

                let rhoe_min = pts.iter().map(internal_energy).fold(f64::INFINITY, f64::min);
                let eps2 = EULER_EPS.min(rhoe_bar);
                if active && rhoe_min < eps2 {
                    let theta2 = ((rhoe_bar - eps2) / (rhoe_bar - rhoe_min)).abs().min(1.0);
                    for comp in 0..4 {
                        scale_modes(cc, n, comp, theta2);
                    }
                    for s in pts.iter_mut() {
                        for (v, mu) in s.iter_mut().zip(&mean) {
                            *v = mu + theta2 * (*v - mu);
                        }
                    }
                    limited = true;
                }

                st.limited_cells += limited as usize;
                st.min_mean = st.min_mean.min(rho_bar);
                st.max_mean = st.max_mean.max(rho_bar);
                st.min_mean_internal_energy = st.min_mean_internal_energy.min(rhoe_bar);
                for s in &pts {
                    st.min_point = st.min_point.min(s[0]);
                    st.max_point = st.max_point.max(s[0]);
                    st.min_internal_energy = st.min_internal_energy.min(internal_energy(s));
                }
            }
            Ok(st)
        })
        .collect();
    fold_stats(per_block)
}

/// `minmod(a, b, c)`: the argument of smallest magnitude if all share a
/// sign, zero otherwise.
pub fn minmod(a: f64, b: f64, c: f64) -> f64 {
    if a > 0.0 && b > 0.0 && c > 0.0 {
        a.min(b).min(c)
    } else if a < 0.0 && b < 0.0 && c < 0.0 {
        a.max(b).max(c)
    } else {
        0.0
    }
}

/// TVB-modified minmod: returns `a` untouched when `|a| ≤ M h²`.
pub fn minmod_tvb(a: f64, b: f64, c: f64, mh2: f64) -> f64 {
    if a.abs() <= mh2 {
        a
    } else {
        minmod(a, b, c)
    }
}

/// Componentwise TVB minmod troubled-cell limiter.
///
/// A component is troubled when a face-average deviation from the mean
/// is changed by the TVB minmod against the neighbouring mean
/// differences. Troubled components are reduced to a limited linear
/// polynomial; other components are left alone. Returns the number of
/// troubled cells.
pub fn tvb_limit(field: &mut DGField, mesh: &Mesh2D, basis: &ModalBasis, tvb_m: f64) -> usize {
    let n = basis.n_modes();
    let m = field.m;
    let k = basis.k;
    if k == 0 {
        return 0;
    }
    let idx = |i: usize, j: usize| basis.modes.iter().position(|&mm| mm == (i, j)).expect("mode");
    let x_modes: Vec<(usize, f64)> = (1..=k).map(|i| (idx(i, 0), ((2 * i + 1) as f64).sqrt())).collect();
    let y_modes: Vec<(usize, f64)> = (1..=k).map(|j| (idx(0, j), ((2 * j + 1) as f64).sqrt())).collect();
    let (m10, m01) = (idx(1, 0), idx(0, 1));
    let sqrt3 = 3f64.sqrt();
    let means: Vec<State> = (0..field.n_cells).map(|c| field.mean_state(c)).collect();
    let nb_mean = |c: usize, side: Side| -> State {
        match mesh.neighbor(c, side) {
            Some(nb) => means[nb],
            None => mesh.ghost(side, &means[c]),
        }
    };
    let (mx, my) = (tvb_m * mesh.dx * mesh.dx, tvb_m * mesh.dy * mesh.dy);
    let stride = field.stride();
    let troubled: Vec<bool> = field
        .data
        .par_chunks_mut(stride)
        .enumerate()
        .map(|(c, coeffs)| {
            let u = means[c];
            let (l, r) = (nb_mean(c, Side::Left), nb_mean(c, Side::Right));
            let (b, t) = (nb_mean(c, Side::Bottom), nb_mean(c, Side::Top));
            let mut any = false;
            for comp in 0..m {
                let cc = &mut coeffs[comp * n..(comp + 1) * n];
                let (dxp, dxm) = (r[comp] - u[comp], u[comp] - l[comp]);
                let (dyp, dym) = (t[comp] - u[comp], u[comp] - b[comp]);
                let right: f64 = x_modes.iter().map(|&(md, s)| cc[md] * s).sum();
                let left: f64 = -x_modes
                    .iter()
                    .enumerate()
                    .map(|(i, &(md, s))| if i % 2 == 0 { -cc[md] * s } else { cc[md] * s })
                    .sum::<f64>();
                let top: f64 = y_modes.iter().map(|&(md, s)| cc[md] * s).sum();
                let bottom: f64 = -y_modes
                    .iter()
                    .enumerate()
                    .map(|(j, &(md, s))| if j % 2 == 0 { -cc[md] * s } else { cc[md] * s })
                    .sum::<f64>();
                let changed = |a: f64, p: f64, q: f64, h: f64| minmod_tvb(a, p, q, h) != a;
                if changed(right, dxp, dxm, mx)
                    || changed(left, dxp, dxm, mx)
                    || changed(top, dyp, dym, my)
                    || changed(bottom, dyp, dym, my)
                {
                    let sx = minmod(cc[m10] * sqrt3, dxp, dxm) / sqrt3;
                    let sy = minmod(cc[m01] * sqrt3, dyp, dym) / sqrt3;
                    for v in cc[1..].iter_mut() {
                        *v = 0.0;
                    }
                    cc[m10] = sx;
                    cc[m01] = sy;
                    any = true;
                }
            }
            any
        })
        .collect();
    troubled.iter().filter(|&&t| t).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructors::{classic_2d, optimal};
    use crate::dg_solver::field::l2_project;
    use crate::polyspace::SpaceId;

    fn sine_field(k: usize, amp: f64) -> (Mesh2D, ModalBasis, DGField) {
        let mesh = Mesh2D::periodic(6, 5, [-1.0, 1.0, -1.0, 1.0]).unwrap();
        let basis = ModalBasis::new(k).unwrap();
        let f = l2_project(
            |x, y| [amp * (3.0 * x + 2.0 * y).sin(), 0.0, 0.0, 0.0],
            &mesh,
            &basis,
            1,
        );
        (mesh, basis, f)
    }

    #[test]
    fn within_bounds_is_unchanged() {
        let (_, basis, mut f) = sine_field(2, 0.5);
        let before = f.clone();
        let cad = optimal(2, 0.0).unwrap();
        for mode in [LimiterMode::Full, LimiterMode::Simplified] {
            let check = CheckSet::new(&cad, &basis, mode);
            let st = bp_limit_scalar(&mut f, &basis, &check, -1.0, 1.0).unwrap();
            assert_eq!(st.limited_cells, 0);
            assert_eq!(f, before);
        }
    }

    #[test]
    fn limited_values_respect_bounds_and_means() {
        for k in [1, 2, 3, 4] {
            let (_, basis, mut f) = sine_field(k, 1.3);
            let cad = classic_2d(SpaceId::p(k), 0.0).unwrap();
            // Averages must be admissible; clamp them into [-1, 1].
            for c in 0..f.n_cells {
                let s = f.stride();
                f.data[c * s] = f.data[c * s].clamp(-0.99, 0.99);
            }
            let means = f.averages(0);
            for mode in [LimiterMode::Full, LimiterMode::Simplified] {
                let mut g = f.clone();
                let check = CheckSet::new(&cad, &basis, mode);
                let st = bp_limit_scalar(&mut g, &basis, &check, -1.0, 1.0).unwrap();
                assert!(st.limited_cells > 0);
                assert!(st.max_point <= 1.0 + 1e-12 && st.min_point >= -1.0 - 1e-12);
                let mut pts = Vec::new();
                for c in 0..g.n_cells {
                    check.states(&basis, g.cell(c), 1, &mut pts);
                    assert!(pts.iter().all(|s| s[0].abs() <= 1.0 + 1e-12));
                }
                assert_eq!(g.averages(0), means);
            }
        }
    }

    #[test]
    fn simplified_pi_matches_interior_average() {
        // Π is the weighted mean of the internal nodes' values.
        let (_, basis, f) = sine_field(3, 0.8);
        let cad = optimal(3, 0.4).unwrap();
        let full = CheckSet::new(&cad, &basis, LimiterMode::Full);
        let simple = CheckSet::new(&cad, &basis, LimiterMode::Simplified);
        let general = expand(&cad);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        let nf = 4 * basis.n_face();
        for c in 0..f.n_cells {
            full.states(&basis, f.cell(c), 1, &mut a);
            simple.states(&basis, f.cell(c), 1, &mut b);
            let w: f64 = general.internal.iter().map(|n| n.weight).sum();
            let avg: f64 = general
                .internal
                .iter()
                .zip(&a[nf..])
                .map(|(n, s)| n.weight * s[0])
                .sum::<f64>()
                / w;
            assert!((avg - b[nf][0]).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_mean_is_an_error() {
        let (_, basis, mut f) = sine_field(2, 0.1);
        f.data[0] = 1.5;
        let cad = optimal(2, 0.0).unwrap();
        let check = CheckSet::new(&cad, &basis, LimiterMode::Simplified);
        assert!(matches!(
            bp_limit_scalar(&mut f, &basis, &check, -1.0, 1.0),
            Err(OcadError::InvariantViolation { cell: 0, .. })
        ));
        let off = CheckSet::new(&cad, &basis, LimiterMode::Off);
        assert!(bp_limit_scalar(&mut f, &basis, &off, -1.0, 1.0).is_ok());
    }

    #[test]
    fn tvb_keeps_smooth_fields_and_means() {
        let (mesh, basis, mut f) = sine_field(2, 0.5);
        let before = f.clone();
        assert_eq!(tvb_limit(&mut f, &mesh, &basis, 1e4), 0);
        assert_eq!(f, before);
        let mut g = before.clone();
        let troubled = tvb_limit(&mut g, &mesh, &basis, 0.0);
        assert!(troubled > 0);
        assert_eq!(g.averages(0), before.averages(0));
    }

    #[test]
    fn minmod_cases() {
        assert_eq!(minmod(1.0, 2.0, 0.5), 0.5);
        assert_eq!(minmod(-1.0, -2.0, -0.5), -0.5);
        assert_eq!(minmod(1.0, -2.0, 0.5), 0.0);
        assert_eq!(minmod_tvb(0.1, -1.0, 1.0, 0.2), 0.1);
    }
}
