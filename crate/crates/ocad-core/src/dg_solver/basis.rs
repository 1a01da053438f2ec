//! Orthonormal modal basis `L̂_i(ξ) L̂_j(η)`, `i + j ≤ k`, with tabulated
//! values at the volume and face quadrature points.
//!
//! With this basis the mean over the reference cell of `φ_m φ_n` is `δ_mn`,
//! so the coefficient of the constant mode is the cell average.

use crate::error::Result;
use crate::polyspace::{legendre_orthonormal, Face, SpaceId};
use crate::quadrature::gauss;

/// Faces in tabulation order.
pub const FACES: [Face; 4] = [Face::Left, Face::Right, Face::Bottom, Face::Top];

/// Reference coordinates of the `q`-th point of a face.
pub fn face_point(face: Face, t: f64) -> (f64, f64) {
    match face {
        Face::Left => (-1.0, t),
        Face::Right => (1.0, t),
        Face::Bottom => (t, -1.0),
        Face::Top => (t, 1.0),
    }
}

/// Tabulated modal basis for `P^k`.
#[derive(Debug, Clone)]
pub struct ModalBasis {
    pub k: usize,
    pub modes: Vec<(usize, usize)>,
    /// Volume points (tensor Gauss, `(k+2)²`), normalised weights.
    pub vol_points: Vec<(f64, f64)>,
    pub vol_weights: Vec<f64>,
    /// `φ_m`, `∂_ξ φ_m`, `∂_η φ_m` at volume points, row-major `[q][m]`.
    pub vol_phi: Vec<f64>,
    pub vol_dxi: Vec<f64>,
    pub vol_deta: Vec<f64>,
    /// Face Gauss rule (`k+1` points), normalised weights.
    pub face_nodes: Vec<f64>,
    pub face_weights: Vec<f64>,
    /// `φ_m` at face points for each face in [`FACES`] order, `[face][q][m]`.
    pub face_phi: [Vec<f64>; 4],
    /// The four face tables concatenated, `[face·q][m]`.
    pub face_phi_all: Vec<f64>,
    /// Weighted derivative tables `ω_q ∂_ξφ_m`, `ω_q ∂_ηφ_m`, `[q][m]`.
    pub vol_dxi_w: Vec<f64>,
    pub vol_deta_w: Vec<f64>,
    /// Weighted face table `ω_q φ_m`, `[face·q][m]`.
    pub face_lift: Vec<f64>,
}

impl ModalBasis {
    pub fn new(k: usize) -> Result<Self> {
        Self::with_face_points(k, k + 1)
    }

    /// Basis with an explicit number of face quadrature points.
    pub fn with_face_points(k: usize, face_q: usize) -> Result<Self> {
        let modes = SpaceId::p(k).exponents();
        let vol = gauss(k + 2)?;
        let face = gauss(face_q)?;
        let mut vol_points = Vec::new();
        let mut vol_weights = Vec::new();
        for (&y, &wy) in vol.nodes.iter().zip(&vol.weights) {
            for (&x, &wx) in vol.nodes.iter().zip(&vol.weights) {
                vol_points.push((x, y));
                vol_weights.push(wx * wy);
            }
        }
        let mut basis = Self {
            k,
            modes,
            vol_points,
            vol_weights,
            vol_phi: Vec::new(),
            vol_dxi: Vec::new(),
            vol_deta: Vec::new(),
            face_nodes: face.nodes.clone(),
            face_weights: face.weights.clone(),
            face_phi: Default::default(),
            face_phi_all: Vec::new(),
            vol_dxi_w: Vec::new(),
            vol_deta_w: Vec::new(),
            face_lift: Vec::new(),
        };
        for &(x, y) in &basis.vol_points.clone() {
            let (v, dx, dy) = basis.eval_with_grad(x, y);
            basis.vol_phi.extend(v);
            basis.vol_dxi.extend(dx);
            basis.vol_deta.extend(dy);
        }
        for (f, face_kind) in FACES.iter().enumerate() {
            let mut tab = Vec::new();
            for &t in &face.nodes {
                let (x, y) = face_point(*face_kind, t);
                tab.extend(basis.eval(x, y));
            }
            basis.face_phi[f] = tab;
        }
        let n = basis.n_modes();
        for (q, &w) in basis.vol_weights.iter().enumerate() {
            let row = q * n..(q + 1) * n;
            basis.vol_dxi_w.extend(basis.vol_dxi[row.clone()].iter().map(|d| w * d));
            basis.vol_deta_w.extend(basis.vol_deta[row].iter().map(|d| w * d));
        }
        basis.face_phi_all = basis.face_phi.concat();
        let nq = basis.n_face();
        basis.face_lift = basis
            .face_phi_all
            .chunks_exact(n)
            .enumerate()
            .flat_map(|(fq, row)| {
                let w = basis.face_weights[fq % nq];
                row.iter().map(move |p| w * p)
            })
            .collect();
        Ok(basis)
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn n_face(&self) -> usize {
        self.face_nodes.len()
    }

    pub fn n_vol(&self) -> usize {
        self.vol_points.len()
    }

    /// All basis values at `(ξ, η)`.
    pub fn eval(&self, x: f64, y: f64) -> Vec<f64> {
        let (lx, _) = legendre_orthonormal(self.k, x);
        let (ly, _) = legendre_orthonormal(self.k, y);
        self.modes.iter().map(|&(i, j)| lx[i] * ly[j]).collect()
    }

    /// Basis values and reference-coordinate gradients at `(ξ, η)`.
    pub fn eval_with_grad(&self, x: f64, y: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let (lx, dlx) = legendre_orthonormal(self.k, x);
        let (ly, dly) = legendre_orthonormal(self.k, y);
        let v = self.modes.iter().map(|&(i, j)| lx[i] * ly[j]).collect();
        let dx = self.modes.iter().map(|&(i, j)| dlx[i] * ly[j]).collect();
        let dy = self.modes.iter().map(|&(i, j)| lx[i] * dly[j]).collect();
        (v, dx, dy)
    }

    /// `Σ c_m φ_m` with precomputed basis values.
    #[inline]
    pub fn combine(coeffs: &[f64], phi: &[f64]) -> f64 {
        coeffs.iter().zip(phi).map(|(c, p)| c * p).sum()
    }

    /// Value of a modal polynomial at `(ξ, η)`.
    pub fn value_at(&self, coeffs: &[f64], x: f64, y: f64) -> f64 {
        Self::combine(coeffs, &self.eval(x, y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthonormal_on_volume_rule() {
        for k in 0..=5 {
            let b = ModalBasis::new(k).unwrap();
            let n = b.n_modes();
            for m1 in 0..n {
                for m2 in 0..n {
                    let g: f64 = (0..b.n_vol())
                        .map(|q| b.vol_weights[q] * b.vol_phi[q * n + m1] * b.vol_phi[q * n + m2])
                        .sum();
                    let e = if m1 == m2 { 1.0 } else { 0.0 };
                    assert!((g - e).abs() < 1e-13, "k={k} {m1} {m2}");
                }
            }
        }
    }

    #[test]
    fn face_tables_match_direct_evaluation() {
        let b = ModalBasis::new(3).unwrap();
        let n = b.n_modes();
        for (f, face) in FACES.iter().enumerate() {
            for (q, &t) in b.face_nodes.iter().enumerate() {
                let (x, y) = face_point(*face, t);
                let direct = b.eval(x, y);
                assert_eq!(&b.face_phi[f][q * n..(q + 1) * n], direct.as_slice());
            }
        }
    }
}
