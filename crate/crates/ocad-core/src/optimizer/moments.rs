//! Moment matrices of the half-degree space and the sharp bound `φ⋆`.
//!
//! For a half space `V` with basis `b`, the decomposition bound is
//! `φ⋆ = min_q ⟨q²⟩_Ω / ((1+θ)⟨q²⟩^x + (1−θ)⟨q²⟩^y)`, i.e. the reciprocal of
//! the largest eigenvalue of `M_Ω^{−1/2} M_θ M_Ω^{−1/2}`. In the orthonormal
//! tensor-Legendre basis `M_Ω = I`, so this is a plain symmetric eigenproblem.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{OcadError, Result};
use crate::polyspace::{from_legendre, Polynomial2D, SpaceId};

/// Relative eigenvalue gap under which eigenvalues count as repeated.
pub const MULTIPLICITY_GAP: f64 = 1e-8;

/// Basis in which moment matrices are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentBasis {
    /// Orthonormal `L̂_i(x) L̂_j(y)` (the default; `M_Ω = I`).
    TensorLegendre,
    /// Plain monomials `x^i y^j`.
    Monomial,
}

/// Gram matrices of the half space under the cell and face averages.
#[derive(Debug, Clone)]
pub struct MomentMatrices {
    pub half_space: SpaceId,
    pub basis: MomentBasis,
    pub m_omega: DMatrix<f64>,
    pub m_x: DMatrix<f64>,
    pub m_y: DMatrix<f64>,
    pub theta: f64,
}

impl MomentMatrices {
    /// `M_θ = (1+θ)M_x + (1−θ)M_y`.
    pub fn m_theta(&self) -> DMatrix<f64> {
        &self.m_x * (1.0 + self.theta) + &self.m_y * (1.0 - self.theta)
    }
}

/// Moment matrices of `(P^{⌊k/2⌋})` in the tensor-Legendre basis.
pub fn moment_matrices(k: usize, theta: f64) -> Result<MomentMatrices> {
    if k == 0 {
        return Err(OcadError::InvalidArgument("degree must be at least 1".into()));
    }
    moment_matrices_for(SpaceId::p(k).half(), theta, MomentBasis::TensorLegendre)
}

/// Moment matrices for an arbitrary half space and basis.
pub fn moment_matrices_for(
    half_space: SpaceId,
    theta: f64,
    basis: MomentBasis,
) -> Result<MomentMatrices> {
    if !(-1.0..=1.0).contains(&theta) {
        return Err(OcadError::InvalidArgument(format!(
            "theta = {theta} outside [-1, 1]"
        )));
    }
    let exps = half_space.exponents();
    let d = exps.len();
    let mut m_omega = DMatrix::zeros(d, d);
    let mut m_x = DMatrix::zeros(d, d);
    let mut m_y = DMatrix::zeros(d, d);
    match basis {
        MomentBasis::TensorLegendre => {
            // ⟨L̂_i L̂_i'⟩ over [-1,1] = δ; endpoint mean = √((2i+1)(2i'+1)) when
            // i + i' is even, zero otherwise.
            let end = |i: usize, j: usize| {
                if (i + j) % 2 == 0 {
                    (((2 * i + 1) * (2 * j + 1)) as f64).sqrt()
                } else {
                    0.0
                }
            };
            for (r, &(i, j)) in exps.iter().enumerate() {
                for (c, &(i2, j2)) in exps.iter().enumerate() {
                    if r == c {
                        m_omega[(r, c)] = 1.0;
                    }
                    if j == j2 {
                        m_x[(r, c)] = end(i, i2);
                    }
                    if i == i2 {
                        m_y[(r, c)] = end(j, j2);
                    }
                }
            }
        }
        MomentBasis::Monomial => {
            use crate::polyspace::{endpoint_mean_power, interval_mean_power};
            for (r, &(i, j)) in exps.iter().enumerate() {
                for (c, &(i2, j2)) in exps.iter().enumerate() {
                    let (a, b) = (i + i2, j + j2);
                    m_omega[(r, c)] = interval_mean_power(a) * interval_mean_power(b);
                    m_x[(r, c)] = endpoint_mean_power(a) * interval_mean_power(b);
                    m_y[(r, c)] = interval_mean_power(a) * endpoint_mean_power(b);
                }
            }
        }
    }
    Ok(MomentMatrices {
        half_space,
        basis,
        m_omega,
        m_x,
        m_y,
        theta,
    })
}

/// `φ⋆`, its critical polynomial `q⋆` (so that `p⋆ = q⋆²`) and the
/// multiplicity of the extreme eigenvalue.
#[derive(Debug, Clone)]
pub struct PhiStarResult {
    pub value: f64,
    pub q_star: Polynomial2D,
    pub eigen_multiplicity: usize,
}

/// `φ(p; θ) = ⟨p⟩_Ω / ((1+θ)⟨p⟩^x + (1−θ)⟨p⟩^y)`, evaluated from the exact
/// averages of `p`.
pub fn phi_of(p: &Polynomial2D, theta: f64) -> f64 {
    let denom = (1.0 + theta) * p.face_average_x() + (1.0 - theta) * p.face_average_y();
    p.cell_average() / denom
}

/// `φ⋆` for `P^k` (half space `P^{⌊k/2⌋}`).
pub fn phi_star_sq(k: usize, theta: f64) -> Result<PhiStarResult> {
    if k == 0 {
        return Err(OcadError::InvalidArgument("degree must be at least 1".into()));
    }
    phi_star_for(SpaceId::p(k), theta)
}

/// `φ⋆` for any space (`P^k` or `Q^k`): uses the half space of `space`.
pub fn phi_star_for(space: SpaceId, theta: f64) -> Result<PhiStarResult> {
    let mm = moment_matrices_for(space.half(), theta, MomentBasis::TensorLegendre)?;
    let m = mm.m_theta();
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 10_000)
        .ok_or_else(|| OcadError::Eigen("symmetric eigen-solver did not converge".into()))?;
    let (imax, &lmax) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| OcadError::Eigen("empty spectrum".into()))?;
    if !(lmax > 0.0) {
        return Err(OcadError::Eigen(format!(
            "largest eigenvalue {lmax:e} is not positive"
        )));
    }
    let cluster: Vec<usize> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| (lmax - l) <= MULTIPLICITY_GAP * lmax)
        .map(|(i, _)| i)
        .collect();
    let half = mm.half_space;
    let d = half.dim();
    let vec = if cluster.len() == 1 {
        eig.eigenvectors.column(imax).into_owned()
    } else {
        // Deterministic representative: the unit vector of the eigenspace
        // with the largest coefficient on L̂_0(x)L̂_h(y) (highest y-power).
        let h = half.max_single_degree();
        let target = half.index_of(0, h).unwrap_or(d - 1);
        let mut v = DVector::zeros(d);
        for &c in &cluster {
            let col = eig.eigenvectors.column(c);
            v += col * col[target];
        }
        if v.norm() < 1e-12 {
            eig.eigenvectors.column(imax).into_owned()
        } else {
            v.normalize()
        }
    };
    // Fix the sign so the largest-magnitude coefficient is positive.
    let (mut best, mut sign) = (0.0, 1.0);
    for &c in vec.iter() {
        if c.abs() > best + 1e-14 {
            best = c.abs();
            sign = c.signum();
        }
    }
    let coeffs: Vec<f64> = vec.iter().map(|c| c * sign).collect();
    let q_star = from_legendre(half, &coeffs)?;
    Ok(PhiStarResult {
        value: 1.0 / lmax,
        q_star,
        eigen_multiplicity: cluster.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::lobatto_end_weight;

    #[test]
    fn legendre_gram_is_identity_and_faces_match_monomials() {
        let mm = moment_matrices(6, 0.3).unwrap();
        assert_eq!(mm.m_omega, DMatrix::identity(10, 10));
        // x-face Gram of L̂_1(x): endpoint mean of 3x² = 3.
        let i = mm.half_space.index_of(1, 0).unwrap();
        assert!((mm.m_x[(i, i)] - 3.0).abs() < 1e-15);
        let mono = moment_matrices_for(SpaceId::p(1), 0.0, MomentBasis::Monomial).unwrap();
        let ix = SpaceId::p(1).index_of(1, 0).unwrap();
        assert_eq!(mono.m_x[(ix, ix)], 1.0);
        assert!((mono.m_omega[(ix, ix)] - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn monomial_gram_cholesky() {
        for k in 1..=15 {
            let mm = moment_matrices_for(SpaceId::p(k), 0.0, MomentBasis::Monomial).unwrap();
            assert!(mm.m_omega.clone().cholesky().is_some(), "k={k}");
        }
    }

    #[test]
    fn phi_star_known_values() {
        assert!((phi_star_sq(2, 0.0).unwrap().value - 0.25).abs() < 1e-14);
        assert!((phi_star_sq(3, -0.6).unwrap().value - 1.0 / 5.2).abs() < 1e-14);
        assert!((phi_star_sq(4, 0.0).unwrap().value - (2.0 - 14f64.sqrt() / 2.0)).abs() < 1e-13);
        for k in 1..=9 {
            let r = phi_star_for(SpaceId::q(k), 0.37).unwrap();
            assert!((r.value - lobatto_end_weight(k)).abs() < 1e-11, "Q^{k}");
        }
    }

    #[test]
    fn q_star_attains_phi_star() {
        for k in [2, 4, 5, 8] {
            for th in [-0.7, 0.0, 0.4] {
                let r = phi_star_sq(k, th).unwrap();
                let p = r.q_star.square();
                assert!((phi_of(&p, th) - r.value).abs() < 1e-10, "k={k} th={th}");
            }
        }
    }
}
