//! Polynomials on the reference cell `[-1,1]²`.
//!
//! A [`Polynomial2D`] stores coefficients over the monomials `x^i y^j` of a
//! space [`SpaceId`] (`P^k`: total degree `≤ k`, `Q^k`: degree `≤ k` in each
//! variable). The monomial ordering is **graded lexicographic**: monomials are
//! sorted by total degree, and within one total degree by descending power of
//! `x`. For `P^2` this is `1, x, y, x², xy, y²`. Every coefficient vector and
//! every file produced by this crate relies on that order.
//!
//! All averages are normalised by the measure of the domain they integrate
//! over (4 for the cell, 2 for a face), so that a feasible decomposition has
//! weights summing to one.

use serde::{Deserialize, Serialize};

use crate::error::{OcadError, Result};

/// Polynomial family on the square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// Total degree `≤ k`.
    P,
    /// Degree `≤ k` in each variable separately.
    Q,
}

/// A polynomial space `P^k` or `Q^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceId {
    pub family: Family,
    pub degree: usize,
}

impl SpaceId {
    /// `P^k`.
    pub const fn p(degree: usize) -> Self {
        Self {
            family: Family::P,
            degree,
        }
    }

    /// `Q^k`.
    pub const fn q(degree: usize) -> Self {
        Self {
            family: Family::Q,
            degree,
        }
    }

    /// Dimension: `(k+1)(k+2)/2` for `P^k`, `(k+1)²` for `Q^k`.
    pub fn dim(&self) -> usize {
        let k = self.degree;
        match self.family {
            Family::P => (k + 1) * (k + 2) / 2,
            Family::Q => (k + 1) * (k + 1),
        }
    }

    /// Whether `x^i y^j` belongs to the space.
    pub fn contains(&self, i: usize, j: usize) -> bool {
        match self.family {
            Family::P => i + j <= self.degree,
            Family::Q => i <= self.degree && j <= self.degree,
        }
    }

    /// Largest total degree of a monomial in the space.
    pub fn max_total_degree(&self) -> usize {
        match self.family {
            Family::P => self.degree,
            Family::Q => 2 * self.degree,
        }
    }

    /// Largest power of a single variable in the space.
    pub fn max_single_degree(&self) -> usize {
        self.degree
    }

    /// Same family, degree `⌊k/2⌋` — the space whose squares span the
    /// nonnegative polynomials used by the optimality criteria.
    pub fn half(&self) -> Self {
        Self {
            family: self.family,
            degree: self.degree / 2,
        }
    }

    /// Exponent pairs `(i, j)` in the documented graded order.
    pub fn exponents(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.dim());
        for total in 0..=self.max_total_degree() {
            for i in (0..=total).rev() {
                let j = total - i;
                if self.contains(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Position of `x^i y^j` in the coefficient vector, if present.
    pub fn index_of(&self, i: usize, j: usize) -> Option<usize> {
        if !self.contains(i, j) {
            return None;
        }
        self.exponents().iter().position(|&e| e == (i, j))
    }

    /// Smallest space of the given family containing both operands' product.
    fn product_space(a: SpaceId, b: SpaceId) -> SpaceId {
        let family = if a.family == Family::P && b.family == Family::P {
            Family::P
        } else {
            Family::Q
        };
        SpaceId {
            family,
            degree: a.degree + b.degree,
        }
    }
}

impl std::fmt::Display for SpaceId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let fam = match self.family {
            Family::P => "P",
            Family::Q => "Q",
        };
        write!(f, "{fam}^{}", self.degree)
    }
}

/// Normalised mean of `t^n` over `[-1,1]`: `1/(n+1)` for even `n`, else 0.
#[inline]
pub fn interval_mean_power(n: usize) -> f64 {
    if n % 2 == 0 {
        1.0 / (n as f64 + 1.0)
    } else {
        0.0
    }
}

/// Mean of `t^n` over the two endpoints `t = ±1`: 1 for even `n`, else 0.
#[inline]
pub fn endpoint_mean_power(n: usize) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        0.0
    }
}

/// Integer power by repeated multiplication (deterministic order).
#[inline]
pub fn powi(x: f64, n: usize) -> f64 {
    let mut r = 1.0;
    for _ in 0..n {
        r *= x;
    }
    r
}

/// One face of the reference cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Face {
    /// `x = -1`
    Left,
    /// `x = +1`
    Right,
    /// `y = -1`
    Bottom,
    /// `y = +1`
    Top,
}

/// A polynomial on the reference cell with coefficients over the graded
/// monomial basis of its space.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial2D {
    space: SpaceId,
    exps: Vec<(usize, usize)>,
    coeffs: Vec<f64>,
}

impl Polynomial2D {
    /// Build from a coefficient vector in the graded order.
    pub fn new(space: SpaceId, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.dim() {
            return Err(OcadError::InvalidArgument(format!(
                "{space} needs {} coefficients, got {}",
                space.dim(),
                coeffs.len()
            )));
        }
        Ok(Self {
            space,
            exps: space.exponents(),
            coeffs,
        })
    }

    /// The zero polynomial of a space.
    pub fn zero(space: SpaceId) -> Self {
        Self {
            space,
            exps: space.exponents(),
            coeffs: vec![0.0; space.dim()],
        }
    }

    /// The single monomial `x^i y^j`, viewed as an element of `space`.
    pub fn monomial(space: SpaceId, i: usize, j: usize) -> Result<Self> {
        let mut p = Self::zero(space);
        p.add_term(i, j, 1.0)?;
        Ok(p)
    }

    /// Sum of terms `c · x^i y^j`.
    pub fn from_terms(space: SpaceId, terms: &[(usize, usize, f64)]) -> Result<Self> {
        let mut p = Self::zero(space);
        for &(i, j, c) in terms {
            p.add_term(i, j, c)?;
        }
        Ok(p)
    }

    /// Add `c · x^i y^j` in place.
    pub fn add_term(&mut self, i: usize, j: usize, c: f64) -> Result<()> {
        let idx = self
            .exps
            .iter()
            .position(|&e| e == (i, j))
            .ok_or_else(|| {
                OcadError::InvalidArgument(format!("x^{i} y^{j} is not in {}", self.space))
            })?;
        self.coeffs[idx] += c;
        Ok(())
    }

    pub fn space(&self) -> SpaceId {
        self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `(i, j, c)` triples in basis order.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.exps
            .iter()
            .zip(&self.coeffs)
            .map(|(&(i, j), &c)| (i, j, c))
    }

    /// Coefficient of `x^i y^j` (zero when absent).
    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        self.exps
            .iter()
            .position(|&e| e == (i, j))
            .map_or(0.0, |idx| self.coeffs[idx])
    }

    /// Evaluate with a fixed summation order (basis order).
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let n = self.space.max_single_degree();
        let mut xp = [0.0f64; 64];
        let mut yp = [0.0f64; 64];
        debug_assert!(n < 64);
        xp[0] = 1.0;
        yp[0] = 1.0;
        for m in 1..=n {
            xp[m] = xp[m - 1] * x;
            yp[m] = yp[m - 1] * y;
        }
        let mut s = 0.0;
        for (&(i, j), &c) in self.exps.iter().zip(&self.coeffs) {
            s += c * xp[i] * yp[j];
        }
        s
    }

    /// `α·self + β·other`; both operands must share a space.
    pub fn lin_comb(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        if self.space != other.space {
            return Err(OcadError::Incompatible(format!(
                "cannot add {} and {}",
                self.space, other.space
            )));
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        Ok(Self {
            space: self.space,
            exps: self.exps.clone(),
            coeffs,
        })
    }

    /// Multiply by a scalar.
    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            space: self.space,
            exps: self.exps.clone(),
            coeffs: self.coeffs.iter().map(|c| alpha * c).collect(),
        }
    }

    /// Product; lives in `P^{a+b}` (or `Q^{a+b}` if either factor is `Q`).
    pub fn mul(&self, other: &Self) -> Self {
        let space = SpaceId::product_space(self.space, other.space);
        let mut out = Self::zero(space);
        for (&(i, j), &a) in self.exps.iter().zip(&self.coeffs) {
            if a == 0.0 {
                continue;
            }
            for (&(k, l), &b) in other.exps.iter().zip(&other.coeffs) {
                if b == 0.0 {
                    continue;
                }
                out.add_term(i + k, j + l, a * b)
                    .expect("product space contains every product monomial");
            }
        }
        out
    }

    /// `self²`.
    pub fn square(&self) -> Self {
        self.mul(self)
    }

    /// Re-embed into a larger space of which this one is a subspace.
    pub fn embed(&self, space: SpaceId) -> Result<Self> {
        let mut out = Self::zero(space);
        for (i, j, c) in self.terms() {
            if c != 0.0 {
                out.add_term(i, j, c)?;
            }
        }
        Ok(out)
    }

    /// Compose with `(x, y) ↦ (y, x)`.
    pub fn swapped(&self) -> Self {
        let mut out = Self::zero(self.space);
        for (i, j, c) in self.terms() {
            out.add_term(j, i, c).expect("spaces are swap invariant");
        }
        out
    }

    /// Compose with `(x, y) ↦ (sx·x, sy·y)` for signs `sx, sy ∈ {±1}`.
    pub fn reflected(&self, flip_x: bool, flip_y: bool) -> Self {
        let coeffs = self
            .terms()
            .map(|(i, j, c)| {
                let mut s = c;
                if flip_x && i % 2 == 1 {
                    s = -s;
                }
                if flip_y && j % 2 == 1 {
                    s = -s;
                }
                s
            })
            .collect();
        Self {
            space: self.space,
            exps: self.exps.clone(),
            coeffs,
        }
    }

    /// `⟨p⟩_Ω`: mean over the reference cell.
    pub fn cell_average(&self) -> f64 {
        self.terms()
            .map(|(i, j, c)| c * interval_mean_power(i) * interval_mean_power(j))
            .sum()
    }

    /// `⟨p⟩^x_Ω = ½(⟨p⟩^{-x} + ⟨p⟩^{+x})`: mean over the faces `x = ±1`.
    pub fn face_average_x(&self) -> f64 {
        self.terms()
            .map(|(i, j, c)| c * endpoint_mean_power(i) * interval_mean_power(j))
            .sum()
    }

    /// `⟨p⟩^y_Ω`: mean over the faces `y = ±1`.
    pub fn face_average_y(&self) -> f64 {
        self.terms()
            .map(|(i, j, c)| c * interval_mean_power(i) * endpoint_mean_power(j))
            .sum()
    }

    /// Mean over a single face.
    pub fn face_mean(&self, face: Face) -> f64 {
        self.terms()
            .map(|(i, j, c)| {
                let (s, along) = match face {
                    Face::Left => (powi(-1.0, i), interval_mean_power(j)),
                    Face::Right => (1.0, interval_mean_power(j)),
                    Face::Bottom => (powi(-1.0, j), interval_mean_power(i)),
                    Face::Top => (1.0, interval_mean_power(i)),
                };
                c * s * along
            })
            .sum()
    }

    /// `max |coeff|`.
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// Symmetry group attached to an internal node orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OrbitKind {
    /// The four axis reflections `(±x, ±y)`.
    #[serde(rename = "gs")]
    Reflections,
    /// Reflections plus the diagonal swap (eight elements).
    #[serde(rename = "gf")]
    Full,
}

/// An orbit of internal nodes represented by its point in `[0,1]²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymOrbit {
    pub x: f64,
    pub y: f64,
    pub weight: f64,
    pub kind: OrbitKind,
}

impl SymOrbit {
    pub fn new(x: f64, y: f64, weight: f64, kind: OrbitKind) -> Self {
        Self { x, y, weight, kind }
    }

    /// Representative with the coordinates swapped.
    pub fn swapped(&self) -> Self {
        Self {
            x: self.y,
            y: self.x,
            ..*self
        }
    }
}

/// Average of `p` over the images of `(x, y)` under the orbit's group.
pub fn orbit_average_at(p: &Polynomial2D, x: f64, y: f64, kind: OrbitKind) -> f64 {
    let gs = |a: f64, b: f64| {
        0.25 * (p.eval(a, b) + p.eval(-a, b) + p.eval(a, -b) + p.eval(-a, -b))
    };
    match kind {
        OrbitKind::Reflections => gs(x, y),
        OrbitKind::Full => 0.5 * (gs(x, y) + gs(y, x)),
    }
}

/// Symmetric average of `p` over an orbit (weight is ignored).
pub fn orbit_average(p: &Polynomial2D, orbit: &SymOrbit) -> f64 {
    orbit_average_at(p, orbit.x, orbit.y, orbit.kind)
}

/// All monomials of the space, in graded order.
pub fn monomial_basis(space: SpaceId) -> Vec<Polynomial2D> {
    space
        .exponents()
        .into_iter()
        .map(|(i, j)| Polynomial2D::monomial(space, i, j).expect("exponent from the space"))
        .collect()
}

/// Exponents `(2i, 2j)` of the reflection-invariant monomials of the space.
pub fn invariant_exponents_gs(space: SpaceId) -> Vec<(usize, usize)> {
    space
        .exponents()
        .into_iter()
        .filter(|&(i, j)| i % 2 == 0 && j % 2 == 0)
        .collect()
}

/// Basis of the reflection-invariant subspace: even monomials `x^{2i} y^{2j}`.
pub fn invariant_basis_gs(space: SpaceId) -> Vec<Polynomial2D> {
    invariant_exponents_gs(space)
        .into_iter()
        .map(|(i, j)| Polynomial2D::monomial(space, i, j).expect("exponent from the space"))
        .collect()
}

/// Basis `{(x²y²)^α (x²+y²)^β : 4α + 2β ≤ k}` of the fully symmetric
/// subspace of `P^k`, ordered by `α` then `β`.
pub fn invariant_basis_gf(k: usize) -> Vec<Polynomial2D> {
    let space = SpaceId::p(k);
    let one = Polynomial2D::monomial(space, 0, 0).expect("constant");
    let xy2 = Polynomial2D::from_terms(SpaceId::p(4), &[(2, 2, 1.0)]).expect("x²y²");
    let r2 = Polynomial2D::from_terms(SpaceId::p(2), &[(2, 0, 1.0), (0, 2, 1.0)]).expect("r²");
    let mut out = Vec::new();
    for alpha in 0..=k / 4 {
        let mut base = one.clone();
        for _ in 0..alpha {
            base = base.mul(&xy2);
        }
        let mut cur = base;
        let mut beta = 0;
        while 4 * alpha + 2 * beta <= k {
            out.push(cur.embed(space).expect("degree bounded by k"));
            cur = cur.mul(&r2);
            beta += 1;
        }
    }
    out
}

/// Monomial coefficients (ascending powers) of the orthonormal Legendre
/// polynomials `L̂_n = √(2n+1) P_n`, `n = 0..=n_max`, normalised so that the
/// mean of `L̂_m L̂_n` over `[-1,1]` is `δ_mn`.
pub fn legendre_monomial_table(n_max: usize) -> Vec<Vec<f64>> {
    let mut p: Vec<Vec<f64>> = Vec::with_capacity(n_max + 1);
    p.push(vec![1.0]);
    if n_max >= 1 {
        p.push(vec![0.0, 1.0]);
    }
    for n in 1..n_max {
        let mut next = vec![0.0; n + 2];
        let nf = n as f64;
        for (m, &c) in p[n].iter().enumerate() {
            next[m + 1] += (2.0 * nf + 1.0) * c / (nf + 1.0);
        }
        for (m, &c) in p[n - 1].iter().enumerate() {
            next[m] -= nf * c / (nf + 1.0);
        }
        p.push(next);
    }
    p.into_iter()
        .enumerate()
        .map(|(n, c)| {
            let s = (2.0 * n as f64 + 1.0).sqrt();
            c.into_iter().map(|v| v * s).collect()
        })
        .collect()
}

/// Values and derivatives of `L̂_0..=L̂_{n_max}` at `t`, by the three-term
/// recurrence.
pub fn legendre_orthonormal(n_max: usize, t: f64) -> (Vec<f64>, Vec<f64>) {
    let mut p = vec![0.0; n_max + 1];
    let mut dp = vec![0.0; n_max + 1];
    p[0] = 1.0;
    if n_max >= 1 {
        p[1] = t;
        dp[1] = 1.0;
    }
    for n in 1..n_max {
        let nf = n as f64;
        p[n + 1] = ((2.0 * nf + 1.0) * t * p[n] - nf * p[n - 1]) / (nf + 1.0);
        dp[n + 1] = dp[n - 1] + (2.0 * nf + 1.0) * p[n];
    }
    for n in 0..=n_max {
        let s = (2.0 * n as f64 + 1.0).sqrt();
        p[n] *= s;
        dp[n] *= s;
    }
    (p, dp)
}

/// Convert coefficients over the tensor-Legendre basis `L̂_i(x) L̂_j(y)`
/// (same index set and order as the monomial basis of `space`) to a
/// monomial-basis polynomial.
pub fn from_legendre(space: SpaceId, legendre_coeffs: &[f64]) -> Result<Polynomial2D> {
    if legendre_coeffs.len() != space.dim() {
        return Err(OcadError::InvalidArgument(format!(
            "{space} needs {} Legendre coefficients, got {}",
            space.dim(),
            legendre_coeffs.len()
        )));
    }
    let table = legendre_monomial_table(space.max_single_degree());
    let mut out = Polynomial2D::zero(space);
    for (&(i, j), &c) in space.exponents().iter().zip(legendre_coeffs) {
        if c == 0.0 {
            continue;
        }
        for (a, &ca) in table[i].iter().enumerate() {
            if ca == 0.0 {
                continue;
            }
            for (b, &cb) in table[j].iter().enumerate() {
                if cb == 0.0 {
                    continue;
                }
                out.add_term(a, b, c * ca * cb)?;
            }
        }
    }
    Ok(out)
}

/// Coefficients of `p` over the tensor-Legendre basis of its own space.
///
/// Uses orthonormality: the coefficient of `L̂_i L̂_j` is the product of the
/// 1D projections of each monomial factor.
pub fn to_legendre(p: &Polynomial2D) -> Vec<f64> {
    let space = p.space();
    let n = space.max_single_degree();
    // proj[m][i] = mean over [-1,1] of t^m L̂_i(t)
    let table = legendre_monomial_table(n);
    let proj: Vec<Vec<f64>> = (0..=n)
        .map(|m| {
            (0..=n)
                .map(|i| {
                    table[i]
                        .iter()
                        .enumerate()
                        .map(|(a, &c)| c * interval_mean_power(a + m))
                        .sum()
                })
                .collect()
        })
        .collect();
    space
        .exponents()
        .iter()
        .map(|&(i, j)| p.terms().map(|(a, b, c)| c * proj[a][i] * proj[b][j]).sum())
        .collect()
}

/// A univariate polynomial with ascending coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial1D {
    pub coeffs: Vec<f64>,
}

impl Polynomial1D {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    /// Degree (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|&c| c != 0.0)
            .unwrap_or(0)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Mean over `[-1,1]`.
    pub fn interval_mean(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(m, c)| c * interval_mean_power(m))
            .sum()
    }
}
