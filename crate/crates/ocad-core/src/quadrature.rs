//! Gauss–Legendre and Gauss–Lobatto rules on `[-1,1]`.
//!
//! Weights are normalised to sum to one (mean-value convention): a rule
//! approximates `½∫_{-1}^{1} f`. Multiply by 2 for the raw measure.
//!
//! Nodes are computed for the negative half by Newton iteration and
//! mirrored, so every rule is bitwise symmetric about the origin.

use crate::error::{OcadError, Result};

/// Newton step tolerance for quadrature nodes.
pub const NEWTON_TOL: f64 = 1e-15;
/// Maximum Newton iterations per node.
pub const NEWTON_MAX_ITER: usize = 100;

/// A one-dimensional rule with ascending nodes and normalised weights.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadRule1D {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_i f(x_i)`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Legendre `P_n(x)` and `P_n'(x)` (unnormalised, `P_n(1) = 1`).
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for m in 1..n {
        let mf = m as f64;
        let p2 = ((2.0 * mf + 1.0) * x * p1 - mf * p0) / (mf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    // P_n' from the standard identity (1 - x²) P_n' = n (P_{n-1} - x P_n).
    let nf = n as f64;
    let dp = if (1.0 - x * x).abs() > 0.0 {
        nf * (p0 - x * p1) / (1.0 - x * x)
    } else {
        0.5 * nf * (nf + 1.0) * x.signum().powi(n as i32 + 1)
    };
    (p1, dp)
}

/// Assemble a symmetric rule from the nodes/weights of its negative half
/// (plus the midpoint when the count is odd).
fn mirror(half_nodes: Vec<f64>, half_weights: Vec<f64>, mid: Option<f64>) -> QuadRule1D {
    let mut nodes = half_nodes.clone();
    let mut weights = half_weights.clone();
    if let Some(w0) = mid {
        nodes.push(0.0);
        weights.push(w0);
    }
    for (x, w) in half_nodes.iter().zip(&half_weights).rev() {
        nodes.push(-x);
        weights.push(*w);
    }
    QuadRule1D { nodes, weights }
}

/// `Q`-point Gauss–Legendre rule (exact to degree `2Q−1`).
///
/// Nodes are the roots of `P_Q`, found by Newton iteration from Chebyshev
/// initial guesses.
pub fn gauss(q: usize) -> Result<QuadRule1D> {
    if q == 0 {
        return Err(OcadError::InvalidArgument(
            "a Gauss rule needs at least one point".into(),
        ));
    }
    let half = q / 2;
    let mut nodes = Vec::with_capacity(half);
    let mut weights = Vec::with_capacity(half);
    let qf = q as f64;
    for i in 0..half {
        // i-th root from the left.
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (qf + 0.5)).cos();
        let mut last = f64::INFINITY;
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, dp) = legendre_with_derivative(q, x);
            let dx = p / dp;
            x -= dx;
            last = dx.abs();
            if last <= NEWTON_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(OcadError::QuadratureNoConvergence {
                rule: "Gauss",
                points: q,
                last_update: last,
            });
        }
        let (_, dp) = legendre_with_derivative(q, x);
        nodes.push(x);
        weights.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    let mid = if q % 2 == 1 {
        let (_, dp) = legendre_with_derivative(q, 0.0);
        Some(1.0 / (dp * dp))
    } else {
        None
    };
    Ok(normalise(mirror(nodes, weights, mid)))
}

/// `L`-point Gauss–Lobatto rule including `±1` (exact to degree `2L−3`).
///
/// Interior nodes are the roots of `P'_{L−1}`; weights are
/// `1/(L(L−1) P_{L−1}(x)²)` in the normalised convention, so the end
/// weights equal `1/(L(L−1))` exactly.
pub fn gauss_lobatto(l: usize) -> Result<QuadRule1D> {
    if l < 2 {
        return Err(OcadError::InvalidArgument(
            "a Gauss-Lobatto rule needs at least two points".into(),
        ));
    }
    let n = l - 1;
    let nf = n as f64;
    let end_weight = 1.0 / (l as f64 * nf);
    let mut nodes = vec![-1.0];
    let mut weights = vec![end_weight];
    let interior_half = (l - 2) / 2;
    for i in 1..=interior_half {
        let mut x = -(std::f64::consts::PI * i as f64 / nf).cos();
        let mut last = f64::INFINITY;
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            // f = P_n'(x); f' from Legendre's equation:
            // (1 - x²) P_n'' = 2x P_n' - n(n+1) P_n.
            let (p, dp) = legendre_with_derivative(n, x);
            let ddp = (2.0 * x * dp - nf * (nf + 1.0) * p) / (1.0 - x * x);
            let dx = dp / ddp;
            x -= dx;
            last = dx.abs();
            if last <= NEWTON_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(OcadError::QuadratureNoConvergence {
                rule: "Gauss-Lobatto",
                points: l,
                last_update: last,
            });
        }
        let (p, _) = legendre_with_derivative(n, x);
        nodes.push(x);
        weights.push(end_weight / (p * p));
    }
    let mid = if l % 2 == 1 {
        let (p, _) = legendre_with_derivative(n, 0.0);
        Some(end_weight / (p * p))
    } else {
        None
    };
    let rule = mirror(nodes, weights, mid);
    // Keep the end weights exact; renormalise only the interior.
    let interior_sum: f64 = rule.weights[1..l - 1].iter().sum();
    let target = 1.0 - 2.0 * end_weight;
    let scale = if interior_sum > 0.0 {
        target / interior_sum
    } else {
        1.0
    };
    let mut out = rule;
    for w in out.weights[1..l - 1].iter_mut() {
        *w *= scale;
    }
    Ok(out)
}

/// Rescale weights so they sum to one (removes accumulated rounding).
fn normalise(mut rule: QuadRule1D) -> QuadRule1D {
    let s: f64 = rule.weights.iter().sum();
    for w in rule.weights.iter_mut() {
        *w /= s;
    }
    rule
}

/// Number of Gauss–Lobatto points used for degree `k`: `L = ⌈(k+3)/2⌉`.
pub fn lobatto_points_for_degree(k: usize) -> usize {
    (k + 4) / 2
}

/// Number of Gauss points for degree `k` in the decompositions:
/// `Q = ⌈(k+1)/2⌉`.
pub fn gauss_points_for_degree(k: usize) -> usize {
    (k + 2) / 2
}

/// Lobatto end weight `1/(L(L−1))` for degree `k`.
pub fn lobatto_end_weight(k: usize) -> f64 {
    let l = lobatto_points_for_degree(k) as f64;
    1.0 / (l * (l - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyspace::interval_mean_power;

    fn max_moment_error(rule: &QuadRule1D, degree: usize) -> f64 {
        (0..=degree)
            .map(|m| (rule.apply(|x| x.powi(m as i32)) - interval_mean_power(m)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn small_gauss_rules() {
        let g1 = gauss(1).unwrap();
        assert_eq!(g1.nodes, vec![0.0]);
        assert_eq!(g1.weights, vec![1.0]);
        let g2 = gauss(2).unwrap();
        assert!((g2.nodes[0] + 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((g2.weights[0] - 0.5).abs() < 1e-15);
        let g3 = gauss(3).unwrap();
        let expect = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];
        for (w, e) in g3.weights.iter().zip(expect) {
            assert!((w - e).abs() < 1e-15);
        }
    }

    #[test]
    fn small_lobatto_rules() {
        let l2 = gauss_lobatto(2).unwrap();
        assert_eq!(l2.nodes, vec![-1.0, 1.0]);
        assert_eq!(l2.weights, vec![0.5, 0.5]);
        let l3 = gauss_lobatto(3).unwrap();
        let expect = [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0];
        for (w, e) in l3.weights.iter().zip(expect) {
            assert!((w - e).abs() < 1e-15);
        }
        let l4 = gauss_lobatto(4).unwrap();
        assert_eq!(l4.weights[0], 1.0 / 12.0);
        assert!((l4.nodes[2] - 1.0 / 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn exactness_up_to_algebraic_degree() {
        for q in 1..=20 {
            let r = gauss(q).unwrap();
            assert!(max_moment_error(&r, 2 * q - 1) < 1e-13, "gauss {q}");
        }
        for l in 2..=20 {
            let r = gauss_lobatto(l).unwrap();
            assert!(max_moment_error(&r, 2 * l - 3) < 1e-13, "lobatto {l}");
        }
    }

    #[test]
    fn bitwise_symmetry() {
        for n in 2..=15 {
            for r in [gauss(n).unwrap(), gauss_lobatto(n).unwrap()] {
                let m = r.len();
                for i in 0..m {
                    assert_eq!(r.nodes[i], -r.nodes[m - 1 - i]);
                    assert_eq!(r.weights[i], r.weights[m - 1 - i]);
                }
            }
        }
    }

    #[test]
    fn lobatto_point_count() {
        assert_eq!(lobatto_points_for_degree(2), 3);
        assert_eq!(lobatto_points_for_degree(3), 3);
        assert_eq!(lobatto_points_for_degree(9), 6);
        assert_eq!(lobatto_points_for_degree(1), 2);
    }
}
