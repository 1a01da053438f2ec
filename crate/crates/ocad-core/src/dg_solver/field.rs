//! Modal DG fields and `L²` projection.

use rayon::prelude::*;

use crate::dg_solver::basis::ModalBasis;
use crate::dg_solver::mesh::Mesh2D;
use crate::dg_solver::problem::State;

/// Per-cell modal coefficients, laid out `[cell][component][mode]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DGField {
    pub k: usize,
    pub m: usize,
    pub n_modes: usize,
    pub n_cells: usize,
    pub data: Vec<f64>,
}

impl DGField {
    pub fn zeros(k: usize, m: usize, n_cells: usize) -> Self {
        let n_modes = (k + 1) * (k + 2) / 2;
        Self {
            k,
            m,
            n_modes,
            n_cells,
            data: vec![0.0; n_cells * m * n_modes],
        }
    }

    /// Number of coefficients per cell.
    pub fn stride(&self) -> usize {
        self.m * self.n_modes
    }

    pub fn cell(&self, c: usize) -> &[f64] {
        let s = self.stride();
        &self.data[c * s..(c + 1) * s]
    }

    pub fn cell_mut(&mut self, c: usize) -> &mut [f64] {
        let s = self.stride();
        &mut self.data[c * s..(c + 1) * s]
    }

    /// Cell average of one component (the constant-mode coefficient).
    pub fn mean(&self, c: usize, comp: usize) -> f64 {
        self.data[c * self.stride() + comp * self.n_modes]
    }

    /// Cell-average state.
    pub fn mean_state(&self, c: usize) -> State {
        let mut s = [0.0; 4];
        for (comp, v) in s.iter_mut().enumerate().take(self.m) {
            *v = self.mean(c, comp);
        }
        s
    }

    /// All cell averages of one component.
    pub fn averages(&self, comp: usize) -> Vec<f64> {
        (0..self.n_cells).map(|c| self.mean(c, comp)).collect()
    }

    /// `self ← a·self + b·(other + dt·rate)`.
    pub fn combine_stage(&mut self, a: f64, b: f64, other: &DGField, dt: f64, rate: &DGField) {
        self.data
            .par_iter_mut()
            .zip(other.data.par_iter())
            .zip(rate.data.par_iter())
            .for_each(|((s, o), r)| *s = a * *s + b * (o + dt * r));
    }

    pub fn has_non_finite(&self) -> Option<usize> {
        let s = self.stride();
        self.data
            .iter()
            .position(|v| !v.is_finite())
            .map(|i| i / s)
    }
}

/// `L²` projection of `ic` with `(k+2)²`-point tensor Gauss quadrature.
pub fn l2_project(
    ic: impl Fn(f64, f64) -> State + Sync,
    mesh: &Mesh2D,
    basis: &ModalBasis,
    m: usize,
) -> DGField {
    let mut field = DGField::zeros(basis.k, m, mesh.n_cells());
    let n = basis.n_modes();
    let stride = field.stride();
    field
        .data
        .par_chunks_mut(stride)
        .enumerate()
        .for_each(|(c, out)| {
            let (xc, yc) = mesh.center(c);
            for (q, &(xi, eta)) in basis.vol_points.iter().enumerate() {
                let u = ic(xc + 0.5 * mesh.dx * xi, yc + 0.5 * mesh.dy * eta);
                let w = basis.vol_weights[q];
                let phi = &basis.vol_phi[q * n..(q + 1) * n];
                for comp in 0..m {
                    for (mode, p) in phi.iter().enumerate() {
                        out[comp * n + mode] += w * u[comp] * p;
                    }
                }
            }
        });
    field
}

/// Evaluate one component of the field at reference point `(ξ, η)` of cell `c`.
pub fn value_at(field: &DGField, basis: &ModalBasis, c: usize, comp: usize, xi: f64, eta: f64) -> f64 {
    let n = field.n_modes;
    basis.value_at(&field.cell(c)[comp * n..(comp + 1) * n], xi, eta)
}

/// `(1/|Ω|)∫(u_h − u)²` square-rooted (normalised `L²` error), by
/// `(k+3)²`-point Gauss quadrature per cell.
pub fn l2_error(
    field: &DGField,
    mesh: &Mesh2D,
    exact: impl Fn(f64, f64) -> f64 + Sync,
    comp: usize,
) -> f64 {
    let rule = crate::quadrature::gauss(field.k + 3).expect("quadrature");
    let eval = ModalBasis::new(field.k).expect("basis");
    let n = field.n_modes;
    let sum: f64 = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            let (xc, yc) = mesh.center(c);
            let coeffs = &field.cell(c)[comp * n..(comp + 1) * n];
            let mut s = 0.0;
            for (&eta, &wy) in rule.nodes.iter().zip(&rule.weights) {
                for (&xi, &wx) in rule.nodes.iter().zip(&rule.weights) {
                    let uh = eval.value_at(coeffs, xi, eta);
                    let u = exact(xc + 0.5 * mesh.dx * xi, yc + 0.5 * mesh.dy * eta);
                    s += wx * wy * (uh - u) * (uh - u);
                }
            }
            s
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    (sum / mesh.n_cells() as f64).sqrt()
}

/// Root-mean-square error of the cell averages against the exact cell
/// averages (computed with `(k+3)²`-point quadrature).
pub fn l2_error_of_averages(
    field: &DGField,
    mesh: &Mesh2D,
    exact: impl Fn(f64, f64) -> f64 + Sync,
    comp: usize,
) -> f64 {
    let rule = crate::quadrature::gauss(field.k + 3).expect("quadrature");
    let sq: Vec<f64> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            let (xc, yc) = mesh.center(c);
            let mut avg = 0.0;
            for (&eta, &wy) in rule.nodes.iter().zip(&rule.weights) {
                for (&xi, &wx) in rule.nodes.iter().zip(&rule.weights) {
                    avg += wx * wy * exact(xc + 0.5 * mesh.dx * xi, yc + 0.5 * mesh.dy * eta);
                }
            }
            let e = field.mean(c, comp) - avg;
            e * e
        })
        .collect();
    (sq.iter().sum::<f64>() / mesh.n_cells() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_projects_to_mean_mode() {
        let mesh = Mesh2D::periodic(3, 2, [0.0, 1.0, 0.0, 1.0]).unwrap();
        let basis = ModalBasis::new(3).unwrap();
        let f = l2_project(|_, _| [2.5, 0.0, 0.0, 0.0], &mesh, &basis, 1);
        for c in 0..mesh.n_cells() {
            assert!((f.mean(c, 0) - 2.5).abs() < 1e-14);
            assert!(f.cell(c)[1..].iter().all(|v| v.abs() < 1e-14));
        }
    }

    #[test]
    fn polynomial_is_reproduced() {
        let mesh = Mesh2D::periodic(2, 2, [-1.0, 1.0, -1.0, 1.0]).unwrap();
        let basis = ModalBasis::new(2).unwrap();
        let f = l2_project(|x, y| [x * x - 0.5 * x * y + y, 0.0, 0.0, 0.0], &mesh, &basis, 1);
        let e = l2_error(&f, &mesh, |x, y| x * x - 0.5 * x * y + y, 0);
        assert!(e < 1e-14);
    }
}
