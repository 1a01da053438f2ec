//! Uniform Cartesian meshes with per-side boundary conditions.

use serde::{Deserialize, Serialize};

use crate::dg_solver::problem::State;
use crate::error::{OcadError, Result};

/// Boundary condition of one side of the domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
    /// Zero-gradient: the exterior state copies the interior trace.
    Outflow,
    /// Prescribed exterior state (padded to four components).
    FixedInflow(Vec<f64>),
}

/// Sides in the order used by [`Mesh2D::bc`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left = 0,
    Right = 1,
    Bottom = 2,
    Top = 3,
}

/// `Nx × Ny` uniform mesh of `[x0,x1] × [y0,y1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh2D {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub dx: f64,
    pub dy: f64,
    /// Boundary conditions `[left, right, bottom, top]`.
    pub bc: [Boundary; 4],
}

impl Mesh2D {
    pub fn new(nx: usize, ny: usize, domain: [f64; 4], bc: [Boundary; 4]) -> Result<Self> {
        let [x0, x1, y0, y1] = domain;
        if nx == 0 || ny == 0 {
            return Err(OcadError::InvalidArgument("cell counts must be positive".into()));
        }
        if !(x1 > x0 && y1 > y0) {
            return Err(OcadError::InvalidArgument(format!(
                "empty domain [{x0},{x1}]x[{y0},{y1}]"
            )));
        }
        let periodic = |b: &Boundary| *b == Boundary::Periodic;
        if periodic(&bc[0]) != periodic(&bc[1]) || periodic(&bc[2]) != periodic(&bc[3]) {
            return Err(OcadError::InvalidArgument(
                "periodic boundaries must be paired".into(),
            ));
        }
        Ok(Self {
            nx,
            ny,
            x0,
            x1,
            y0,
            y1,
            dx: (x1 - x0) / nx as f64,
            dy: (y1 - y0) / ny as f64,
            bc,
        })
    }

    /// Fully periodic mesh.
    pub fn periodic(nx: usize, ny: usize, domain: [f64; 4]) -> Result<Self> {
        Self::new(
            nx,
            ny,
            domain,
            [
                Boundary::Periodic,
                Boundary::Periodic,
                Boundary::Periodic,
                Boundary::Periodic,
            ],
        )
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    /// Linear index of cell `(i, j)` (row-major in `x`).
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// `(i, j)` of a linear cell index.
    pub fn ij(&self, c: usize) -> (usize, usize) {
        (c % self.nx, c / self.nx)
    }

    pub fn center(&self, c: usize) -> (f64, f64) {
        let (i, j) = self.ij(c);
        (
            self.x0 + (i as f64 + 0.5) * self.dx,
            self.y0 + (j as f64 + 0.5) * self.dy,
        )
    }

    /// Neighbour across a side, or `None` at a non-periodic boundary.
    pub fn neighbor(&self, c: usize, side: Side) -> Option<usize> {
        let (i, j) = self.ij(c);
        let periodic = self.bc[side as usize] == Boundary::Periodic;
        match side {
            Side::Left if i > 0 => Some(self.index(i - 1, j)),
            Side::Left => periodic.then(|| self.index(self.nx - 1, j)),
            Side::Right if i + 1 < self.nx => Some(self.index(i + 1, j)),
            Side::Right => periodic.then(|| self.index(0, j)),
            Side::Bottom if j > 0 => Some(self.index(i, j - 1)),
            Side::Bottom => periodic.then(|| self.index(i, self.ny - 1)),
            Side::Top if j + 1 < self.ny => Some(self.index(i, j + 1)),
            Side::Top => periodic.then(|| self.index(i, 0)),
        }
    }

    /// Exterior state at a non-periodic boundary given the interior trace.
    pub fn ghost(&self, side: Side, interior: &State) -> State {
        match &self.bc[side as usize] {
            Boundary::FixedInflow(v) => {
                let mut s = [0.0; 4];
                for (d, x) in s.iter_mut().zip(v) {
                    *d = *x;
                }
                s
            }
            _ => *interior,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbours_wrap_periodically() {
        let m = Mesh2D::periodic(4, 3, [0.0, 1.0, 0.0, 1.0]).unwrap();
        assert_eq!(m.neighbor(0, Side::Left), Some(3));
        assert_eq!(m.neighbor(3, Side::Right), Some(0));
        assert_eq!(m.neighbor(0, Side::Bottom), Some(8));
        assert_eq!(m.neighbor(9, Side::Top), Some(1));
        assert!((m.dx - 0.25).abs() < 1e-16);
    }

    #[test]
    fn outflow_has_no_neighbour() {
        let bc = [
            Boundary::FixedInflow(vec![1.0]),
            Boundary::Outflow,
            Boundary::Outflow,
            Boundary::Outflow,
        ];
        let m = Mesh2D::new(2, 2, [0.0, 2.0, 0.0, 1.0], bc).unwrap();
        assert_eq!(m.neighbor(0, Side::Left), None);
        assert_eq!(m.ghost(Side::Left, &[5.0; 4])[0], 1.0);
        assert_eq!(m.ghost(Side::Right, &[5.0; 4])[0], 5.0);
        assert!(Mesh2D::new(
            2,
            2,
            [0.0, 1.0, 0.0, 1.0],
            [
                Boundary::Periodic,
                Boundary::Outflow,
                Boundary::Outflow,
                Boundary::Outflow
            ]
        )
        .is_err());
    }
}
