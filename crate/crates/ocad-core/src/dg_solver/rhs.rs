//! Semi-discrete DG operator.
//!
//! In the orthonormal modal basis the weak form reads
//!
//! `dc_m/dt = (2/Δx)⟨f1 ∂_ξφ_m⟩ + (2/Δy)⟨f2 ∂_ηφ_m⟩
//!           − (1/Δx)[⟨f̂ φ_m⟩_{ξ=1} − ⟨f̂ φ_m⟩_{ξ=−1}]
//!           − (1/Δy)[⟨f̂ φ_m⟩_{η=1} − ⟨f̂ φ_m⟩_{η=−1}]`
//!
//! with `⟨·⟩` the normalised Gauss means over the cell or a face. For the
//! constant mode this is exactly the cell-average evolution
//! `dū/dt = −(1/Δx)Σ_q ω_q(f̂_{R,q} − f̂_{L,q}) − (1/Δy)Σ_q ω_q(f̂_{T,q} − f̂_{B,q})`.

use std::borrow::Cow;

use rayon::prelude::*;

use crate::dg_solver::basis::{face_point, ModalBasis, FACES};
use crate::dg_solver::dense::{gemm, BLOCK};
use crate::dg_solver::field::DGField;
use crate::dg_solver::mesh::{Mesh2D, Side};
use crate::dg_solver::problem::{lf_flux, ProblemSpec, State};

/// Mesh, basis and conservation law bundled together.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: Mesh2D,
    pub basis: ModalBasis,
    pub problem: ProblemSpec,
}

const SIDES: [Side; 4] = [Side::Left, Side::Right, Side::Bottom, Side::Top];

/// Face opposite to `f` in [`FACES`] order.
#[inline]
fn opposite(f: usize) -> usize {
    f ^ 1
}

/// Trace states at every face quadrature point, `[cell][face][q]`.
#[derive(Debug, Clone)]
pub struct Traces {
    pub nq: usize,
    pub data: Vec<State>,
}

impl Traces {
    #[inline]
    pub fn get(&self, c: usize, f: usize, q: usize) -> &State {
        &self.data[(c * 4 + f) * self.nq + q]
    }

    pub fn cell(&self, c: usize) -> &[State] {
        &self.data[c * 4 * self.nq..(c + 1) * 4 * self.nq]
    }
}

impl Discretization {
    pub fn n_comp(&self) -> usize {
        self.problem.n_comp()
    }

    /// Evaluate every cell's polynomial at its face quadrature points.
    pub fn traces(&self, field: &DGField) -> Traces {
        let nq = self.basis.n_face();
        let n = self.basis.n_modes();
        let m = field.m;
        let stride = field.stride();
        let mut data = vec![[0.0; 4]; field.n_cells * 4 * nq];
        data.par_chunks_mut(BLOCK * 4 * nq)
            .zip(field.data.par_chunks(BLOCK * stride))
            .for_each(|(out, coeffs)| {
                let nb = coeffs.len() / stride;
                let out = out.as_flattened_mut();
                for comp in 0..m {
                    gemm(
                        (nb, n, 4 * nq),
                        1.0,
                        (&coeffs[comp * n..], stride, 1),
                        (&self.basis.face_phi_all, 1, n),
                        0.0,
                        (&mut out[comp..], 16 * nq, 4),
                    );
                }
            });
        Traces { nq, data }
    }

    /// State on the other side of face `f` of cell `c` at point `q`.
    #[inline]
    pub fn exterior(&self, traces: &Traces, c: usize, f: usize, q: usize) -> State {
        match self.mesh.neighbor(c, SIDES[f]) {
            Some(nb) => *traces.get(nb, opposite(f), q),
            None => self.mesh.ghost(SIDES[f], traces.get(c, f, q)),
        }
    }

    /// Numerical flux through face `f` of cell `c` at point `q`, oriented
    /// along the positive coordinate direction.
    #[inline]
    pub fn face_flux(&self, traces: &Traces, c: usize, f: usize, q: usize, alpha: [f64; 2]) -> State {
        let inner = traces.get(c, f, q);
        let outer = self.exterior(traces, c, f, q);
        let dir = f / 2;
        if f % 2 == 1 {
            lf_flux(&self.problem, inner, &outer, dir, alpha[dir])
        } else {
            lf_flux(&self.problem, &outer, inner, dir, alpha[dir])
        }
    }

    /// Global Lax–Friedrichs speeds: maxima of the characteristic speeds
    /// over all traces and cell averages.
    pub fn max_speeds(&self, field: &DGField, traces: &Traces) -> [f64; 2] {
        let per_cell: Vec<[f64; 2]> = (0..field.n_cells)
            .into_par_iter()
            .map(|c| {
                let mut a = [0.0f64; 2];
                let mean = field.mean_state(c);
                for (d, v) in a.iter_mut().enumerate() {
                    *v = v.max(self.problem.wave_speed(&mean, d));
                }
                for s in traces.cell(c) {
                    for (d, v) in a.iter_mut().enumerate() {
                        *v = v.max(self.problem.wave_speed(s, d));
                    }
                }
                a
            })
            .collect();
        per_cell
            .iter()
            .fold([0.0f64; 2], |acc, a| [acc[0].max(a[0]), acc[1].max(a[1])])
    }

    /// Numerical fluxes through the right (`dir = 0`) or top (`dir = 1`)
    /// face of every cell, `[cell][q]`. The flux through the left/bottom
    /// face of a cell is the right/top flux of its neighbour, so both
    /// cells sharing a face use the same value and the scheme is exactly
    /// conservative.
    fn upper_face_fluxes(&self, traces: &Traces, dir: usize, alpha: [f64; 2]) -> Vec<State> {
        let nq = traces.nq;
        let f = 2 * dir + 1;
        let mut out = vec![[0.0; 4]; traces.data.len() / 4];
        out.par_chunks_mut(nq).enumerate().for_each(|(c, fl)| {
            for (q, v) in fl.iter_mut().enumerate() {
                *v = self.face_flux(traces, c, f, q, alpha);
            }
        });
        out
    }

    /// Time derivative of all modal coefficients.
    ///
    /// Cells are processed in fixed blocks; within a block the volume
    /// values, the flux-derivative integrals and the face lifting are
    /// dense matrix products, so results do not depend on the number of
    /// worker threads.
    pub fn rhs(&self, field: &DGField, traces: &Traces, alpha: [f64; 2]) -> DGField {
        let mut out = DGField::zeros(field.k, field.m, field.n_cells);
        let basis = &self.basis;
        let n = basis.n_modes();
        let m = field.m;
        let nq = basis.n_face();
        let nv = basis.n_vol();
        let (dx, dy) = (self.mesh.dx, self.mesh.dy);
        let stride = out.stride();
        let fx = self.upper_face_fluxes(traces, 0, alpha);
        let fy = self.upper_face_fluxes(traces, 1, alpha);
        out.data
            .par_chunks_mut(BLOCK * stride)
            .zip(field.data.par_chunks(BLOCK * stride))
            .enumerate()
            .for_each(|(blk, (r, coeffs))| {
                let nb = coeffs.len() / stride;
                let c0 = blk * BLOCK;
                // Point values at the volume points, `[comp][cell][q]`.
                let mut u = vec![0.0; m * nb * nv];
                for (comp, uc) in u.chunks_exact_mut(nb * nv).enumerate() {
                    gemm(
                        (nb, n, nv),
                        1.0,
                        (&coeffs[comp * n..], stride, 1),
                        (&basis.vol_phi, 1, n),
                        0.0,
                        (uc, nv, 1),
                    );
                }
                // Physical fluxes at the volume points.
                let mut f1 = vec![0.0; m * nb * nv];
                let mut f2 = vec![0.0; m * nb * nv];
                for p in 0..nb * nv {
                    let mut s = [0.0; 4];
                    for (comp, v) in s.iter_mut().enumerate().take(m) {
                        *v = u[comp * nb * nv + p];
                    }
                    let a = self.problem.flux(&s, 0);
                    let b = self.problem.flux(&s, 1);
                    for comp in 0..m {
                        f1[comp * nb * nv + p] = a[comp];
                        f2[comp * nb * nv + p] = b[comp];
                    }
                }
                // Scaled numerical fluxes on the four faces, `[comp][cell][face·q]`.
                let mut g = vec![0.0; m * nb * 4 * nq];
                for i in 0..nb {
                    let c = c0 + i;
                    let left = self.lower_flux(traces, &fx, c, 0, alpha);
                    let bottom = self.lower_flux(traces, &fy, c, 2, alpha);
                    let faces: [(&[State], f64); 4] = [
                        (&left, 1.0 / dx),
                        (&fx[c * nq..(c + 1) * nq], -1.0 / dx),
                        (&bottom, 1.0 / dy),
                        (&fy[c * nq..(c + 1) * nq], -1.0 / dy),
                    ];
                    for (f, (fl, scale)) in faces.iter().enumerate() {
                        for (q, fh) in fl.iter().enumerate() {
                            for comp in 0..m {
                                g[(comp * nb + i) * 4 * nq + f * nq + q] = scale * fh[comp];
                            }
                        }
                    }
                }
                for comp in 0..m {
                    let rc = &mut r[comp * n..];
                    let sl = comp * nb * nv..(comp + 1) * nb * nv;
                    gemm((nb, nv, n), 2.0 / dx, (&f1[sl.clone()], nv, 1), (&basis.vol_dxi_w, n, 1), 0.0, (rc, stride, 1));
                    gemm((nb, nv, n), 2.0 / dy, (&f2[sl], nv, 1), (&basis.vol_deta_w, n, 1), 1.0, (rc, stride, 1));
                    let gs = comp * nb * 4 * nq..(comp + 1) * nb * 4 * nq;
                    gemm((nb, 4 * nq, n), 1.0, (&g[gs], 4 * nq, 1), (&basis.face_lift, n, 1), 1.0, (rc, stride, 1));
                }
            });
        out
    }

    /// Fluxes through the left (`f = 0`) or bottom (`f = 2`) face of `c`:
    /// the neighbour's upper-face fluxes, or boundary fluxes.
    fn lower_flux<'a>(
        &self,
        traces: &Traces,
        upper: &'a [State],
        c: usize,
        f: usize,
        alpha: [f64; 2],
    ) -> Cow<'a, [State]> {
        let nq = traces.nq;
        match self.mesh.neighbor(c, SIDES[f]) {
            Some(nb) => Cow::Borrowed(&upper[nb * nq..(nb + 1) * nq]),
            None => Cow::Owned(
                (0..nq).map(|q| self.face_flux(traces, c, f, q, alpha)).collect(),
            ),
        }
    }
}

/// Independent evaluation of the cell-average rates
/// `−(1/Δx)Σ_q ω_q(f̂_R − f̂_L) − (1/Δy)Σ_q ω_q(f̂_T − f̂_B)`, computing
/// every trace by direct polynomial evaluation (no shared tables).
pub fn mean_rate_oracle(disc: &Discretization, field: &DGField, alpha: [f64; 2]) -> Vec<State> {
    let basis = &disc.basis;
    let n = basis.n_modes();
    let m = field.m;
    let trace = |c: usize, f: usize, t: f64| -> State {
        let (x, y) = face_point(FACES[f], t);
        let mut s = [0.0; 4];
        for comp in 0..m {
            s[comp] = basis.value_at(&field.cell(c)[comp * n..(comp + 1) * n], x, y);
        }
        s
    };
    (0..field.n_cells)
        .map(|c| {
            let mut rate = [0.0; 4];
            for f in 0..4 {
                let dir = f / 2;
                let h = if dir == 0 { disc.mesh.dx } else { disc.mesh.dy };
                for (&t, &w) in basis.face_nodes.iter().zip(&basis.face_weights) {
                    let inner = trace(c, f, t);
                    let outer = match disc.mesh.neighbor(c, SIDES[f]) {
                        Some(nb) => trace(nb, opposite(f), t),
                        None => disc.mesh.ghost(SIDES[f], &inner),
                    };
                    let (l, r) = if f % 2 == 1 { (inner, outer) } else { (outer, inner) };
                    let fl = disc.problem.flux(&l, dir);
                    let fr = disc.problem.flux(&r, dir);
                    let sign = if f % 2 == 1 { -1.0 } else { 1.0 };
                    for comp in 0..m {
                        let fh = 0.5 * (fl[comp] + fr[comp]) - 0.5 * alpha[dir] * (r[comp] - l[comp]);
                        rate[comp] += sign * w * fh / h;
                    }
                }
            }
            rate
        })
        .collect()
}
