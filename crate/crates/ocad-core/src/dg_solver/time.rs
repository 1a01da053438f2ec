//! Time-step selection and the three-stage SSP Runge–Kutta integrator.

use serde::Serialize;

use crate::cad::SymmetricCAD;
use crate::dg_solver::basis::ModalBasis;
use crate::dg_solver::field::DGField;
use crate::dg_solver::limiter::{bp_limit_euler, bp_limit_scalar, tvb_limit, CheckSet, LimiterMode, LimiterStats};
use crate::dg_solver::mesh::Mesh2D;
use crate::dg_solver::problem::{InvariantRegion, ProblemSpec};
use crate::dg_solver::rhs::Discretization;
use crate::error::{OcadError, Result};

/// Which constraint determined the time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DtBound {
    /// Bound-preserving CFL `ω̄ c0`.
    Bp,
    /// Linear stability `1/(2k+1)`.
    Linear,
    /// Configured maximum (vanishing wave speeds).
    Cap,
}

/// A time step together with its active bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtChoice {
    pub dt: f64,
    pub bound: DtBound,
}

/// `Δt = C_SSP · min{ω̄ c0, 1/(2k+1)} / (a1/Δx + a2/Δy)`, capped by
/// `dt_max` when the wave speeds vanish.
#[allow(clippy::too_many_arguments)]
pub fn time_step(
    k: usize,
    omega_bar: f64,
    a: [f64; 2],
    dx: f64,
    dy: f64,
    c0: f64,
    c_ssp: f64,
    dt_max: f64,
) -> DtChoice {
    let bp = omega_bar * c0;
    let linear = 1.0 / (2 * k + 1) as f64;
    let (num, bound) = if bp <= linear {
        (bp, DtBound::Bp)
    } else {
        (linear, DtBound::Linear)
    };
    let rate = a[0] / dx + a[1] / dy;
    let dt = c_ssp * num / rate;
    if !(dt.is_finite() && dt <= dt_max) {
        return DtChoice {
            dt: dt_max,
            bound: DtBound::Cap,
        };
    }
    DtChoice { dt, bound }
}

/// A complete semi-discrete scheme: discretisation, CAD-based limiter
/// and time-step parameters.
#[derive(Debug, Clone)]
pub struct Scheme {
    pub disc: Discretization,
    pub cad: SymmetricCAD,
    pub check: CheckSet,
    /// TVB constant `M`; `None` disables the troubled-cell limiter.
    pub tvb_m: Option<f64>,
    /// Maximum CFL number of the first-order scheme underlying the flux
    /// (1 for Lax–Friedrichs; smaller values are more conservative).
    pub c0: f64,
    pub c_ssp: f64,
    pub dt_max: f64,
    /// Apply the linear-stability cap `1/(2k+1)`; without it the step is
    /// the bound-preserving one alone (used to stress the limiter).
    pub linear_cap: bool,
}

impl Scheme {
    pub fn new(
        mesh: Mesh2D,
        problem: ProblemSpec,
        cad: SymmetricCAD,
        k: usize,
        limiter: LimiterMode,
    ) -> Result<Self> {
        let basis = ModalBasis::new(k)?;
        let check = CheckSet::new(&cad, &basis, limiter);
        Ok(Self {
            disc: Discretization { mesh, basis, problem },
            cad,
            check,
            tvb_m: None,
            c0: 1.0,
            c_ssp: 1.0,
            dt_max: f64::INFINITY,
            linear_cap: true,
        })
    }

    pub fn k(&self) -> usize {
        self.disc.basis.k
    }

    /// Global wave-speed maxima of the current field.
    pub fn speeds(&self, field: &DGField) -> [f64; 2] {
        let traces = self.disc.traces(field);
        self.disc.max_speeds(field, &traces)
    }

    /// Time step for the current field.
    pub fn compute_dt(&self, field: &DGField) -> DtChoice {
        let a = self.speeds(field);
        // Without the cap, a linear bound of 1 never binds since ω̄ ≤ 1/2.
        let k = if self.linear_cap { self.k() } else { 0 };
        time_step(
            k,
            self.cad.boundary_weight,
            a,
            self.disc.mesh.dx,
            self.disc.mesh.dy,
            self.c0,
            self.c_ssp,
            self.dt_max,
        )
    }

    /// `L(u)`: time derivative of the coefficients with the global
    /// Lax–Friedrichs speeds of `u`.
    pub fn rate(&self, field: &DGField) -> DGField {
        let traces = self.disc.traces(field);
        let a = self.disc.max_speeds(field, &traces);
        self.disc.rhs(field, &traces, a)
    }

    /// Troubled-cell limiter (if configured) followed by the
    /// bound-preserving limiter.
    pub fn limit(&self, field: &mut DGField) -> Result<LimiterStats> {
        if let Some(m) = self.tvb_m {
            tvb_limit(field, &self.disc.mesh, &self.disc.basis, m);
        }
        match self.disc.problem.region {
            InvariantRegion::Interval { min, max } => {
                bp_limit_scalar(field, &self.disc.basis, &self.check, min, max)
            }
            InvariantRegion::PositiveDensityEnergy => bp_limit_euler(field, &self.disc.basis, &self.check),
        }
    }

    fn finite(field: &DGField, t: f64) -> Result<()> {
        match field.has_non_finite() {
            Some(cell) => Err(OcadError::NonFinite { cell, time: t }),
            None => Ok(()),
        }
    }

    /// One Shu–Osher SSP-RK3 step from time `t`, limiting after every
    /// stage. Returns the new field and the merged limiter statistics of
    /// the three stages.
    pub fn ssp_rk3_step(&self, u: &DGField, dt: f64, t: f64) -> Result<(DGField, LimiterStats)> {
        let mut stats = LimiterStats::default();

        let mut u1 = u.clone();
        u1.combine_stage(0.0, 1.0, u, dt, &self.rate(u));
        Self::finite(&u1, t + dt)?;
        stats.merge(&self.limit(&mut u1)?);

        let mut u2 = u.clone();
        u2.combine_stage(0.75, 0.25, &u1, dt, &self.rate(&u1));
        Self::finite(&u2, t + 0.5 * dt)?;
        stats.merge(&self.limit(&mut u2)?);

        let mut u3 = u.clone();
        u3.combine_stage(1.0 / 3.0, 2.0 / 3.0, &u2, dt, &self.rate(&u2));
        Self::finite(&u3, t + dt)?;
        stats.merge(&self.limit(&mut u3)?);

        Ok((u3, stats))
    }
}
