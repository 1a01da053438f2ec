//! Conservation laws, their invariant regions and initial conditions.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A state vector; scalar problems use only the first entry.
pub type State = [f64; 4];

/// Which conservation law is solved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemKind {
    /// `u_t + a1 u_x + a2 u_y = 0`.
    Advection { a1: f64, a2: f64 },
    /// `u_t + (u²/2)_x + (u²/2)_y = 0`.
    Burgers,
    /// Compressible Euler equations with ideal-gas law.
    Euler { gamma: f64 },
}

/// Invariant region of the problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InvariantRegion {
    /// `U_min ≤ u ≤ U_max`.
    Interval { min: f64, max: f64 },
    /// `ρ > 0` and `ρe = E − |m|²/(2ρ) > 0`.
    PositiveDensityEnergy,
}

/// Problem definition: flux, wave speeds and invariant region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub region: InvariantRegion,
}

impl ProblemSpec {
    pub fn advection(a1: f64, a2: f64, min: f64, max: f64) -> Self {
        Self {
            kind: ProblemKind::Advection { a1, a2 },
            region: InvariantRegion::Interval { min, max },
        }
    }

    pub fn burgers(min: f64, max: f64) -> Self {
        Self {
            kind: ProblemKind::Burgers,
            region: InvariantRegion::Interval { min, max },
        }
    }

    pub fn euler(gamma: f64) -> Self {
        Self {
            kind: ProblemKind::Euler { gamma },
            region: InvariantRegion::PositiveDensityEnergy,
        }
    }

    /// Components per state.
    pub fn n_comp(&self) -> usize {
        match self.kind {
            ProblemKind::Euler { .. } => 4,
            _ => 1,
        }
    }

    /// Physical flux in direction `dir` (0 = x, 1 = y).
    #[inline]
    pub fn flux(&self, u: &State, dir: usize) -> State {
        match self.kind {
            ProblemKind::Advection { a1, a2 } => {
                let a = if dir == 0 { a1 } else { a2 };
                [a * u[0], 0.0, 0.0, 0.0]
            }
            ProblemKind::Burgers => [0.5 * u[0] * u[0], 0.0, 0.0, 0.0],
            ProblemKind::Euler { gamma } => {
                let rho = u[0];
                let v = u[1 + dir] / rho;
                let p = pressure(u, gamma);
                let mut f = [u[1] * v, u[2] * v, 0.0, (u[3] + p) * v];
                f[dir] += p;
                [u[1 + dir], f[0], f[1], f[3]]
            }
        }
    }

    /// Largest characteristic speed `|∂f_dir/∂u|` at `u`.
    #[inline]
    pub fn wave_speed(&self, u: &State, dir: usize) -> f64 {
        match self.kind {
            ProblemKind::Advection { a1, a2 } => {
                if dir == 0 {
                    a1.abs()
                } else {
                    a2.abs()
                }
            }
            ProblemKind::Burgers => u[0].abs(),
            ProblemKind::Euler { gamma } => {
                let rho = u[0];
                let v = u[1 + dir] / rho;
                let p = pressure(u, gamma).max(0.0);
                v.abs() + (gamma * p / rho).sqrt()
            }
        }
    }

    /// Whether `u` lies in the invariant region, with slack `tol` for
    /// interval regions.
    pub fn admissible(&self, u: &State, tol: f64) -> bool {
        match self.region {
            InvariantRegion::Interval { min, max } => u[0] >= min - tol && u[0] <= max + tol,
            InvariantRegion::PositiveDensityEnergy => u[0] > 0.0 && internal_energy(u) > 0.0,
        }
    }
}

/// `ρe = E − (m1² + m2²)/(2ρ)`.
#[inline]
pub fn internal_energy(u: &State) -> f64 {
    u[3] - 0.5 * (u[1] * u[1] + u[2] * u[2]) / u[0]
}

/// Ideal-gas pressure `(γ−1)ρe`.
#[inline]
pub fn pressure(u: &State, gamma: f64) -> f64 {
    (gamma - 1.0) * internal_energy(u)
}

/// Conserved state from primitive `(ρ, v1, v2, P)`.
pub fn conserved(rho: f64, v1: f64, v2: f64, p: f64, gamma: f64) -> State {
    [
        rho,
        rho * v1,
        rho * v2,
        p / (gamma - 1.0) + 0.5 * rho * (v1 * v1 + v2 * v2),
    ]
}

/// Initial data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    /// `sin(π(x + y))`.
    SinePlane,
    /// Constant state (first component for scalar problems).
    Constant { value: [f64; 4] },
    /// Stationary normal shock with an isentropic vortex upstream.
    ShockVortex(ShockVortex),
}

/// Parameters of the shock–vortex interaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockVortex {
    pub gamma: f64,
    pub mach: f64,
    pub shock_x: f64,
    pub center: (f64, f64),
    pub epsilon: f64,
    pub alpha: f64,
    pub rc: f64,
}

impl Default for ShockVortex {
    fn default() -> Self {
        Self {
            gamma: 1.4,
            mach: 1.1,
            shock_x: 0.5,
            center: (0.25, 0.5),
            epsilon: 1.378106,
            alpha: 0.204,
            rc: 0.4,
        }
    }
}

impl ShockVortex {
    /// Upstream primitive state `(ρ, v1, v2, P)`.
    pub fn left_primitive(&self) -> [f64; 4] {
        [1.0, self.mach * self.gamma.sqrt(), 0.0, 1.0]
    }

    /// Downstream primitive state from the Rankine–Hugoniot relations.
    pub fn right_primitive(&self) -> [f64; 4] {
        let [rho_l, v_l, _, p_l] = self.left_primitive();
        let (g, m2) = (self.gamma, self.mach * self.mach);
        let rho_r = rho_l * (g + 1.0) * m2 / (2.0 + (g - 1.0) * m2);
        let v_r = v_l * (2.0 + (g - 1.0) * m2) / ((g + 1.0) * m2);
        let p_r = p_l * (1.0 + 2.0 * g / (g + 1.0) * (m2 - 1.0));
        [rho_r, v_r, 0.0, p_r]
    }

    /// Conserved upstream state (used as the inflow state).
    pub fn left_state(&self) -> State {
        let [r, u, v, p] = self.left_primitive();
        conserved(r, u, v, p, self.gamma)
    }

    pub fn state(&self, x: f64, y: f64) -> State {
        let g = self.gamma;
        if x >= self.shock_x {
            let [r, u, v, p] = self.right_primitive();
            return conserved(r, u, v, p, g);
        }
        let [rho_l, u_l, v_l, p_l] = self.left_primitive();
        let t_l = p_l / rho_l;
        let (xb, yb) = (x - self.center.0, y - self.center.1);
        let tau2 = (xb * xb + yb * yb) / (self.rc * self.rc);
        let e = (self.alpha * (1.0 - tau2)).exp();
        let du = self.epsilon / self.rc * e * yb;
        let dv = -self.epsilon / self.rc * e * xb;
        let dt = -(g - 1.0) * self.epsilon * self.epsilon / (4.0 * self.alpha * g) * e * e;
        let t = t_l + dt;
        // Isentropic: P/ρ^γ unchanged.
        let rho = rho_l * (t / t_l).powf(1.0 / (g - 1.0));
        conserved(rho, u_l + du, v_l + dv, rho * t, g)
    }
}

impl InitialCondition {
    pub fn eval(&self, x: f64, y: f64) -> State {
        match self {
            InitialCondition::SinePlane => [(PI * (x + y)).sin(), 0.0, 0.0, 0.0],
            InitialCondition::Constant { value } => *value,
            InitialCondition::ShockVortex(sv) => sv.state(x, y),
        }
    }
}

/// Global Lax–Friedrichs flux `½(f(uL)+f(uR)) − (α/2)(uR−uL)`.
#[inline]
pub fn lf_flux(problem: &ProblemSpec, ul: &State, ur: &State, dir: usize, alpha: f64) -> State {
    let fl = problem.flux(ul, dir);
    let fr = problem.flux(ur, dir);
    let mut out = [0.0; 4];
    for c in 0..problem.n_comp() {
        out[c] = 0.5 * (fl[c] + fr[c]) - 0.5 * alpha * (ur[c] - ul[c]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lf_flux_consistency() {
        let adv = ProblemSpec::advection(1.0, 1.0, -1.0, 1.0);
        assert_eq!(lf_flux(&adv, &[0.0; 4], &[1.0, 0.0, 0.0, 0.0], 0, 1.0)[0], 0.0);
        let e = ProblemSpec::euler(1.4);
        let u = conserved(1.0, 0.3, -0.2, 0.8, 1.4);
        let f = lf_flux(&e, &u, &u, 1, 3.0);
        let g = e.flux(&u, 1);
        for c in 0..4 {
            assert!((f[c] - g[c]).abs() < 1e-15);
            assert!(f[c].is_finite());
        }
    }

    #[test]
    fn euler_flux_components() {
        let e = ProblemSpec::euler(1.4);
        let u = conserved(2.0, 1.5, 0.5, 3.0, 1.4);
        let fx = e.flux(&u, 0);
        assert!((fx[0] - 3.0).abs() < 1e-14);
        assert!((fx[1] - (2.0 * 1.5 * 1.5 + 3.0)).abs() < 1e-14);
        assert!((fx[2] - 2.0 * 0.5 * 1.5).abs() < 1e-14);
        assert!((fx[3] - (u[3] + 3.0) * 1.5).abs() < 1e-14);
        let fy = e.flux(&u, 1);
        assert!((fy[2] - (2.0 * 0.25 + 3.0)).abs() < 1e-14);
    }

    #[test]
    fn rankine_hugoniot_conserves_fluxes() {
        let sv = ShockVortex::default();
        let e = ProblemSpec::euler(sv.gamma);
        let [rl, ul, _, pl] = sv.left_primitive();
        let [rr, ur, _, pr] = sv.right_primitive();
        let fl = e.flux(&conserved(rl, ul, 0.0, pl, sv.gamma), 0);
        let fr = e.flux(&conserved(rr, ur, 0.0, pr, sv.gamma), 0);
        for c in 0..4 {
            assert!((fl[c] - fr[c]).abs() < 1e-12, "component {c}");
        }
    }

    #[test]
    fn vortex_core_is_nearly_vacuum_but_admissible() {
        let sv = ShockVortex::default();
        let u = sv.state(0.25, 0.5);
        assert!(u[0] > 0.0 && u[0] < 1e-12);
        let e = ProblemSpec::euler(1.4);
        assert!(e.admissible(&u, 0.0));
    }

    #[test]
    fn interval_region_is_convex() {
        let p = ProblemSpec::burgers(-1.0, 1.0);
        let (a, b) = ([-1.0, 0.0, 0.0, 0.0], [0.7, 0.0, 0.0, 0.0]);
        let mid = [0.5 * (a[0] + b[0]), 0.0, 0.0, 0.0];
        assert!(p.admissible(&a, 0.0) && p.admissible(&b, 0.0) && p.admissible(&mid, 0.0));
        let e = ProblemSpec::euler(1.4);
        let u = conserved(1e-3, 5.0, 0.0, 1e-6, 1.4);
        let v = conserved(2.0, -1.0, 3.0, 0.5, 1.4);
        let m: State = std::array::from_fn(|i| 0.5 * (u[i] + v[i]));
        assert!(e.admissible(&m, 0.0));
    }
}
