//! Linear evolution of tangent fields `w ~ v_k = nabla_t^k u` along a
//! Landau–Lifshitz background, in ε-regularized form. Tangency of the
//! solution is measured, never enforced.

mod background;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use background::{
    assemble_background, assemble_rk, rk_at, velocity, Background, SourceRk, StageCoeffs, Walker,
    MAX_SOURCE_ORDER,
};

use crate::compatibility::{check_compat, extrinsic_jet, intrinsic_jet};
use crate::error::{Error, Result};
use crate::flow::{stability_bound, Scheme};
use crate::operators::{boundary_fluxes, l2_norm, max_boundary_flux, resolution_tol};
use crate::state::{SphereField, Vec3Field};
use crate::vec3;

/// One classical RK4 step with coefficients at `t`, `t + dt/2`, `t + dt`.
pub fn step_linearized(
    omega: &Vec3Field,
    stages: [&StageCoeffs; 3],
    epsilon: f64,
    dt: f64,
) -> Result<Vec3Field> {
    let bound = stability_bound(omega.grid(), epsilon, Scheme::Rk4Project);
    if dt > bound {
        return Err(Error::Cfl { dt, bound });
    }
    let k1 = stages[0].apply(omega, epsilon);
    let mut s = omega.clone();
    s.axpy(0.5 * dt, &k1);
    let k2 = stages[1].apply(&s, epsilon);
    let mut s = omega.clone();
    s.axpy(0.5 * dt, &k2);
    let k3 = stages[1].apply(&s, epsilon);
    let mut s = omega.clone();
    s.axpy(dt, &k3);
    let k4 = stages[2].apply(&s, epsilon);
    let mut out = omega.clone();
    out.axpy(dt / 6.0, &k1);
    out.axpy(dt / 3.0, &k2);
    out.axpy(dt / 3.0, &k3);
    out.axpy(dt / 6.0, &k4);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearConfig {
    pub epsilon: f64,
    /// Sample every this many background steps (and at the end).
    pub record_every: usize,
    /// Multiplies `R_k`; `1` for the actual problem.
    pub source_scale: f64,
    /// Compare against `v_k` from the background when `k <= 2`.
    pub defect: bool,
}

impl Default for LinearConfig {
    fn default() -> Self {
        LinearConfig { epsilon: 0.0, record_every: 1, source_scale: 1.0, defect: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRow {
    pub t: f64,
    pub tangency_drift: f64,
    pub boundary_flux: f64,
    pub vk_defect: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct LinearSolution {
    pub k: usize,
    pub epsilon: f64,
    pub times: Vec<f64>,
    pub omegas: Vec<Vec3Field>,
    /// Background states at `times`.
    pub states: Vec<SphereField>,
    pub diagnostics: Vec<DiagnosticRow>,
    pub warnings: Vec<String>,
}

impl LinearSolution {
    pub fn max_tangency_drift(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.tangency_drift).fold(0.0, f64::max)
    }

    /// `max_t ||w - v_k||_{L2}` over samples where it was computed.
    pub fn max_defect(&self) -> Option<f64> {
        self.diagnostics.iter().filter_map(|d| d.vk_defect).reduce(f64::max)
    }

    /// Columns `t,tangency_drift,boundary_flux,vk_defect`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,tangency_drift,boundary_flux,vk_defect")?;
        for d in &self.diagnostics {
            let defect = d.vk_defect.map(|v| v.to_string()).unwrap_or_default();
            writeln!(w, "{},{},{},{}", d.t, d.tangency_drift, d.boundary_flux, defect)?;
        }
        Ok(())
    }
}

/// Per-sample `max |<w, u>|`.
pub fn tangency_drift(omegas: &[Vec3Field], states: &[SphereField]) -> Vec<f64> {
    omegas.iter().zip(states).map(|(w, u)| w.tangency_drift(u)).collect()
}

/// `v_2` along the flow by a centered difference of `v_1`:
/// `nabla_t v_1 ~ (v_1(t+dt) - v_1(t-dt)) / 2dt + |v_1|^2 u`.
fn v2_fd(prev: &Vec3Field, cur: &Vec3Field, next: &Vec3Field, dt: f64) -> Vec3Field {
    let a = velocity(prev);
    let b = velocity(next);
    let v1 = velocity(cur);
    let mut out = (&b - &a).scaled(0.5 / dt);
    out.axpy(1.0, &cur.mul_scalar(&v1.dot(&v1)));
    out
}

/// Integrate the linearized problem of order `k` from `omega0` along `bg`.
pub fn solve_linear(
    omega0: &Vec3Field,
    bg: &Background,
    k: usize,
    cfg: &LinearConfig,
) -> Result<LinearSolution> {
    if k == 0 || k > MAX_SOURCE_ORDER {
        return Err(Error::OrderTooHigh { order: k, max: MAX_SOURCE_ORDER });
    }
    if cfg.record_every == 0 {
        return Err(Error::InvalidArgument("record_every must be >= 1".into()));
    }
    if !(0.0..1.0).contains(&cfg.epsilon) {
        return Err(Error::InvalidArgument(format!("epsilon = {} outside [0, 1)", cfg.epsilon)));
    }
    omega0.ensure_same_grid(bg.traj.states[0].as_field())?;
    let dt = bg.dt();
    let bound = stability_bound(omega0.grid(), cfg.epsilon, Scheme::Rk4Project);
    if dt > bound {
        return Err(Error::Cfl { dt, bound });
    }
    let n = bg.steps();
    let mut walker = bg.walker();
    let coeffs = |u: &Vec3Field| StageCoeffs::new(u, k, cfg.source_scale);

    let mut out = LinearSolution {
        k,
        epsilon: cfg.epsilon,
        times: Vec::new(),
        omegas: Vec::new(),
        states: Vec::new(),
        diagnostics: Vec::new(),
        warnings: Vec::new(),
    };
    let mut omega = omega0.clone();
    let mut cur = walker.current().clone();
    let mut stage0 = coeffs(&cur)?;
    let (mut mid, mut next) = walker.advance()?;
    let defect_ok = cfg.defect && k <= 2 && cfg.source_scale == 1.0;
    let mut record = |i: usize, omega: &Vec3Field, prev: Option<&Vec3Field>, cur: &Vec3Field, next: Option<&Vec3Field>| -> Result<()> {
        let u = SphereField::new(cur.clone())?;
        let defect = if !defect_ok {
            None
        } else if k == 1 {
            Some(l2_norm(&(omega - &velocity(cur))))
        } else if i == 0 {
            let jet = intrinsic_jet(&extrinsic_jet(&u, 2)?)?;
            Some(l2_norm(&(omega - jet.coeff(2))))
        } else {
            match (prev, next) {
                (Some(p), Some(q)) => Some(l2_norm(&(omega - &v2_fd(p, cur, q, dt)))),
                _ => None,
            }
        };
        out.diagnostics.push(DiagnosticRow {
            t: i as f64 * dt,
            tangency_drift: omega.tangency_drift(&u),
            boundary_flux: max_boundary_flux(omega),
            vk_defect: defect,
        });
        out.times.push(i as f64 * dt);
        out.omegas.push(omega.clone());
        out.states.push(u);
        Ok(())
    };
    record(0, &omega, None, &cur, Some(&next))?;
    for i in 1..=n {
        let s_mid = coeffs(&mid)?;
        let s_next = coeffs(&next)?;
        omega = step_linearized(&omega, [&stage0, &s_mid, &s_next], cfg.epsilon, dt)?;
        if !omega.is_finite() {
            return Err(Error::BlowUp { time: i as f64 * dt, growth: f64::INFINITY });
        }
        let prev = std::mem::replace(&mut cur, next.clone());
        stage0 = s_next;
        let lookahead = if i < n {
            let (m, q) = walker.advance()?;
            mid = m;
            next = q;
            Some(&next)
        } else {
            None
        };
        if i % cfg.record_every == 0 || i == n {
            record(i, &omega, Some(&prev), &cur, lookahead)?;
        }
    }
    Ok(out)
}

/// Solve for `w ~ v_k` with `w(0) = v_k(0)` from the intrinsic jet of the
/// background's initial state.
pub fn solve_vk(bg: &Background, k: usize, cfg: &LinearConfig) -> Result<LinearSolution> {
    let u0 = &bg.traj.states[0];
    let mut warnings = Vec::new();
    if !u0.grid().is_periodic() {
        let rep = check_compat(u0, k, None)?;
        if !rep.pass() {
            warnings.push(format!("initial data is not compatible to order {k}"));
        }
    }
    let jet = intrinsic_jet(&extrinsic_jet(u0, k)?)?;
    let mut sol = solve_linear(jet.coeff(k), bg, k, cfg)?;
    sol.warnings = warnings;
    Ok(sol)
}

/// Compares the boundary flux of `d_t w (0)` with `nabla_nu v_{k+1}(0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialFluxAudit {
    pub k: usize,
    pub epsilon: f64,
    pub tolerance: f64,
    pub dt_omega_flux: f64,
    pub intrinsic_next: f64,
    pub agree: bool,
}

pub fn initial_flux_audit(u0: &SphereField, k: usize, epsilon: f64) -> Result<InitialFluxAudit> {
    if k == 0 || k > MAX_SOURCE_ORDER {
        return Err(Error::OrderTooHigh { order: k, max: MAX_SOURCE_ORDER });
    }
    let rep = check_compat(u0, k + 1, None)?;
    let jet = intrinsic_jet(&extrinsic_jet(u0, k)?)?;
    let stage = StageCoeffs::new(u0, k, 1.0)?;
    let dw = stage.apply(jet.coeff(k), epsilon);
    let dt_omega_flux = boundary_fluxes(&dw).iter().fold(0.0f64, |m, b| m.max(vec3::norm(b.value)));
    let tolerance = resolution_tol(u0.grid());
    let intrinsic_next = rep.per_order[k + 1].intrinsic_residual;
    Ok(InitialFluxAudit {
        k,
        epsilon,
        tolerance,
        dt_omega_flux,
        intrinsic_next,
        agree: (dt_omega_flux <= tolerance) == (intrinsic_next <= tolerance),
    })
}
