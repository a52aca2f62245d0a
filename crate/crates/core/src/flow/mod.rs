//! Time integration of `d_t u = (eps I + u x) tau(u)` with mirror (Neumann)
//! or periodic boundaries, energy monitoring, and eps-sweeps.

mod helical;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use helical::{helical_dispersion_residual, helical_exact, helical_semi_discrete};

use crate::error::{Error, Result};
use crate::operators::{
    dirichlet_energy, gradient_sq, inner, l2_norm, max_boundary_flux, resolution_tol,
    sobolev_norm_unchecked, tension_raw, EnergyTrace, SobolevOrder,
};
use crate::state::{normalize_to_sphere, Grid, SphereField, Vec3Field};
use crate::vec3;

/// Drift allowed on stored states when renormalization is off.
pub const UNPROJECTED_UNIT_TOL: f64 = 1e-6;

/// Growth of `max |du|` that counts as blow-up.
pub const BLOWUP_FACTOR: f64 = 1e3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Rk4Project,
    HeunProject,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    pub epsilon: f64,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub renormalize: bool,
    pub record_every: usize,
    /// Sobolev orders recorded in the trace.
    pub monitor_orders: Vec<usize>,
    /// Integrate `d_t u = -u x lap u` instead (only for `epsilon = 0`).
    pub reverse: bool,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            epsilon: 0.0,
            dt: 1e-4,
            t_end: 0.1,
            scheme: Scheme::Rk4Project,
            renormalize: true,
            record_every: 1,
            monitor_orders: Vec::new(),
            reverse: false,
        }
    }
}

impl FlowConfig {
    /// Number of steps; `t_end` must be an integer multiple of `dt`.
    pub fn steps(&self) -> Result<usize> {
        let r = self.t_end / self.dt;
        let n = r.round();
        if n < 1.0 || (r - n).abs() > 1e-6 * n {
            return Err(Error::InvalidArgument(format!(
                "t_end = {} is not a positive integer multiple of dt = {}",
                self.t_end, self.dt
            )));
        }
        Ok(n as usize)
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(Error::InvalidArgument(format!("epsilon = {} outside [0, 1)", self.epsilon)));
        }
        if !(self.dt > 0.0 && self.t_end > 0.0) {
            return Err(Error::InvalidArgument("dt and t_end must be positive".into()));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidArgument("record_every must be >= 1".into()));
        }
        if self.reverse && self.epsilon != 0.0 {
            return Err(Error::InvalidArgument("time reversal requires epsilon = 0".into()));
        }
        for &k in &self.monitor_orders {
            SobolevOrder::new(k)?;
        }
        self.steps()?;
        let bound = stability_bound(grid, self.epsilon, self.scheme);
        if self.dt > bound {
            return Err(Error::Cfl { dt: self.dt, bound });
        }
        Ok(())
    }
}

/// Largest stable step. With `rho = sum_a 4/h_a^2` the spectral radius of the
/// Laplacian, the linearization about a constant state has eigenvalues
/// `-(eps +- i) lambda`, `0 <= lambda <= rho`. RK4 covers the imaginary axis
/// up to `2 sqrt 2` and the real axis up to about `2.78`, so
/// `dt <= 2 / (rho (1 + eps))` keeps a margin for the nonlinear terms. Heun
/// does not contain the imaginary axis; its bound is halved and it relies on
/// the projection for ε = 0.
pub fn stability_bound(grid: &Grid, epsilon: f64, scheme: Scheme) -> f64 {
    let rho: f64 = grid.spacing()[..grid.dim()].iter().map(|h| 4.0 / (h * h)).sum();
    let c = match scheme {
        Scheme::Rk4Project => 2.0,
        Scheme::HeunProject => 1.0,
    };
    c / (rho * (1.0 + epsilon))
}

/// `(eps I + u x) tau(u)` on a raw (possibly slightly non-unit) field.
pub fn rhs_raw(u: &Vec3Field, epsilon: f64) -> Vec3Field {
    let tau = tension_raw(u);
    let data = u
        .data()
        .iter()
        .zip(tau.data())
        .map(|(&v, &t)| vec3::axpy(vec3::cross(v, t), epsilon, t))
        .collect();
    Vec3Field::from_vec(*u.grid(), data).expect("same grid")
}

pub fn rhs(u: &SphereField, epsilon: f64) -> Vec3Field {
    rhs_raw(u, epsilon)
}

fn rhs_dir(u: &Vec3Field, epsilon: f64, reverse: bool) -> Vec3Field {
    let f = rhs_raw(u, epsilon);
    if reverse {
        f.scaled(-1.0)
    } else {
        f
    }
}

/// One unprojected step of the chosen scheme.
pub fn step_raw(u: &Vec3Field, epsilon: f64, dt: f64, scheme: Scheme, reverse: bool) -> Vec3Field {
    let f = |v: &Vec3Field| rhs_dir(v, epsilon, reverse);
    match scheme {
        Scheme::Rk4Project => {
            let k1 = f(u);
            let mut s = u.clone();
            s.axpy(0.5 * dt, &k1);
            let k2 = f(&s);
            let mut s = u.clone();
            s.axpy(0.5 * dt, &k2);
            let k3 = f(&s);
            let mut s = u.clone();
            s.axpy(dt, &k3);
            let k4 = f(&s);
            let mut out = u.clone();
            out.axpy(dt / 6.0, &k1);
            out.axpy(dt / 3.0, &k2);
            out.axpy(dt / 3.0, &k3);
            out.axpy(dt / 6.0, &k4);
            out
        }
        Scheme::HeunProject => {
            let k1 = f(u);
            let mut s = u.clone();
            s.axpy(dt, &k1);
            let k2 = f(&s);
            let mut out = u.clone();
            out.axpy(0.5 * dt, &k1);
            out.axpy(0.5 * dt, &k2);
            out
        }
    }
}

/// One step followed by the pointwise projection to the sphere when
/// `cfg.renormalize` is set.
pub fn step(u: &Vec3Field, cfg: &FlowConfig) -> Result<Vec3Field> {
    let raw = step_raw(u, cfg.epsilon, cfg.dt, cfg.scheme, cfg.reverse);
    if cfg.renormalize {
        Ok(normalize_to_sphere(&raw)?.into_field())
    } else {
        Ok(raw)
    }
}

fn max_grad(u: &Vec3Field) -> f64 {
    gradient_sq(u).max().max(0.0).sqrt()
}

/// Sampled solution of one run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub grid: Grid,
    pub cfg: FlowConfig,
    pub times: Vec<f64>,
    pub states: Vec<SphereField>,
    pub trace: EnergyTrace,
    /// Non-fatal observations (e.g. incompatible initial data).
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn final_state(&self) -> &SphereField {
        self.states.last().expect("trajectory has at least one sample")
    }

    /// Snapshot index whose time equals `t` to rounding.
    pub fn sample_index(&self, t: f64) -> Option<usize> {
        let tol = 1e-9 * self.cfg.dt;
        self.times.iter().position(|&s| (s - t).abs() <= tol)
    }
}

fn record(trace: &mut EnergyTrace, t: f64, u: &Vec3Field, orders: &[usize]) {
    let tau = tension_raw(u);
    trace.times.push(t);
    trace.dirichlet.push(dirichlet_energy(u));
    trace.tension_sq.push(inner(&tau, &tau));
    trace.unit_drift.push(u.unit_drift());
    for &k in orders {
        let order = SobolevOrder::new(k).expect("validated");
        trace.sobolev.entry(k).or_default().push(sobolev_norm_unchecked(u, order));
    }
}

/// Integrate from `u0` to `cfg.t_end`, sampling every `record_every` steps
/// and at the final time. Halts with [`Error::BlowUp`] when `max |du|`
/// becomes non-finite or grows by [`BLOWUP_FACTOR`].
pub fn evolve(u0: &SphereField, cfg: &FlowConfig) -> Result<Trajectory> {
    let grid = *u0.grid();
    cfg.validate(&grid)?;
    let n = cfg.steps()?;
    let mut warnings = Vec::new();
    if !grid.is_periodic() {
        let flux = max_boundary_flux(u0);
        let tol = resolution_tol(&grid);
        if flux > tol {
            warnings.push(format!(
                "initial data violates order-0 compatibility: boundary flux {flux:.3e} > {tol:.3e}"
            ));
        }
    }
    let g0 = max_grad(u0).max(1e-6);
    let mut u = u0.as_field().clone();
    let mut times = vec![0.0];
    let mut states = vec![u0.clone()];
    let mut trace = EnergyTrace::default();
    record(&mut trace, 0.0, &u, &cfg.monitor_orders);
    for i in 1..=n {
        let t = i as f64 * cfg.dt;
        u = match step(&u, cfg) {
            Ok(v) => v,
            Err(_) => return Err(Error::BlowUp { time: t, growth: f64::INFINITY }),
        };
        let g = max_grad(&u);
        if !u.is_finite() || !g.is_finite() || g > BLOWUP_FACTOR * g0 {
            return Err(Error::BlowUp { time: t, growth: g / g0 });
        }
        if i % cfg.record_every == 0 || i == n {
            let tol = if cfg.renormalize { crate::state::UNIT_TOL } else { UNPROJECTED_UNIT_TOL };
            states.push(SphereField::with_tol(u.clone(), tol)?);
            times.push(t);
            record(&mut trace, t, &u, &cfg.monitor_orders);
        }
    }
    Ok(Trajectory { grid, cfg: cfg.clone(), times, states, trace, warnings })
}

/// `max_i |(E_{i+1} - E_{i-1}) / (t_{i+1} - t_{i-1}) + eps |tau|^2_i| / |tau|^2_0`
/// over interior samples; measures the energy law `dE/dt = -eps int |tau|^2`.
pub fn dissipation_residual(traj: &Trajectory, epsilon: f64) -> Result<f64> {
    let tr = &traj.trace;
    if tr.len() < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: tr.len() });
    }
    let scale = if tr.tension_sq[0] > 0.0 { tr.tension_sq[0] } else { 1.0 };
    let mut worst = 0.0f64;
    for i in 1..tr.len() - 1 {
        let de = (tr.dirichlet[i + 1] - tr.dirichlet[i - 1]) / (tr.times[i + 1] - tr.times[i - 1]);
        worst = worst.max((de + epsilon * tr.tension_sq[i]).abs() / scale);
    }
    Ok(worst)
}

/// `max_t ||u_a(t) - u_b(t)||_{L2}` over common sample times.
pub fn trajectory_distance(a: &Trajectory, b: &Trajectory) -> f64 {
    let mut d = 0.0f64;
    for (i, &t) in a.times.iter().enumerate() {
        if let Some(j) = b.sample_index(t) {
            d = d.max(l2_norm(&(a.states[i].as_field() - b.states[j].as_field())));
        }
    }
    d
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub epsilon: f64,
    /// `None` when the run succeeded.
    pub error: Option<String>,
    pub final_energy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsSweepReport {
    pub entries: Vec<SweepEntry>,
    /// `(eps_i, eps_{i+1}, distance)` for consecutive successful runs.
    pub distances: Vec<(f64, f64, f64)>,
}

impl EpsSweepReport {
    pub fn strictly_decreasing(&self) -> bool {
        self.distances.windows(2).all(|w| w[1].2 < w[0].2)
    }
}

/// Solve for each `eps` on the shared grid and step size (runs in parallel)
/// and report consecutive trajectory distances. Failed runs are recorded and
/// skipped.
pub fn eps_sweep(u0: &SphereField, eps_list: &[f64], cfg: &FlowConfig) -> Result<EpsSweepReport> {
    if eps_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument("eps_list must be strictly decreasing".into()));
    }
    let runs: Vec<Result<Trajectory>> = eps_list
        .par_iter()
        .map(|&e| evolve(u0, &FlowConfig { epsilon: e, ..cfg.clone() }))
        .collect();
    let entries = eps_list
        .iter()
        .zip(&runs)
        .map(|(&epsilon, r)| SweepEntry {
            epsilon,
            error: r.as_ref().err().map(|e| e.to_string()),
            final_energy: r.as_ref().ok().map(|t| *t.trace.dirichlet.last().expect("nonempty")),
        })
        .collect();
    let ok: Vec<(f64, &Trajectory)> = eps_list
        .iter()
        .zip(&runs)
        .filter_map(|(&e, r)| r.as_ref().ok().map(|t| (e, t)))
        .collect();
    let distances = ok
        .windows(2)
        .map(|w| (w[0].0, w[1].0, trajectory_distance(w[0].1, w[1].1)))
        .collect();
    Ok(EpsSweepReport { entries, distances })
}
