use crate::compatibility::{extrinsic_jet, intrinsic_jet};
use crate::error::{Error, Result};
use crate::flow::{rhs_raw, step, Trajectory};
use crate::operators::{gradient, gradient_sq, laplacian, tension_raw};
use crate::state::{normalize_to_sphere, ScalarField, SphereField, TangentField, Vec3Field};
use crate::vec3;

pub const MAX_SOURCE_ORDER: usize = 3;

/// Nonlinear trajectory with `v_1 = u x tau(u)` at every snapshot.
#[derive(Clone, Debug)]
pub struct Background {
    pub traj: Trajectory,
    pub v1: Vec<TangentField>,
}

impl Background {
    pub fn dt(&self) -> f64 {
        self.traj.cfg.dt
    }

    pub fn steps(&self) -> usize {
        self.traj.cfg.steps().expect("validated by evolve")
    }

    /// State after `n` fine steps, re-generated from the nearest snapshot.
    pub fn state_at_step(&self, n: usize) -> Result<Vec3Field> {
        let every = self.traj.cfg.record_every;
        let snap = (n / every).min(self.traj.states.len() - 1);
        let mut u = self.traj.states[snap].as_field().clone();
        for _ in snap * every..n {
            u = step(&u, &self.traj.cfg)?;
        }
        Ok(u)
    }

    pub fn walker(&self) -> Walker<'_> {
        let u = self.traj.states[0].as_field().clone();
        let f = rhs_raw(&u, 0.0);
        Walker { bg: self, n: 0, u, f }
    }
}

/// `v_1 = u x tau(u)`; along the ε = 0 flow this is `d_t u`.
pub fn velocity(u: &Vec3Field) -> Vec3Field {
    u.cross(&tension_raw(u))
}

/// Requires an ε = 0 projected trajectory: the linearized problems are
/// posed along the Landau–Lifshitz flow itself.
pub fn assemble_background(traj: Trajectory) -> Result<Background> {
    if traj.cfg.epsilon != 0.0 || traj.cfg.reverse || !traj.cfg.renormalize {
        return Err(Error::InvalidArgument(
            "background must be a forward, projected run with epsilon = 0".into(),
        ));
    }
    let v1 = traj
        .states
        .iter()
        .map(|u| TangentField::measured(velocity(u), u))
        .collect();
    Ok(Background { traj, v1 })
}

/// Sequential regeneration of the fine steps of a background.
pub struct Walker<'a> {
    bg: &'a Background,
    n: usize,
    u: Vec3Field,
    f: Vec3Field,
}

impl Walker<'_> {
    pub fn step_index(&self) -> usize {
        self.n
    }

    pub fn current(&self) -> &Vec3Field {
        &self.u
    }

    /// Advance one step; returns `(u_mid, u_next)` with the midpoint from
    /// the cubic Hermite interpolant through `(u, du/dt)` at both ends,
    /// projected to the sphere.
    pub fn advance(&mut self) -> Result<(Vec3Field, Vec3Field)> {
        let cfg = &self.bg.traj.cfg;
        let next = step(&self.u, cfg)?;
        let fn1 = rhs_raw(&next, 0.0);
        let mut mid = &self.u + &next;
        mid = mid.scaled(0.5);
        mid.axpy(cfg.dt / 8.0, &(&self.f - &fn1));
        let mid = normalize_to_sphere(&mid)?.into_field();
        self.n += 1;
        if self.n.is_multiple_of(cfg.record_every) || self.n == self.bg.steps() {
            if let Some(j) = self.bg.traj.sample_index(self.n as f64 * cfg.dt) {
                if self.bg.traj.states[j].as_field().data() != next.data() {
                    return Err(Error::InvalidArgument("background regeneration diverged from snapshots".into()));
                }
            }
        }
        self.u = next.clone();
        self.f = fn1;
        Ok((mid, next))
    }
}

/// Background-dependent coefficients of the linearized operator at one time.
#[derive(Clone, Debug)]
pub struct StageCoeffs {
    pub u: Vec3Field,
    pub v1: Vec3Field,
    pub du: Vec<Vec3Field>,
    pub lap_u: Vec3Field,
    pub grad_sq: ScalarField,
    /// Tangent source `R_k`, absent for `k = 1`.
    pub rk: Option<Vec3Field>,
}

impl StageCoeffs {
    pub fn new(u: &Vec3Field, k: usize, source_scale: f64) -> Result<Self> {
        let rk = if k >= 2 && source_scale != 0.0 {
            let sphere = SphereField::new(u.clone())?;
            Some(rk_at(&sphere, k)?.0.into_field().scaled(source_scale))
        } else {
            None
        };
        Ok(StageCoeffs {
            u: u.clone(),
            v1: velocity(u),
            du: gradient(u),
            lap_u: laplacian(u),
            grad_sq: gradient_sq(u),
            rk,
        })
    }

    /// Right-hand side of
    ///
    /// ```text
    /// d_t w + <w, v1> u = eps (lap w + 2 <du, dw> u + <lap u, w> u + |du|^2 w)
    ///                   + u x (lap w + |du|^2 w) + (eps I + u x) R_k
    /// ```
    ///
    /// given `lap w` and `d w` (so spectral and stencil callers share it).
    pub fn apply_with(&self, w: &Vec3Field, lap_w: &Vec3Field, dw: &[Vec3Field], eps: f64) -> Vec3Field {
        let grid = *w.grid();
        let gd = crate::operators::grad_dot(&self.du, dw);
        let (u, v1, lu, gs) = (self.u.data(), self.v1.data(), self.lap_u.data(), self.grad_sq.data());
        let (wd, lw) = (w.data(), lap_w.data());
        let rk = self.rk.as_ref().map(|r| r.data());
        let data = (0..grid.len())
            .map(|i| {
                let inner = vec3::axpy(lw[i], gs[i], wd[i]);
                let normal = 2.0 * gd.data()[i] + vec3::dot(lu[i], wd[i]);
                let mut out = vec3::scale(-vec3::dot(wd[i], v1[i]), u[i]);
                out = vec3::axpy(out, eps, vec3::axpy(inner, normal, u[i]));
                out = vec3::add(out, vec3::cross(u[i], inner));
                if let Some(r) = rk {
                    out = vec3::axpy(out, eps, r[i]);
                    out = vec3::add(out, vec3::cross(u[i], r[i]));
                }
                out
            })
            .collect();
        Vec3Field::from_vec(grid, data).expect("same grid")
    }

    /// Stencil version of [`StageCoeffs::apply_with`].
    pub fn apply(&self, w: &Vec3Field, eps: f64) -> Vec3Field {
        self.apply_with(w, &laplacian(w), &gradient(w), eps)
    }
}

/// `R_k` at one background state, defined by the identity
///
/// ```text
/// nabla_t v_k = u x (lap v_k + |du|^2 v_k) + u x R_k,   R_k tangent,
/// ```
///
/// i.e. `R_k = P_u(-u x v_{k+1} - lap v_k - |du|^2 v_k)` with the intrinsic
/// jet of the ε = 0 flow at that state. Returns the projected source and
/// the normal component removed by the projection.
pub fn rk_at(u: &SphereField, k: usize) -> Result<(TangentField, f64)> {
    if k == 0 || k > MAX_SOURCE_ORDER {
        return Err(Error::OrderTooHigh { order: k, max: MAX_SOURCE_ORDER });
    }
    let jet = intrinsic_jet(&extrinsic_jet(u, k + 1)?)?;
    let vk = jet.coeff(k);
    let gs = gradient_sq(u);
    let mut raw = u.as_field().cross(jet.coeff(k + 1)).scaled(-1.0);
    raw.axpy(-1.0, &laplacian(vk));
    raw.axpy(-1.0, &vk.mul_scalar(&gs));
    let normal = raw.tangency_drift(u);
    let p = crate::operators::project_tangent(&raw, u);
    Ok((p, normal))
}

/// `R_k` along the recorded snapshots.
#[derive(Clone, Debug)]
pub struct SourceRk {
    pub k: usize,
    pub times: Vec<f64>,
    pub values: Vec<TangentField>,
    /// Largest normal component removed by the projection.
    pub normal_drift: f64,
}

/// Zero for `k = 1`; the identity-defined commutator remainder for
/// `k = 2, 3`.
pub fn assemble_rk(bg: &Background, k: usize) -> Result<SourceRk> {
    if k == 0 || k > MAX_SOURCE_ORDER {
        return Err(Error::OrderTooHigh { order: k, max: MAX_SOURCE_ORDER });
    }
    let mut values = Vec::new();
    let mut normal_drift = 0.0f64;
    for u in &bg.traj.states {
        if k == 1 {
            values.push(TangentField::measured(Vec3Field::zeros(*u.grid()), u));
        } else {
            let (r, d) = rk_at(u, k)?;
            normal_drift = normal_drift.max(d);
            values.push(r);
        }
    }
    Ok(SourceRk { k, times: bg.traj.times.clone(), values, normal_drift })
}
