//! Time jets of the Landau–Lifshitz flow computed from initial data alone,
//! and audits of the Neumann compatibility conditions they must satisfy.
//!
//! The extrinsic jet `V_j = d^j u / dt^j (0)` follows from differentiating
//! `d_t u = u x lap u` repeatedly:
//!
//! ```text
//! V_k = sum_{i+j=k-1} C(k-1, i) V_i x lap V_j
//! ```
//!
//! The intrinsic jet `v_j(0) = nabla_t^j u (0)` is obtained by applying the
//! covariant derivative of the pull-back bundle to truncated series built
//! from the extrinsic jet.

mod jet;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use jet::{covariant_derivative, ScalarSeries, Series};

use crate::error::{Error, Result};
use crate::operators::{boundary_fluxes, laplacian, resolution_tol};
use crate::state::{SphereField, Vec3Field, UNIT_TOL};
use crate::vec3;

pub const MAX_JET_ORDER: usize = 6;

/// Tangency tolerance for `V_1` against `V_0`.
pub const JET_TANGENCY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JetFlavor {
    Extrinsic,
    Intrinsic,
}

/// Coefficients `V_0 .. V_k` (extrinsic) or `u_0, v_1(0) .. v_k(0)`
/// (intrinsic) on a shared grid.
#[derive(Clone, Debug)]
pub struct TimeJet {
    flavor: JetFlavor,
    coeffs: Vec<Vec3Field>,
}

impl TimeJet {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn flavor(&self) -> JetFlavor {
        self.flavor
    }

    pub fn coeffs(&self) -> &[Vec3Field] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> &Vec3Field {
        &self.coeffs[j]
    }

    pub fn base(&self) -> &Vec3Field {
        &self.coeffs[0]
    }

    /// Largest `max |<c_j, u_0>|` over `j >= 1`.
    pub fn tangency_drift(&self) -> f64 {
        self.coeffs[1..]
            .iter()
            .map(|c| c.tangency_drift(&self.coeffs[0]))
            .fold(0.0, f64::max)
    }
}

/// `V_0 .. V_k` by the binomial recursion.
pub fn extrinsic_jet(u0: &SphereField, k: usize) -> Result<TimeJet> {
    if k > MAX_JET_ORDER {
        return Err(Error::OrderTooHigh { order: k, max: MAX_JET_ORDER });
    }
    let mut v: Vec<Vec3Field> = vec![u0.as_field().clone()];
    let mut lap: Vec<Vec3Field> = Vec::new();
    for m in 1..=k {
        lap.push(laplacian(&v[m - 1]));
        let mut next = Vec3Field::zeros(*u0.grid());
        for i in 0..m {
            let term = v[i].cross(&lap[m - 1 - i]);
            next.axpy(jet::binom(m - 1, i), &term);
        }
        v.push(next);
    }
    let jet = TimeJet { flavor: JetFlavor::Extrinsic, coeffs: v };
    if k >= 1 {
        let drift = jet.coeffs[1].tangency_drift(&jet.coeffs[0]);
        if drift > JET_TANGENCY_TOL {
            return Err(Error::NotTangent { drift, tol: JET_TANGENCY_TOL });
        }
    }
    Ok(jet)
}

/// `v_j(0)`, `j <= k`, from an extrinsic jet of order `k >= 1`.
pub fn intrinsic_jet(jet: &TimeJet) -> Result<TimeJet> {
    if jet.flavor != JetFlavor::Extrinsic {
        return Err(Error::InvalidArgument("intrinsic_jet expects an extrinsic jet".into()));
    }
    if jet.order() < 1 {
        return Err(Error::InvalidArgument("intrinsic_jet needs order >= 1".into()));
    }
    let u = Series(jet.coeffs.clone());
    let mut w = u.derivative();
    let mut out = vec![jet.coeffs[0].clone(), w.0[0].clone()];
    for _ in 2..=jet.order() {
        w = covariant_derivative(&u, &w);
        out.push(w.0[0].clone());
    }
    Ok(TimeJet { flavor: JetFlavor::Intrinsic, coeffs: out })
}

/// Residuals of one compatibility order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderResidual {
    pub order: usize,
    /// `max |d_nu V_j|` over boundary nodes.
    pub extrinsic_residual: f64,
    /// `max |nabla_nu v_j(0)|` over boundary nodes.
    pub intrinsic_residual: f64,
    pub extrinsic_pass: bool,
    pub intrinsic_pass: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompatReport {
    pub order: usize,
    pub per_order: Vec<OrderResidual>,
    pub tolerance: f64,
    pub grid_spacing: f64,
}

impl CompatReport {
    pub fn pass(&self) -> bool {
        self.per_order.iter().all(|r| r.pass)
    }

    /// Extrinsic and intrinsic verdicts coincide at every order.
    pub fn verdicts_agree(&self) -> bool {
        self.per_order.iter().all(|r| r.extrinsic_pass == r.intrinsic_pass)
    }

    /// Highest `j` such that all orders `<= j` pass, if any.
    pub fn compatible_through(&self) -> Option<usize> {
        self.per_order.iter().take_while(|r| r.pass).last().map(|r| r.order)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

impl fmt::Display for CompatReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "compatibility through order {} (h = {:.3e}, tol = {:.3e})", self.order, self.grid_spacing, self.tolerance)?;
        writeln!(f, "{:>5}  {:>14}  {:>14}  {:>6}", "j", "|d_nu V_j|", "|D_nu v_j|", "pass")?;
        for r in &self.per_order {
            writeln!(
                f,
                "{:>5}  {:>14.6e}  {:>14.6e}  {:>6}",
                r.order,
                r.extrinsic_residual,
                r.intrinsic_residual,
                if r.pass { "yes" } else { "no" }
            )?;
        }
        Ok(())
    }
}

/// Both residual families for orders `0..=k` of one jet pair.
fn residuals(ext: &TimeJet, int: &TimeJet) -> Vec<(f64, f64)> {
    let u0 = ext.base();
    let du0 = boundary_fluxes(u0);
    let u = u0.data();
    (0..=ext.order())
        .map(|j| {
            let de = boundary_fluxes(ext.coeff(j));
            let e = de.iter().fold(0.0f64, |m, b| m.max(vec3::norm(b.value)));
            if j == 0 {
                return (e, e);
            }
            let v = int.coeff(j).data();
            let i = boundary_fluxes(int.coeff(j))
                .iter()
                .zip(&du0)
                .map(|(dv, du)| {
                    let c = vec3::dot(du.value, v[dv.node]);
                    vec3::norm(vec3::axpy(dv.value, c, u[dv.node]))
                })
                .fold(0.0, f64::max);
            (e, i)
        })
        .collect()
}

/// Audit `d_nu V_j = 0` and `nabla_nu v_j(0) = 0` on the boundary for
/// `j <= k`, with `nabla_nu v = d_nu v + <d_nu u_0, v> u_0`. A `tol` of
/// `None` selects the resolution-matched default `max(10 h^2, 1e-8)`.
pub fn check_compat(u0: &SphereField, k: usize, tol: Option<f64>) -> Result<CompatReport> {
    u0.grid().require_neumann("check_compat")?;
    let tolerance = tol.unwrap_or_else(|| resolution_tol(u0.grid()));
    let ext = extrinsic_jet(u0, k)?;
    let int = if k >= 1 { intrinsic_jet(&ext)? } else { ext.clone() };
    let per_order = residuals(&ext, &int)
        .into_iter()
        .enumerate()
        .map(|(j, (e, i))| {
            let (ep, ip) = (e <= tolerance, i <= tolerance);
            OrderResidual {
                order: j,
                extrinsic_residual: e,
                intrinsic_residual: i,
                extrinsic_pass: ep,
                intrinsic_pass: ip,
                pass: ep && ip,
            }
        })
        .collect();
    Ok(CompatReport { order: k, per_order, tolerance, grid_spacing: u0.grid().h_max() })
}

/// Result of comparing the two characterizations of compatibility.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceAudit {
    pub tolerance: f64,
    /// `(j, extrinsic_residual_j, intrinsic_residual_j)`
    pub rows: Vec<(usize, f64, f64)>,
    /// Smallest `C` with `max_{i<=j} intrinsic <= C max(max_{i<=j} extrinsic, tol)`.
    pub c_intrinsic_by_extrinsic: f64,
    /// Same with the roles exchanged.
    pub c_extrinsic_by_intrinsic: f64,
    /// Cumulative verdicts through each order coincide.
    pub agree: bool,
}

/// Whether "all extrinsic residuals through order `j` vanish" and "all
/// intrinsic residuals through order `j` vanish" hold together for every
/// `j <= k`, at the resolution-matched tolerance.
pub fn equivalence_audit(u0: &SphereField, k: usize) -> Result<EquivalenceAudit> {
    let report = check_compat(u0, k, None)?;
    let tol = report.tolerance;
    let mut rows = Vec::new();
    let (mut me, mut mi) = (0.0f64, 0.0f64);
    let (mut c_ie, mut c_ei) = (0.0f64, 0.0f64);
    let mut agree = true;
    for r in &report.per_order {
        me = me.max(r.extrinsic_residual);
        mi = mi.max(r.intrinsic_residual);
        rows.push((r.order, r.extrinsic_residual, r.intrinsic_residual));
        c_ie = c_ie.max(mi / me.max(tol));
        c_ei = c_ei.max(me / mi.max(tol));
        agree &= (me <= tol) == (mi <= tol);
    }
    Ok(EquivalenceAudit {
        tolerance: tol,
        rows,
        c_intrinsic_by_extrinsic: c_ie,
        c_extrinsic_by_intrinsic: c_ei,
        agree,
    })
}

/// Build a sphere field from an arbitrary jet base (used by callers that
/// carry jets of perturbed data).
pub fn base_as_sphere(jet: &TimeJet) -> Result<SphereField> {
    SphereField::with_tol(jet.base().clone(), UNIT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{make_grid, normalize_to_sphere, BoundaryMode, Grid};
    use std::f64::consts::PI;

    fn line(l: f64, n: usize) -> Grid {
        make_grid(1, &[l], &[n], BoundaryMode::NeumannMirror).unwrap()
    }

    fn equatorial(g: Grid, theta: impl Fn(f64) -> f64) -> SphereField {
        normalize_to_sphere(&Vec3Field::from_fn(g, |x| {
            let t = theta(x[0]);
            [t.sin(), 0.0, t.cos()]
        }))
        .unwrap()
    }

    #[test]
    fn constant_data_has_trivial_jets() {
        let g = line(PI, 33);
        let u0 = SphereField::new(Vec3Field::constant(g, [0.0, 0.0, 1.0])).unwrap();
        let ext = extrinsic_jet(&u0, 6).unwrap();
        assert!(ext.coeffs()[1..].iter().all(|c| c.max_norm() == 0.0));
        let int = intrinsic_jet(&ext).unwrap();
        assert!(int.coeffs()[1..].iter().all(|c| c.max_norm() == 0.0));
        let rep = check_compat(&u0, 3, None).unwrap();
        assert!(rep.pass());
        assert!(rep.per_order.iter().all(|r| r.extrinsic_residual == 0.0 && r.intrinsic_residual == 0.0));
    }

    #[test]
    fn first_terms_of_recursion() {
        let g = line(PI, 65);
        let u0 = equatorial(g, |x| 0.7 * x.cos() + 0.2);
        let jet = extrinsic_jet(&u0, 2).unwrap();
        let lap0 = laplacian(u0.as_field());
        let v1 = u0.as_field().cross(&lap0);
        let v2 = &u0.as_field().cross(&laplacian(&v1)) + &v1.cross(&lap0);
        assert!((jet.coeff(1) - &v1).max_norm() < 1e-13);
        assert!((jet.coeff(2) - &v2).max_norm() < 1e-11);

        let int = intrinsic_jet(&jet).unwrap();
        assert!((int.coeff(1) - &v1).max_norm() == 0.0);
        let expected = &v2 + &u0.as_field().mul_scalar(&v1.dot(&v1));
        assert!((int.coeff(2) - &expected).max_norm() < 1e-10);
    }

    #[test]
    fn order_cap() {
        let g = line(PI, 17);
        let u0 = SphereField::new(Vec3Field::constant(g, [1.0, 0.0, 0.0])).unwrap();
        assert!(matches!(extrinsic_jet(&u0, 7), Err(Error::OrderTooHigh { .. })));
    }

    #[test]
    fn periodic_rejected() {
        let g = make_grid(1, &[PI], &[16], BoundaryMode::Periodic).unwrap();
        let u0 = SphereField::new(Vec3Field::constant(g, [1.0, 0.0, 0.0])).unwrap();
        assert!(matches!(check_compat(&u0, 1, None), Err(Error::PeriodicRejected { .. })));
    }

    #[test]
    fn tangency_cascade() {
        let g = make_grid(2, &[PI, 2.0], &[33, 29], BoundaryMode::NeumannMirror).unwrap();
        let u0 = normalize_to_sphere(&Vec3Field::from_fn(g, |x| {
            let t = 0.6 * x[0].cos() + 0.3 * (PI * x[1] / 2.0).cos();
            let p = 0.4 * (2.0 * x[0]).cos();
            [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()]
        }))
        .unwrap();
        let ext = extrinsic_jet(&u0, 4).unwrap();
        let int = intrinsic_jet(&ext).unwrap();
        let scale = int.coeffs().iter().map(|c| c.max_norm()).fold(1.0, f64::max);
        assert!(int.tangency_drift() <= 1e-8f64.max(1e-14 * scale), "{}", int.tangency_drift());
    }

    #[test]
    fn compatible_cosine_profile_converges() {
        let mut res = Vec::new();
        // beyond N = 128 the order-2 residual reaches the rounding floor
        // of four stacked second differences
        for n in [32, 64, 128] {
            let g = line(PI, n + 1);
            let u0 = equatorial(g, |x| 0.3 * x.cos());
            res.push(check_compat(&u0, 2, None).unwrap());
        }
        for j in 0..=2 {
            let e: Vec<f64> = res.iter().map(|r| r.per_order[j].extrinsic_residual).collect();
            let i: Vec<f64> = res.iter().map(|r| r.per_order[j].intrinsic_residual).collect();
            assert!((e[0] / e[1]).log2() >= 1.9 && (e[1] / e[2]).log2() >= 1.9, "j={j} {e:?}");
            assert!((i[0] / i[1]).log2() >= 1.9 && (i[1] / i[2]).log2() >= 1.9, "j={j} {i:?}");
        }
        assert!(res[2].pass());
    }

    #[test]
    fn linear_profile_fails_uniformly() {
        let a = 0.3;
        for n in [64, 128, 256] {
            let g = line(PI, n + 1);
            let u0 = equatorial(g, |x| a * x);
            let rep = check_compat(&u0, 1, None).unwrap();
            assert!(rep.per_order[0].extrinsic_residual >= 0.5 * a);
            assert!(!rep.pass());
            assert!(rep.verdicts_agree());
        }
    }

    #[test]
    fn residuals_scale_with_domain() {
        let s = 2.0;
        let g = line(PI, 65);
        let gs = g.rescaled(s);
        let theta = |x: f64| 0.4 * x;
        let u = equatorial(g, theta);
        let us = equatorial(gs, |x| theta(x / s));
        let a = extrinsic_jet(&u, 1).unwrap();
        let b = extrinsic_jet(&us, 1).unwrap();
        let ratio = b.coeff(1).max_norm() / a.coeff(1).max_norm();
        assert!((ratio - s.powi(-2)).abs() < 1e-12);
        let ra = check_compat(&u, 1, None).unwrap().per_order[1].extrinsic_residual;
        let rb = check_compat(&us, 1, None).unwrap().per_order[1].extrinsic_residual;
        assert!((rb / ra - s.powi(-3)).abs() < 1e-10);
    }

    #[test]
    fn report_serializes() {
        let g = line(PI, 33);
        let u0 = equatorial(g, |x| 0.3 * x.cos());
        let rep = check_compat(&u0, 2, None).unwrap();
        let back: CompatReport = serde_json::from_str(&rep.to_json().unwrap()).unwrap();
        assert_eq!(back, rep);
        let table = rep.to_string();
        assert_eq!(table.lines().count(), 5);
    }

    #[test]
    fn equivalence_on_constant_and_linear() {
        let g = line(PI, 65);
        let c = SphereField::new(Vec3Field::constant(g, [0.0, 1.0, 0.0])).unwrap();
        let a = equivalence_audit(&c, 2).unwrap();
        assert!(a.agree && a.rows.iter().all(|r| r.1 == 0.0 && r.2 == 0.0));
        let lin = equatorial(g, |x| 0.3 * x);
        assert!(equivalence_audit(&lin, 2).unwrap().agree);
    }
}
