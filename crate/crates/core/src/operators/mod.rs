//! Discrete differential operators, quadrature, tension field and energies.
//!
//! All operators act on node values and resolve ghost nodes through the
//! grid's boundary mode. With mirror ghosts and trapezoidal weights the
//! Laplacian is self-adjoint and satisfies the summation-by-parts identity
//! `<lap f, g> = -<df, dg>`, where `<df, dg>` sums forward differences over
//! grid edges (see [`grad_inner`]).

mod energy;
mod norms;

pub use energy::EnergyTrace;
pub use norms::{sobolev_norm, sobolev_norm_unchecked, SobolevOrder, MAX_SOBOLEV_ORDER};

use crate::error::{Error, Result};
use crate::state::{Grid, ScalarField, SphereField, TangentField, Vec3Field};
use crate::vec3::{self, V3};

/// Tolerance for `triple_product_check` inputs to count as tangent.
pub const TRIPLE_TANGENT_TOL: f64 = 1e-8;

/// Second-order `2d+1`-point Laplacian.
///
/// Each axis is swept as rows of `stride` contiguous nodes, so the inner
/// loop reads three contiguous slices; ghost rows come from the boundary mode.
pub fn laplacian(f: &Vec3Field) -> Vec3Field {
    let grid = *f.grid();
    let src = f.data();
    let mut out = vec![vec3::ZERO; src.len()];
    for axis in 0..grid.dim() {
        let h = grid.spacing()[axis];
        let inv = 1.0 / (h * h);
        let n = grid.points()[axis];
        let s = grid.stride(axis);
        let (lo, hi) = if grid.is_periodic() { (n - 1, 0) } else { (1, n - 2) };
        let point = |o: &mut V3, p: V3, c: V3, m: V3| {
            for k in 0..3 {
                o[k] += (p[k] - 2.0 * c[k] + m[k]) * inv;
            }
        };
        if s == 1 {
            for (line, o) in src.chunks_exact(n).zip(out.chunks_exact_mut(n)) {
                point(&mut o[0], line[1], line[0], line[lo]);
                for (o, w) in o[1..n - 1].iter_mut().zip(line.windows(3)) {
                    point(o, w[2], w[1], w[0]);
                }
                point(&mut o[n - 1], line[hi], line[n - 1], line[n - 2]);
            }
            continue;
        }
        for block in (0..src.len()).step_by(s * n) {
            for i in 0..n {
                let im = if i > 0 { i - 1 } else { lo };
                let ip = if i + 1 < n { i + 1 } else { hi };
                let row = |r: usize| &src[block + r * s..block + (r + 1) * s];
                let o = &mut out[block + i * s..block + (i + 1) * s];
                for (((o, p), c), m) in o.iter_mut().zip(row(ip)).zip(row(i)).zip(row(im)) {
                    point(o, *p, *c, *m);
                }
            }
        }
    }
    Vec3Field::from_vec(grid, out).expect("same length")
}

/// Trapezoidal inner product `sum_i w_i <f_i, g_i>`.
pub fn inner(f: &Vec3Field, g: &Vec3Field) -> f64 {
    let grid = f.grid();
    f.data()
        .iter()
        .zip(g.data())
        .enumerate()
        .map(|(i, (&a, &b))| grid.weight(i) * vec3::dot(a, b))
        .sum()
}

pub fn l2_norm(f: &Vec3Field) -> f64 {
    inner(f, f).sqrt()
}

/// Trapezoidal integral of a scalar field.
pub fn integrate(s: &ScalarField) -> f64 {
    let grid = s.grid();
    s.data().iter().enumerate().map(|(i, v)| grid.weight(i) * v).sum()
}

/// Edge-based gradient pairing: for every axis, `sum over edges` of
/// `h_a * (prod_{b != a} w_b) * D+f . D+g`.
///
/// On mirror grids the edges run between existing nodes only; on periodic
/// grids the wrap-around edge is included.
pub fn grad_inner(f: &Vec3Field, g: &Vec3Field) -> f64 {
    let grid = *f.grid();
    let (fd, gd) = (f.data(), g.data());
    let mut total = 0.0;
    for axis in 0..grid.dim() {
        let n = grid.points()[axis];
        let h = grid.spacing()[axis];
        let s = grid.stride(axis);
        for idx in 0..grid.len() {
            let m = grid.multi_index(idx);
            if !grid.is_periodic() && m[axis] + 1 == n {
                continue;
            }
            let next = grid.neighbor(idx, axis, true);
            debug_assert!(grid.is_periodic() || next == idx + s);
            let mut w = h;
            for (b, &mb) in m.iter().enumerate().take(grid.dim()) {
                if b != axis {
                    w *= grid.axis_weight(b, mb);
                }
            }
            let df = vec3::scale(1.0 / h, vec3::sub(fd[next], fd[idx]));
            let dg = vec3::scale(1.0 / h, vec3::sub(gd[next], gd[idx]));
            total += w * vec3::dot(df, dg);
        }
    }
    total
}

/// `||df||` in the edge-based pairing.
pub fn grad_norm(f: &Vec3Field) -> f64 {
    grad_inner(f, f).max(0.0).sqrt()
}

/// Partial derivatives, one field per axis. Centered in the interior,
/// one-sided three-point stencils on mirror boundaries, wrapped on periodic
/// grids.
pub fn gradient(f: &Vec3Field) -> Vec<Vec3Field> {
    let grid = *f.grid();
    let src = f.data();
    (0..grid.dim())
        .map(|axis| {
            let n = grid.points()[axis];
            let h = grid.spacing()[axis];
            let s = grid.stride(axis);
            let data = (0..grid.len())
                .map(|idx| {
                    let i = (idx / s) % n;
                    if grid.is_periodic() || (i > 0 && i + 1 < n) {
                        let p = src[grid.neighbor(idx, axis, true)];
                        let m = src[grid.neighbor(idx, axis, false)];
                        vec3::scale(0.5 / h, vec3::sub(p, m))
                    } else if i == 0 {
                        let (a, b, c) = (src[idx], src[idx + s], src[idx + 2 * s]);
                        std::array::from_fn(|k| (-3.0 * a[k] + 4.0 * b[k] - c[k]) / (2.0 * h))
                    } else {
                        let (a, b, c) = (src[idx], src[idx - s], src[idx - 2 * s]);
                        std::array::from_fn(|k| (3.0 * a[k] - 4.0 * b[k] + c[k]) / (2.0 * h))
                    }
                })
                .collect();
            Vec3Field::from_vec(grid, data).expect("same length")
        })
        .collect()
}

/// `|df|^2 = sum_a |d_a f|^2` from [`gradient`].
pub fn gradient_sq(f: &Vec3Field) -> ScalarField {
    grad_dot(&gradient(f), &gradient(f))
}

/// `sum_a <d_a u, d_a w>` node by node.
pub fn grad_dot(du: &[Vec3Field], dw: &[Vec3Field]) -> ScalarField {
    let grid = *du[0].grid();
    let mut out = vec![0.0; grid.len()];
    for (a, b) in du.iter().zip(dw) {
        for (o, (&x, &y)) in out.iter_mut().zip(a.data().iter().zip(b.data())) {
            *o += vec3::dot(x, y);
        }
    }
    ScalarField::from_vec(grid, out).expect("same length")
}

/// `-<lap u, u>` node by node. For unit-valued `u` this equals
/// `sum_a (|D+u|^2 + |D-u|^2) / 2`, a nonnegative second-order
/// approximation of `|du|^2` that matches the Laplacian exactly.
pub fn energy_density(u: &Vec3Field) -> ScalarField {
    let lap = laplacian(u);
    let mut s = lap.dot(u);
    for v in s.data_mut() {
        *v = -*v;
    }
    s
}

/// `tau(u) = lap u + |du|^2 u` on the raw field, with `|du|^2` realized by
/// [`energy_density`]. For unit `u` this is the tangential part of `lap u`.
pub fn tension_raw(u: &Vec3Field) -> Vec3Field {
    let lap = laplacian(u);
    let data = lap
        .data()
        .iter()
        .zip(u.data())
        .map(|(&l, &v)| vec3::axpy(l, -vec3::dot(l, v), v))
        .collect();
    Vec3Field::from_vec(*u.grid(), data).expect("same length")
}

/// Tension field of a sphere-valued map. The tangency drift is recorded in
/// the result.
pub fn tension(u: &SphereField) -> TangentField {
    TangentField::measured(tension_raw(u), u)
}

/// `w - <w,u> u`.
pub fn project_tangent(w: &Vec3Field, u: &SphereField) -> TangentField {
    let data = w
        .data()
        .iter()
        .zip(u.data())
        .map(|(&a, &b)| vec3::axpy(a, -vec3::dot(a, b), b))
        .collect();
    TangentField::measured(Vec3Field::from_vec(*w.grid(), data).expect("same length"), u)
}

/// `<X1 x X2, X3>` for vectors tangent to the sphere at `p`. Three tangent
/// vectors of a two-dimensional plane are linearly dependent, so the result
/// vanishes up to rounding.
pub fn triple_product_check(p: V3, x1: V3, x2: V3, x3: V3) -> Result<f64> {
    let drift = (vec3::norm(p) - 1.0).abs();
    if drift > TRIPLE_TANGENT_TOL {
        return Err(Error::NotUnit { drift, tol: TRIPLE_TANGENT_TOL });
    }
    for x in [x1, x2, x3] {
        let d = vec3::dot(x, p).abs();
        if d > TRIPLE_TANGENT_TOL * vec3::norm(x).max(1.0) {
            return Err(Error::NotTangent { drift: d, tol: TRIPLE_TANGENT_TOL });
        }
    }
    Ok(vec3::dot(vec3::cross(x1, x2), x3))
}

/// `E(u) = 1/2 <du, du>` in the edge-based pairing, i.e. `-1/2 <lap u, u>`.
pub fn dirichlet_energy(u: &Vec3Field) -> f64 {
    0.5 * grad_inner(u, u)
}

/// Normal derivative at one boundary node along one axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryFlux {
    pub node: usize,
    pub axis: usize,
    /// `true` on the face `x_axis = L_axis`.
    pub upper: bool,
    /// `d f / d nu` with `nu` the outward normal.
    pub value: V3,
}

/// Outward normal derivatives from one-sided three-point stencils at every
/// boundary node of a mirror grid (corner nodes appear once per face).
pub fn boundary_fluxes(f: &Vec3Field) -> Vec<BoundaryFlux> {
    let grid = *f.grid();
    if grid.is_periodic() {
        return Vec::new();
    }
    let src = f.data();
    let mut out = Vec::new();
    for axis in 0..grid.dim() {
        let n = grid.points()[axis];
        let h = grid.spacing()[axis];
        let s = grid.stride(axis);
        for idx in 0..grid.len() {
            let i = (idx / s) % n;
            if i == 0 {
                let (a, b, c) = (src[idx], src[idx + s], src[idx + 2 * s]);
                let value = std::array::from_fn(|k| -(-3.0 * a[k] + 4.0 * b[k] - c[k]) / (2.0 * h));
                out.push(BoundaryFlux { node: idx, axis, upper: false, value });
            } else if i + 1 == n {
                let (a, b, c) = (src[idx], src[idx - s], src[idx - 2 * s]);
                let value = std::array::from_fn(|k| (3.0 * a[k] - 4.0 * b[k] + c[k]) / (2.0 * h));
                out.push(BoundaryFlux { node: idx, axis, upper: true, value });
            }
        }
    }
    out
}

/// `max |d f / d nu|` over the boundary; zero on periodic grids.
pub fn max_boundary_flux(f: &Vec3Field) -> f64 {
    boundary_fluxes(f)
        .iter()
        .fold(0.0, |m, b| m.max(vec3::norm(b.value)))
}

/// Resolution-matched tolerance `max(10 h^2, 1e-8)`.
pub fn resolution_tol(grid: &Grid) -> f64 {
    (10.0 * grid.h_max().powi(2)).max(1e-8)
}
