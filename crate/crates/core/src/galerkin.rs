//! Galerkin truncation onto the Neumann eigenfunctions of `lap - I` on a
//! box: `(lap - I) g_i = -lambda_i g_i`, `d g_i / d nu = 0`, orthonormal in
//! the trapezoidal inner product.

use std::f64::consts::PI;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linearized::{Background, StageCoeffs, MAX_SOURCE_ORDER};
use crate::operators::{inner, l2_norm, max_boundary_flux, resolution_tol, sobolev_norm_unchecked, SobolevOrder};
use crate::state::{cosine_inverse, Grid, SpectralRep, Vec3Field};
use crate::vec3::{self, V3};

#[derive(Clone, Debug)]
pub struct Mode {
    pub index: [usize; 3],
    /// Eigenvalue of `I - lap`.
    pub lambda: f64,
    pub g: Vec<f64>,
    /// `d g / d x_a` per axis.
    pub dg: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct EigenBasis {
    grid: Grid,
    modes: Vec<Mode>,
}

impl EigenBasis {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Largest eigenvalue in the basis.
    pub fn lambda_max(&self) -> f64 {
        self.modes.last().map_or(1.0, |m| m.lambda)
    }

    /// `h = sum_i c_i g_i`.
    pub fn synthesize(&self, coeffs: &[V3]) -> Vec3Field {
        self.combine(coeffs, |m| &m.g)
    }

    fn combine<'a>(&'a self, coeffs: &[V3], pick: impl Fn(&'a Mode) -> &'a Vec<f64>) -> Vec3Field {
        let mut out = vec![vec3::ZERO; self.grid.len()];
        for (m, c) in self.modes.iter().zip(coeffs) {
            for (o, &g) in out.iter_mut().zip(pick(m)) {
                *o = vec3::axpy(*o, g, *c);
            }
        }
        Vec3Field::from_vec(self.grid, out).expect("basis grid")
    }

    /// `lap h` applied exactly: `lap g_i = (1 - lambda_i) g_i`.
    pub fn laplacian_of(&self, coeffs: &[V3]) -> Vec3Field {
        let scaled: Vec<V3> = self.modes.iter().zip(coeffs).map(|(m, &c)| vec3::scale(1.0 - m.lambda, c)).collect();
        self.synthesize(&scaled)
    }

    pub fn gradient_of(&self, coeffs: &[V3]) -> Vec<Vec3Field> {
        (0..self.grid.dim()).map(|a| self.combine(coeffs, |m| &m.dg[a])).collect()
    }

    /// `<f, g_i>` for every mode.
    pub fn analyze(&self, f: &Vec3Field) -> Vec<V3> {
        let w = self.grid.weights();
        self.modes
            .iter()
            .map(|m| {
                let mut acc = vec3::ZERO;
                for ((v, &g), &wi) in f.data().iter().zip(&m.g).zip(&w) {
                    acc = vec3::axpy(acc, wi * g, *v);
                }
                acc
            })
            .collect()
    }
}

fn axis_factor(k: usize, l: f64, x: f64) -> (f64, f64) {
    let c = if k == 0 { (1.0 / l).sqrt() } else { (2.0 / l).sqrt() };
    let q = k as f64 * PI / l;
    (c * (q * x).cos(), -c * q * (q * x).sin())
}

/// The `n` lowest modes (ties broken by index) of a 1D or 2D mirror grid,
/// drawn from indices `k_a < points_a / 2`.
pub fn build_basis(grid: &Grid, n: usize) -> Result<EigenBasis> {
    grid.require_neumann("build_basis")?;
    if grid.dim() > 2 {
        return Err(Error::InvalidArgument("the Galerkin basis supports 1D and 2D grids".into()));
    }
    let limits: Vec<usize> = (0..grid.dim()).map(|a| grid.points()[a].div_ceil(2)).collect();
    let mut idx: Vec<([usize; 3], f64)> = Vec::new();
    for k0 in 0..limits[0] {
        for k1 in 0..limits.get(1).copied().unwrap_or(1) {
            let index = [k0, k1, 0];
            let lambda = 1.0
                + (0..grid.dim()).map(|a| (index[a] as f64 * PI / grid.extents()[a]).powi(2)).sum::<f64>();
            idx.push((index, lambda));
        }
    }
    if n == 0 || n > idx.len() {
        return Err(Error::InvalidArgument(format!(
            "requested {n} modes; the grid resolves {}",
            idx.len()
        )));
    }
    idx.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    idx.truncate(n);
    let modes = idx
        .into_iter()
        .map(|(index, lambda)| {
            let mut g = Vec::with_capacity(grid.len());
            let mut dg = vec![Vec::with_capacity(grid.len()); grid.dim()];
            for i in 0..grid.len() {
                let x = grid.coord(i);
                let f: Vec<(f64, f64)> =
                    (0..grid.dim()).map(|a| axis_factor(index[a], grid.extents()[a], x[a])).collect();
                g.push(f.iter().map(|p| p.0).product());
                for (a, d) in dg.iter_mut().enumerate() {
                    d.push((0..grid.dim()).map(|b| if a == b { f[b].1 } else { f[b].0 }).product());
                }
            }
            Mode { index, lambda, g, dg }
        })
        .collect();
    Ok(EigenBasis { grid: *grid, modes })
}

/// Coefficients of `h_n` in the first `n` modes of a basis.
#[derive(Clone, Debug, PartialEq)]
pub struct GalerkinState {
    pub n: usize,
    pub coeffs: Vec<V3>,
}

impl GalerkinState {
    pub fn synthesize(&self, basis: &EigenBasis) -> Vec3Field {
        basis.synthesize(&self.coeffs)
    }
}

/// `P_n f = sum_{i<=n} <f, g_i> g_i`.
pub fn project_pn(f: &Vec3Field, basis: &EigenBasis, n: usize) -> Result<GalerkinState> {
    f.grid().compatible(basis.grid()).then_some(()).ok_or(Error::GridMismatch)?;
    if n > basis.len() {
        return Err(Error::InvalidArgument(format!("n = {n} exceeds basis size {}", basis.len())));
    }
    let mut coeffs = basis.analyze(f);
    coeffs.truncate(n);
    Ok(GalerkinState { n, coeffs })
}

fn sub_basis(basis: &EigenBasis, n: usize) -> EigenBasis {
    EigenBasis { grid: basis.grid, modes: basis.modes[..n].to_vec() }
}

/// Largest observed `||P_n f||_k / ||f||_k`, `k = 1, 2, 3`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PnAudit {
    pub n: usize,
    pub trials: usize,
    pub max_ratio: [f64; 3],
}

/// Random Neumann-compatible band-limited field with decaying spectrum.
pub fn random_neumann_field(grid: &Grid, rng: &mut ChaCha8Rng, band: usize) -> Result<Vec3Field> {
    let mut rep = SpectralRep::zeros(*grid);
    for i in 0..rep.coeffs().len() {
        let m = grid.multi_index(i);
        if (0..grid.dim()).all(|a| m[a] <= band) {
            let decay = 1.0 / (1.0 + (0..grid.dim()).map(|a| m[a] * m[a]).sum::<usize>() as f64);
            rep.coeffs_mut()[i] = std::array::from_fn(|_| decay * rng.gen_range(-1.0..1.0));
        }
    }
    Ok(cosine_inverse(&rep))
}

pub fn pn_lemma_audit(basis: &EigenBasis, n: usize, trials: usize, seed: u64) -> Result<PnAudit> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    let sub = sub_basis(basis, n.min(basis.len()));
    let grid = basis.grid();
    let band = (0..grid.dim()).map(|a| grid.points()[a] / 2).min().unwrap_or(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_ratio = [0.0f64; 3];
    for _ in 0..trials {
        let f = random_neumann_field(grid, &mut rng, band)?;
        let p = sub.synthesize(&project_pn(&f, basis, n)?.coeffs);
        for k in 1..=3 {
            let o = SobolevOrder::new(k)?;
            let r = sobolev_norm_unchecked(&p, o) / sobolev_norm_unchecked(&f, o);
            max_ratio[k - 1] = max_ratio[k - 1].max(r);
        }
    }
    Ok(PnAudit { n, trials, max_ratio })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GalerkinConfig {
    pub epsilon: f64,
    pub n: usize,
    /// Order of the source `f_3 = (eps I + u x) R_k`.
    pub k: usize,
    pub record_every: usize,
}

impl Default for GalerkinConfig {
    fn default() -> Self {
        GalerkinConfig { epsilon: 0.1, n: 16, k: 1, record_every: 1 }
    }
}

/// `dt <= 2 / ((1 + eps) lambda_n)`.
pub fn galerkin_step_bound(basis: &EigenBasis, epsilon: f64) -> f64 {
    2.0 / ((1.0 + epsilon) * basis.lambda_max())
}

#[derive(Clone, Debug)]
pub struct GalerkinSolution {
    pub basis: EigenBasis,
    pub times: Vec<f64>,
    pub states: Vec<GalerkinState>,
    /// Measured `C(t)` in
    /// `d/dt 1/2 ||h||^2 <= -eps/2 ||dh||^2 + C(t) ||h||^2 + ||f_3||^2`.
    pub energy_constant: Vec<f64>,
}

impl GalerkinSolution {
    pub fn fields(&self) -> Vec<Vec3Field> {
        self.states.iter().map(|s| s.synthesize(&self.basis)).collect()
    }

    /// Columns `t`, then `g<i>_<x|y|z>` per mode.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut head = vec!["t".to_string()];
        for i in 0..self.basis.len() {
            for c in ["x", "y", "z"] {
                head.push(format!("g{i}_{c}"));
            }
        }
        writeln!(w, "{}", head.join(","))?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let mut row = vec![t.to_string()];
            for c in &s.coeffs {
                row.extend(c.iter().map(|v| v.to_string()));
            }
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn galerkin_rhs(basis: &EigenBasis, stage: &StageCoeffs, c: &[V3], eps: f64) -> Vec<V3> {
    let h = basis.synthesize(c);
    let lap = basis.laplacian_of(c);
    let dh = basis.gradient_of(c);
    basis.analyze(&stage.apply_with(&h, &lap, &dh, eps))
}

fn lin(a: &[V3], s: f64, b: &[V3]) -> Vec<V3> {
    a.iter().zip(b).map(|(&x, &y)| vec3::axpy(x, s, y)).collect()
}

/// Integrate
///
/// ```text
/// d_t h_n + P_n(<d_t u, h_n> u) = P_n{(eps I + u x)(lap h_n + f_1 # dh_n + f_2 # h_n) + f_3}
/// ```
///
/// with `f_1 # dh = 2 <du, dh> u`, `f_2 # h = <lap u, h> u + |du|^2 h`,
/// `f_3 = (eps I + u x) R_k`, `h_n(0) = P_n h_0`, by RK4 on the
/// coefficients with a pseudo-spectral right-hand side.
pub fn solve_galerkin(h0: &Vec3Field, bg: &Background, cfg: &GalerkinConfig) -> Result<GalerkinSolution> {
    if !(cfg.epsilon > 0.0 && cfg.epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon = {} outside (0, 1)", cfg.epsilon)));
    }
    if cfg.k == 0 || cfg.k > MAX_SOURCE_ORDER {
        return Err(Error::OrderTooHigh { order: cfg.k, max: MAX_SOURCE_ORDER });
    }
    if cfg.record_every == 0 {
        return Err(Error::InvalidArgument("record_every must be >= 1".into()));
    }
    let grid = *bg.traj.states[0].grid();
    h0.ensure_same_grid(bg.traj.states[0].as_field())?;
    let flux = max_boundary_flux(h0);
    let tol = resolution_tol(&grid) * h0.max_norm().max(1.0);
    if flux > tol {
        return Err(Error::NotNeumann { flux, tol });
    }
    let basis = build_basis(&grid, cfg.n)?;
    let dt = bg.dt();
    let bound = galerkin_step_bound(&basis, cfg.epsilon);
    if dt > bound {
        return Err(Error::Cfl { dt, bound });
    }
    let eps = cfg.epsilon;
    let mut c = project_pn(h0, &basis, cfg.n)?.coeffs;
    let mut walker = bg.walker();
    let mut s0 = StageCoeffs::new(walker.current(), cfg.k, 1.0)?;
    let mut sol = GalerkinSolution { basis: basis.clone(), times: Vec::new(), states: Vec::new(), energy_constant: Vec::new() };

    let monitor = |sol: &mut GalerkinSolution, t: f64, c: &[V3], stage: &StageCoeffs| {
        let dc = galerkin_rhs(&basis, stage, c, eps);
        let de: f64 = c.iter().zip(&dc).map(|(&a, &b)| vec3::dot(a, b)).sum();
        let grad2: f64 = basis.modes.iter().zip(c).map(|(m, &a)| (m.lambda - 1.0) * vec3::norm_sq(a)).sum();
        let h2: f64 = c.iter().map(|&a| vec3::norm_sq(a)).sum();
        let f3 = match &stage.rk {
            Some(r) => {
                let mut f = r.scaled(eps);
                f.axpy(1.0, &stage.u.cross(r));
                inner(&f, &f)
            }
            None => 0.0,
        };
        let cst = if h2 > 0.0 { (de + 0.5 * eps * grad2 - f3) / h2 } else { 0.0 };
        sol.times.push(t);
        sol.states.push(GalerkinState { n: c.len(), coeffs: c.to_vec() });
        sol.energy_constant.push(cst);
    };
    monitor(&mut sol, 0.0, &c, &s0);
    let n = bg.steps();
    for i in 1..=n {
        let (mid, next) = walker.advance()?;
        let sm = StageCoeffs::new(&mid, cfg.k, 1.0)?;
        let s1 = StageCoeffs::new(&next, cfg.k, 1.0)?;
        let k1 = galerkin_rhs(&basis, &s0, &c, eps);
        let k2 = galerkin_rhs(&basis, &sm, &lin(&c, 0.5 * dt, &k1), eps);
        let k3 = galerkin_rhs(&basis, &sm, &lin(&c, 0.5 * dt, &k2), eps);
        let k4 = galerkin_rhs(&basis, &s1, &lin(&c, dt, &k3), eps);
        for j in 0..c.len() {
            for d in 0..3 {
                c[j][d] += dt / 6.0 * (k1[j][d] + 2.0 * k2[j][d] + 2.0 * k3[j][d] + k4[j][d]);
            }
        }
        if c.iter().any(|v| v.iter().any(|x| !x.is_finite())) {
            return Err(Error::BlowUp { time: i as f64 * dt, growth: f64::INFINITY });
        }
        s0 = s1;
        if i % cfg.record_every == 0 || i == n {
            monitor(&mut sol, i as f64 * dt, &c, &s0);
        }
    }
    Ok(sol)
}

/// `max_t ||h_a(t) - h_b(t)||_{L2}` over common sample times.
pub fn galerkin_distance(a: &GalerkinSolution, b: &GalerkinSolution) -> f64 {
    let (fa, fb) = (a.fields(), b.fields());
    fa.iter().zip(&fb).map(|(x, y)| l2_norm(&(x - y))).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{evolve, FlowConfig};
    use crate::linearized::{assemble_background, solve_linear, LinearConfig};
    use crate::operators::laplacian;
    use crate::state::{make_grid, normalize_to_sphere, spectral_laplacian, BoundaryMode, SphereField};

    fn line(l: f64, n: usize) -> Grid {
        make_grid(1, &[l], &[n], BoundaryMode::NeumannMirror).unwrap()
    }

    fn field(g: Grid, f: impl Fn(f64) -> f64) -> Vec3Field {
        Vec3Field::from_fn(g, |x| [f(x[0]), 0.0, 0.0])
    }

    #[test]
    fn eigenvalues_and_ordering() {
        let b = build_basis(&line(PI, 65), 5).unwrap();
        let l: Vec<f64> = b.modes().iter().map(|m| m.lambda).collect();
        for (k, v) in l.iter().enumerate() {
            assert!((v - (1.0 + (k * k) as f64)).abs() < 1e-12);
        }
        let g2 = make_grid(2, &[PI, PI], &[17, 17], BoundaryMode::NeumannMirror).unwrap();
        let b = build_basis(&g2, 4).unwrap();
        assert_eq!(b.modes()[0].lambda, 1.0);
        assert_eq!(b.modes()[1].index, [0, 1, 0]);
        assert_eq!(b.modes()[2].index, [1, 0, 0]);
        assert!((b.modes()[3].lambda - 3.0).abs() < 1e-12);
        assert!(build_basis(&line(PI, 9), 6).is_err());
        let p = make_grid(1, &[PI], &[16], BoundaryMode::Periodic).unwrap();
        assert!(build_basis(&p, 2).is_err());
    }

    #[test]
    fn orthonormal_and_spectral_eigenpairs() {
        for g in [
            line(2.0, 65),
            make_grid(2, &[1.0, 2.0], &[17, 33], BoundaryMode::NeumannMirror).unwrap(),
        ] {
            let b = build_basis(&g, 24).unwrap();
            let w = g.weights();
            for (i, mi) in b.modes().iter().enumerate() {
                for (j, mj) in b.modes().iter().enumerate() {
                    let dot: f64 = mi.g.iter().zip(&mj.g).zip(&w).map(|((a, c), wi)| a * c * wi).sum();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - expect).abs() < 1e-12, "{i} {j} {dot}");
                }
                let f = Vec3Field::from_vec(g, mi.g.iter().map(|&v| [v, 0.0, 0.0]).collect()).unwrap();
                let lap = spectral_laplacian(&f).unwrap();
                let res = (&(&lap - &f) + &f.scaled(mi.lambda)).max_norm();
                assert!(res <= 1e-10 * mi.lambda * f.max_norm(), "{res}");
            }
        }
    }

    /// The analytic basis diagonalizes the mirror stencil exactly, with
    /// eigenvalues `(2 - 2 cos(k pi h / L)) / h^2 -> (k pi / L)^2`.
    #[test]
    fn stencil_diagonalization_cross_check() {
        let mut gaps = Vec::new();
        for n in [33, 65, 129] {
            let g = line(PI, n);
            let b = build_basis(&g, 8).unwrap();
            let h = g.spacing()[0];
            let mut worst = 0.0f64;
            for m in b.modes() {
                let k = m.index[0] as f64;
                let lh = (2.0 - 2.0 * (k * h).cos()) / (h * h);
                let f = Vec3Field::from_vec(g, m.g.iter().map(|&v| [v, 0.0, 0.0]).collect()).unwrap();
                let r = (&laplacian(&f) + &f.scaled(lh)).max_norm();
                assert!(r < 1e-9 * (1.0 + lh));
                worst = worst.max((lh - (m.lambda - 1.0)).abs());
            }
            gaps.push(worst);
        }
        assert!((gaps[0] / gaps[1]).log2() > 1.9 && (gaps[1] / gaps[2]).log2() > 1.9);
    }

    #[test]
    fn projection_properties() {
        let g = line(2.0, 65);
        let b = build_basis(&g, 20).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sub = sub_basis(&b, 10);
        let p = |f: &Vec3Field| sub.synthesize(&project_pn(f, &b, 10).unwrap().coeffs);
        for _ in 0..100 {
            let f = random_neumann_field(&g, &mut rng, 32).unwrap();
            let h = random_neumann_field(&g, &mut rng, 32).unwrap();
            let pf = p(&f);
            assert!(l2_norm(&(&p(&pf) - &pf)) <= 1e-12 * l2_norm(&f));
            let (a, c) = (inner(&pf, &h), inner(&f, &p(&h)));
            assert!((a - c).abs() <= 1e-12 * l2_norm(&f) * l2_norm(&h));
        }
        // fixes H_n, kills g_{n+1}
        let c: Vec<V3> = (0..10).map(|i| [i as f64, 1.0, -0.5]).collect();
        let hn = sub.synthesize(&c);
        assert!(l2_norm(&(&p(&hn) - &hn)) < 1e-12 * l2_norm(&hn));
        let g11 = Vec3Field::from_vec(g, b.modes()[10].g.iter().map(|&v| [v, v, 0.0]).collect()).unwrap();
        assert!(l2_norm(&p(&g11)) < 1e-12);
    }

    #[test]
    fn lemma_bounds() {
        let g = line(2.0, 65);
        let b = build_basis(&g, 32).unwrap();
        let a = pn_lemma_audit(&b, 12, 1000, 9).unwrap();
        assert!(a.max_ratio[0] <= 1.0 + 1e-12, "{a:?}");
        assert!(a.max_ratio.iter().all(|r| r.is_finite()));
        let a2 = pn_lemma_audit(&b, 24, 200, 9).unwrap();
        assert!(a2.max_ratio[1] <= a.max_ratio[1].max(1.0) * 1.5);
    }

    fn constant_background(g: Grid, dt: f64, t_end: f64, dir: V3) -> Background {
        let u0 = SphereField::new(Vec3Field::constant(g, dir)).unwrap();
        let cfg = FlowConfig { dt, t_end, record_every: 100, ..Default::default() };
        assemble_background(evolve(&u0, &cfg).unwrap()).unwrap()
    }

    /// Constant `u`: each coefficient obeys `c' = -lt (eps c + u x c)`, so
    /// `c(t) = exp(-eps lt t) R_u(-lt t) c(0)` with `lt = lambda - 1`.
    #[test]
    fn single_mode_closed_form() {
        let g = line(PI, 65);
        let u = [0.0, 0.6, 0.8];
        let bg = constant_background(g, 1e-3, 1.0, u);
        let b = build_basis(&g, 8).unwrap();
        let eps = 0.2;
        let h0 = Vec3Field::from_vec(g, b.modes()[2].g.iter().map(|&v| [v, 0.0, 0.0]).collect()).unwrap();
        let sol = solve_galerkin(&h0, &bg, &GalerkinConfig { epsilon: eps, n: 8, k: 1, record_every: 100 }).unwrap();
        let lt = b.modes()[2].lambda - 1.0;
        let c0 = [1.0, 0.0, 0.0];
        for (t, s) in sol.times.iter().zip(&sol.states) {
            let th = -lt * t;
            // Rodrigues rotation about u
            let par = vec3::scale(vec3::dot(u, c0), u);
            let perp = vec3::sub(c0, par);
            let rot = vec3::add(par, vec3::add(vec3::scale(th.cos(), perp), vec3::scale(th.sin(), vec3::cross(u, perp))));
            let exact = vec3::scale((-eps * lt * t).exp(), rot);
            assert!(vec3::norm(vec3::sub(s.coeffs[2], exact)) < 1e-8, "t={t}");
            for (i, c) in s.coeffs.iter().enumerate() {
                if i != 2 {
                    assert!(vec3::norm(*c) < 1e-12);
                }
            }
        }
        let zero = solve_galerkin(&Vec3Field::zeros(g), &bg, &GalerkinConfig { epsilon: eps, n: 8, k: 1, record_every: 100 }).unwrap();
        assert!(zero.states.iter().all(|s| s.coeffs.iter().all(|c| *c == vec3::ZERO)));
    }

    fn smooth_background(g: Grid, dt: f64, t_end: f64) -> Background {
        let u0 = normalize_to_sphere(&Vec3Field::from_fn(g, |x| {
            let t = 0.6 * (x[0] / 2.0).cos() + 0.3 * x[0].cos();
            [t.sin(), 0.1 * t.cos(), t.cos()]
        }))
        .unwrap();
        let cfg = FlowConfig { dt, t_end, record_every: 50, ..Default::default() };
        assemble_background(evolve(&u0, &cfg).unwrap()).unwrap()
    }

    #[test]
    fn cauchy_in_n() {
        let g = line(2.0 * PI, 128);
        let bg = smooth_background(g, 2e-4, 0.02);
        let h0 = bg.v1[0].as_field().clone();
        let sols: Vec<_> = [8, 16, 32]
            .iter()
            .map(|&n| solve_galerkin(&h0, &bg, &GalerkinConfig { epsilon: 0.1, n, k: 1, record_every: 20 }).unwrap())
            .collect();
        let d1 = galerkin_distance(&sols[0], &sols[1]);
        let d2 = galerkin_distance(&sols[1], &sols[2]);
        assert!(d2 < d1, "{d1} {d2}");
        assert!(sols.iter().all(|s| s.energy_constant.iter().all(|c| c.is_finite())));
        let mut buf = Vec::new();
        sols[0].write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("t,g0_x,g0_y,g0_z,g1_x"));
    }

    #[test]
    fn agrees_with_stencil_solver_at_second_order() {
        let mut d = Vec::new();
        for n in [32, 64, 128] {
            let g = line(2.0 * PI, n);
            let bg = smooth_background(g, 2e-4, 0.02);
            let h0 = bg.v1[0].as_field().clone();
            let gal = solve_galerkin(&h0, &bg, &GalerkinConfig { epsilon: 0.1, n: 16, k: 1, record_every: 20 }).unwrap();
            let lin = solve_linear(&h0, &bg, 1, &LinearConfig { epsilon: 0.1, record_every: 20, ..Default::default() }).unwrap();
            let dist = gal.fields().iter().zip(&lin.omegas).map(|(a, b)| l2_norm(&(a - b))).fold(0.0, f64::max);
            d.push(dist);
        }
        assert!((d[0] / d[1]).log2() > 1.9 && (d[1] / d[2]).log2() > 1.9, "{d:?}");
    }

    #[test]
    fn rejects_bad_input() {
        let g = line(PI, 33);
        let bg = constant_background(g, 1e-3, 0.01, [0.0, 0.0, 1.0]);
        let h = field(g, |x| x);
        assert!(matches!(solve_galerkin(&h, &bg, &GalerkinConfig::default()), Err(Error::NotNeumann { .. })));
        let h = field(g, |x| x.cos());
        assert!(solve_galerkin(&h, &bg, &GalerkinConfig { epsilon: 0.0, ..Default::default() }).is_err());
        // with every resolvable mode and strong damping the Galerkin bound
        // is tighter than the flow's
        let bg = constant_background(g, 0.0045, 0.009, [0.0, 0.0, 1.0]);
        assert!(matches!(
            solve_galerkin(&h, &bg, &GalerkinConfig { epsilon: 0.9, n: 17, ..Default::default() }),
            Err(Error::Cfl { .. })
        ));
    }
}
