use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::state::{Grid, SphereField, Vec3Field};
use crate::vec3;

fn check(grid: &Grid) -> Result<()> {
    grid.require_periodic("helical_exact")?;
    if grid.dim() != 1 {
        return Err(Error::InvalidArgument("helical solutions are one-dimensional".into()));
    }
    Ok(())
}

fn helix(grid: &Grid, kappa: f64, omega: f64, alpha: f64, t: f64) -> SphereField {
    let (s, c) = alpha.sin_cos();
    let f = Vec3Field::from_fn(*grid, |x| {
        let phi = kappa * x[0] + omega * t;
        [s * phi.cos(), s * phi.sin(), c]
    });
    SphereField::new(f).expect("helix is unit")
}

fn wavenumber(grid: &Grid, k_mode: usize) -> f64 {
    2.0 * PI * k_mode as f64 / grid.extents()[0]
}

/// `u = (sin a cos phi, sin a sin phi, cos a)`, `phi = kappa x + omega t`,
/// with `omega = -kappa^2 cos a`; an exact solution of `d_t u = u x u_xx`.
pub fn helical_exact(grid: &Grid, k_mode: usize, alpha: f64, t: f64) -> Result<SphereField> {
    check(grid)?;
    let kappa = wavenumber(grid, k_mode);
    Ok(helix(grid, kappa, -kappa * kappa * alpha.cos(), alpha, t))
}

/// The helix with the discrete wavenumber `kappa_h^2 = (2 - 2 cos kappa h)/h^2`,
/// an exact solution of the semi-discrete flow on the periodic grid.
pub fn helical_semi_discrete(grid: &Grid, k_mode: usize, alpha: f64, t: f64) -> Result<SphereField> {
    check(grid)?;
    let kappa = wavenumber(grid, k_mode);
    let h = grid.spacing()[0];
    let kh2 = (2.0 - 2.0 * (kappa * h).cos()) / (h * h);
    Ok(helix(grid, kappa, -kh2 * alpha.cos(), alpha, t))
}

/// `max |d_t u - u x u_xx|` for the exact helix, with `u_xx` by FFT and
/// `d_t u` from the ansatz.
pub fn helical_dispersion_residual(grid: &Grid, k_mode: usize, alpha: f64, t: f64) -> Result<f64> {
    let u = helical_exact(grid, k_mode, alpha, t)?;
    let n = grid.points()[0];
    let l = grid.extents()[0];
    let kappa = wavenumber(grid, k_mode);
    let omega = -kappa * kappa * alpha.cos();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut uxx = vec![vec3::ZERO; n];
    for c in 0..3 {
        let mut buf: Vec<Complex<f64>> = u.data().iter().map(|v| Complex::new(v[c], 0.0)).collect();
        fwd.process(&mut buf);
        for (j, z) in buf.iter_mut().enumerate() {
            let m = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
            let q = 2.0 * PI * m / l;
            *z *= -q * q / n as f64;
        }
        inv.process(&mut buf);
        for (o, z) in uxx.iter_mut().zip(&buf) {
            o[c] = z.re;
        }
    }
    let mut worst = 0.0f64;
    for (i, (&v, &w)) in u.data().iter().zip(&uxx).enumerate() {
        let x = grid.coord(i)[0];
        let phi = kappa * x + omega * t;
        let dt = [-alpha.sin() * phi.sin() * omega, alpha.sin() * phi.cos() * omega, 0.0];
        worst = worst.max(vec3::norm(vec3::sub(dt, vec3::cross(v, w))));
    }
    Ok(worst)
}
