//! Tensor-product cosine transform (DCT-I) on node-centered Neumann grids.
//!
//! A field is expanded as `f(x) = sum_k a_k prod_a cos(k_a pi x_a / L_a)`,
//! `0 <= k_a <= N_a - 1`. The functions `cos(k pi x / L)` are exactly the
//! sampled Neumann eigenfunctions of the box, and they are orthogonal under
//! the trapezoidal inner product, so the transform is exact on nodes.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::Result;
use crate::state::{Grid, Vec3Field};
use crate::vec3::V3;

/// Cosine coefficients of a vector field, indexed like the grid nodes
/// (mode `k_a` sits where node `i_a = k_a` would).
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralRep {
    grid: Grid,
    coeffs: Vec<V3>,
}

impl SpectralRep {
    pub fn zeros(grid: Grid) -> Self {
        SpectralRep { coeffs: vec![[0.0; 3]; grid.len()], grid }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[V3] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [V3] {
        &mut self.coeffs
    }

    pub fn coeff(&self, mode: [usize; 3]) -> V3 {
        self.coeffs[self.grid.index(mode)]
    }

    pub fn set_coeff(&mut self, mode: [usize; 3], v: V3) {
        let i = self.grid.index(mode);
        self.coeffs[i] = v;
    }

    /// `||prod_a cos(k_a pi x_a / L_a)||^2` in the trapezoidal inner product.
    pub fn mode_weight(&self, idx: usize) -> f64 {
        let m = self.grid.multi_index(idx);
        (0..self.grid.dim())
            .map(|a| {
                let l = self.grid.extents()[a];
                if m[a] == 0 || m[a] + 1 == self.grid.points()[a] {
                    l
                } else {
                    0.5 * l
                }
            })
            .product()
    }

    /// Coefficient-space L2 norm; equals the nodal trapezoidal norm (Parseval).
    pub fn norm(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| self.mode_weight(i) * (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]))
            .sum::<f64>()
            .sqrt()
    }

    /// `-(sum_a (k_a pi / L_a)^2)`, the continuous Laplacian eigenvalue of mode `idx`.
    pub fn laplacian_eigenvalue(&self, idx: usize) -> f64 {
        let m = self.grid.multi_index(idx);
        -(0..self.grid.dim())
            .map(|a| (m[a] as f64 * PI / self.grid.extents()[a]).powi(2))
            .sum::<f64>()
    }
}

struct AxisPlan {
    fft: Arc<dyn Fft<f64>>,
    m: usize,
}

thread_local! {
    // the planner caches plans by length
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plans(grid: &Grid) -> Vec<AxisPlan> {
    PLANNER.with_borrow_mut(|planner| {
        grid.points()
            .iter()
            .map(|&n| {
                let m = n - 1;
                AxisPlan { fft: planner.plan_fft_forward(2 * m), m }
            })
            .collect()
    })
}

/// Half-weight DCT-I of every line along every axis, in place:
/// `S_k = x_0/2 + (-1)^k x_M/2 + sum_{j=1}^{M-1} x_j cos(pi j k / M)`,
/// applied to `pre(axis, j) x_j` and followed by `S_k *= post(axis, k)`.
fn transform_axes(grid: &Grid, data: &mut [V3], pre: impl Fn(usize, usize) -> f64, post: impl Fn(usize, usize) -> f64) {
    let plans = plans(grid);
    let mut buf = Vec::new();
    let mut scratch = Vec::new();
    for (axis, plan) in plans.iter().enumerate() {
        let n = grid.points()[axis];
        let m = plan.m;
        let stride = grid.stride(axis);
        scratch.resize(plan.fft.get_inplace_scratch_len(), Complex::default());
        for block in (0..grid.len()).step_by(stride * n) {
            for start in block..block + stride {
                let at = |j: usize| start + j * stride;
                // Indexed: the closures below borrow `data` by position.
                #[allow(clippy::needless_range_loop)]
                for c in 0..3 {
                    let value = |j: usize| Complex::new(pre(axis, j) * data[at(j)][c], 0.0);
                    buf.clear();
                    buf.extend((0..n).map(value));
                    buf.extend((1..m).rev().map(value));
                    plan.fft.process_with_scratch(&mut buf, &mut scratch);
                    for (k, z) in buf[..n].iter().enumerate() {
                        data[at(k)][c] = 0.5 * post(axis, k) * z.re;
                    }
                }
            }
        }
    }
}

/// Weight 2 on the first and last mode of an axis.
fn end_weight(k: usize, m: usize) -> f64 {
    if k == 0 || k == m {
        2.0
    } else {
        1.0
    }
}

/// Nodal values to cosine amplitudes.
pub fn cosine_forward(f: &Vec3Field) -> Result<SpectralRep> {
    let grid = *f.grid();
    grid.require_neumann("cosine_forward")?;
    let mut data = f.data().to_vec();
    transform_axes(&grid, &mut data, |_, _| 1.0, |axis, k| {
        let m = grid.points()[axis] - 1;
        2.0 / (m as f64 * end_weight(k, m))
    });
    Ok(SpectralRep { grid, coeffs: data })
}

/// Cosine amplitudes to nodal values: the half-weight cosine sum of
/// `c_k a_k` with `c_k = 2` at the end modes.
pub fn cosine_inverse(c: &SpectralRep) -> Vec3Field {
    let grid = c.grid;
    let mut data = c.coeffs.clone();
    transform_axes(&grid, &mut data, |axis, k| end_weight(k, grid.points()[axis] - 1), |_, _| 1.0);
    Vec3Field::from_vec(grid, data).expect("length preserved")
}

/// Laplacian applied as the exact multiplier `-(k pi / L)^2` per mode.
pub fn spectral_laplacian(f: &Vec3Field) -> Result<Vec3Field> {
    let mut rep = cosine_forward(f)?;
    for i in 0..rep.coeffs.len() {
        let lam = rep.laplacian_eigenvalue(i);
        let c = &mut rep.coeffs[i];
        for v in c.iter_mut() {
            *v *= lam;
        }
    }
    Ok(cosine_inverse(&rep))
}
