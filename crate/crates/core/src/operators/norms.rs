use serde::{Deserialize, Serialize};

use super::{grad_norm, l2_norm, laplacian, max_boundary_flux, resolution_tol};
use crate::error::{Error, Result};
use crate::state::Vec3Field;

pub const MAX_SOBOLEV_ORDER: usize = 5;

/// Order `k` of a `W^{k,2}` norm, `0 <= k <= 5`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct SobolevOrder(usize);

impl SobolevOrder {
    pub fn new(k: usize) -> Result<Self> {
        if k > MAX_SOBOLEV_ORDER {
            return Err(Error::OrderTooHigh { order: k, max: MAX_SOBOLEV_ORDER });
        }
        Ok(SobolevOrder(k))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl TryFrom<usize> for SobolevOrder {
    type Error = Error;
    fn try_from(k: usize) -> Result<Self> {
        SobolevOrder::new(k)
    }
}

impl From<SobolevOrder> for usize {
    fn from(k: SobolevOrder) -> usize {
        k.0
    }
}

/// Equivalent Neumann norm
///
/// ```text
/// ||f||_k = ||f||                      k = 0
///         = ||f|| + ||lap^m f||        k = 2m
///         = ||f|| + ||d lap^m f||      k = 2m + 1
/// ```
///
/// with trapezoidal `L2` and the edge-based gradient. Orders `>= 2` require
/// `f` to satisfy the Neumann condition to resolution tolerance; without it
/// the Laplacian iterates do not control the full norm.
pub fn sobolev_norm(f: &Vec3Field, order: SobolevOrder) -> Result<f64> {
    let grid = f.grid();
    if order.get() >= 2 && !grid.is_periodic() {
        let flux = max_boundary_flux(f);
        let tol = resolution_tol(grid) * f.max_norm().max(1.0);
        if flux > tol {
            return Err(Error::NotNeumann { flux, tol });
        }
    }
    Ok(sobolev_norm_unchecked(f, order))
}

/// [`sobolev_norm`] without the boundary precondition; used for monitoring.
pub fn sobolev_norm_unchecked(f: &Vec3Field, order: SobolevOrder) -> f64 {
    let k = order.get();
    let base = l2_norm(f);
    if k == 0 {
        return base;
    }
    let mut top = f.clone();
    for _ in 0..k / 2 {
        top = laplacian(&top);
    }
    let extra = if k.is_multiple_of(2) { l2_norm(&top) } else { grad_norm(&top) };
    base + extra
}
