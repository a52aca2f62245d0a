use std::ops::{Add, Deref, Mul, Sub};

use crate::error::{Error, Result};
use crate::state::Grid;
use crate::vec3::{self, V3};

/// Default tolerance for the unit-length invariant of [`SphereField`].
pub const UNIT_TOL: f64 = 1e-10;
/// Default tolerance for the tangency invariant of [`TangentField`].
pub const TANGENCY_TOL: f64 = 1e-8;
/// Nodes shorter than this cannot be normalized.
pub const DEGENERATE_NORM: f64 = 1e-14;

/// One real number per node.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        ScalarField { data: vec![0.0; grid.len()], grid }
    }

    pub fn from_vec(grid: Grid, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "scalar field has {} values for {} nodes",
                data.len(),
                grid.len()
            )));
        }
        Ok(ScalarField { grid, data })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn max(&self) -> f64 {
        self.data.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// A discretized map `Omega -> R^3`, components interleaved per node.
#[derive(Clone, Debug, PartialEq)]
pub struct Vec3Field {
    grid: Grid,
    data: Vec<V3>,
}

impl Vec3Field {
    pub fn zeros(grid: Grid) -> Self {
        Vec3Field { data: vec![vec3::ZERO; grid.len()], grid }
    }

    pub fn constant(grid: Grid, v: V3) -> Self {
        Vec3Field { data: vec![v; grid.len()], grid }
    }

    pub fn from_vec(grid: Grid, data: Vec<V3>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "vector field has {} values for {} nodes",
                data.len(),
                grid.len()
            )));
        }
        Ok(Vec3Field { grid, data })
    }

    /// Samples `f` at every node coordinate.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> V3) -> Self {
        let data = (0..grid.len()).map(|i| f(grid.coord(i))).collect();
        Vec3Field { grid, data }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn data(&self) -> &[V3] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [V3] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<V3> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn ensure_same_grid(&self, other: &Vec3Field) -> Result<()> {
        if self.grid.compatible(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn map(&self, f: impl Fn(V3) -> V3) -> Vec3Field {
        Vec3Field {
            grid: self.grid,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Vec3Field, f: impl Fn(V3, V3) -> V3) -> Vec3Field {
        debug_assert_eq!(self.len(), other.len());
        Vec3Field {
            grid: self.grid,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: f64, other: &Vec3Field) {
        debug_assert_eq!(self.len(), other.len());
        for (a, &b) in self.data.iter_mut().zip(other.data.iter()) {
            *a = vec3::axpy(*a, s, b);
        }
    }

    pub fn scaled(&self, s: f64) -> Vec3Field {
        self.map(|v| vec3::scale(s, v))
    }

    pub fn cross(&self, other: &Vec3Field) -> Vec3Field {
        self.zip_map(other, vec3::cross)
    }

    pub fn dot(&self, other: &Vec3Field) -> ScalarField {
        ScalarField {
            grid: self.grid,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(&a, &b)| vec3::dot(a, b))
                .collect(),
        }
    }

    /// Multiplies node `i` by `s[i]`.
    pub fn mul_scalar(&self, s: &ScalarField) -> Vec3Field {
        Vec3Field {
            grid: self.grid,
            data: self
                .data
                .iter()
                .zip(s.data.iter())
                .map(|(&v, &c)| vec3::scale(c, v))
                .collect(),
        }
    }

    pub fn norms(&self) -> ScalarField {
        ScalarField {
            grid: self.grid,
            data: self.data.iter().map(|&v| vec3::norm(v)).collect(),
        }
    }

    /// `max_x |f(x)|`
    pub fn max_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &v| m.max(vec3::norm(v)))
    }

    /// `max_x ||f(x)| - 1|`
    pub fn unit_drift(&self) -> f64 {
        self.data
            .iter()
            .fold(0.0, |m, &v| m.max((vec3::norm(v) - 1.0).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.iter().all(|c| c.is_finite()))
    }

    /// `max_x |<self(x), u(x)>|`
    pub fn tangency_drift(&self, u: &Vec3Field) -> f64 {
        self.data
            .iter()
            .zip(u.data.iter())
            .fold(0.0, |m, (&w, &b)| m.max(vec3::dot(w, b).abs()))
    }

    /// Component `c` as a flat vector.
    pub fn component(&self, c: usize) -> Vec<f64> {
        self.data.iter().map(|v| v[c]).collect()
    }
}

impl Add for &Vec3Field {
    type Output = Vec3Field;
    fn add(self, rhs: &Vec3Field) -> Vec3Field {
        self.zip_map(rhs, vec3::add)
    }
}

impl Sub for &Vec3Field {
    type Output = Vec3Field;
    fn sub(self, rhs: &Vec3Field) -> Vec3Field {
        self.zip_map(rhs, vec3::sub)
    }
}

impl Mul<&Vec3Field> for f64 {
    type Output = Vec3Field;
    fn mul(self, rhs: &Vec3Field) -> Vec3Field {
        rhs.scaled(self)
    }
}

/// A discretized map into the unit sphere.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereField {
    field: Vec3Field,
}

impl SphereField {
    /// Wraps `field` after checking the unit invariant at [`UNIT_TOL`].
    pub fn new(field: Vec3Field) -> Result<Self> {
        Self::with_tol(field, UNIT_TOL)
    }

    pub fn with_tol(field: Vec3Field, tol: f64) -> Result<Self> {
        let drift = field.unit_drift();
        if !(drift <= tol) {
            return Err(Error::NotUnit { drift, tol });
        }
        Ok(SphereField { field })
    }

    pub fn as_field(&self) -> &Vec3Field {
        &self.field
    }

    pub fn into_field(self) -> Vec3Field {
        self.field
    }
}

impl Deref for SphereField {
    type Target = Vec3Field;
    fn deref(&self) -> &Vec3Field {
        &self.field
    }
}

/// Projects every node onto the sphere, `u = f / |f|`.
pub fn normalize_to_sphere(f: &Vec3Field) -> Result<SphereField> {
    let mut data = Vec::with_capacity(f.len());
    for (i, &v) in f.data().iter().enumerate() {
        let n = vec3::norm(v);
        if !(n >= DEGENERATE_NORM) {
            return Err(Error::Degenerate { node: i, magnitude: n });
        }
        data.push(vec3::scale(1.0 / n, v));
    }
    Ok(SphereField {
        field: Vec3Field { grid: *f.grid(), data },
    })
}

/// A section of `u*(TS^2)` together with the tangency drift measured when it
/// was built. Tangency is reported, never repaired.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentField {
    field: Vec3Field,
    drift: f64,
}

impl TangentField {
    /// Fails when `max |<w,u>|` exceeds `tol`.
    pub fn checked(field: Vec3Field, base: &SphereField, tol: f64) -> Result<Self> {
        let drift = field.tangency_drift(base);
        if !(drift <= tol) {
            return Err(Error::NotTangent { drift, tol });
        }
        Ok(TangentField { field, drift })
    }

    /// Records the drift without judging it.
    pub fn measured(field: Vec3Field, base: &Vec3Field) -> Self {
        let drift = field.tangency_drift(base);
        TangentField { field, drift }
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn as_field(&self) -> &Vec3Field {
        &self.field
    }

    pub fn into_field(self) -> Vec3Field {
        self.field
    }
}

impl Deref for TangentField {
    type Target = Vec3Field;
    fn deref(&self) -> &Vec3Field {
        &self.field
    }
}
