use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the discrete operators see past the last node on each axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// Ghost node `-1` mirrors node `1`; homogeneous Neumann to second order.
    NeumannMirror,
    /// Wrap-around; only used to validate interior discretizations against
    /// exact solutions that are not Neumann-compatible.
    Periodic,
}

impl BoundaryMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryMode::NeumannMirror => "neumann_mirror",
            BoundaryMode::Periodic => "periodic",
        }
    }
}

/// Rectilinear box grid in one to three dimensions.
///
/// Neumann grids are node-centered and include both boundary nodes, so
/// `spacing = extent / (points - 1)`. Periodic grids drop the duplicated end
/// node: `spacing = extent / points`.
///
/// Nodes are stored with axis 0 varying fastest.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    extents: [f64; 3],
    points: [usize; 3],
    spacing: [f64; 3],
    mode: BoundaryMode,
}

pub const MIN_POINTS: usize = 4;

/// Builds a grid. `points` may hold a single entry that is reused on every axis.
pub fn make_grid(
    dim: usize,
    extents: &[f64],
    points: &[usize],
    mode: BoundaryMode,
) -> Result<Grid> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidGrid(format!("dim must be 1, 2 or 3, got {dim}")));
    }
    let pick = |v: &[usize], a: usize| if v.len() == 1 { v[0] } else { v[a] };
    let pick_f = |v: &[f64], a: usize| if v.len() == 1 { v[0] } else { v[a] };
    if (extents.len() != 1 && extents.len() != dim) || (points.len() != 1 && points.len() != dim) {
        return Err(Error::InvalidGrid(format!(
            "expected {dim} extents and point counts, got {} and {}",
            extents.len(),
            points.len()
        )));
    }
    let mut g = Grid {
        dim,
        extents: [0.0; 3],
        points: [1; 3],
        spacing: [0.0; 3],
        mode,
    };
    for a in 0..dim {
        let n = pick(points, a);
        let l = pick_f(extents, a);
        if n < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "axis {a}: {n} points, need at least {MIN_POINTS}"
            )));
        }
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::InvalidGrid(format!("axis {a}: extent {l} is not positive")));
        }
        g.points[a] = n;
        g.extents[a] = l;
        g.spacing[a] = match mode {
            BoundaryMode::NeumannMirror => l / (n - 1) as f64,
            BoundaryMode::Periodic => l / n as f64,
        };
    }
    Ok(g)
}

impl Grid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> BoundaryMode {
        self.mode
    }

    pub fn is_periodic(&self) -> bool {
        self.mode == BoundaryMode::Periodic
    }

    pub fn extents(&self) -> &[f64] {
        &self.extents[..self.dim]
    }

    pub fn points(&self) -> &[usize] {
        &self.points[..self.dim]
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing[..self.dim]
    }

    pub fn h_max(&self) -> f64 {
        self.spacing().iter().cloned().fold(0.0, f64::max)
    }

    pub fn h_min(&self) -> f64 {
        self.spacing().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.points[..axis].iter().product()
    }

    pub fn multi_index(&self, mut idx: usize) -> [usize; 3] {
        let mut m = [0; 3];
        for (a, n) in self.points.iter().enumerate() {
            m[a] = idx % n;
            idx /= n;
        }
        m
    }

    pub fn index(&self, m: [usize; 3]) -> usize {
        m[0] + self.points[0] * (m[1] + self.points[1] * m[2])
    }

    pub fn coord(&self, idx: usize) -> [f64; 3] {
        let m = self.multi_index(idx);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = m[a] as f64 * self.spacing[a];
        }
        x
    }

    /// Index of the neighbour one step along `axis` (`forward` or backward),
    /// resolving ghost nodes by mirroring or wrapping.
    #[inline]
    pub fn neighbor(&self, idx: usize, axis: usize, forward: bool) -> usize {
        let n = self.points[axis];
        let s = self.stride(axis);
        let i = (idx / s) % n;
        let j = match (self.mode, forward) {
            (_, true) if i + 1 < n => i + 1,
            (_, false) if i > 0 => i - 1,
            (BoundaryMode::NeumannMirror, true) => n - 2,
            (BoundaryMode::NeumannMirror, false) => 1,
            (BoundaryMode::Periodic, true) => 0,
            (BoundaryMode::Periodic, false) => n - 1,
        };
        idx - i * s + j * s
    }

    /// One-dimensional quadrature weight along `axis` at position `i`.
    #[inline]
    pub fn axis_weight(&self, axis: usize, i: usize) -> f64 {
        let h = self.spacing[axis];
        match self.mode {
            BoundaryMode::NeumannMirror if i == 0 || i + 1 == self.points[axis] => 0.5 * h,
            _ => h,
        }
    }

    /// Trapezoidal weight of a node (product of axis weights).
    pub fn weight(&self, idx: usize) -> f64 {
        let m = self.multi_index(idx);
        (0..self.dim).map(|a| self.axis_weight(a, m[a])).product()
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.weight(i)).collect()
    }

    /// Measure of the box.
    pub fn volume(&self) -> f64 {
        self.extents().iter().product()
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        if self.is_periodic() {
            return false;
        }
        let m = self.multi_index(idx);
        (0..self.dim).any(|a| m[a] == 0 || m[a] + 1 == self.points[a])
    }

    /// Same grid up to rounding in the extents.
    pub fn compatible(&self, other: &Grid) -> bool {
        self.dim == other.dim
            && self.mode == other.mode
            && self.points == other.points
            && self
                .extents
                .iter()
                .zip(other.extents.iter())
                .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(1.0))
    }

    pub fn require_neumann(&self, op: &'static str) -> Result<()> {
        if self.is_periodic() {
            Err(Error::PeriodicRejected { op })
        } else {
            Ok(())
        }
    }

    pub fn require_periodic(&self, op: &'static str) -> Result<()> {
        if self.is_periodic() {
            Ok(())
        } else {
            Err(Error::NeumannRejected { op })
        }
    }

    /// Same node layout with every extent multiplied by `s`.
    pub fn rescaled(&self, s: f64) -> Grid {
        let mut g = *self;
        for a in 0..self.dim {
            g.extents[a] *= s;
            g.spacing[a] *= s;
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn spacing_from_definition() {
        let g = make_grid(1, &[PI], &[5], BoundaryMode::NeumannMirror).unwrap();
        assert!((g.spacing()[0] - PI / 4.0).abs() < 1e-15);

        let g = make_grid(2, &[1.0, 2.0], &[11, 21], BoundaryMode::NeumannMirror).unwrap();
        assert!((g.spacing()[0] - 0.1).abs() < 1e-15);
        assert!((g.spacing()[1] - 0.1).abs() < 1e-15);
        assert_eq!(g.len(), 231);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(make_grid(1, &[1.0], &[3], BoundaryMode::NeumannMirror).is_err());
        assert!(make_grid(1, &[0.0], &[8], BoundaryMode::NeumannMirror).is_err());
        assert!(make_grid(1, &[-1.0], &[8], BoundaryMode::NeumannMirror).is_err());
        assert!(make_grid(4, &[1.0], &[8], BoundaryMode::NeumannMirror).is_err());
        assert!(make_grid(2, &[1.0, 1.0, 1.0], &[8], BoundaryMode::NeumannMirror).is_err());
    }

    #[test]
    fn mirror_and_wrap_neighbours() {
        let g = make_grid(1, &[1.0], &[6], BoundaryMode::NeumannMirror).unwrap();
        assert_eq!(g.neighbor(0, 0, false), 1);
        assert_eq!(g.neighbor(5, 0, true), 4);
        assert_eq!(g.neighbor(2, 0, true), 3);
        let g = make_grid(1, &[1.0], &[6], BoundaryMode::Periodic).unwrap();
        assert_eq!(g.neighbor(0, 0, false), 5);
        assert_eq!(g.neighbor(5, 0, true), 0);

        let g = make_grid(2, &[1.0, 1.0], &[4, 5], BoundaryMode::NeumannMirror).unwrap();
        let idx = g.index([2, 0, 0]);
        assert_eq!(g.neighbor(idx, 1, false), g.index([2, 1, 0]));
    }

    #[test]
    fn weights_integrate_volume() {
        let g = make_grid(3, &[1.0, 2.0, 0.5], &[5, 6, 7], BoundaryMode::NeumannMirror).unwrap();
        let total: f64 = g.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
        let g = make_grid(2, &[2.0, 3.0], &[8, 4], BoundaryMode::Periodic).unwrap();
        let total: f64 = g.weights().iter().sum();
        assert!((total - 6.0).abs() < 1e-14);
    }
}
