//! Truncated time series in derivative form: entry `j` holds `d^j f / dt^j`
//! at the expansion point. Products follow the Leibniz rule.

use crate::state::{ScalarField, Vec3Field};
use crate::vec3;

pub(crate) fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[derive(Clone, Debug)]
pub struct Series(pub Vec<Vec3Field>);

#[derive(Clone, Debug)]
pub struct ScalarSeries(pub Vec<ScalarField>);

impl Series {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Series of the time derivative; one term shorter.
    pub fn derivative(&self) -> Series {
        Series(self.0.iter().skip(1).cloned().collect())
    }

    pub fn add(&self, other: &Series) -> Series {
        Series(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Leibniz product `<f, g>`.
    pub fn dot(&self, other: &Series) -> ScalarSeries {
        let n = self.len().min(other.len());
        ScalarSeries(
            (0..n)
                .map(|m| {
                    let grid = *self.0[0].grid();
                    let mut acc = vec![0.0; grid.len()];
                    for i in 0..=m {
                        let c = binom(m, i);
                        for (o, (a, b)) in acc.iter_mut().zip(self.0[i].data().iter().zip(other.0[m - i].data())) {
                            *o += c * vec3::dot(*a, *b);
                        }
                    }
                    ScalarField::from_vec(grid, acc).expect("same grid")
                })
                .collect(),
        )
    }

    /// Leibniz product `f x g`.
    pub fn cross(&self, other: &Series) -> Series {
        self.bilinear(other, vec3::cross)
    }

    /// Leibniz product `s f` with a scalar series.
    pub fn scaled_by(&self, s: &ScalarSeries) -> Series {
        let n = self.len().min(s.0.len());
        Series(
            (0..n)
                .map(|m| {
                    let mut acc = Vec3Field::zeros(*self.0[0].grid());
                    for i in 0..=m {
                        let term = self.0[m - i].mul_scalar(&s.0[i]);
                        acc.axpy(binom(m, i), &term);
                    }
                    acc
                })
                .collect(),
        )
    }

    fn bilinear(&self, other: &Series, op: fn(vec3::V3, vec3::V3) -> vec3::V3) -> Series {
        let n = self.len().min(other.len());
        Series(
            (0..n)
                .map(|m| {
                    let grid = *self.0[0].grid();
                    let mut acc = vec![vec3::ZERO; grid.len()];
                    for i in 0..=m {
                        let c = binom(m, i);
                        for (o, (a, b)) in acc.iter_mut().zip(self.0[i].data().iter().zip(other.0[m - i].data())) {
                            *o = vec3::axpy(*o, c, op(*a, *b));
                        }
                    }
                    Vec3Field::from_vec(grid, acc).expect("same grid")
                })
                .collect(),
        )
    }
}

/// Covariant time derivative along `u` for `S^2`:
/// `nabla_t w = d_t w + <d_t u, w> u`, truncated to what both series support.
pub fn covariant_derivative(u: &Series, w: &Series) -> Series {
    let dw = w.derivative();
    let du = u.derivative();
    let corr = u.scaled_by(&du.dot(w));
    let n = dw.len().min(corr.len());
    Series(dw.0[..n].iter().zip(&corr.0[..n]).map(|(a, b)| a + b).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{make_grid, BoundaryMode};

    fn scalar_series(g: crate::state::Grid, f: impl Fn(usize) -> [f64; 3], n: usize) -> Series {
        Series((0..n).map(|j| Vec3Field::constant(g, f(j))).collect())
    }

    #[test]
    fn binomials() {
        assert_eq!(binom(4, 2), 6.0);
        assert_eq!(binom(5, 0), 1.0);
        assert_eq!(binom(6, 6), 1.0);
    }

    /// `e^t * e^{2t}` has derivatives `3^m`.
    #[test]
    fn leibniz_product_of_exponentials() {
        let g = make_grid(1, &[1.0], &[5], BoundaryMode::NeumannMirror).unwrap();
        let a = scalar_series(g, |_| [1.0, 0.0, 0.0], 6);
        let b = scalar_series(g, |j| [2f64.powi(j as i32), 0.0, 0.0], 6);
        let p = a.dot(&b);
        for (m, s) in p.0.iter().enumerate() {
            assert!((s.data()[0] - 3f64.powi(m as i32)).abs() < 1e-12);
        }
    }

    /// A uniform rotation `u(t) = (cos t, sin t, 0)` is a geodesic, so its
    /// covariant acceleration vanishes while `d^2u/dt^2 = -u`.
    #[test]
    fn geodesic_has_zero_covariant_acceleration() {
        let g = make_grid(1, &[1.0], &[5], BoundaryMode::NeumannMirror).unwrap();
        let u = scalar_series(
            g,
            |j| {
                let t = j as f64 * std::f64::consts::FRAC_PI_2;
                [t.cos(), t.sin(), 0.0]
            },
            6,
        );
        let v1 = u.derivative();
        let v2 = covariant_derivative(&u, &v1);
        let v3 = covariant_derivative(&u, &v2);
        assert!(v2.0.iter().all(|f| f.max_norm() < 1e-14));
        assert!(v3.0.iter().all(|f| f.max_norm() < 1e-14));
    }
}
