//! Named initial data.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::helical_exact;
use crate::state::{normalize_to_sphere, Grid, SphereField, Vec3Field};

pub const PROFILE_NAMES: &[&str] = &[
    "constant",
    "equatorial_cos",
    "equatorial_linear",
    "equatorial_cubic",
    "sine_bump",
    "random_smooth",
    "helical",
];

/// A profile name with numeric parameters.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl ProfileSpec {
    pub fn new(name: &str, params: &[(&str, f64)]) -> Self {
        ProfileSpec {
            name: name.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    fn get(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }

    pub fn build(&self, grid: &Grid) -> Result<SphereField> {
        named_profile(&self.name, &self.params, grid)
    }
}

fn planar(grid: &Grid, theta: impl Fn([f64; 3]) -> f64) -> Result<SphereField> {
    normalize_to_sphere(&Vec3Field::from_fn(*grid, |x| {
        let t = theta(x);
        [t.sin(), 0.0, t.cos()]
    }))
}

/// Deterministic sphere-valued data on `grid`.
///
/// | name | parameters | field |
/// |---|---|---|
/// | `constant` | `ux, uy, uz` (default `e3`) | normalized constant |
/// | `equatorial_cos` | `a = 0.3`, `m = 1` | `theta = a sum_axes cos(m pi x_a / L_a)` |
/// | `equatorial_linear` | `a = 0.3` | `theta = a x_0` |
/// | `equatorial_cubic` | `a = 2` | `theta = a (x/L)^2 (1 - 2x/3L)` along axis 0 |
/// | `sine_bump` | `a = 0.5` | `theta = a sin(pi x_0 / L_0)` |
/// | `random_smooth` | `seed = 0`, `bands = 2`, `amp = 0.4` | `e3 +` random cosines, normalized |
/// | `helical` | `k = 1`, `alpha = pi/3` | periodic helix at `t = 0` |
///
/// Planar profiles are `(sin theta, 0, cos theta)`.
pub fn named_profile(name: &str, params: &BTreeMap<String, f64>, grid: &Grid) -> Result<SphereField> {
    let spec = ProfileSpec { name: name.to_string(), params: params.clone() };
    let l = grid.extents().to_vec();
    let d = grid.dim();
    match name {
        "constant" => {
            let v = [spec.get("ux", 0.0), spec.get("uy", 0.0), spec.get("uz", 1.0)];
            normalize_to_sphere(&Vec3Field::constant(*grid, v))
        }
        "equatorial_cos" => {
            let (a, m) = (spec.get("a", 0.3), spec.get("m", 1.0));
            planar(grid, |x| a * (0..d).map(|k| (m * PI * x[k] / l[k]).cos()).sum::<f64>())
        }
        "equatorial_linear" => {
            let a = spec.get("a", 0.3);
            planar(grid, |x| a * x[0])
        }
        "equatorial_cubic" => {
            let a = spec.get("a", 2.0);
            planar(grid, |x| {
                let s = x[0] / l[0];
                a * s * s * (1.0 - 2.0 * s / 3.0)
            })
        }
        "sine_bump" => {
            let a = spec.get("a", 0.5);
            planar(grid, |x| a * (PI * x[0] / l[0]).sin())
        }
        "random_smooth" => {
            let bands = spec.get("bands", 2.0).max(0.0) as usize;
            let amp = spec.get("amp", 0.4);
            let mut rng = ChaCha8Rng::seed_from_u64(spec.get("seed", 0.0) as u64);
            let count = (bands + 1).pow(d as u32);
            let coeffs: Vec<[f64; 3]> =
                (0..count).map(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0))).collect();
            normalize_to_sphere(&Vec3Field::from_fn(*grid, |x| {
                let mut v = [0.0, 0.0, 1.0];
                for (i, c) in coeffs.iter().enumerate() {
                    let mut rest = i;
                    let mut b = 1.0;
                    for k in 0..d {
                        let m = rest % (bands + 1);
                        rest /= bands + 1;
                        b *= (m as f64 * PI * x[k] / l[k]).cos();
                    }
                    for j in 0..3 {
                        v[j] += amp * c[j] * b / count as f64;
                    }
                }
                v
            }))
        }
        "helical" => {
            let k = spec.get("k", 1.0) as usize;
            helical_exact(grid, k, spec.get("alpha", PI / 3.0), 0.0)
        }
        other => Err(Error::UnknownProfile(other.to_string())),
    }
}

/// The fixed audit set: twelve profiles with the grid dimension each lives on.
pub fn canned_profiles() -> Vec<(usize, ProfileSpec)> {
    vec![
        (1, ProfileSpec::new("constant", &[])),
        (1, ProfileSpec::new("constant", &[("ux", 1.0), ("uy", 2.0), ("uz", 2.0)])),
        (1, ProfileSpec::new("equatorial_cos", &[("a", 0.3)])),
        (1, ProfileSpec::new("equatorial_cos", &[("a", 1.0), ("m", 2.0)])),
        (1, ProfileSpec::new("random_smooth", &[("seed", 1.0), ("bands", 2.0)])),
        (1, ProfileSpec::new("sine_bump", &[("a", 0.5)])),
        (1, ProfileSpec::new("equatorial_linear", &[("a", 0.3)])),
        (1, ProfileSpec::new("equatorial_linear", &[("a", 1.0)])),
        (1, ProfileSpec::new("equatorial_cubic", &[("a", 2.0)])),
        (2, ProfileSpec::new("equatorial_cos", &[("a", 0.3)])),
        (2, ProfileSpec::new("random_smooth", &[("seed", 2.0), ("bands", 2.0)])),
        (2, ProfileSpec::new("equatorial_linear", &[("a", 0.3)])),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compatibility::check_compat;
    use crate::state::{make_grid, BoundaryMode};

    fn line(n: usize) -> Grid {
        make_grid(1, &[PI], &[n], BoundaryMode::NeumannMirror).unwrap()
    }

    #[test]
    fn examples() {
        let g = line(65);
        let c = ProfileSpec::new("constant", &[]).build(&g).unwrap();
        assert!(c.data().iter().all(|v| *v == [0.0, 0.0, 1.0]));
        let c = ProfileSpec::new("constant", &[("ux", 3.0), ("uy", 4.0), ("uz", 0.0)]).build(&g).unwrap();
        assert!((c.data()[0][0] - 0.6).abs() < 1e-15);
        let good = ProfileSpec::new("equatorial_cos", &[("a", 0.3)]).build(&g).unwrap();
        assert!(check_compat(&good, 0, None).unwrap().pass());
        let bad = ProfileSpec::new("equatorial_linear", &[("a", 0.3)]).build(&g).unwrap();
        assert!(!check_compat(&bad, 0, None).unwrap().pass());
        assert!(matches!(ProfileSpec::new("nope", &[]).build(&g), Err(Error::UnknownProfile(_))));
    }

    #[test]
    fn cubic_is_compatible_at_order_zero_only() {
        let g = line(129);
        let u = ProfileSpec::new("equatorial_cubic", &[]).build(&g).unwrap();
        let r = check_compat(&u, 1, None).unwrap();
        assert!(r.per_order[0].pass && !r.per_order[1].pass);
    }

    #[test]
    fn deterministic() {
        let g = make_grid(2, &[PI, PI], &[17, 17], BoundaryMode::NeumannMirror).unwrap();
        let s = ProfileSpec::new("random_smooth", &[("seed", 4.0)]);
        assert_eq!(s.build(&g).unwrap().data(), s.build(&g).unwrap().data());
    }

    #[test]
    fn canned_set_has_twelve_entries() {
        assert_eq!(canned_profiles().len(), 12);
    }
}
