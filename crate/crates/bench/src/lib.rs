//! Shared inputs for the kernel benchmarks.

use sphereflow::harness::profiles::ProfileSpec;
use sphereflow::state::{make_grid, BoundaryMode, SphereField};

/// Smooth compatible data on a `points^dim` mirror grid over `[0, pi]^dim`.
pub fn fixture(dim: usize, points: usize) -> SphereField {
    let grid = make_grid(dim, &[std::f64::consts::PI], &[points], BoundaryMode::NeumannMirror).expect("valid grid");
    ProfileSpec::new("equatorial_cos", &[("a", 0.5)]).build(&grid).expect("known profile")
}
