//! Grids, discrete fields and the cosine-spectral representation.

mod field;
mod grid;
pub mod io;
mod spectral;

pub use field::{
    normalize_to_sphere, ScalarField, SphereField, TangentField, Vec3Field, DEGENERATE_NORM,
    TANGENCY_TOL, UNIT_TOL,
};
pub use grid::{make_grid, BoundaryMode, Grid, MIN_POINTS};
pub use spectral::{cosine_forward, cosine_inverse, spectral_laplacian, SpectralRep};
