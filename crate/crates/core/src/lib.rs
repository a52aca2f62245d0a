//! Landau–Lifshitz flow `d_t u = (eps I + u x) tau(u)` of maps into the unit
//! sphere on boxes with homogeneous Neumann conditions, discretized by
//! second-order mirror-ghost stencils and integrated with projected RK4.
//!
//! - [`state`]: grids, vector fields, cosine transforms, field files
//! - [`operators`]: Laplacian, tension, energies, Sobolev norms, boundary fluxes
//! - [`compatibility`]: time jets of the flow and boundary compatibility audits
//! - [`flow`]: the regularized flow, stability bounds, eps-sweeps, helical waves
//! - [`linearized`]: linearized evolution for the time-derivative fields
//! - [`galerkin`]: eigenfunction Galerkin approximation of the same problem
//! - [`harness`]: configuration, experiments, acceptance registry, reports

// Negated comparisons such as `!(x <= tol)` are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compatibility;
pub mod error;
pub mod flow;
pub mod galerkin;
pub mod harness;
pub mod linearized;
pub mod operators;
pub mod state;
pub mod vec3;

pub use error::{Error, Result};
