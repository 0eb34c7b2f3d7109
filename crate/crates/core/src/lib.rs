//! Structured-grid solvers for div-curl systems with anisotropic matrix
//! coefficients on the unit cube, plus the norm estimators needed to measure
//! their a priori estimate constants.
//!
//! The crate is `no_std` (it needs `alloc`). Enable the `std` feature to get
//! wall-clock timings in [`linsolve::SolveReport`].
//!
//! # Layout
//!
//! Sampled data lives at cell centers ([`ScalarField`], [`VectorField`]).
//! The solvers work on a staggered exact complex built on the same cells:
//!
//! | space      | where                | produced by          |
//! |------------|----------------------|----------------------|
//! | cells      | cell centers         | data `g`, potentials `q` |
//! | [`FaceField`] | face midpoints    | `grad q`, solutions `u` |
//! | [`EdgeField`] | edge midpoints    | `curl u`, data `f`, vector potentials |
//! | [`NodeField`] | cell corners      | `div` of edge fields |
//!
//! `curl(grad q) = 0` and `div(curl u) = 0` hold exactly everywhere on this
//! complex, and every face field splits exactly into a gradient part and a
//! curl part, which is what lets the pipeline reproduce manufactured
//! solutions to solver tolerance.

#![cfg_attr(not(test), no_std)]

extern crate alloc;
#[cfg(all(feature = "std", not(test)))]
extern crate std;

pub mod coeff;
pub mod complex;
pub mod divcurl;
mod error;
pub mod grid;
pub mod helmholtz;
pub mod lattice;
pub mod linsolve;
pub mod mat3;
pub mod maxwell;
pub mod mms;
pub mod norms;
pub mod ops;

pub use coeff::{CoeffFamily, CoeffKind, TensorField};
pub use error::{Error, Result};
pub use grid::{Face, Grid, ScalarField, VectorField};
pub use lattice::{EdgeField, FaceField, NodeField};
pub use linsolve::{Preconditioner, SolveReport, SolverConfig};
