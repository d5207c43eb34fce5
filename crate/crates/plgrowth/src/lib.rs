//! Numerical laboratory for Phragmén–Lindelöf growth estimates of p-harmonic
//! and ∞-harmonic functions on truncated unbounded convex planar domains.
//!
//! The crate solves the Dirichlet problem for the p-Laplace equation
//! ∇·(|∇u|^{p−2}∇u) = 0 by discrete energy minimization, approximates the
//! ∞-harmonic limit both by p-continuation and by an independent monotone
//! min–max scheme, and turns the quantitative steps of the Phragmén–Lindelöf
//! proof machinery (Caccioppoli inequality, log-barrier gradient bounds,
//! Gehring–Mostow oscillation step, dyadic growth iteration) into executable
//! checks on the computed fields.

pub mod bounds;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod grid;
pub mod infsolve;
pub mod psolve;
pub mod svg;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{DomainSpec, Point};
pub use grid::{build_grid, BoundaryValues, Grid, NodeClass, ScalarField};

/// Crate version string, echoed into run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
