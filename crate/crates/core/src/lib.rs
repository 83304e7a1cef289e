//! Product-case caloron correspondence on finite periodic grids.
//!
//! The crate is organised bottom-up:
//!
//! * [`symbolic`] expands invariant-polynomial arguments built from the three
//!   curvature generators `F_A`, `F_Phi` and `NablaPhi` with exact rational
//!   coefficients.
//! * [`lattice`] holds grids, the U(1)/SU(2) arithmetic, sampled Lie-algebra
//!   valued forms, link variables and test configurations.
//! * [`transform`] converts between a connection on `M x X` and a pair
//!   (gauge-group connection, Higgs field) on `M`, and splits curvature by
//!   bidegree.
//! * [`chern_weil`] evaluates invariant polynomials, integrates over the fiber
//!   and assembles caloron classes.
//! * [`universal`] is the finite-graph model of the universal bundle with its
//!   Green's operator and curvature.

pub mod chern_weil;
pub mod error;
pub mod lattice;
pub mod symbolic;
pub mod transform;
pub mod universal;

pub use error::{Error, Result};
