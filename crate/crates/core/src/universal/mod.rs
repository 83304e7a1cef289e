//! Finite-graph model of the universal bundle `A x Q -> A / G_0 x X`.
//!
//! Lattice connections on the trivial bundle `Q = X x G` over a graph `X` are
//! algebra-valued edge fields; based gauge-algebra elements are vertex fields
//! vanishing at the basepoint. The covariant Laplacian `d*_omega d_omega` is
//! assembled densely and inverted by Cholesky factorization.

mod graph;
mod ops;
mod suite;

pub use graph::{Graph, GraphKind, MAX_VERTICES};
pub use ops::{
    ad_star, adjoint_cov_deriv, connection_form, cov_deriv, green, horizontal_project, omega_curvature, omega_of_bracket,
    pair_edge_tangent, universal_caloron_connection, universal_curvature_fa, universal_curvature_full, BasedVertexField,
    EdgeField, GreenOperator, LatticeBundleX, QPoint, QTangent,
};
pub use suite::{property_suite, Check, CHECK_NAMES};
