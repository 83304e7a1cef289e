//! Invariant polynomials, Chern-Weil forms, fiber integration and caloron
//! classes.

mod class;
mod polynomial;

pub use class::{
    caloron_class, class_degree, closedness_residual, fiber_integrate, pair_with_cycle, string_class, CaloronClassReport,
    ClassData, ClassMetadata, ClassPath, ClassRequest, Cycle, Pairing,
};
pub use polynomial::{
    chern_weil_form, eval_invariant, InvariantPolynomial, PolyKind, FULL_PERMUTATION_DEGREE, MAX_POLY_DEGREE,
};
