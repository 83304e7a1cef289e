//! Exact expansion of `f((F_A + F_Phi + NablaPhi)^k)` and the closed formulas
//! for the low-degree caloron integrands.
//!
//! All three generators are even-degree forms, so reordering letters inside a
//! word never produces a sign. Equality is always decided on canonical forms,
//! where each word is sorted `CurvA < CurvPhi < NablaPhi`.

mod expression;
mod formulas;
mod render;
mod word;

pub use expression::{canonicalize, expand_power, filter_bidegree, CanonicalForm, Expression, MAX_EXPANSION_DEGREE};
pub use formulas::{
    abelian_closed_form, caloron_integrand, low_degree_formula, string_class_integrand, table_fixture,
    TABLE_CELLS,
};
pub use render::{render, RenderStyle};
pub use word::{Bidegree, Generator, Word};
