//! Periodic grids, U(1)/SU(2) arithmetic, sampled forms and link variables.

mod form;
mod gauge;
mod grid;
mod group;
mod link;
mod sample;
mod twist;

pub use form::{FormField, Target};
pub use gauge::GroupField;
pub use grid::{Axis, AxisRole, AxisSet, Grid, MAX_AXES, MIN_AXIS_POINTS};
pub use group::{inner, Group, Mat, BRANCH_GUARD};
pub use link::LinkField;
pub use sample::{sample, BandLimited, Family, ModeOptions, Sample};
pub use twist::BundleTwist;

pub(crate) use form::{read_values, write_values};

use num_complex::Complex64 as C64;

/// Pairwise (cascade) summation in a fixed order, so sums do not depend on
/// how callers chunk their loops.
pub fn pairwise_sum(values: &[C64]) -> C64 {
    if values.len() <= 8 {
        return values.iter().fold(C64::new(0.0, 0.0), |acc, v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Real counterpart of [`pairwise_sum`].
pub fn pairwise_sum_real(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum_real(&values[..mid]) + pairwise_sum_real(&values[mid..])
}
