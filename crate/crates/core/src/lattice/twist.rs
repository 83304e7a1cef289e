use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::grid::{AxisSet, Grid};
use super::group::{Group, Mat};
use crate::{Error, Result};

/// Topological type of a U(1) bundle over the 2-torus spanned by two grid
/// axes `a < b`, with Chern number `chern`.
///
/// The bundle is carried by a reference connection `A_b = i f x_a`,
/// `f = 2 pi c / (L_a L_b)`, glued across the `x_a` seam by the transition
/// function `exp(2 pi i c x_b / L_b)`. The reference part is never sampled or
/// differentiated; its curvature `i f dx^a ^ dx^b` is added analytically and
/// its holonomies are added exactly to link variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleTwist {
    pub chern: i64,
    pub axes: [usize; 2],
}

impl BundleTwist {
    pub fn new(chern: i64, a: usize, b: usize) -> Result<Self> {
        if a >= b {
            return Err(Error::Config(format!("twist axes must be increasing, got [{a}, {b}]")));
        }
        Ok(BundleTwist { chern, axes: [a, b] })
    }

    pub fn plane(&self) -> AxisSet {
        AxisSet::pair(self.axes[0], self.axes[1])
    }

    pub fn validate(&self, grid: &Grid, group: Group) -> Result<()> {
        let [a, b] = self.axes;
        if a >= b || b >= grid.dim() {
            return Err(Error::Config(format!("twist axes [{a}, {b}] are not increasing axes of the grid")));
        }
        if group != Group::U1 && self.chern != 0 {
            return Err(Error::Config("twisted bundles are only supported for u1".into()));
        }
        Ok(())
    }

    /// Constant flux density `f = 2 pi c / (L_a L_b)`.
    pub fn flux(&self, grid: &Grid) -> f64 {
        let [a, b] = self.axes;
        TAU * self.chern as f64 / (grid.axis(a).length * grid.axis(b).length)
    }

    /// Curvature of the reference connection, `i f`, on the twist plane.
    pub fn curvature(&self, grid: &Grid) -> Mat {
        Mat::scalar(C64::new(0.0, self.flux(grid)))
    }

    /// Reference connection component along `axis` at a site.
    pub fn potential(&self, grid: &Grid, site: usize, axis: usize) -> Mat {
        let [a, b] = self.axes;
        if axis != b {
            return Mat::scalar(C64::new(0.0, 0.0));
        }
        let xa = grid.coord(site, a) as f64 * grid.spacing(a);
        Mat::scalar(C64::new(0.0, self.flux(grid) * xa))
    }

    /// Phase added to the link leaving `site` along `axis`.
    pub fn link_phase(&self, grid: &Grid, site: usize, axis: usize) -> f64 {
        let [a, b] = self.axes;
        if axis == b {
            let xa = grid.coord(site, a) as f64 * grid.spacing(a);
            self.flux(grid) * xa * grid.spacing(b)
        } else if axis == a && grid.coord(site, a) + 1 == grid.axis(a).size {
            let xb = grid.coord(site, b) as f64 * grid.spacing(b);
            -TAU * self.chern as f64 * xb / grid.axis(b).length
        } else {
            0.0
        }
    }
}
