use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::form::{read_values, write_values, FormField, Target};
use super::gauge::GroupField;
use super::grid::{AxisSet, Grid};
use super::group::{Group, Mat};
use super::twist::BundleTwist;
use crate::{Error, Result};

/// Group elements on the oriented edges `site -> site + e_axis` of a
/// periodic grid, one array of `sites * n^2` entries per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkField {
    grid: Grid,
    group: Group,
    links: Vec<Vec<C64>>,
}

impl LinkField {
    pub fn identity(grid: &Grid, group: Group) -> LinkField {
        LinkField::from_fn(grid, group, |_, _| group.identity())
    }

    pub fn from_fn(grid: &Grid, group: Group, mut f: impl FnMut(usize, usize) -> Mat) -> LinkField {
        let n2 = group.order() * group.order();
        let links = (0..grid.dim())
            .map(|axis| {
                let mut data = vec![C64::new(0.0, 0.0); grid.sites() * n2];
                for (site, chunk) in data.chunks_exact_mut(n2).enumerate() {
                    f(axis, site).write_to(chunk);
                }
                data
            })
            .collect();
        LinkField { grid: grid.clone(), group, links }
    }

    /// Links `exp(theta)` of a sampled connection, with `theta` the
    /// trapezoid line integral along the edge. A twist contributes the exact
    /// holonomy of its reference connection and its seam transition.
    pub fn from_connection(a: &FormField, twist: Option<&BundleTwist>) -> Result<LinkField> {
        let Target::Algebra(group) = a.target() else {
            return Err(Error::Shape("a connection is algebra-valued".into()));
        };
        if a.degree() != 1 {
            return Err(Error::Degree(format!("a connection is a 1-form, got degree {}", a.degree())));
        }
        let grid = a.grid();
        if let Some(t) = twist {
            t.validate(grid, group)?;
        }
        Ok(LinkField::from_fn(grid, group, |axis, site| {
            let set = AxisSet::single(axis);
            let h = grid.spacing(axis);
            let mut theta = (a.at(set, site) + a.at(set, grid.shift(site, axis, true))).scale(0.5 * h);
            if let Some(t) = twist {
                theta += Mat::scalar(C64::new(0.0, t.link_phase(grid, site, axis)));
            }
            group.exp(&theta)
        }))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn link(&self, axis: usize, site: usize) -> Mat {
        let n = self.group.order();
        Mat::from_slice(n, &self.links[axis][site * n * n..(site + 1) * n * n])
    }

    pub fn set_link(&mut self, axis: usize, site: usize, u: &Mat) {
        let n2 = self.group.order() * self.group.order();
        u.write_to(&mut self.links[axis][site * n2..(site + 1) * n2]);
    }

    pub(crate) fn axis_data(&self, axis: usize) -> &[C64] {
        &self.links[axis]
    }

    pub(crate) fn from_axis_data(grid: &Grid, group: Group, links: Vec<Vec<C64>>) -> Result<LinkField> {
        let len = grid.sites() * group.order() * group.order();
        if links.len() != grid.dim() || links.iter().any(|l| l.len() != len) {
            return Err(Error::Shape("link arrays do not match the grid".into()));
        }
        Ok(LinkField { grid: grid.clone(), group, links })
    }

    /// `U_a(s) U_b(s+a) U_a(s+b)^-1 U_b(s)^-1`.
    pub fn plaquette(&self, a: usize, b: usize, site: usize) -> Mat {
        let sa = self.grid.shift(site, a, true);
        let sb = self.grid.shift(site, b, true);
        self.link(a, site) * self.link(b, sa) * self.link(a, sb).dagger() * self.link(b, site).dagger()
    }

    /// Curvature 2-form `log(P_ab) / (h_a h_b)` on every coordinate plane,
    /// stored at the plaquette's lower corner.
    pub fn plaquette_curvature(&self) -> Result<FormField> {
        if self.grid.dim() < 2 {
            return Err(Error::Degree("plaquettes need at least two axes".into()));
        }
        let group = self.group;
        let mut out = FormField::zeros(&self.grid, 2, Target::Algebra(group));
        for plane in AxisSet::subsets(self.grid.all_axes(), 2) {
            let mut it = plane.iter();
            let (a, b) = (it.next().unwrap(), it.next().unwrap());
            let scale = 1.0 / (self.grid.spacing(a) * self.grid.spacing(b));
            for site in 0..self.grid.sites() {
                let f = group.log(&self.plaquette(a, b, site)).map_err(|e| match e {
                    Error::BranchCut(m) => Error::BranchCut(format!("plaquette ({a},{b}) at site {site}: {m}")),
                    other => other,
                })?;
                out.set_at(plane, site, &f.scale(scale));
            }
        }
        Ok(out)
    }

    /// `sum arg P_ab / 2 pi` over all plaquettes of one plane (U(1) only);
    /// on a closed 2-torus this is the Chern number.
    pub fn plaquette_winding(&self, a: usize, b: usize) -> Result<f64> {
        if self.group != Group::U1 {
            return Err(Error::Domain("plaquette winding is defined for u1 links".into()));
        }
        let args: Vec<f64> = (0..self.grid.sites()).map(|s| self.plaquette(a, b, s).get(0, 0).arg()).collect();
        Ok(super::pairwise_sum_real(&args) / TAU)
    }

    /// `U_i(s) -> g(s) U_i(s) g(s + e_i)^-1`.
    pub fn gauge_transform(&self, g: &GroupField) -> Result<LinkField> {
        g.check_grid(&self.grid)?;
        if g.group() != self.group {
            return Err(Error::Shape("gauge group mismatch".into()));
        }
        Ok(LinkField::from_fn(&self.grid, self.group, |axis, site| {
            g.at(site) * self.link(axis, site) * g.at(self.grid.shift(site, axis, true)).dagger()
        }))
    }

    pub fn bit_eq(&self, other: &LinkField) -> bool {
        self.grid == other.grid
            && self.group == other.group
            && self.links.iter().zip(&other.links).all(|(a, b)| {
                a.iter().zip(b).all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits())
            })
    }

    pub fn check_values(&self, tol: f64) -> Result<()> {
        for axis in 0..self.grid.dim() {
            for site in 0..self.grid.sites() {
                if !self.group.is_element(&self.link(axis, site), tol) {
                    return Err(Error::Domain(format!("link ({axis}, {site}) is not in {}", self.group.name())));
                }
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct LinkDoc {
    grid: Grid,
    group: Group,
    links: BTreeMap<String, Vec<[f64; 2]>>,
}

impl Serialize for LinkField {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        LinkDoc {
            grid: self.grid.clone(),
            group: self.group,
            links: self.links.iter().enumerate().map(|(i, l)| (i.to_string(), write_values(l))).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LinkField {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = LinkDoc::deserialize(deserializer)?;
        let mut links = Vec::with_capacity(doc.grid.dim());
        for axis in 0..doc.grid.dim() {
            let data = doc
                .links
                .get(&axis.to_string())
                .ok_or_else(|| serde::de::Error::custom(format!("missing links along axis {axis}")))?;
            links.push(read_values(data));
        }
        if doc.links.len() != doc.grid.dim() {
            return Err(serde::de::Error::custom("unexpected link axes"));
        }
        let field = LinkField::from_axis_data(&doc.grid, doc.group, links).map_err(serde::de::Error::custom)?;
        field.check_values(1e-10).map_err(serde::de::Error::custom)?;
        Ok(field)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::grid::AxisRole;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_links_are_flat() {
        let grid = Grid::periodic(&[6, 6], AxisRole::Fiber).unwrap();
        let u = LinkField::identity(&grid, Group::SU2);
        assert_eq!(u.plaquette_curvature().unwrap().max_abs(), 0.0);
    }

    #[test]
    fn constant_phase_plaquette() {
        // U_x = e^{i t1 h}, U_y(s) = e^{i t2 h x}: plaquette angle t2 h^2
        let grid = Grid::periodic(&[8, 8], AxisRole::Fiber).unwrap();
        let h = grid.spacing(0);
        let (t1, t2) = (0.3, 0.05);
        let u = LinkField::from_fn(&grid, Group::U1, |axis, site| {
            let x = grid.coord(site, 0) as f64 * h;
            let phase = if axis == 0 { t1 * h } else { t2 * h * x };
            Mat::scalar(C64::from_polar(1.0, phase))
        });
        let f = u.plaquette_curvature().unwrap();
        // interior plaquettes (away from the x seam)
        let site = grid.site(&[2, 3]);
        assert!((f.at(AxisSet::pair(0, 1), site).get(0, 0) - C64::new(0.0, t2)).norm() < 1e-14);
    }

    #[test]
    fn twist_winding_equals_chern() {
        let grid = Grid::periodic(&[8, 12], AxisRole::Fiber).unwrap();
        let zero = FormField::zeros(&grid, 1, Target::Algebra(Group::U1));
        for c in -3..=3 {
            let t = BundleTwist::new(c, 0, 1).unwrap();
            let u = LinkField::from_connection(&zero, Some(&t)).unwrap();
            assert!((u.plaquette_winding(0, 1).unwrap() - c as f64).abs() < 1e-12);
            let f = u.plaquette_curvature().unwrap();
            let expected = t.curvature(&grid);
            assert!(f.sub(&FormField::from_fn(&grid, 2, Target::Algebra(Group::U1), |_, _| expected)).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn gauge_transform_conjugates_curvature() {
        let grid = Grid::periodic(&[6, 5], AxisRole::Fiber).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = LinkField::from_fn(&grid, Group::SU2, |_, _| Group::SU2.random_element(&mut rng, 0.2));
        let g = GroupField::from_fn(&grid, Group::SU2, |_| Group::SU2.random_element(&mut rng, 2.0));
        let f = u.plaquette_curvature().unwrap();
        let fg = u.gauge_transform(&g).unwrap().plaquette_curvature().unwrap();
        let expected = g.conjugate(&f).unwrap();
        assert!(fg.max_abs_diff(&expected).unwrap() < 1e-13);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let grid = Grid::periodic(&[4, 5], AxisRole::Fiber).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = LinkField::from_fn(&grid, Group::SU2, |_, _| Group::SU2.random_element(&mut rng, 1.0));
        let back: LinkField = serde_json::from_str(&serde_json::to_string(&u).unwrap()).unwrap();
        assert!(back.bit_eq(&u));
    }
}
