use num_complex::Complex64 as C64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::form::{read_values, write_values, FormField, Target};
use super::grid::{AxisSet, Grid};
use super::group::{Group, Mat};
use crate::{Error, Result};

/// Group-valued function on a grid, i.e. a gauge transformation of a
/// trivial bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupField {
    grid: Grid,
    group: Group,
    values: Vec<C64>,
}

impl GroupField {
    pub fn identity(grid: &Grid, group: Group) -> GroupField {
        GroupField::constant(grid, group, &group.identity())
    }

    pub fn constant(grid: &Grid, group: Group, g: &Mat) -> GroupField {
        GroupField::from_fn(grid, group, |_| *g)
    }

    pub fn from_fn(grid: &Grid, group: Group, mut f: impl FnMut(usize) -> Mat) -> GroupField {
        let n2 = group.order() * group.order();
        let mut values = vec![C64::new(0.0, 0.0); grid.sites() * n2];
        for (site, chunk) in values.chunks_exact_mut(n2).enumerate() {
            f(site).write_to(chunk);
        }
        GroupField { grid: grid.clone(), group, values }
    }

    /// Pointwise exponential of an algebra-valued 0-form.
    pub fn exp_of(form: &FormField) -> Result<GroupField> {
        let Target::Algebra(group) = form.target() else {
            return Err(Error::Shape("exp needs an algebra-valued 0-form".into()));
        };
        if form.degree() != 0 {
            return Err(Error::Degree("exp needs a 0-form".into()));
        }
        Ok(GroupField::from_fn(form.grid(), group, |s| group.exp(&form.at(AxisSet::EMPTY, s))))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn at(&self, site: usize) -> Mat {
        let n = self.group.order();
        Mat::from_slice(n, &self.values[site * n * n..(site + 1) * n * n])
    }

    pub fn inverse(&self) -> GroupField {
        GroupField::from_fn(&self.grid, self.group, |s| self.at(s).dagger())
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        if &self.grid != grid {
            return Err(Error::Shape("gauge transformation lives on a different grid".into()));
        }
        Ok(())
    }

    /// Pointwise `g X g^-1` of an algebra-valued form of any degree.
    pub fn conjugate(&self, form: &FormField) -> Result<FormField> {
        self.check_grid(form.grid())?;
        Ok(form.map_values(form.target(), |_, s, x| {
            let g = self.at(s);
            g * x * g.dagger()
        }))
    }

    /// `g A g^-1 + g dg^-1`, the derivative taken by central differences
    /// and projected back onto the algebra.
    pub fn transform_connection(&self, a: &FormField) -> Result<FormField> {
        self.check_grid(a.grid())?;
        if a.degree() != 1 || a.target() != Target::Algebra(self.group) {
            return Err(Error::Shape("a connection is an algebra-valued 1-form of the same group".into()));
        }
        let grid = &self.grid;
        let group = self.group;
        Ok(a.map_values(a.target(), |set, s, x| {
            let mu = set.iter().next().expect("1-form component");
            let g = self.at(s);
            let fwd = self.at(grid.shift(s, mu, true)).dagger();
            let bwd = self.at(grid.shift(s, mu, false)).dagger();
            let dginv = (fwd - bwd).scale(0.5 / grid.spacing(mu));
            g * x * g.dagger() + group.project_algebra(&(g * dginv))
        }))
    }

    pub fn check_values(&self, tol: f64) -> Result<()> {
        for s in 0..self.grid.sites() {
            if !self.group.is_element(&self.at(s), tol) {
                return Err(Error::Domain(format!("gauge value at site {s} is not in {}", self.group.name())));
            }
        }
        Ok(())
    }

    pub(crate) fn from_values(grid: &Grid, group: Group, values: Vec<C64>) -> Result<GroupField> {
        let n2 = group.order() * group.order();
        if values.len() != grid.sites() * n2 {
            return Err(Error::Shape(format!("expected {} entries, got {}", grid.sites() * n2, values.len())));
        }
        Ok(GroupField { grid: grid.clone(), group, values })
    }
}

#[derive(Serialize, Deserialize)]
struct GroupDoc {
    grid: Grid,
    group: Group,
    values: Vec<[f64; 2]>,
}

impl Serialize for GroupField {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        GroupDoc { grid: self.grid.clone(), group: self.group, values: write_values(&self.values) }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GroupField {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = GroupDoc::deserialize(deserializer)?;
        let g = GroupField::from_values(&doc.grid, doc.group, read_values(&doc.values)).map_err(serde::de::Error::custom)?;
        g.check_values(1e-10).map_err(serde::de::Error::custom)?;
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::grid::AxisRole;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_leaves_connection_unchanged() {
        let grid = Grid::periodic(&[6, 5], AxisRole::Fiber).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = FormField::from_fn(&grid, 1, Target::Algebra(Group::SU2), |_, _| Group::SU2.random_algebra(&mut rng, 1.0));
        let g = GroupField::identity(&grid, Group::SU2);
        assert_eq!(g.transform_connection(&a).unwrap().max_abs_diff(&a).unwrap(), 0.0);
    }

    #[test]
    fn constant_gauge_conjugates() {
        let grid = Grid::periodic(&[6], AxisRole::Fiber).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = FormField::from_fn(&grid, 1, Target::Algebra(Group::SU2), |_, _| Group::SU2.random_algebra(&mut rng, 1.0));
        let h = Group::SU2.random_element(&mut rng, 1.0);
        let g = GroupField::constant(&grid, Group::SU2, &h);
        let lhs = g.transform_connection(&a).unwrap();
        let rhs = g.conjugate(&a).unwrap();
        assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-15);
    }
}
