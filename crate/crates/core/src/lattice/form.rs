use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::grid::{AxisSet, Grid};
use super::group::{Group, Mat};
use super::pairwise_sum;
use crate::{Error, Result};

/// What a form takes values in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// The Lie algebra of a structure group.
    Algebra(Group),
    /// Arbitrary complex matrices of the given order; order 1 is a scalar.
    Matrix(usize),
}

impl Target {
    pub const SCALAR: Target = Target::Matrix(1);

    pub fn order(self) -> usize {
        match self {
            Target::Algebra(g) => g.order(),
            Target::Matrix(n) => n,
        }
    }

    pub fn group(self) -> Option<Group> {
        match self {
            Target::Algebra(g) => Some(g),
            Target::Matrix(_) => None,
        }
    }
}

/// A `p`-form sampled at the sites of a periodic grid. One flat array of
/// `sites * n^2` entries is stored for every strictly increasing `p`-tuple of
/// axes (all of them, even when zero). A degree above the grid dimension is
/// the zero form and has no components.
#[derive(Debug, Clone, PartialEq)]
pub struct FormField {
    grid: Grid,
    degree: usize,
    target: Target,
    comps: BTreeMap<AxisSet, Vec<C64>>,
}

impl FormField {
    pub fn zeros(grid: &Grid, degree: usize, target: Target) -> FormField {
        let len = grid.sites() * target.order() * target.order();
        let comps = if degree > grid.dim() {
            BTreeMap::new()
        } else {
            AxisSet::subsets(grid.all_axes(), degree).into_iter().map(|s| (s, vec![C64::new(0.0, 0.0); len])).collect()
        };
        FormField { grid: grid.clone(), degree, target, comps }
    }

    /// Fills every component from `f(axes, site)`.
    pub fn from_fn(grid: &Grid, degree: usize, target: Target, mut f: impl FnMut(AxisSet, usize) -> Mat) -> FormField {
        let mut out = FormField::zeros(grid, degree, target);
        let n2 = target.order() * target.order();
        for (&set, data) in out.comps.iter_mut() {
            for (site, chunk) in data.chunks_exact_mut(n2).enumerate() {
                f(set, site).write_to(chunk);
            }
        }
        out
    }

    /// Builds a form from explicit component arrays; missing components are
    /// zero.
    pub fn from_components(
        grid: &Grid,
        degree: usize,
        target: Target,
        components: BTreeMap<AxisSet, Vec<C64>>,
    ) -> Result<FormField> {
        let mut out = FormField::zeros(grid, degree, target);
        let len = grid.sites() * target.order() * target.order();
        for (set, data) in components {
            if set.len() != degree || !set.is_subset(grid.all_axes()) {
                return Err(Error::Shape(format!("component {set:?} does not belong to a {degree}-form on this grid")));
            }
            if data.len() != len {
                return Err(Error::Shape(format!("component {set:?} has {} entries, expected {len}", data.len())));
            }
            out.comps.insert(set, data);
        }
        Ok(out)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn target(&self) -> Target {
        self.target
    }

    pub fn order(&self) -> usize {
        self.target.order()
    }

    fn n2(&self) -> usize {
        self.order() * self.order()
    }

    pub fn components(&self) -> impl Iterator<Item = (AxisSet, &[C64])> {
        self.comps.iter().map(|(s, v)| (*s, v.as_slice()))
    }

    pub fn component(&self, axes: AxisSet) -> Option<&[C64]> {
        self.comps.get(&axes).map(Vec::as_slice)
    }

    pub fn component_mut(&mut self, axes: AxisSet) -> Option<&mut [C64]> {
        self.comps.get_mut(&axes).map(Vec::as_mut_slice)
    }

    /// Value of one component at one site; absent components read as zero.
    pub fn at(&self, axes: AxisSet, site: usize) -> Mat {
        let n = self.order();
        match self.comps.get(&axes) {
            Some(v) => Mat::from_slice(n, &v[site * n * n..(site + 1) * n * n]),
            None => Mat::zero(n),
        }
    }

    pub fn set_at(&mut self, axes: AxisSet, site: usize, value: &Mat) {
        let n2 = self.n2();
        if let Some(v) = self.comps.get_mut(&axes) {
            value.write_to(&mut v[site * n2..(site + 1) * n2]);
        }
    }

    /// `(base, fiber)` degree of the basis element `dx^axes`.
    pub fn bidegree_of(&self, axes: AxisSet) -> (usize, usize) {
        (axes.intersection(self.grid.base_axes()).len(), axes.intersection(self.grid.fiber_axes()).len())
    }

    /// Copy keeping only components of the given bidegree.
    pub fn filter_bidegree(&self, base: usize, fiber: usize) -> FormField {
        let mut out = self.clone();
        for (set, data) in out.comps.iter_mut() {
            if self.bidegree_of(*set) != (base, fiber) {
                data.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            }
        }
        out
    }

    /// Same data retagged as plain matrices.
    pub fn as_matrix(&self) -> FormField {
        FormField { target: Target::Matrix(self.order()), ..self.clone() }
    }

    /// Same data retagged as algebra-valued; the values are checked.
    pub fn as_algebra(&self, group: Group, tol: f64) -> Result<FormField> {
        if group.order() != self.order() {
            return Err(Error::Shape("matrix order does not match the group".into()));
        }
        let out = FormField { target: Target::Algebra(group), ..self.clone() };
        out.check_values(tol)?;
        Ok(out)
    }

    fn check_compatible(&self, other: &FormField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Shape("forms live on different grids".into()));
        }
        if self.order() != other.order() {
            return Err(Error::Shape("forms have different matrix orders".into()));
        }
        Ok(())
    }

    fn zip_with(&self, other: &FormField, f: impl Fn(C64, C64) -> C64) -> Result<FormField> {
        self.check_compatible(other)?;
        if self.degree != other.degree {
            return Err(Error::Degree(format!("cannot combine a {}-form with a {}-form", self.degree, other.degree)));
        }
        let target = if self.target == other.target { self.target } else { Target::Matrix(self.order()) };
        let mut out = self.clone();
        out.target = target;
        for (set, data) in out.comps.iter_mut() {
            let rhs = &other.comps[set];
            for (a, b) in data.iter_mut().zip(rhs) {
                *a = f(*a, *b);
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &FormField) -> Result<FormField> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &FormField) -> Result<FormField> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> FormField {
        self.map_entries(|z| z * s)
    }

    /// Multiplication by a complex number; the result is matrix-valued unless
    /// the factor is real.
    pub fn scale_c(&self, s: C64) -> FormField {
        let mut out = self.map_entries(|z| z * s);
        if s.im != 0.0 {
            out.target = Target::Matrix(self.order());
        }
        out
    }

    fn map_entries(&self, f: impl Fn(C64) -> C64) -> FormField {
        let mut out = self.clone();
        for data in out.comps.values_mut() {
            data.iter_mut().for_each(|z| *z = f(*z));
        }
        out
    }

    /// Applies `f(axes, site, value)` to every stored value.
    pub fn map_values(&self, target: Target, mut f: impl FnMut(AxisSet, usize, Mat) -> Mat) -> FormField {
        let n = self.order();
        let m = target.order();
        let mut out = FormField::zeros(&self.grid, self.degree, target);
        for (set, data) in &self.comps {
            let dst = out.comps.get_mut(set).expect("same layout");
            for (site, chunk) in data.chunks_exact(n * n).enumerate() {
                f(*set, site, Mat::from_slice(n, chunk)).write_to(&mut dst[site * m * m..(site + 1) * m * m]);
            }
        }
        out
    }

    /// Adds a constant value to one component.
    pub fn add_constant(&mut self, axes: AxisSet, value: &Mat) {
        let n2 = self.n2();
        if let Some(data) = self.comps.get_mut(&axes) {
            for chunk in data.chunks_exact_mut(n2) {
                for (z, v) in chunk.iter_mut().zip(value.entries()) {
                    *z += v;
                }
            }
        }
    }

    /// Largest entry modulus over all components and sites.
    pub fn max_abs(&self) -> f64 {
        self.comps.values().flat_map(|v| v.iter()).map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &FormField) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// Bit-level equality of grid, degree, target and every entry.
    pub fn bit_eq(&self, other: &FormField) -> bool {
        self.grid == other.grid
            && self.degree == other.degree
            && self.target == other.target
            && self.comps.len() == other.comps.len()
            && self.comps.iter().all(|(s, v)| {
                other.comps.get(s).is_some_and(|w| {
                    v.iter().zip(w).all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits())
                })
            })
    }

    /// Checks the algebra invariant of algebra-valued forms.
    pub fn check_values(&self, tol: f64) -> Result<()> {
        let Target::Algebra(g) = self.target else { return Ok(()) };
        let n = self.order();
        for (set, data) in &self.comps {
            for (site, chunk) in data.chunks_exact(n * n).enumerate() {
                if !g.is_algebra(&Mat::from_slice(n, chunk), tol) {
                    return Err(Error::Domain(format!(
                        "component {set:?} at site {site} is not in the {} algebra",
                        g.name()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Central-difference derivative of one component along `axis`.
    pub fn partial(&self, axes: AxisSet, axis: usize) -> Vec<C64> {
        let n2 = self.n2();
        let grid = &self.grid;
        let inv = 1.0 / (2.0 * grid.spacing(axis));
        let src = &self.comps[&axes];
        let mut out = vec![C64::new(0.0, 0.0); src.len()];
        for site in 0..grid.sites() {
            let f = grid.shift(site, axis, true) * n2;
            let b = grid.shift(site, axis, false) * n2;
            for e in 0..n2 {
                out[site * n2 + e] = (src[f + e] - src[b + e]) * inv;
            }
        }
        out
    }

    /// Periodic exterior derivative with second-order central differences.
    pub fn ext_deriv(&self) -> Result<FormField> {
        if self.degree >= self.grid.dim() {
            return Err(Error::Degree(format!(
                "cannot differentiate a {}-form on a {}-dimensional grid",
                self.degree,
                self.grid.dim()
            )));
        }
        let mut out = FormField::zeros(&self.grid, self.degree + 1, self.target);
        for (set, data) in out.comps.iter_mut() {
            for a in set.iter() {
                let src = set.difference(AxisSet::single(a));
                let sign = if set.count_below(a) % 2 == 0 { 1.0 } else { -1.0 };
                let d = self.partial(src, a);
                for (z, v) in data.iter_mut().zip(d) {
                    *z += v * sign;
                }
            }
        }
        Ok(out)
    }

    /// Pointwise product combining form indices by wedge and values by
    /// `op`. Pairs `(I, J)` are visited in increasing order of `I`.
    fn wedge_with(&self, other: &FormField, target: Target, op: impl Fn(&Mat, &Mat) -> Mat) -> Result<FormField> {
        self.check_compatible(other)?;
        let degree = self.degree + other.degree;
        let mut out = FormField::zeros(&self.grid, degree, target);
        if degree > self.grid.dim() {
            return Ok(out);
        }
        let n = self.order();
        let m = target.order();
        for (k, data) in out.comps.iter_mut() {
            for i in AxisSet::subsets(*k, self.degree) {
                let j = k.difference(i);
                let sign = i.wedge_sign(j).expect("disjoint by construction");
                let (a, b) = (&self.comps[&i], &other.comps[&j]);
                for site in 0..self.grid.sites() {
                    let x = Mat::from_slice(n, &a[site * n * n..(site + 1) * n * n]);
                    let y = Mat::from_slice(n, &b[site * n * n..(site + 1) * n * n]);
                    let v = op(&x, &y);
                    let dst = &mut data[site * m * m..(site + 1) * m * m];
                    for (z, e) in dst.iter_mut().zip(v.entries()) {
                        *z += e * sign;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Graded bracket: wedge on form indices, commutator on values.
    pub fn bracket(&self, other: &FormField) -> Result<FormField> {
        let group = match (self.target, other.target) {
            (Target::Algebra(g), Target::Algebra(h)) if g == h => g,
            _ => return Err(Error::Shape("bracket needs two forms valued in the same algebra".into())),
        };
        self.wedge_with(other, Target::Algebra(group), |x, y| x.commutator(y))
    }

    /// Wedge product with matrix multiplication of values.
    pub fn wedge(&self, other: &FormField) -> Result<FormField> {
        self.wedge_with(other, Target::Matrix(self.order()), |x, y| *x * *y)
    }

    /// Pointwise trace, a scalar form.
    pub fn trace(&self) -> FormField {
        self.map_values(Target::SCALAR, |_, _, m| Mat::scalar(m.trace()))
    }

    /// Trapezoid integral of a top-degree form over the whole grid.
    pub fn integrate(&self) -> Result<Mat> {
        if self.degree != self.grid.dim() {
            return Err(Error::Degree(format!(
                "integration over a {}-dimensional grid needs a top-degree form, got degree {}",
                self.grid.dim(),
                self.degree
            )));
        }
        let n = self.order();
        let data = &self.comps[&self.grid.all_axes()];
        let vol = self.grid.cell_volume();
        let entries: Vec<C64> = (0..n * n)
            .map(|e| {
                let column: Vec<C64> = data.iter().skip(e).step_by(n * n).copied().collect();
                pairwise_sum(&column) * vol
            })
            .collect();
        Ok(Mat::from_slice(n, &entries))
    }

    /// Integrates over the given axes, leaving a form on the grid of the
    /// remaining axes. A component `dx^K` with `K = I u axes` contributes
    /// `sign * integral` to `dx^I`, where `dx^K = sign dx^I ^ dx^axes`;
    /// components not containing all of `axes` drop out.
    pub fn integrate_over(&self, axes: AxisSet) -> Result<FormField> {
        if !axes.is_subset(self.grid.all_axes()) || axes.is_empty() {
            return Err(Error::Shape(format!("cannot integrate over axes {axes:?}")));
        }
        let rest = self.grid.all_axes().difference(axes);
        if rest.is_empty() {
            return Err(Error::Shape("integrating over every axis leaves no grid; use integrate".into()));
        }
        let grid = self.grid.restrict(rest)?;
        let degree = self.degree.checked_sub(axes.len()).ok_or_else(|| {
            Error::Degree(format!("a {}-form has no component along {} axes", self.degree, axes.len()))
        })?;
        let mut out = FormField::zeros(&grid, degree, self.target);
        let n2 = self.n2();
        let outer = self.grid.offsets(rest);
        let inner = self.grid.offsets(axes);
        let vol: f64 = axes.iter().map(|a| self.grid.spacing(a)).product();
        let mut column = vec![C64::new(0.0, 0.0); inner.len()];
        for (k, src) in &self.comps {
            if !axes.is_subset(*k) {
                continue;
            }
            let i = k.difference(axes);
            let sign = i.wedge_sign(axes).expect("disjoint");
            let key = remap(i, rest);
            let dst = out.comps.get_mut(&key).expect("component exists");
            for (site, &o) in outer.iter().enumerate() {
                for e in 0..n2 {
                    for (c, &f) in column.iter_mut().zip(&inner) {
                        *c = src[(o + f) * n2 + e];
                    }
                    dst[site * n2 + e] = pairwise_sum(&column) * (vol * sign);
                }
            }
        }
        Ok(out)
    }

    /// Restriction to the sub-grid through `anchor` spanned by `axes`
    /// (coordinates on the other axes fixed), keeping components that lie
    /// along `axes` only.
    pub fn restrict(&self, axes: AxisSet, anchor: &[usize]) -> Result<FormField> {
        if anchor.len() != self.grid.dim() {
            return Err(Error::Shape("anchor needs one coordinate per axis".into()));
        }
        let grid = self.grid.restrict(axes)?;
        let fixed = self.grid.all_axes().difference(axes);
        let base: usize = fixed.iter().map(|a| (anchor[a] % self.grid.axis(a).size) * self.grid.stride(a)).sum();
        let offs = self.grid.offsets(axes);
        let n2 = self.n2();
        let mut comps = BTreeMap::new();
        for (k, src) in &self.comps {
            if !k.is_subset(axes) {
                continue;
            }
            let mut data = Vec::with_capacity(offs.len() * n2);
            for &o in &offs {
                data.extend_from_slice(&src[(base + o) * n2..(base + o + 1) * n2]);
            }
            comps.insert(remap(*k, axes), data);
        }
        FormField::from_components(&grid, self.degree, self.target, comps)
    }
}

/// Renumbers the axes of `set` by their rank inside `within`.
pub(crate) fn remap(set: AxisSet, within: AxisSet) -> AxisSet {
    set.iter().map(|a| within.count_below(a)).collect()
}

pub(crate) fn write_values(data: &[C64]) -> Vec<[f64; 2]> {
    data.iter().map(|z| [z.re, z.im]).collect()
}

pub(crate) fn read_values(data: &[[f64; 2]]) -> Vec<C64> {
    data.iter().map(|p| C64::new(p[0], p[1])).collect()
}

#[derive(Serialize, Deserialize)]
struct FormDoc {
    grid: Grid,
    degree: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    group: Option<Group>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order: Option<usize>,
    components: BTreeMap<String, Vec<[f64; 2]>>,
}

impl Serialize for FormField {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let (group, order) = match self.target {
            Target::Algebra(g) => (Some(g), None),
            Target::Matrix(n) => (None, Some(n)),
        };
        FormDoc {
            grid: self.grid.clone(),
            degree: self.degree,
            group,
            order,
            components: self.comps.iter().map(|(s, v)| (s.key(), write_values(v))).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FormField {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = FormDoc::deserialize(deserializer)?;
        let target = match (doc.group, doc.order) {
            (Some(g), None) => Target::Algebra(g),
            (None, Some(n)) if n == 1 || n == 2 => Target::Matrix(n),
            _ => return Err(serde::de::Error::custom("a form needs either `group` or `order` (1 or 2)")),
        };
        let mut comps = BTreeMap::new();
        for (key, values) in doc.components {
            let set = AxisSet::parse_key(&key).map_err(serde::de::Error::custom)?;
            comps.insert(set, read_values(&values));
        }
        let form = FormField::from_components(&doc.grid, doc.degree, target, comps).map_err(serde::de::Error::custom)?;
        form.check_values(1e-10).map_err(serde::de::Error::custom)?;
        Ok(form)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::grid::AxisRole;
    use std::f64::consts::TAU;

    fn u1_form(grid: &Grid, degree: usize, f: impl Fn(AxisSet, &[f64]) -> f64) -> FormField {
        FormField::from_fn(grid, degree, Target::Algebra(Group::U1), |s, site| {
            Mat::scalar(C64::new(0.0, f(s, &grid.position(site))))
        })
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let grid = Grid::periodic(&[8, 6], AxisRole::Fiber).unwrap();
        let f = u1_form(&grid, 0, |_, _| 1.5);
        assert_eq!(f.ext_deriv().unwrap().max_abs(), 0.0);
    }

    #[test]
    fn sine_derivative_is_second_order() {
        let err = |n: usize| {
            let grid = Grid::periodic(&[n], AxisRole::Fiber).unwrap();
            let f = u1_form(&grid, 0, |_, x| x[0].sin());
            let exact = u1_form(&grid, 1, |_, x| x[0].cos());
            f.ext_deriv().unwrap().max_abs_diff(&exact).unwrap()
        };
        let ratio = err(64) / err(128);
        assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn top_degree_derivative_is_an_error() {
        let grid = Grid::periodic(&[8], AxisRole::Fiber).unwrap();
        let f = u1_form(&grid, 1, |_, _| 1.0);
        assert!(matches!(f.ext_deriv(), Err(Error::Degree(_))));
    }

    #[test]
    fn constant_top_form_integrates_to_area() {
        let grid = Grid::periodic(&[16, 16], AxisRole::Fiber).unwrap();
        let f = u1_form(&grid, 2, |_, _| 0.25);
        let v = f.integrate().unwrap();
        assert!((v.get(0, 0) - C64::new(0.0, 0.25 * TAU * TAU)).norm() < 1e-12);
    }

    #[test]
    fn cosine_integrates_to_zero() {
        let grid = Grid::periodic(&[32], AxisRole::Fiber).unwrap();
        let f = u1_form(&grid, 1, |_, x| x[0].cos());
        assert!(f.integrate().unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn discrete_stokes() {
        let grid = Grid::periodic(&[12, 10], AxisRole::Fiber).unwrap();
        let f = u1_form(&grid, 1, |s, x| if s.contains(0) { (x[0] + 2.0 * x[1]).sin() } else { x[0].cos() * x[1].sin() });
        assert!(f.ext_deriv().unwrap().integrate().unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn integrate_over_keeps_remaining_axes() {
        let grid = Grid::product(&[8], &[16]).unwrap();
        let f = FormField::from_fn(&grid, 2, Target::SCALAR, |_, site| {
            let x = grid.position(site);
            Mat::scalar(C64::new(x[0].sin() * (1.0 + x[1].cos()), 0.0))
        });
        let g = f.integrate_over(grid.fiber_axes()).unwrap();
        assert_eq!(g.degree(), 1);
        for site in 0..8 {
            let m = g.grid().position(site)[0];
            assert!((g.at(AxisSet::single(0), site).get(0, 0).re - TAU * m.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let grid = Grid::product(&[4], &[5]).unwrap();
        let f = u1_form(&grid, 1, |s, x| s.bits() as f64 * (x[0] * 0.3).sin() + x[1] / 7.0);
        let text = serde_json::to_string(&f).unwrap();
        let back: FormField = serde_json::from_str(&text).unwrap();
        assert!(back.bit_eq(&f));
    }
}
