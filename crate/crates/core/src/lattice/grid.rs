use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// Smallest admissible number of points along an axis.
pub const MIN_AXIS_POINTS: usize = 4;
/// Upper bound on the number of axes; axis sets are stored as bitmasks.
pub const MAX_AXES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisRole {
    /// Axis of the base manifold `M`.
    Base,
    /// Axis of the fiber manifold `X`.
    Fiber,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub size: usize,
    pub length: f64,
    pub role: AxisRole,
}

impl Axis {
    pub fn spacing(&self) -> f64 {
        self.length / self.size as f64
    }
}

/// Uniform periodic grid. Sites are numbered row-major: the last axis varies
/// fastest. Product grids tag each axis as base or fiber; a grid for `M` or
/// `X` alone tags all axes with one role.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: Vec<Axis>,
    strides: Vec<usize>,
    sites: usize,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > MAX_AXES {
            return Err(Error::Config(format!("a grid needs 1..={MAX_AXES} axes, got {}", axes.len())));
        }
        for (i, a) in axes.iter().enumerate() {
            if a.size < MIN_AXIS_POINTS {
                return Err(Error::Config(format!(
                    "axis {i} has {} points; at least {MIN_AXIS_POINTS} are required",
                    a.size
                )));
            }
            if !(a.length.is_finite() && a.length > 0.0) {
                return Err(Error::Config(format!("axis {i} has non-positive length {}", a.length)));
            }
        }
        let mut strides = vec![1; axes.len()];
        for i in (0..axes.len() - 1).rev() {
            strides[i] = strides[i + 1] * axes[i + 1].size;
        }
        let sites = strides[0] * axes[0].size;
        Ok(Grid { axes, strides, sites })
    }

    /// Grid with circumference `2 pi` on every axis.
    pub fn periodic(sizes: &[usize], role: AxisRole) -> Result<Self> {
        Grid::new(sizes.iter().map(|&size| Axis { size, length: TAU, role }).collect())
    }

    /// `M x X` with the base axes first, all circumferences `2 pi`.
    pub fn product(base: &[usize], fiber: &[usize]) -> Result<Self> {
        let axes = base
            .iter()
            .map(|&size| Axis { size, length: TAU, role: AxisRole::Base })
            .chain(fiber.iter().map(|&size| Axis { size, length: TAU, role: AxisRole::Fiber }))
            .collect();
        Grid::new(axes)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> &Axis {
        &self.axes[i]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.size).collect()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.axes[axis].spacing()
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    /// Product of all spacings, the trapezoid weight of one site.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).product()
    }

    pub fn volume(&self) -> f64 {
        self.axes.iter().map(|a| a.length).product()
    }

    pub fn base_axes(&self) -> AxisSet {
        self.axes_with_role(AxisRole::Base)
    }

    pub fn fiber_axes(&self) -> AxisSet {
        self.axes_with_role(AxisRole::Fiber)
    }

    fn axes_with_role(&self, role: AxisRole) -> AxisSet {
        AxisSet::from_iter(self.axes.iter().enumerate().filter(|(_, a)| a.role == role).map(|(i, _)| i))
    }

    pub fn all_axes(&self) -> AxisSet {
        AxisSet::from_iter(0..self.dim())
    }

    /// True when both base and fiber axes are present.
    pub fn is_product(&self) -> bool {
        !self.base_axes().is_empty() && !self.fiber_axes().is_empty()
    }

    pub fn coord(&self, site: usize, axis: usize) -> usize {
        (site / self.strides[axis]) % self.axes[axis].size
    }

    pub fn coords(&self, site: usize) -> Vec<usize> {
        (0..self.dim()).map(|a| self.coord(site, a)).collect()
    }

    pub fn site(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.strides).map(|(c, s)| c * s).sum()
    }

    /// Physical position of a site, `coord * spacing` per axis.
    pub fn position(&self, site: usize) -> Vec<f64> {
        (0..self.dim()).map(|a| self.coord(site, a) as f64 * self.spacing(a)).collect()
    }

    /// Neighbouring site one step along `axis`, forward or backward, with
    /// periodic wrap.
    #[inline]
    pub fn shift(&self, site: usize, axis: usize, forward: bool) -> usize {
        let n = self.axes[axis].size;
        let stride = self.strides[axis];
        let c = (site / stride) % n;
        if forward {
            if c + 1 == n {
                site + stride - n * stride
            } else {
                site + stride
            }
        } else if c == 0 {
            site + (n - 1) * stride
        } else {
            site - stride
        }
    }

    /// Sub-grid spanned by the given axes, in their original order.
    pub fn restrict(&self, axes: AxisSet) -> Result<Grid> {
        Grid::new(axes.iter().map(|a| self.axes[a]).collect())
    }

    /// Full-grid site offsets of the sub-grid spanned by `axes`, enumerated
    /// in the row-major order of `self.restrict(axes)`. Adding an offset from
    /// a complementary set gives a full site index.
    pub fn offsets(&self, axes: AxisSet) -> Vec<usize> {
        let list: Vec<usize> = axes.iter().filter(|&a| a < self.dim()).collect();
        let mut out = vec![0usize];
        for &a in &list {
            let n = self.axes[a].size;
            let stride = self.strides[a];
            out = out.iter().flat_map(|&base| (0..n).map(move |c| base + c * stride)).collect();
        }
        out
    }

    /// Same grid with every axis tagged `role`.
    pub fn with_role(&self, role: AxisRole) -> Grid {
        let axes = self.axes.iter().map(|a| Axis { role, ..*a }).collect();
        Grid::new(axes).expect("relabelling keeps a valid grid")
    }

    /// Every axis size multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Result<Grid> {
        Grid::new(self.axes.iter().map(|a| Axis { size: a.size * factor, ..*a }).collect())
    }
}

impl Serialize for Grid {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        GridDoc {
            dim: self.dim(),
            sizes: self.sizes(),
            lengths: self.axes.iter().map(|a| a.length).collect(),
            base_axes: self.base_axes().iter().collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Grid {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = GridDoc::deserialize(deserializer)?;
        doc.into_grid().map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct GridDoc {
    dim: usize,
    sizes: Vec<usize>,
    lengths: Vec<f64>,
    #[serde(default)]
    base_axes: Vec<usize>,
}

impl GridDoc {
    fn into_grid(self) -> Result<Grid> {
        if self.sizes.len() != self.dim || self.lengths.len() != self.dim {
            return Err(Error::Config("grid dim, sizes and lengths disagree".into()));
        }
        if let Some(&bad) = self.base_axes.iter().find(|&&a| a >= self.dim) {
            return Err(Error::Config(format!("base axis {bad} does not exist")));
        }
        let axes = self
            .sizes
            .iter()
            .zip(&self.lengths)
            .enumerate()
            .map(|(i, (&size, &length))| Axis {
                size,
                length,
                role: if self.base_axes.contains(&i) { AxisRole::Base } else { AxisRole::Fiber },
            })
            .collect();
        Grid::new(axes)
    }
}

/// A set of axes, iterated in increasing order. Also identifies one basis
/// element `dx^i1 ^ ... ^ dx^ip` of the exterior algebra.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct AxisSet(u16);

impl AxisSet {
    pub const EMPTY: AxisSet = AxisSet(0);

    pub fn single(axis: usize) -> Self {
        AxisSet(1 << axis)
    }

    pub fn pair(a: usize, b: usize) -> Self {
        AxisSet((1 << a) | (1 << b))
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, axis: usize) -> bool {
        self.0 & (1 << axis) != 0
    }

    pub fn with(self, axis: usize) -> Self {
        AxisSet(self.0 | (1 << axis))
    }

    pub fn union(self, other: AxisSet) -> Self {
        AxisSet(self.0 | other.0)
    }

    pub fn intersection(self, other: AxisSet) -> Self {
        AxisSet(self.0 & other.0)
    }

    pub fn difference(self, other: AxisSet) -> Self {
        AxisSet(self.0 & !other.0)
    }

    pub fn is_disjoint(self, other: AxisSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset(self, other: AxisSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..16).filter(move |&i| self.0 & (1 << i) != 0)
    }

    /// Number of elements strictly below `axis`.
    pub fn count_below(self, axis: usize) -> usize {
        (self.0 & ((1u16 << axis) - 1)).count_ones() as usize
    }

    /// Sign of `dx^I ^ dx^J` relative to the sorted basis element of `I u J`,
    /// or `None` if the sets overlap.
    pub fn wedge_sign(self, other: AxisSet) -> Option<f64> {
        if !self.is_disjoint(other) {
            return None;
        }
        let inversions: usize = other.iter().map(|j| self.iter().filter(|&i| i > j).count()).sum();
        Some(if inversions.is_multiple_of(2) { 1.0 } else { -1.0 })
    }

    /// All subsets of `within` with exactly `p` elements, in increasing bit
    /// order.
    pub fn subsets(within: AxisSet, p: usize) -> Vec<AxisSet> {
        let mut out = Vec::new();
        let mut bits = within.0;
        // enumerate sub-masks
        loop {
            let s = AxisSet(bits);
            if s.len() == p {
                out.push(s);
            }
            if bits == 0 {
                break;
            }
            bits = (bits - 1) & within.0;
        }
        out.sort();
        out
    }

    /// `"0,2"` style key used in JSON documents; the empty set is `""`.
    pub fn key(self) -> String {
        self.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")
    }

    pub fn parse_key(key: &str) -> Result<AxisSet> {
        if key.trim().is_empty() {
            return Ok(AxisSet::EMPTY);
        }
        let mut set = AxisSet::EMPTY;
        for part in key.split(',') {
            let a: usize = part.trim().parse().map_err(|_| Error::Config(format!("bad component key `{key}`")))?;
            if a >= MAX_AXES || set.contains(a) {
                return Err(Error::Config(format!("bad component key `{key}`")));
            }
            set = set.with(a);
        }
        Ok(set)
    }
}

impl FromIterator<usize> for AxisSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        iter.into_iter().fold(AxisSet::EMPTY, |s, a| s.with(a))
    }
}

impl fmt::Debug for AxisSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.key())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_axes() {
        assert!(Grid::periodic(&[3], AxisRole::Base).is_err());
        assert!(Grid::periodic(&[4, 4], AxisRole::Fiber).is_ok());
    }

    #[test]
    fn shift_wraps() {
        let g = Grid::periodic(&[4, 5], AxisRole::Base).unwrap();
        let s = g.site(&[3, 4]);
        assert_eq!(g.coords(g.shift(s, 0, true)), vec![0, 4]);
        assert_eq!(g.coords(g.shift(s, 1, true)), vec![3, 0]);
        let s0 = g.site(&[0, 0]);
        assert_eq!(g.coords(g.shift(s0, 1, false)), vec![0, 4]);
        for site in 0..g.sites() {
            for a in 0..2 {
                assert_eq!(g.shift(g.shift(site, a, true), a, false), site);
            }
        }
    }

    #[test]
    fn wedge_signs() {
        let x = AxisSet::single(0);
        let y = AxisSet::single(1);
        assert_eq!(x.wedge_sign(y), Some(1.0));
        assert_eq!(y.wedge_sign(x), Some(-1.0));
        assert_eq!(x.wedge_sign(x), None);
        // dx2 ^ (dx0 ^ dx1) = + dx0 ^ dx1 ^ dx2
        assert_eq!(AxisSet::single(2).wedge_sign(AxisSet::pair(0, 1)), Some(1.0));
        assert_eq!(AxisSet::single(1).wedge_sign(AxisSet::pair(0, 2)), Some(-1.0));
    }

    #[test]
    fn subsets_count() {
        let all = AxisSet::from_iter(0..5);
        assert_eq!(AxisSet::subsets(all, 2).len(), 10);
        assert_eq!(AxisSet::subsets(all, 0), vec![AxisSet::EMPTY]);
    }

    #[test]
    fn keys_round_trip() {
        let s = AxisSet::from_iter([0, 3]);
        assert_eq!(s.key(), "0,3");
        assert_eq!(AxisSet::parse_key("0,3").unwrap(), s);
        assert_eq!(AxisSet::parse_key("").unwrap(), AxisSet::EMPTY);
        assert!(AxisSet::parse_key("1,1").is_err());
    }

    #[test]
    fn grid_json() {
        let g = Grid::product(&[8], &[16]).unwrap();
        let text = serde_json::to_string(&g).unwrap();
        assert_eq!(
            text,
            r#"{"dim":2,"sizes":[8,16],"lengths":[6.283185307179586,6.283185307179586],"base_axes":[0]}"#
        );
        let back: Grid = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
    }
}
