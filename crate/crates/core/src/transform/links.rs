use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::pair::Split;
use crate::lattice::{read_values, write_values, Grid, Group, GroupField, LinkField, Mat};
use crate::{Error, Result};

/// Holonomy form of the correspondence: base-direction links become links
/// of the gauge-group bundle on `M` (each a map `X -> G`), fiber-direction
/// links become a lattice connection on `X` at every `m`. Blocks are laid
/// out `[m][x][n^2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkPair {
    grid: Grid,
    group: Group,
    split: Split,
    base: BTreeMap<usize, Vec<C64>>,
    fiber: BTreeMap<usize, Vec<C64>>,
}

impl LinkPair {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn group(&self) -> Group {
        self.group
    }

    fn n2(&self) -> usize {
        self.group.order() * self.group.order()
    }

    fn block(&self, axis: usize) -> &[C64] {
        self.base.get(&axis).or_else(|| self.fiber.get(&axis)).expect("axis of the product grid")
    }

    /// Link along product axis `axis` leaving `(m, x)`.
    pub fn link(&self, axis: usize, m: usize, x: usize) -> Mat {
        let n2 = self.n2();
        let i = (m * self.split.x_sites() + x) * n2;
        Mat::from_slice(self.group.order(), &self.block(axis)[i..i + n2])
    }

    /// The gauge-group valued link from `m` along a base axis, as a map
    /// `X -> G`.
    pub fn gauge_link(&self, axis: usize, m: usize) -> Result<GroupField> {
        if !self.base.contains_key(&axis) {
            return Err(Error::Shape(format!("axis {axis} is not a base axis")));
        }
        Ok(GroupField::from_fn(&self.split.x_grid, self.group, |x| self.link(axis, m, x)))
    }

    /// The lattice connection on `X` at base site `m`.
    pub fn fiber_links(&self, m: usize) -> LinkField {
        let axes: Vec<usize> = self.split.fiber.iter().collect();
        LinkField::from_fn(&self.split.x_grid, self.group, |local, x| self.link(axes[local], m, x))
    }

    /// Gauge transformation given as a field on the product grid, applied
    /// on the split side: `g(m)` acts on the gauge links by
    /// `U_mu(m) -> g(m) U_mu(m) g(m + mu)^-1` pointwise in `x` and on each
    /// fiber connection by the lattice gauge action on `X`.
    pub fn gauge_transform(&self, g: &GroupField) -> Result<LinkPair> {
        g.check_grid(&self.grid)?;
        let split = &self.split;
        let gm = |m: usize, x: usize| g.at(split.site(m, x));
        let mut out = self.clone();
        let n2 = self.n2();
        for (&axis, block) in out.base.iter_mut() {
            let local = split.local_axis(axis);
            for m in 0..split.m_sites() {
                let m_next = split.m_grid.shift(m, local, true);
                for x in 0..split.x_sites() {
                    let v = gm(m, x) * self.link(axis, m, x) * gm(m_next, x).dagger();
                    let i = (m * split.x_sites() + x) * n2;
                    v.write_to(&mut block[i..i + n2]);
                }
            }
        }
        for (&axis, block) in out.fiber.iter_mut() {
            let local = split.local_axis(axis);
            for m in 0..split.m_sites() {
                for x in 0..split.x_sites() {
                    let x_next = split.x_grid.shift(x, local, true);
                    let v = gm(m, x) * self.link(axis, m, x) * gm(m, x_next).dagger();
                    let i = (m * split.x_sites() + x) * n2;
                    v.write_to(&mut block[i..i + n2]);
                }
            }
        }
        Ok(out)
    }

    pub fn bit_eq(&self, other: &LinkPair) -> bool {
        let eq = |a: &BTreeMap<usize, Vec<C64>>, b: &BTreeMap<usize, Vec<C64>>| {
            a.len() == b.len()
                && a.iter().all(|(k, v)| {
                    b.get(k).is_some_and(|w| {
                        v.iter().zip(w).all(|(p, q)| p.re.to_bits() == q.re.to_bits() && p.im.to_bits() == q.im.to_bits())
                    })
                })
        };
        self.grid == other.grid && self.group == other.group && eq(&self.base, &other.base) && eq(&self.fiber, &other.fiber)
    }
}

/// Splits product links into gauge-group links and fiber connections.
pub fn link_forward(u: &LinkField) -> Result<LinkPair> {
    let grid = u.grid();
    let split = Split::new(grid)?;
    let group = u.group();
    let n2 = group.order() * group.order();
    let mut base = BTreeMap::new();
    let mut fiber = BTreeMap::new();
    for axis in 0..grid.dim() {
        let src = u.axis_data(axis);
        let mut block = Vec::with_capacity(src.len());
        for m in 0..split.m_sites() {
            for x in 0..split.x_sites() {
                let s = split.site(m, x);
                block.extend_from_slice(&src[s * n2..(s + 1) * n2]);
            }
        }
        if split.base.contains(axis) {
            base.insert(axis, block);
        } else {
            fiber.insert(axis, block);
        }
    }
    Ok(LinkPair { grid: grid.clone(), group, split, base, fiber })
}

/// Reassembles product links.
pub fn link_inverse(p: &LinkPair) -> Result<LinkField> {
    let grid = &p.grid;
    let n2 = p.n2();
    let mut links = Vec::with_capacity(grid.dim());
    for axis in 0..grid.dim() {
        let block = p.block(axis);
        let mut data = vec![C64::new(0.0, 0.0); block.len()];
        for m in 0..p.split.m_sites() {
            for x in 0..p.split.x_sites() {
                let s = p.split.site(m, x);
                let i = m * p.split.x_sites() + x;
                data[s * n2..(s + 1) * n2].copy_from_slice(&block[i * n2..(i + 1) * n2]);
            }
        }
        links.push(data);
    }
    LinkField::from_axis_data(grid, p.group, links)
}

#[derive(Serialize, Deserialize)]
struct LinkPairDoc {
    grid: Grid,
    group: Group,
    base: BTreeMap<String, Vec<[f64; 2]>>,
    fiber: BTreeMap<String, Vec<[f64; 2]>>,
}

impl Serialize for LinkPair {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let doc = |m: &BTreeMap<usize, Vec<C64>>| m.iter().map(|(k, v)| (k.to_string(), write_values(v))).collect();
        LinkPairDoc { grid: self.grid.clone(), group: self.group, base: doc(&self.base), fiber: doc(&self.fiber) }
            .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LinkPair {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = LinkPairDoc::deserialize(deserializer)?;
        let build = || -> Result<LinkPair> {
            let split = Split::new(&doc.grid)?;
            let n = doc.group.order();
            let len = doc.grid.sites() * n * n;
            let read = |m: &BTreeMap<String, Vec<[f64; 2]>>, axes: crate::lattice::AxisSet, name: &str| {
                let mut out = BTreeMap::new();
                for (key, values) in m {
                    let axis: usize = key.parse().map_err(|_| Error::Shape(format!("bad axis key `{key}` in {name}")))?;
                    if !axes.contains(axis) {
                        return Err(Error::Shape(format!("{name} has links along axis {axis}, which is not one of its axes")));
                    }
                    if values.len() != len {
                        return Err(Error::Shape(format!("{name} axis {axis} has {} entries, expected {len}", values.len())));
                    }
                    let data = read_values(values);
                    for chunk in data.chunks_exact(n * n) {
                        if !doc.group.is_element(&Mat::from_slice(n, chunk), 1e-10) {
                            return Err(Error::Domain(format!("a {name} link along axis {axis} is not in {}", doc.group.name())));
                        }
                    }
                    out.insert(axis, data);
                }
                if let Some(missing) = axes.iter().find(|a| !out.contains_key(a)) {
                    return Err(Error::Shape(format!("{name} is missing axis {missing}")));
                }
                Ok(out)
            };
            let base = read(&doc.base, split.base, "base")?;
            let fiber = read(&doc.fiber, split.fiber, "fiber")?;
            Ok(LinkPair { grid: doc.grid.clone(), group: doc.group, split, base, fiber })
        };
        build().map_err(serde::de::Error::custom)
    }
}
