use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::lattice::{read_values, write_values, AxisRole, AxisSet, BundleTwist, FormField, Grid, Group, GroupField, Mat, Target};
use crate::{Error, Result};

/// Index maps between product sites and `(m, x)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Split {
    pub base: AxisSet,
    pub fiber: AxisSet,
    pub m_offsets: Vec<usize>,
    pub x_offsets: Vec<usize>,
    pub m_grid: Grid,
    pub x_grid: Grid,
}

impl Split {
    pub fn new(grid: &Grid) -> Result<Split> {
        if !grid.is_product() {
            return Err(Error::Config("the grid needs both base and fiber axes".into()));
        }
        let base = grid.base_axes();
        let fiber = grid.fiber_axes();
        Ok(Split {
            base,
            fiber,
            m_offsets: grid.offsets(base),
            x_offsets: grid.offsets(fiber),
            m_grid: grid.restrict(base)?.with_role(AxisRole::Base),
            x_grid: grid.restrict(fiber)?.with_role(AxisRole::Fiber),
        })
    }

    pub fn m_sites(&self) -> usize {
        self.m_offsets.len()
    }

    pub fn x_sites(&self) -> usize {
        self.x_offsets.len()
    }

    #[inline]
    pub fn site(&self, m: usize, x: usize) -> usize {
        self.m_offsets[m] + self.x_offsets[x]
    }

    /// Rank of a product axis among the base (or fiber) axes.
    pub fn local_axis(&self, axis: usize) -> usize {
        if self.base.contains(axis) {
            self.base.count_below(axis)
        } else {
            self.fiber.count_below(axis)
        }
    }
}

/// Connection 1-form on `M x X`, optionally on a twisted U(1) bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductConnection {
    form: FormField,
    twist: Option<BundleTwist>,
}

impl ProductConnection {
    pub fn new(form: FormField, twist: Option<BundleTwist>) -> Result<ProductConnection> {
        let Target::Algebra(group) = form.target() else {
            return Err(Error::Shape("a connection is algebra-valued".into()));
        };
        if form.degree() != 1 {
            return Err(Error::Degree(format!("a connection is a 1-form, got degree {}", form.degree())));
        }
        if !form.grid().is_product() {
            return Err(Error::Config("a product connection needs both base and fiber axes".into()));
        }
        if let Some(t) = &twist {
            t.validate(form.grid(), group)?;
        }
        Ok(ProductConnection { form, twist })
    }

    pub fn zero(grid: &Grid, group: Group) -> Result<ProductConnection> {
        ProductConnection::new(FormField::zeros(grid, 1, Target::Algebra(group)), None)
    }

    pub fn form(&self) -> &FormField {
        &self.form
    }

    pub fn twist(&self) -> Option<&BundleTwist> {
        self.twist.as_ref()
    }

    pub fn grid(&self) -> &Grid {
        self.form.grid()
    }

    pub fn group(&self) -> Group {
        self.form.target().group().expect("checked at construction")
    }

    /// `g A g^-1 + g dg^-1` for a gauge transformation of the product bundle.
    pub fn gauge_transform(&self, g: &GroupField) -> Result<ProductConnection> {
        ProductConnection::new(g.transform_connection(&self.form)?, self.twist)
    }

    pub fn bit_eq(&self, other: &ProductConnection) -> bool {
        self.twist == other.twist && self.form.bit_eq(&other.form)
    }
}

#[derive(Serialize, Deserialize)]
struct ProductDoc {
    connection: FormField,
    #[serde(default)]
    twist: Option<BundleTwist>,
}

impl Serialize for ProductConnection {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ProductDoc { connection: self.form.clone(), twist: self.twist }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ProductConnection {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = ProductDoc::deserialize(deserializer)?;
        ProductConnection::new(doc.connection, doc.twist).map_err(serde::de::Error::custom)
    }
}

/// Per-axis blocks laid out as `[m][x][n^2]`, shared by both halves of a
/// caloron pair.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Blocks {
    pub grid: Grid,
    pub group: Group,
    pub split: Split,
    pub data: BTreeMap<usize, Vec<C64>>,
}

impl Blocks {
    fn extract(form: &FormField, axes: AxisSet, split: &Split) -> Blocks {
        let n2 = form.order() * form.order();
        let group = form.target().group().expect("algebra-valued");
        let mut data = BTreeMap::new();
        for axis in axes.iter() {
            let src = form.component(AxisSet::single(axis)).expect("1-form component");
            let mut block = Vec::with_capacity(src.len());
            for m in 0..split.m_sites() {
                for x in 0..split.x_sites() {
                    let s = split.site(m, x);
                    block.extend_from_slice(&src[s * n2..(s + 1) * n2]);
                }
            }
            data.insert(axis, block);
        }
        Blocks { grid: form.grid().clone(), group, split: split.clone(), data }
    }

    fn zeros(grid: &Grid, group: Group, axes: AxisSet) -> Result<Blocks> {
        let split = Split::new(grid)?;
        let len = grid.sites() * group.order() * group.order();
        let data = axes.iter().map(|a| (a, vec![C64::new(0.0, 0.0); len])).collect();
        Ok(Blocks { grid: grid.clone(), group, split, data })
    }

    fn n2(&self) -> usize {
        self.group.order() * self.group.order()
    }

    #[inline]
    pub fn at(&self, axis: usize, m: usize, x: usize) -> Mat {
        let n2 = self.n2();
        let i = (m * self.split.x_sites() + x) * n2;
        Mat::from_slice(self.group.order(), &self.data[&axis][i..i + n2])
    }

    pub fn set(&mut self, axis: usize, m: usize, x: usize, v: &Mat) {
        let n2 = self.n2();
        let i = (m * self.split.x_sites() + x) * n2;
        if let Some(block) = self.data.get_mut(&axis) {
            v.write_to(&mut block[i..i + n2]);
        }
    }

    fn bit_eq(&self, other: &Blocks) -> bool {
        self.grid == other.grid
            && self.group == other.group
            && self.data.len() == other.data.len()
            && self.data.iter().all(|(k, v)| {
                other.data.get(k).is_some_and(|w| {
                    v.len() == w.len()
                        && v.iter().zip(w).all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits())
                })
            })
    }

    fn check(&self, tol: f64) -> Result<()> {
        let n = self.group.order();
        for (axis, block) in &self.data {
            for (i, chunk) in block.chunks_exact(n * n).enumerate() {
                if !self.group.is_algebra(&Mat::from_slice(n, chunk), tol) {
                    return Err(Error::Domain(format!("axis {axis} entry {i} is not in the {} algebra", self.group.name())));
                }
            }
        }
        Ok(())
    }
}

/// Connection on the gauge-group bundle over `M`: for every base axis and
/// every point of `M`, a map `X -> g` sampled on the fiber grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeGroupConnection {
    pub(crate) blocks: Blocks,
}

/// Higgs field: for every point of `M`, a connection 1-form on the fiber
/// grid. The bundle type (twist) is the same at every point.
#[derive(Debug, Clone, PartialEq)]
pub struct HiggsFieldMap {
    pub(crate) blocks: Blocks,
    pub(crate) twist: Option<BundleTwist>,
}

macro_rules! block_accessors {
    ($t:ty) => {
        impl $t {
            /// The product grid the blocks are indexed by.
            pub fn grid(&self) -> &Grid {
                &self.blocks.grid
            }

            pub fn group(&self) -> Group {
                self.blocks.group
            }

            pub fn base_grid(&self) -> &Grid {
                &self.blocks.split.m_grid
            }

            pub fn fiber_grid(&self) -> &Grid {
                &self.blocks.split.x_grid
            }

            /// Product-axis indices with a block, increasing.
            pub fn axes(&self) -> Vec<usize> {
                self.blocks.data.keys().copied().collect()
            }

            /// Value along product axis `axis` at base site `m`, fiber site `x`.
            pub fn at(&self, axis: usize, m: usize, x: usize) -> Mat {
                self.blocks.at(axis, m, x)
            }

            pub fn max_abs(&self) -> f64 {
                self.blocks.data.values().flat_map(|b| b.iter()).map(|z| z.norm()).fold(0.0, f64::max)
            }
        }
    };
}

block_accessors!(GaugeGroupConnection);
block_accessors!(HiggsFieldMap);

impl GaugeGroupConnection {
    pub fn zero(grid: &Grid, group: Group) -> Result<GaugeGroupConnection> {
        Ok(GaugeGroupConnection { blocks: Blocks::zeros(grid, group, grid.base_axes())? })
    }

    /// The Lie(gauge group) element `X -> g` for base axis `axis` at `m`, as
    /// a 0-form on the fiber grid.
    pub fn value_map(&self, axis: usize, m: usize) -> FormField {
        let x_grid = &self.blocks.split.x_grid;
        FormField::from_fn(x_grid, 0, Target::Algebra(self.group()), |_, x| self.at(axis, m, x))
    }

    pub fn bit_eq(&self, other: &GaugeGroupConnection) -> bool {
        self.blocks.bit_eq(&other.blocks)
    }

    /// Transformation under a fiber gauge transformation of the product
    /// bundle, `A_mu -> g A_mu g^-1 + g d_mu g^-1` (the derivative along the
    /// base by central differences).
    pub fn gauge_transform(&self, g: &GroupField) -> Result<GaugeGroupConnection> {
        let form = g.transform_connection(&self.to_form())?;
        let mut out = self.clone();
        out.blocks = Blocks::extract(&form, self.blocks.split.base, &self.blocks.split);
        Ok(out)
    }

    fn to_form(&self) -> FormField {
        to_form(&[&self.blocks])
    }
}

impl HiggsFieldMap {
    pub fn zero(grid: &Grid, group: Group, twist: Option<BundleTwist>) -> Result<HiggsFieldMap> {
        if let Some(t) = &twist {
            t.validate(grid, group)?;
        }
        Ok(HiggsFieldMap { blocks: Blocks::zeros(grid, group, grid.fiber_axes())?, twist })
    }

    pub fn twist(&self) -> Option<&BundleTwist> {
        self.twist.as_ref()
    }

    /// The fiber connection `Phi(m)` (periodic part), a 1-form on the fiber
    /// grid.
    pub fn connection_at(&self, m: usize) -> FormField {
        let split = &self.blocks.split;
        FormField::from_fn(&split.x_grid, 1, Target::Algebra(self.group()), |set, x| {
            let local = set.iter().next().expect("1-form");
            let axis = split.fiber.iter().nth(local).expect("fiber axis");
            self.at(axis, m, x)
        })
    }

    /// Twist of `Phi(m)` as a bundle over the fiber alone, when both twist
    /// axes are fiber axes.
    pub fn fiber_twist(&self) -> Option<BundleTwist> {
        let split = &self.blocks.split;
        self.twist.filter(|t| t.plane().is_subset(split.fiber)).map(|t| BundleTwist {
            chern: t.chern,
            axes: [split.local_axis(t.axes[0]), split.local_axis(t.axes[1])],
        })
    }

    pub fn bit_eq(&self, other: &HiggsFieldMap) -> bool {
        self.twist == other.twist && self.blocks.bit_eq(&other.blocks)
    }

    fn with_connections(&self, forms: &[FormField]) -> HiggsFieldMap {
        let split = &self.blocks.split;
        let mut out = self.clone();
        for (m, form) in forms.iter().enumerate() {
            for (local, axis) in split.fiber.iter().enumerate() {
                for x in 0..split.x_sites() {
                    out.blocks.set(axis, m, x, &form.at(AxisSet::single(local), x));
                }
            }
        }
        out
    }
}

fn to_form(parts: &[&Blocks]) -> FormField {
    let b = parts[0];
    let n2 = b.group.order() * b.group.order();
    let mut comps = BTreeMap::new();
    for part in parts {
        for (&axis, block) in &part.data {
            let mut data = vec![C64::new(0.0, 0.0); block.len()];
            for m in 0..b.split.m_sites() {
                for x in 0..b.split.x_sites() {
                    let s = b.split.site(m, x);
                    let i = m * b.split.x_sites() + x;
                    data[s * n2..(s + 1) * n2].copy_from_slice(&block[i * n2..(i + 1) * n2]);
                }
            }
            comps.insert(AxisSet::single(axis), data);
        }
    }
    FormField::from_components(&b.grid, 1, Target::Algebra(b.group), comps).expect("blocks match the grid")
}

/// Splits a product connection into the gauge-group connection (base
/// components) and the Higgs field (fiber components). Pure reindexing.
pub fn forward_transform(w: &ProductConnection) -> Result<(GaugeGroupConnection, HiggsFieldMap)> {
    let split = Split::new(w.grid())?;
    let a = GaugeGroupConnection { blocks: Blocks::extract(&w.form, split.base, &split) };
    let phi = HiggsFieldMap { blocks: Blocks::extract(&w.form, split.fiber, &split), twist: w.twist };
    Ok((a, phi))
}

/// Reassembles the product connection from base and fiber blocks.
pub fn inverse_transform(a: &GaugeGroupConnection, phi: &HiggsFieldMap) -> Result<ProductConnection> {
    if a.blocks.grid != phi.blocks.grid {
        return Err(Error::Shape("the connection and the Higgs field are sampled on different grids".into()));
    }
    if a.group() != phi.group() {
        return Err(Error::Shape("the connection and the Higgs field have different groups".into()));
    }
    ProductConnection::new(to_form(&[&a.blocks, &phi.blocks]), phi.twist)
}

/// Gauge action on the Higgs field: what a fiber gauge transformation does
/// at a point of `M`.
#[derive(Debug, Clone, PartialEq)]
pub enum FiberGauge {
    /// The same transformation `X -> G` at every point of `M`.
    Uniform(GroupField),
    /// A transformation of the product bundle, read off at each point.
    PerPoint(GroupField),
}

impl FiberGauge {
    fn at(&self, split: &Split, m: usize) -> Result<GroupField> {
        match self {
            FiberGauge::Uniform(g) => {
                g.check_grid(&split.x_grid)?;
                Ok(g.clone())
            }
            FiberGauge::PerPoint(g) => {
                if g.grid().sites() != split.m_sites() * split.x_sites() {
                    return Err(Error::Shape("gauge transformation lives on a different grid".into()));
                }
                Ok(GroupField::from_fn(&split.x_grid, g.group(), |x| g.at(split.site(m, x))))
            }
        }
    }

    /// The same transformation as a field on the product grid.
    pub fn on_product(&self, grid: &Grid) -> Result<GroupField> {
        let split = Split::new(grid)?;
        match self {
            FiberGauge::Uniform(g) => {
                g.check_grid(&split.x_grid)?;
                let mut values = vec![g.group().identity(); grid.sites()];
                for m in 0..split.m_sites() {
                    for x in 0..split.x_sites() {
                        values[split.site(m, x)] = g.at(x);
                    }
                }
                Ok(GroupField::from_fn(grid, g.group(), |s| values[s]))
            }
            FiberGauge::PerPoint(g) => {
                g.check_grid(grid)?;
                Ok(g.clone())
            }
        }
    }
}

/// `omega -> psi^-1 omega psi + psi^-1 d psi` on each `Phi(m)`, with the
/// derivative discretized by central differences.
pub fn higgs_gauge_action(phi: &HiggsFieldMap, psi: &FiberGauge) -> Result<HiggsFieldMap> {
    let split = &phi.blocks.split;
    let mut forms = Vec::with_capacity(split.m_sites());
    for m in 0..split.m_sites() {
        let g = psi.at(split, m)?.inverse();
        forms.push(g.transform_connection(&phi.connection_at(m))?);
    }
    Ok(phi.with_connections(&forms))
}

#[derive(Serialize, Deserialize)]
struct PairDoc {
    grid: Grid,
    group: Group,
    #[serde(rename = "A")]
    a: BTreeMap<String, Vec<[f64; 2]>>,
    #[serde(rename = "Phi")]
    phi: BTreeMap<String, Vec<[f64; 2]>>,
    #[serde(default)]
    twist: Option<BundleTwist>,
}

/// The two halves of the correspondence, serialized as one document.
#[derive(Debug, Clone, PartialEq)]
pub struct CaloronPair {
    pub a: GaugeGroupConnection,
    pub phi: HiggsFieldMap,
}

impl CaloronPair {
    pub fn bit_eq(&self, other: &CaloronPair) -> bool {
        self.a.bit_eq(&other.a) && self.phi.bit_eq(&other.phi)
    }
}

fn blocks_doc(b: &Blocks) -> BTreeMap<String, Vec<[f64; 2]>> {
    b.data.iter().map(|(k, v)| (k.to_string(), write_values(v))).collect()
}

fn blocks_from_doc(grid: &Grid, group: Group, axes: AxisSet, doc: &BTreeMap<String, Vec<[f64; 2]>>, name: &str) -> Result<Blocks> {
    let mut b = Blocks::zeros(grid, group, axes)?;
    let len = grid.sites() * group.order() * group.order();
    for key in doc.keys() {
        let axis: usize = key.parse().map_err(|_| Error::Shape(format!("bad axis key `{key}` in {name}")))?;
        if !axes.contains(axis) {
            return Err(Error::Shape(format!("{name} has a block for axis {axis}, which is not one of its axes")));
        }
    }
    for axis in axes.iter() {
        let values = doc.get(&axis.to_string()).ok_or_else(|| Error::Shape(format!("{name} is missing axis {axis}")))?;
        if values.len() != len {
            return Err(Error::Shape(format!("{name} axis {axis} has {} entries, expected {len}", values.len())));
        }
        b.data.insert(axis, read_values(values));
    }
    b.check(1e-10)?;
    Ok(b)
}

impl Serialize for CaloronPair {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        PairDoc {
            grid: self.a.blocks.grid.clone(),
            group: self.a.group(),
            a: blocks_doc(&self.a.blocks),
            phi: blocks_doc(&self.phi.blocks),
            twist: self.phi.twist,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CaloronPair {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = PairDoc::deserialize(deserializer)?;
        let build = || -> Result<CaloronPair> {
            let grid = &doc.grid;
            if !grid.is_product() {
                return Err(Error::Config("the grid needs both base and fiber axes".into()));
            }
            if let Some(t) = &doc.twist {
                t.validate(grid, doc.group)?;
            }
            let a = blocks_from_doc(grid, doc.group, grid.base_axes(), &doc.a, "A")?;
            let phi = blocks_from_doc(grid, doc.group, grid.fiber_axes(), &doc.phi, "Phi")?;
            Ok(CaloronPair { a: GaugeGroupConnection { blocks: a }, phi: HiggsFieldMap { blocks: phi, twist: doc.twist } })
        };
        build().map_err(serde::de::Error::custom)
    }
}
