use num_complex::Complex64 as C64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::polynomial::{eval_invariant, InvariantPolynomial};
use crate::lattice::{AxisRole, AxisSet, FormField, Grid, Group, LinkField, Target};
use crate::symbolic::{caloron_integrand, Generator};
use crate::transform::{curvature_split, curvature_split_links, inverse_transform, nabla_phi, CurvatureTriple};
use crate::transform::{GaugeGroupConnection, HiggsFieldMap, ProductConnection};
use crate::{Error, Result};

/// Input of a caloron class computation.
#[derive(Debug, Clone, Copy)]
pub enum ClassData<'a> {
    Product(&'a ProductConnection),
    /// The correspondence pair; `NablaPhi` comes from the three-term sum.
    Pair(&'a GaugeGroupConnection, &'a HiggsFieldMap),
    /// Product links; curvature from plaquettes.
    Links(&'a LinkField),
}

impl ClassData<'_> {
    pub fn grid(&self) -> &Grid {
        match self {
            ClassData::Product(w) => w.grid(),
            ClassData::Pair(a, _) => a.grid(),
            ClassData::Links(u) => u.grid(),
        }
    }

    pub fn group(&self) -> Group {
        match self {
            ClassData::Product(w) => w.group(),
            ClassData::Pair(a, _) => a.group(),
            ClassData::Links(u) => u.group(),
        }
    }

    fn representation(&self) -> &'static str {
        match self {
            ClassData::Product(_) => "product",
            ClassData::Pair(..) => "pair",
            ClassData::Links(_) => "links",
        }
    }

    pub fn curvature(&self) -> Result<CurvatureTriple> {
        match self {
            ClassData::Product(w) => curvature_split(w),
            ClassData::Pair(a, phi) => {
                let mut t = curvature_split(&inverse_transform(a, phi)?)?;
                t.nabla_phi = nabla_phi(a, phi)?;
                Ok(t)
            }
            ClassData::Links(u) => {
                if !u.grid().is_product() {
                    return Err(Error::Config("links need a product grid".into()));
                }
                curvature_split_links(u)
            }
        }
    }
}

/// How the bidegree-`(r, d)` part of `f(F^k)` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassPath {
    /// Evaluate on the full curvature, then keep bidegree `(r, d)`.
    Numeric,
    /// Evaluate the symbolic integrand term by term.
    Symbolic,
}

/// Axis-aligned sub-torus of `M` through `anchor` spanned by `axes`
/// (indices of the base grid). The empty set is a point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cycle {
    pub axes: Vec<usize>,
    #[serde(default)]
    pub anchor: Vec<usize>,
}

impl Cycle {
    pub fn point(anchor: Vec<usize>) -> Cycle {
        Cycle { axes: vec![], anchor }
    }

    pub fn id(&self) -> String {
        let anchor = if self.anchor.is_empty() { String::new() } else { format!("@{:?}", self.anchor) };
        match self.axes.len() {
            0 => format!("point{anchor}"),
            _ => format!("torus{:?}{anchor}", self.axes),
        }
    }

    /// Coordinate `p`-tori through the origin of a `dim`-dimensional base.
    pub fn coordinate(dim: usize, p: usize) -> Vec<Cycle> {
        AxisSet::subsets((0..dim).collect(), p)
            .into_iter()
            .map(|s| Cycle { axes: s.iter().collect(), anchor: vec![0; dim] })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pairing {
    pub cycle: String,
    pub value: f64,
    /// Imaginary part, zero up to rounding for real classes.
    pub imag: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetadata {
    pub grid: Grid,
    pub group: Group,
    pub polynomial: InvariantPolynomial,
    pub path: ClassPath,
    pub representation: String,
}

/// A caloron class `sigma_r`, `r = 2k - d`, as a scalar `r`-form on `M`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaloronClassReport {
    pub r: usize,
    pub d: usize,
    pub k: usize,
    pub class_form: FormField,
    pub pairings: Vec<Pairing>,
    pub closedness_residual: f64,
    pub warning: Option<String>,
    pub metadata: ClassMetadata,
}

impl CaloronClassReport {
    pub fn pairing(&self, cycle: &str) -> Option<f64> {
        self.pairings.iter().find(|p| p.cycle == cycle).map(|p| p.value)
    }
}

/// Trapezoid integral over the fiber axes of a form on `M x X`, giving a
/// form on `M`.
pub fn fiber_integrate(w: &FormField) -> Result<FormField> {
    let grid = w.grid();
    if !grid.is_product() {
        return Err(Error::Shape("fiber integration needs a product grid".into()));
    }
    if w.degree() < grid.fiber_axes().len() {
        let m = grid.restrict(grid.base_axes())?;
        return Ok(FormField::zeros(&m, 0, w.target()));
    }
    w.integrate_over(grid.fiber_axes())
}

/// Max norm of the exterior derivative; top-degree (and higher) forms give
/// 0 by convention.
pub fn closedness_residual(w: &FormField) -> Result<f64> {
    if w.degree() >= w.grid().dim() {
        return Ok(0.0);
    }
    Ok(w.ext_deriv()?.max_abs())
}

/// `<w, cycle>`: the value for a point, otherwise the trapezoid integral of
/// the restriction.
pub fn pair_with_cycle(w: &FormField, cycle: &Cycle) -> Result<C64> {
    let dim = w.grid().dim();
    let anchor = if cycle.anchor.is_empty() { vec![0; dim] } else { cycle.anchor.clone() };
    if anchor.len() != dim {
        return Err(Error::Shape(format!("cycle anchor has {} coordinates, the base has {dim}", anchor.len())));
    }
    if cycle.axes.len() != w.degree() {
        return Err(Error::Degree(format!(
            "a {}-form pairs with {}-cycles, got a {}-cycle",
            w.degree(),
            w.degree(),
            cycle.axes.len()
        )));
    }
    if let Some(&bad) = cycle.axes.iter().find(|&&a| a >= dim) {
        return Err(Error::Shape(format!("cycle axis {bad} does not exist")));
    }
    let axes: AxisSet = cycle.axes.iter().copied().collect();
    if axes.len() != cycle.axes.len() {
        return Err(Error::Shape("repeated cycle axis".into()));
    }
    if w.order() != 1 {
        return Err(Error::Shape("pairings need a scalar form".into()));
    }
    if axes.is_empty() {
        let site = w.grid().site(&anchor.iter().zip(w.grid().sizes()).map(|(a, n)| a % n).collect::<Vec<_>>());
        return Ok(w.at(AxisSet::EMPTY, site).get(0, 0));
    }
    Ok(w.restrict(axes, &anchor)?.integrate()?.get(0, 0))
}

fn curvature_args(t: &CurvatureTriple, g: Generator) -> &FormField {
    match g {
        Generator::CurvA => &t.f_a,
        Generator::CurvPhi => &t.f_phi,
        Generator::NablaPhi => &t.nabla_phi,
    }
}

/// Requests for [`caloron_class`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClassRequest {
    pub polynomial: InvariantPolynomial,
    pub r: usize,
    pub path: ClassPath,
    /// Cycles of `M`; when empty, coordinate `r`-tori through the origin.
    pub cycles: Vec<Cycle>,
}

impl ClassRequest {
    pub fn new(polynomial: InvariantPolynomial, r: usize) -> ClassRequest {
        ClassRequest { polynomial, r, path: ClassPath::Numeric, cycles: Vec::new() }
    }
}

/// Splits `r + d` into `k`, checking parity and positivity.
pub fn class_degree(r: usize, d: usize) -> Result<usize> {
    if !(r + d).is_multiple_of(2) {
        return Err(Error::Parity(format!("class degree {r} and fiber dimension {d} must have the same parity")));
    }
    let k = (r + d) / 2;
    if k == 0 {
        return Err(Error::Degree("the class needs polynomial degree k = (r + d)/2 >= 1".into()));
    }
    Ok(k)
}

/// `sigma_r = integral over X of f(F^k)_[r, d]` with its pairings and
/// closedness residual.
pub fn caloron_class(data: ClassData<'_>, req: &ClassRequest) -> Result<CaloronClassReport> {
    let grid = data.grid();
    let split_base = grid.base_axes();
    if !grid.is_product() {
        return Err(Error::Config("caloron classes need a product grid".into()));
    }
    let d = grid.fiber_axes().len();
    let r = req.r;
    let k = class_degree(r, d)?;
    if req.polynomial.degree != k {
        return Err(Error::Degree(format!(
            "class degree {r} over a {d}-dimensional fiber needs a degree-{k} polynomial, got degree {}",
            req.polynomial.degree
        )));
    }
    let m_grid = grid.restrict(split_base)?.with_role(AxisRole::Base);
    let metadata = ClassMetadata {
        grid: grid.clone(),
        group: data.group(),
        polynomial: req.polynomial,
        path: req.path,
        representation: data.representation().into(),
    };
    let overflow = if 2 * k > grid.dim() {
        Some(format!("f(F^{k}) has degree {} above dim(M x X) = {}; the class vanishes", 2 * k, grid.dim()))
    } else if r > m_grid.dim() {
        Some(format!("class degree {r} exceeds dim M = {}; the class vanishes", m_grid.dim()))
    } else {
        None
    };
    let class_form = match overflow {
        Some(_) => FormField::zeros(&m_grid, r, Target::SCALAR),
        None => {
            let integrand = match req.path {
                ClassPath::Numeric => {
                    let total = data.curvature()?.total();
                    let args = vec![&total; k];
                    eval_invariant(&req.polynomial, &args)?.filter_bidegree(r, d)
                }
                ClassPath::Symbolic => symbolic_integrand(&data.curvature()?, &req.polynomial, d, k)?,
            };
            integrand.integrate_over(grid.fiber_axes())?
        }
    };
    finish(class_form, r, d, k, &req.cycles, overflow, metadata)
}

fn symbolic_integrand(triple: &CurvatureTriple, f: &InvariantPolynomial, d: usize, k: usize) -> Result<FormField> {
    let terms = caloron_integrand(d, k)?;
    let grid = triple.f_a.grid();
    let mut out = FormField::zeros(grid, 2 * k, Target::SCALAR);
    for (word, coeff) in terms.terms() {
        let args: Vec<&FormField> = word.letters().iter().map(|&g| curvature_args(triple, g)).collect();
        let c = coeff.to_f64().ok_or_else(|| Error::Domain("coefficient does not fit a float".into()))?;
        out = out.add(&eval_invariant(f, &args)?.scale(c))?;
    }
    Ok(out)
}

fn finish(
    class_form: FormField,
    r: usize,
    d: usize,
    k: usize,
    cycles: &[Cycle],
    warning: Option<String>,
    metadata: ClassMetadata,
) -> Result<CaloronClassReport> {
    let m_dim = class_form.grid().dim();
    let cycles = if cycles.is_empty() && r <= m_dim { Cycle::coordinate(m_dim, r) } else { cycles.to_vec() };
    let mut pairings = Vec::with_capacity(cycles.len());
    for c in &cycles {
        let v = if class_form.components().count() == 0 { C64::new(0.0, 0.0) } else { pair_with_cycle(&class_form, c)? };
        pairings.push(Pairing { cycle: c.id(), value: v.re, imag: v.im });
    }
    let closedness_residual = closedness_residual(&class_form)?;
    Ok(CaloronClassReport { r, d, k, class_form, pairings, closedness_residual, warning, metadata })
}

/// `sigma_{2k-1} = k integral over S^1 of f(F_A^{k-1} NablaPhi)` for a
/// circle fiber.
pub fn string_class(data: ClassData<'_>, polynomial: &InvariantPolynomial, cycles: &[Cycle]) -> Result<CaloronClassReport> {
    let grid = data.grid();
    if !grid.is_product() {
        return Err(Error::Config("string classes need a product grid".into()));
    }
    if grid.fiber_axes().len() != 1 {
        return Err(Error::Domain(format!("string classes need a circle fiber, got dim X = {}", grid.fiber_axes().len())));
    }
    let k = polynomial.degree;
    let r = 2 * k - 1;
    let m_grid = grid.restrict(grid.base_axes())?.with_role(AxisRole::Base);
    let metadata = ClassMetadata {
        grid: grid.clone(),
        group: data.group(),
        polynomial: *polynomial,
        path: ClassPath::Symbolic,
        representation: data.representation().into(),
    };
    if 2 * k > grid.dim() || r > m_grid.dim() {
        let warning = format!("string class of degree {r} vanishes on dim M = {}", m_grid.dim());
        return finish(FormField::zeros(&m_grid, r, Target::SCALAR), r, 1, k, cycles, Some(warning), metadata);
    }
    let triple = data.curvature()?;
    let mut args: Vec<&FormField> = vec![&triple.f_a; k - 1];
    args.push(&triple.nabla_phi);
    let integrand = eval_invariant(polynomial, &args)?.scale(k as f64);
    let class_form = integrand.integrate_over(grid.fiber_axes())?;
    finish(class_form, r, 1, k, cycles, None, metadata)
}
