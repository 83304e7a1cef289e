use serde::Serialize;

use super::pair::{GaugeGroupConnection, HiggsFieldMap, ProductConnection};
use crate::lattice::{AxisSet, FormField, LinkField, Target};
use crate::{Error, Result};

/// Curvature of a product connection split by bidegree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureTriple {
    /// Bidegree (2,0).
    pub f_a: FormField,
    /// Bidegree (0,2).
    pub f_phi: FormField,
    /// Bidegree (1,1).
    pub nabla_phi: FormField,
}

impl CurvatureTriple {
    /// Splits a curvature 2-form on a product grid.
    pub fn split(f: &FormField) -> Result<CurvatureTriple> {
        if f.degree() != 2 || !f.grid().is_product() {
            return Err(Error::Shape("expected a 2-form on a product grid".into()));
        }
        Ok(CurvatureTriple { f_a: f.filter_bidegree(2, 0), f_phi: f.filter_bidegree(0, 2), nabla_phi: f.filter_bidegree(1, 1) })
    }

    /// `F_A + F_Phi + NablaPhi`.
    pub fn total(&self) -> FormField {
        self.f_a.add(&self.f_phi).and_then(|s| s.add(&self.nabla_phi)).expect("blocks share one grid")
    }
}

/// `dA + 1/2 [A, A]`, plus the constant curvature of the twist.
pub fn curvature(w: &ProductConnection) -> Result<FormField> {
    let a = w.form();
    let mut f = a.ext_deriv()?.add(&a.bracket(a)?.scale(0.5))?;
    if let Some(t) = w.twist() {
        f.add_constant(t.plane(), &t.curvature(a.grid()));
    }
    Ok(f)
}

pub fn curvature_split(w: &ProductConnection) -> Result<CurvatureTriple> {
    CurvatureTriple::split(&curvature(w)?)
}

/// Bidegree split of the plaquette curvature of product links.
pub fn curvature_split_links(u: &LinkField) -> Result<CurvatureTriple> {
    CurvatureTriple::split(&u.plaquette_curvature()?)
}

/// `d_P Phi + [A, Phi] + d_Q A`, assembled directly from the two halves of
/// the pair: the component along `dm^mu ^ dx^b` is
/// `D_mu Phi_b + [A_mu, Phi_b] - D_b A_mu` with central differences `D`.
pub fn nabla_phi(a: &GaugeGroupConnection, phi: &HiggsFieldMap) -> Result<FormField> {
    if a.grid() != phi.grid() || a.group() != phi.group() {
        return Err(Error::Shape("the connection and the Higgs field do not match".into()));
    }
    let grid = a.grid();
    let split = &a.blocks.split;
    let group = a.group();
    let mut out = FormField::zeros(grid, 2, Target::Algebra(group));
    for mu in split.base.iter() {
        let lmu = split.local_axis(mu);
        let hmu = grid.spacing(mu);
        for b in split.fiber.iter() {
            let lb = split.local_axis(b);
            let hb = grid.spacing(b);
            let plane = AxisSet::pair(mu, b);
            let sign = if mu < b { 1.0 } else { -1.0 };
            let reference = phi.twist().filter(|t| t.plane() == plane).map(|t| t.curvature(grid));
            for m in 0..split.m_sites() {
                let (mf, mb) = (split.m_grid.shift(m, lmu, true), split.m_grid.shift(m, lmu, false));
                for x in 0..split.x_sites() {
                    let (xf, xb) = (split.x_grid.shift(x, lb, true), split.x_grid.shift(x, lb, false));
                    let d_p_phi = (phi.at(b, mf, x) - phi.at(b, mb, x)).scale(0.5 / hmu);
                    let bracket = a.at(mu, m, x).commutator(&phi.at(b, m, x));
                    let d_q_a = (a.at(mu, m, xf) - a.at(mu, m, xb)).scale(0.5 / hb);
                    let mut v = (d_p_phi + bracket - d_q_a).scale(sign);
                    if let Some(r) = reference {
                        v += r;
                    }
                    out.set_at(plane, split.site(m, x), &v);
                }
            }
        }
    }
    Ok(out)
}
