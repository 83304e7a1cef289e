use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::graph::Graph;
use super::ops::*;
use crate::lattice::{Group, Mat};
use crate::Result;

/// One named property residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, residual: f64, tolerance: f64) -> Check {
        Check { name: name.to_string(), residual, tolerance, pass: residual <= tolerance }
    }
}

/// Names of the checks run by [`property_suite`], in report order.
pub const CHECK_NAMES: [&str; 14] = [
    "adjoint_identity",
    "green_inverse",
    "green_residual",
    "connection_form_vertical",
    "connection_form_horizontal",
    "connection_form_linear",
    "horizontal_idempotent",
    "horizontal_orthogonal",
    "horizontal_norm",
    "ad_star_antisymmetry",
    "ad_star_adjoint",
    "abelian_fa_zero",
    "fa_antisymmetry",
    "full_curvature_antisymmetry",
];

const TRIALS: usize = 4;

fn rel(diff: f64, scale: f64) -> f64 {
    diff / scale.max(1.0)
}

fn random_tangent<R: Rng>(rng: &mut R, group: Group, directions: usize) -> QTangent {
    let mut z = QTangent::zero(group, directions);
    for h in &mut z.horizontal {
        *h = rng.gen_range(-1.0..1.0);
    }
    z
}

/// Runs every property of the universal module on seeded random data over
/// `graph`, and the abelian vanishing check on the same graph with U1.
pub fn property_suite(graph: &Graph, group: Group, seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = LatticeBundleX::new(graph.clone(), 0, group)?;
    // small enough that plaquettes on a torus stay clear of the branch cut
    let omega = b.random_edges(&mut rng, 0.3);
    let op = GreenOperator::new(&b, &omega)?;

    let mut adjoint = 0.0f64;
    let mut inverse = 0.0f64;
    let mut residual = 0.0f64;
    let mut vertical = 0.0f64;
    let mut horizontal = 0.0f64;
    let mut linear = 0.0f64;
    let mut idempotent = 0.0f64;
    let mut orthogonal = 0.0f64;
    let mut norm = 0.0f64;
    let mut ad_anti = 0.0f64;
    let mut ad_adj = 0.0f64;
    let mut fa_anti = 0.0f64;
    let mut full_anti = 0.0f64;

    for _ in 0..TRIALS {
        let mu = b.random_based(&mut rng, 1.0);
        let nu = b.random_based(&mut rng, 1.0);
        let xi = b.random_edges(&mut rng, 1.0);
        let eta = b.random_edges(&mut rng, 1.0);

        let dmu = cov_deriv(&b, &omega, &mu)?;
        let lhs = b.edge_inner(&dmu, &xi);
        let rhs = b.vertex_inner(&mu, &adjoint_cov_deriv(&b, &omega, &xi)?);
        adjoint = adjoint.max(rel((lhs - rhs).abs(), lhs.abs()));

        let v = adjoint_cov_deriv(&b, &omega, &dmu)?;
        let u = green(&op, &v)?;
        inverse = inverse.max(u.sub(&mu).max_abs());
        residual = residual.max(op.residual(&u, &v));

        vertical = vertical.max(connection_form(&op, &dmu)?.sub(&mu).max_abs());
        let h = horizontal_project(&op, &xi)?;
        horizontal = horizontal.max(connection_form(&op, &h)?.max_abs());

        let (s, t) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let combo = connection_form(&op, &xi.scale(s).add(&eta.scale(t)))?;
        let parts = connection_form(&op, &xi)?.scale(s).add(&connection_form(&op, &eta)?.scale(t));
        linear = linear.max(combo.sub(&parts).max_abs());

        let hh = horizontal_project(&op, &h)?;
        idempotent = idempotent.max(hh.sub(&h).max_abs());
        let dnu = cov_deriv(&b, &omega, &nu)?;
        orthogonal = orthogonal
            .max(rel(b.edge_inner(&h, &dnu).abs(), b.edge_inner(&h, &h).sqrt() * b.edge_inner(&dnu, &dnu).sqrt()))
            .max(adjoint_cov_deriv(&b, &omega, &h)?.max_abs());
        norm = norm.max(b.edge_inner(&h, &h).sqrt() - b.edge_inner(&xi, &xi).sqrt() * (1.0 + 1e-14)).max(0.0);

        let a12 = ad_star(&b, &xi, &eta)?;
        let a21 = ad_star(&b, &eta, &xi)?;
        ad_anti = ad_anti.max(a12.add(&a21).max_abs());
        // <ad*_xi(eta), mu> against <eta, [xi, avg mu]> computed edge by edge
        let mut pair = 0.0;
        for (e, &(tail, head)) in graph.edges().iter().enumerate() {
            let avg = (mu.at(head) + mu.at(tail)).scale(0.5);
            pair += graph.edge_weight(e) * crate::lattice::inner(&eta.0[e], &xi.0[e].commutator(&avg));
        }
        let lhs = b.vertex_inner(&a12, &mu);
        ad_adj = ad_adj.max(rel((lhs - pair).abs(), pair.abs()));

        let x1 = horizontal_project(&op, &xi)?;
        let x2 = horizontal_project(&op, &eta)?;
        let f12 = universal_curvature_fa(&op, &x1, &x2)?;
        let f21 = universal_curvature_fa(&op, &x2, &x1)?;
        fa_anti = fa_anti.max(f12.add(&f21).max_abs());

        let vertex = rng.gen_range(0..graph.vertices());
        let q = QPoint { vertex, g: group.random_element(&mut rng, 1.0) };
        let z1 = random_tangent(&mut rng, group, graph.directions());
        let z2 = random_tangent(&mut rng, group, graph.directions());
        let c12 = universal_curvature_full(&op, &q, (&x1, &z1), (&x2, &z2))?;
        let c21 = universal_curvature_full(&op, &q, (&x2, &z2), (&x1, &z1))?;
        full_anti = full_anti.max((c12 + c21).max_abs());
    }

    let abelian = {
        let ub = LatticeBundleX::new(graph.clone(), 0, Group::U1)?;
        let w = ub.random_edges(&mut rng, 0.3);
        let uop = GreenOperator::new(&ub, &w)?;
        let x1 = horizontal_project(&uop, &ub.random_edges(&mut rng, 1.0))?;
        let x2 = horizontal_project(&uop, &ub.random_edges(&mut rng, 1.0))?;
        universal_curvature_fa(&uop, &x1, &x2)?.0.iter().map(Mat::max_abs).fold(0.0, f64::max)
    };

    let values = [
        (adjoint, 1e-12),
        (inverse, 1e-9),
        (residual, 1e-10),
        (vertical, 1e-9),
        (horizontal, 1e-10),
        (linear, 1e-12),
        (idempotent, 1e-10),
        (orthogonal, 1e-10),
        (norm, 0.0),
        (ad_anti, 1e-12),
        (ad_adj, 1e-12),
        (abelian, 0.0),
        (fa_anti, 1e-10),
        (full_anti, 1e-10),
    ];
    Ok(CHECK_NAMES.iter().zip(values).map(|(n, (r, t))| Check::new(n, r, t)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(graph: &str, group: Group) {
        let checks = property_suite(&Graph::parse(graph).unwrap(), group, 7).unwrap();
        assert_eq!(checks.len(), CHECK_NAMES.len());
        for c in &checks {
            println!("{graph} {} {:<28} {:.3e}", group.name(), c.name, c.residual);
        }
        assert!(checks.iter().all(|c| c.pass), "{checks:?}");
    }

    #[test]
    fn ring_su2() {
        run("ring:8", Group::SU2);
    }

    #[test]
    fn ring_u1() {
        run("ring:8", Group::U1);
    }

    #[test]
    fn torus_su2() {
        run("torus:4x5", Group::SU2);
    }
}
