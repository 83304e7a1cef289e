use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use rand::Rng;

use super::graph::Graph;
use crate::lattice::{inner, Group, Mat};
use crate::{Error, Result};

/// Trivialized bundle `Q = X x G` over a graph, with a basepoint.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeBundleX {
    pub graph: Graph,
    pub basepoint: usize,
    pub group: Group,
}

impl LatticeBundleX {
    pub fn new(graph: Graph, basepoint: usize, group: Group) -> Result<LatticeBundleX> {
        if basepoint >= graph.vertices() {
            return Err(Error::Config(format!("basepoint {basepoint} is not a vertex")));
        }
        Ok(LatticeBundleX { graph, basepoint, group })
    }

    pub fn zero_edges(&self) -> EdgeField {
        EdgeField(vec![self.group.zero(); self.graph.edge_count()])
    }

    pub fn zero_vertices(&self) -> BasedVertexField {
        BasedVertexField(vec![self.group.zero(); self.graph.vertices()])
    }

    pub fn random_edges<R: Rng>(&self, rng: &mut R, scale: f64) -> EdgeField {
        EdgeField((0..self.graph.edge_count()).map(|_| self.group.random_algebra(rng, scale)).collect())
    }

    pub fn random_based<R: Rng>(&self, rng: &mut R, scale: f64) -> BasedVertexField {
        let mut v: Vec<Mat> = (0..self.graph.vertices()).map(|_| self.group.random_algebra(rng, scale)).collect();
        v[self.basepoint] = self.group.zero();
        BasedVertexField(v)
    }

    /// Weighted edge inner product `sum_e w_e <a_e, b_e>`.
    pub fn edge_inner(&self, a: &EdgeField, b: &EdgeField) -> f64 {
        a.0.iter().zip(&b.0).enumerate().map(|(e, (x, y))| self.graph.edge_weight(e) * inner(x, y)).sum()
    }

    /// Weighted vertex inner product `sum_v w_v <a_v, b_v>`.
    pub fn vertex_inner(&self, a: &BasedVertexField, b: &BasedVertexField) -> f64 {
        a.0.iter().zip(&b.0).enumerate().map(|(v, (x, y))| self.graph.vertex_weight(v) * inner(x, y)).sum()
    }

    fn check_edges(&self, f: &EdgeField) -> Result<()> {
        if f.0.len() != self.graph.edge_count() {
            return Err(Error::Shape(format!("expected {} edge values, got {}", self.graph.edge_count(), f.0.len())));
        }
        Ok(())
    }

    fn check_vertices(&self, f: &BasedVertexField) -> Result<()> {
        if f.0.len() != self.graph.vertices() {
            return Err(Error::Shape(format!("expected {} vertex values, got {}", self.graph.vertices(), f.0.len())));
        }
        Ok(())
    }

    fn coords_len(&self) -> usize {
        (self.graph.vertices() - 1) * self.group.algebra_dim()
    }

    fn vertex_slot(&self, v: usize) -> Option<usize> {
        match v.cmp(&self.basepoint) {
            std::cmp::Ordering::Less => Some(v),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some(v - 1),
        }
    }

    fn to_coords(&self, f: &BasedVertexField) -> DVector<f64> {
        let k = self.group.algebra_dim();
        let mut out = DVector::zeros(self.coords_len());
        for (v, x) in f.0.iter().enumerate() {
            if let Some(slot) = self.vertex_slot(v) {
                for (e, c) in self.group.coords(x).into_iter().enumerate() {
                    out[slot * k + e] = c;
                }
            }
        }
        out
    }

    fn field_from_coords(&self, c: &DVector<f64>) -> BasedVertexField {
        let k = self.group.algebra_dim();
        let mut out = self.zero_vertices();
        for v in 0..self.graph.vertices() {
            if let Some(slot) = self.vertex_slot(v) {
                out.0[v] = self.group.from_coords(&c.as_slice()[slot * k..(slot + 1) * k]);
            }
        }
        out
    }

    /// Names the vertex and algebra direction of a coordinate index.
    fn describe_coord(&self, i: usize) -> String {
        let k = self.group.algebra_dim();
        let slot = i / k;
        let v = if slot >= self.basepoint { slot + 1 } else { slot };
        format!("vertex {v}, algebra direction {}", i % k)
    }
}

/// One algebra value per oriented edge: a lattice connection or a tangent
/// vector to the space of connections.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeField(pub Vec<Mat>);

/// One algebra value per vertex, zero at the basepoint.
#[derive(Debug, Clone, PartialEq)]
pub struct BasedVertexField(pub Vec<Mat>);

impl EdgeField {
    pub fn add(&self, other: &EdgeField) -> EdgeField {
        EdgeField(self.0.iter().zip(&other.0).map(|(a, b)| *a + *b).collect())
    }

    pub fn sub(&self, other: &EdgeField) -> EdgeField {
        EdgeField(self.0.iter().zip(&other.0).map(|(a, b)| *a - *b).collect())
    }

    pub fn scale(&self, s: f64) -> EdgeField {
        EdgeField(self.0.iter().map(|a| a.scale(s)).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(Mat::max_abs).fold(0.0, f64::max)
    }
}

impl BasedVertexField {
    pub fn add(&self, other: &BasedVertexField) -> BasedVertexField {
        BasedVertexField(self.0.iter().zip(&other.0).map(|(a, b)| *a + *b).collect())
    }

    pub fn sub(&self, other: &BasedVertexField) -> BasedVertexField {
        BasedVertexField(self.0.iter().zip(&other.0).map(|(a, b)| *a - *b).collect())
    }

    pub fn scale(&self, s: f64) -> BasedVertexField {
        BasedVertexField(self.0.iter().map(|a| a.scale(s)).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(Mat::max_abs).fold(0.0, f64::max)
    }

    pub fn at(&self, v: usize) -> Mat {
        self.0[v]
    }
}

/// `(d_omega mu)(e) = mu(h) - mu(t) + [omega_e, (mu(h) + mu(t)) / 2]`.
pub fn cov_deriv(b: &LatticeBundleX, omega: &EdgeField, mu: &BasedVertexField) -> Result<EdgeField> {
    b.check_edges(omega)?;
    b.check_vertices(mu)?;
    Ok(EdgeField(
        b.graph
            .edges()
            .iter()
            .zip(&omega.0)
            .map(|(&(t, h), w)| {
                let avg = (mu.0[h] + mu.0[t]).scale(0.5);
                mu.0[h] - mu.0[t] + w.commutator(&avg)
            })
            .collect(),
    ))
}

/// Adjoint of [`cov_deriv`] for the weighted inner products, restricted to
/// based fields.
pub fn adjoint_cov_deriv(b: &LatticeBundleX, omega: &EdgeField, xi: &EdgeField) -> Result<BasedVertexField> {
    b.check_edges(omega)?;
    b.check_edges(xi)?;
    let mut out = b.zero_vertices();
    for (e, (&(t, h), (w, x))) in b.graph.edges().iter().zip(omega.0.iter().zip(&xi.0)).enumerate() {
        let we = b.graph.edge_weight(e);
        let half = w.commutator(x).scale(0.5);
        out.0[h] += (*x - half).scale(we);
        out.0[t] += (-*x - half).scale(we);
    }
    for (v, x) in out.0.iter_mut().enumerate() {
        *x = x.scale(1.0 / b.graph.vertex_weight(v));
    }
    out.0[b.basepoint] = b.group.zero();
    Ok(out)
}

/// `ad*_{xi1}(eta)`: adjoint of `mu -> [xi1_e, (mu(h) + mu(t)) / 2]`,
/// restricted to based fields.
pub fn ad_star(b: &LatticeBundleX, xi1: &EdgeField, eta: &EdgeField) -> Result<BasedVertexField> {
    b.check_edges(xi1)?;
    b.check_edges(eta)?;
    let mut out = b.zero_vertices();
    for (e, (&(t, h), (x, y))) in b.graph.edges().iter().zip(xi1.0.iter().zip(&eta.0)).enumerate() {
        let c = y.commutator(x).scale(0.5 * b.graph.edge_weight(e));
        out.0[h] += c;
        out.0[t] += c;
    }
    for (v, x) in out.0.iter_mut().enumerate() {
        *x = x.scale(1.0 / b.graph.vertex_weight(v));
    }
    out.0[b.basepoint] = b.group.zero();
    Ok(out)
}

/// Inverse of `d*_omega d_omega` on based fields, by a dense Cholesky
/// factorization of `D^T W_E D` (solving `D^T W_E D u = W_V v`).
#[derive(Debug, Clone)]
pub struct GreenOperator {
    bundle: LatticeBundleX,
    omega: EdgeField,
    gram: DMatrix<f64>,
    factor: Cholesky<f64, Dyn>,
}

impl GreenOperator {
    pub fn new(bundle: &LatticeBundleX, omega: &EdgeField) -> Result<GreenOperator> {
        bundle.check_edges(omega)?;
        let n = bundle.coords_len();
        let mut columns = Vec::with_capacity(n);
        for i in 0..n {
            let mut c = DVector::zeros(n);
            c[i] = 1.0;
            columns.push(cov_deriv(bundle, omega, &bundle.field_from_coords(&c))?);
        }
        let mut gram = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let g = bundle.edge_inner(&columns[i], &columns[j]);
                gram[(i, j)] = g;
                gram[(j, i)] = g;
            }
        }
        let factor = match Cholesky::new(gram.clone()) {
            Some(f) => f,
            None => return Err(singular(bundle, &gram)),
        };
        // pivots of a numerically rank-deficient matrix collapse
        let diag = factor.l_dirty().diagonal();
        let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), d| (lo.min(d * d), hi.max(d * d)));
        if lo <= 1e-12 * hi {
            return Err(singular(bundle, &gram));
        }
        Ok(GreenOperator { bundle: bundle.clone(), omega: omega.clone(), gram, factor })
    }

    pub fn bundle(&self) -> &LatticeBundleX {
        &self.bundle
    }

    pub fn omega(&self) -> &EdgeField {
        &self.omega
    }

    /// Matrix of `d*_omega d_omega` in orthonormal coordinates of based
    /// fields with unit vertex weights (the Gram matrix of `d_omega`).
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    fn weighted(&self, v: &BasedVertexField) -> DVector<f64> {
        let k = self.bundle.group.algebra_dim();
        let mut c = self.bundle.to_coords(v);
        for i in 0..c.len() {
            let slot = i / k;
            let vertex = if slot >= self.bundle.basepoint { slot + 1 } else { slot };
            c[i] *= self.bundle.graph.vertex_weight(vertex);
        }
        c
    }

    /// Solves `d*_omega d_omega u = v` for based `u`.
    pub fn apply(&self, v: &BasedVertexField) -> Result<BasedVertexField> {
        self.bundle.check_vertices(v)?;
        let rhs = self.weighted(v);
        let u = self.factor.solve(&rhs);
        let residual = (&self.gram * &u - &rhs).norm();
        let scale = rhs.norm().max(f64::MIN_POSITIVE);
        if rhs.norm() > 0.0 && residual / scale > 1e-10 {
            return Err(Error::Singular(format!("Green solve residual {:.3e} exceeds 1e-10", residual / scale)));
        }
        Ok(self.bundle.field_from_coords(&u))
    }

    /// Relative residual `|K u - W v| / |W v|` of a candidate solution.
    pub fn residual(&self, u: &BasedVertexField, v: &BasedVertexField) -> f64 {
        let rhs = self.weighted(v);
        let lhs = &self.gram * self.bundle.to_coords(u);
        (lhs - &rhs).norm() / rhs.norm().max(f64::MIN_POSITIVE)
    }
}

fn singular(bundle: &LatticeBundleX, gram: &DMatrix<f64>) -> Error {
    let eig = SymmetricEigen::new(gram.clone());
    let (idx, val) = eig.eigenvalues.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    let vec = eig.eigenvectors.column(idx);
    let (worst, _) = vec.iter().enumerate().fold((0, 0.0), |acc, (i, &x)| if x.abs() > acc.1 { (i, x.abs()) } else { acc });
    Error::Singular(format!(
        "the based Laplacian is not positive definite: eigenvalue {val:.3e} with its largest weight on {}",
        bundle.describe_coord(worst)
    ))
}

/// `G_omega v`.
pub fn green(op: &GreenOperator, v: &BasedVertexField) -> Result<BasedVertexField> {
    op.apply(v)
}

/// `G_omega d*_omega xi`: the vertical part of a tangent vector, as a based
/// gauge-algebra element.
pub fn connection_form(op: &GreenOperator, xi: &EdgeField) -> Result<BasedVertexField> {
    op.apply(&adjoint_cov_deriv(&op.bundle, &op.omega, xi)?)
}

/// `xi - d_omega G_omega d*_omega xi`, the component in `ker d*_omega`.
pub fn horizontal_project(op: &GreenOperator, xi: &EdgeField) -> Result<EdgeField> {
    let mu = connection_form(op, xi)?;
    Ok(xi.sub(&cov_deriv(&op.bundle, &op.omega, &mu)?))
}

fn check_horizontal(op: &GreenOperator, xi: &EdgeField, name: &str) -> Result<()> {
    let r = adjoint_cov_deriv(&op.bundle, &op.omega, xi)?.max_abs();
    if r > 1e-8 {
        return Err(Error::Precondition(format!("{name} is not horizontal: |d* {name}| = {r:.3e}")));
    }
    Ok(())
}

/// `F_A(V1, V2) = G_omega ad*_{xi1}(xi2)` for horizontal `xi1`, `xi2`.
pub fn universal_curvature_fa(op: &GreenOperator, xi1: &EdgeField, xi2: &EdgeField) -> Result<BasedVertexField> {
    check_horizontal(op, xi1, "xi1")?;
    check_horizontal(op, xi2, "xi2")?;
    if op.bundle.group.is_abelian() {
        return Ok(op.bundle.zero_vertices());
    }
    op.apply(&ad_star(&op.bundle, xi1, xi2)?)
}

/// A point `(vertex, g)` of the trivialized `Q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QPoint {
    pub vertex: usize,
    pub g: Mat,
}

/// Tangent vector to `Q` at a point: a vertical algebra part and a
/// horizontal part given by one coefficient per graph direction.
#[derive(Debug, Clone, PartialEq)]
pub struct QTangent {
    pub vertical: Mat,
    pub horizontal: Vec<f64>,
}

impl QTangent {
    pub fn zero(group: Group, directions: usize) -> QTangent {
        QTangent { vertical: group.zero(), horizontal: vec![0.0; directions] }
    }
}

fn ad_inv(g: &Mat, x: &Mat) -> Mat {
    g.dagger() * *x * *g
}

/// `A~(xi, zeta) = G_omega d*_omega(xi)(q) + omega_q(zeta)`. The based field
/// is read at the vertex of `q` and conjugated by `g^-1`; `omega_q` returns
/// the vertical part of `zeta` (the horizontal part is horizontal for
/// `omega` by construction).
pub fn universal_caloron_connection(op: &GreenOperator, q: &QPoint, xi: &EdgeField, zeta: &QTangent) -> Result<Mat> {
    let mu = connection_form(op, xi)?;
    Ok(ad_inv(&q.g, &mu.at(q.vertex)) + zeta.vertical)
}

/// Curvature of `omega` on the square at `v`, `log` of the holonomy of
/// `exp(omega_e)`; zero on a ring.
pub fn omega_curvature(b: &LatticeBundleX, omega: &EdgeField, v: usize) -> Result<Mat> {
    let Some([a, bb, c, d]) = b.graph.square(v) else { return Ok(b.group.zero()) };
    let u = |e: usize| b.group.exp(&omega.0[e]);
    let p = u(a) * u(bb) * u(c).dagger() * u(d).dagger();
    b.group.log(&p)
}

/// `F_omega(q)(zeta1, zeta2)`.
fn omega_curvature_at(b: &LatticeBundleX, omega: &EdgeField, q: &QPoint, z1: &QTangent, z2: &QTangent) -> Result<Mat> {
    if b.graph.directions() < 2 {
        return Ok(b.group.zero());
    }
    let f = omega_curvature(b, omega, q.vertex)?;
    let area = z1.horizontal[0] * z2.horizontal[1] - z1.horizontal[1] * z2.horizontal[0];
    Ok(ad_inv(&q.g, &f).scale(area))
}

/// Pairing `xi(zeta)(q)` of an edge field with a fiber tangent: the edge
/// values leaving the vertex of `q`, weighted by the direction
/// coefficients of `zeta` and conjugated to `q`.
pub fn pair_edge_tangent(b: &LatticeBundleX, xi: &EdgeField, q: &QPoint, zeta: &QTangent) -> Mat {
    (0..b.graph.directions())
        .fold(b.group.zero(), |acc, dir| acc + ad_inv(&q.g, &xi.0[b.graph.out_edge(q.vertex, dir)]).scale(zeta.horizontal[dir]))
}

/// `omega_q([zeta1, zeta2])` for the horizontal lifts of the coordinate
/// fields: minus the curvature of `omega` on the two tangents.
pub fn omega_of_bracket(b: &LatticeBundleX, omega: &EdgeField, q: &QPoint, z1: &QTangent, z2: &QTangent) -> Result<Mat> {
    Ok(-omega_curvature_at(b, omega, q, z1, z2)?)
}

/// `G ad*_{xi1}(xi2) + F_omega(q)(zeta1, zeta2)
///  + 1/2 (xi1(zeta2) - xi2(zeta1) - omega_q([zeta1, zeta2]))`
/// for horizontal `xi_i` and horizontal `zeta_i`.
pub fn universal_curvature_full(
    op: &GreenOperator,
    q: &QPoint,
    v1: (&EdgeField, &QTangent),
    v2: (&EdgeField, &QTangent),
) -> Result<Mat> {
    let b = &op.bundle;
    let (xi1, z1) = v1;
    let (xi2, z2) = v2;
    for z in [z1, z2] {
        if z.horizontal.len() != b.graph.directions() {
            return Err(Error::Shape(format!("a fiber tangent needs {} direction coefficients", b.graph.directions())));
        }
        if z.vertical.max_abs() > 1e-12 {
            return Err(Error::Precondition("fiber tangents must be horizontal (zero vertical part)".into()));
        }
    }
    if q.vertex >= b.graph.vertices() {
        return Err(Error::Shape(format!("vertex {} does not exist", q.vertex)));
    }
    let fa = universal_curvature_fa(op, xi1, xi2)?;
    let first = ad_inv(&q.g, &fa.at(q.vertex));
    let second = omega_curvature_at(b, &op.omega, q, z1, z2)?;
    let mixed = (pair_edge_tangent(b, xi1, q, z2) - pair_edge_tangent(b, xi2, q, z1)
        - omega_of_bracket(b, &op.omega, q, z1, z2)?)
    .scale(0.5);
    Ok(first + second + mixed)
}
