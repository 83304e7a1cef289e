#![allow(clippy::needless_range_loop)]

use caloron_core::lattice::{inner, Group};
use caloron_core::universal::{
    adjoint_cov_deriv, connection_form, cov_deriv, green, horizontal_project, omega_curvature, universal_curvature_fa,
    universal_curvature_full, BasedVertexField, EdgeField, Graph, GreenOperator, LatticeBundleX, QPoint, QTangent,
};
use caloron_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn based_unit(b: &LatticeBundleX, v: usize, dir: usize) -> BasedVertexField {
    let mut f = b.zero_vertices();
    let mut c = vec![0.0; b.group.algebra_dim()];
    c[dir] = 1.0;
    f.0[v] = b.group.from_coords(&c);
    f
}

fn edge_unit(b: &LatticeBundleX, e: usize, dir: usize) -> EdgeField {
    let mut f = b.zero_edges();
    let mut c = vec![0.0; b.group.algebra_dim()];
    c[dir] = 1.0;
    f.0[e] = b.group.from_coords(&c);
    f
}

/// Solves `a x = y` by Gauss-Jordan elimination with partial pivoting.
fn gauss_jordan(mut a: Vec<Vec<f64>>, mut y: Vec<f64>) -> Vec<f64> {
    let n = y.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, p);
        y.swap(col, p);
        let d = a[col][col];
        for j in 0..n {
            a[col][j] /= d;
        }
        y[col] /= d;
        for i in 0..n {
            if i != col {
                let f = a[i][col];
                for j in 0..n {
                    a[i][j] -= f * a[col][j];
                }
                y[i] -= f * y[col];
            }
        }
    }
    y
}

fn weighted_torus() -> LatticeBundleX {
    let g = Graph::torus(3, 4).unwrap();
    let vw: Vec<f64> = (0..g.vertices()).map(|v| 1.0 + 0.1 * v as f64).collect();
    let ew: Vec<f64> = (0..g.edge_count()).map(|e| 0.5 + 0.05 * e as f64).collect();
    LatticeBundleX::new(g.with_weights(vw, ew).unwrap(), 2, Group::SU2).unwrap()
}

#[test]
fn adjoint_is_the_weighted_transpose_of_the_dense_matrix() {
    let b = weighted_torus();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let omega = b.random_edges(&mut rng, 0.7);
    let k = b.group.algebra_dim();
    let g = &b.graph;
    for e in 0..g.edge_count() {
        for a in 0..k {
            let xi = edge_unit(&b, e, a);
            let adj = adjoint_cov_deriv(&b, &omega, &xi).unwrap();
            for v in (0..g.vertices()).filter(|&v| v != b.basepoint) {
                for c in 0..k {
                    // entry D[(e,a),(v,c)] of the dense matrix of d_omega
                    let d = inner(&cov_deriv(&b, &omega, &based_unit(&b, v, c)).unwrap().0[e], &b.group.basis()[a]);
                    let expected = g.edge_weight(e) * d / g.vertex_weight(v);
                    let got = inner(&adj.0[v], &b.group.basis()[c]);
                    assert!((got - expected).abs() < 1e-13, "e={e} a={a} v={v} c={c}: {got} vs {expected}");
                }
            }
            assert_eq!(adj.0[b.basepoint].max_abs(), 0.0);
        }
    }
}

#[test]
fn ring4_green_is_the_hand_inverse() {
    // based Laplacian on ring:4 with basepoint 0 is tridiag(-1, 2, -1) on
    // vertices 1..3, whose inverse is [[3, 2, 1], [2, 4, 2], [1, 2, 3]] / 4
    let b = LatticeBundleX::new(Graph::ring(4).unwrap(), 0, Group::U1).unwrap();
    let op = GreenOperator::new(&b, &b.zero_edges()).unwrap();
    let inv = [[3.0, 2.0, 1.0], [2.0, 4.0, 2.0], [1.0, 2.0, 3.0]];
    for j in 0..3 {
        let u = green(&op, &based_unit(&b, j + 1, 0)).unwrap();
        assert_eq!(u.0[0].max_abs(), 0.0);
        for i in 0..3 {
            let got = b.group.coords(&u.0[i + 1])[0];
            assert!((got - inv[i][j] / 4.0).abs() < 1e-14, "({i},{j}): {got}");
        }
    }
}

#[test]
fn flat_su2_ring_green_matches_path_laplacian_inverse() {
    let n = 6;
    let b = LatticeBundleX::new(Graph::ring(n).unwrap(), 0, Group::SU2).unwrap();
    let op = GreenOperator::new(&b, &b.zero_edges()).unwrap();
    for j in 1..n {
        for c in 0..3 {
            let u = green(&op, &based_unit(&b, j, c)).unwrap();
            for i in 1..n {
                let expected = (i.min(j) * (n - i.max(j))) as f64 / n as f64;
                let coords = b.group.coords(&u.0[i]);
                for (a, x) in coords.iter().enumerate() {
                    let want = if a == c { expected } else { 0.0 };
                    assert!((x - want).abs() < 1e-13);
                }
            }
        }
    }
}

#[test]
fn su2_ring6_green_matches_gauss_jordan() {
    let b = LatticeBundleX::new(Graph::ring(6).unwrap(), 3, Group::SU2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let omega = b.random_edges(&mut rng, 1.2);
    let op = GreenOperator::new(&b, &omega).unwrap();
    // assemble the Gram matrix independently from cov_deriv on unit fields
    let idx: Vec<(usize, usize)> = (0..6).filter(|&v| v != 3).flat_map(|v| (0..3).map(move |c| (v, c))).collect();
    let cols: Vec<EdgeField> = idx.iter().map(|&(v, c)| cov_deriv(&b, &omega, &based_unit(&b, v, c)).unwrap()).collect();
    let gram: Vec<Vec<f64>> = cols.iter().map(|x| cols.iter().map(|y| b.edge_inner(x, y)).collect()).collect();
    let rhs = b.random_based(&mut rng, 1.0);
    let y: Vec<f64> = idx.iter().map(|&(v, c)| b.group.coords(&rhs.0[v])[c]).collect();
    let x = gauss_jordan(gram, y);
    let u = green(&op, &rhs).unwrap();
    for (&(v, c), want) in idx.iter().zip(&x) {
        assert!((b.group.coords(&u.0[v])[c] - want).abs() < 1e-11);
    }
    assert!(op.residual(&u, &rhs) < 1e-12);
}

#[test]
fn vertical_generators_are_recovered_on_weighted_torus() {
    let b = weighted_torus();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let omega = b.random_edges(&mut rng, 0.5);
    let op = GreenOperator::new(&b, &omega).unwrap();
    let mu = b.random_based(&mut rng, 1.0);
    let back = connection_form(&op, &cov_deriv(&b, &omega, &mu).unwrap()).unwrap();
    assert!(back.sub(&mu).max_abs() < 1e-10);
    let xi = b.random_edges(&mut rng, 1.0);
    let h = horizontal_project(&op, &xi).unwrap();
    assert!(adjoint_cov_deriv(&b, &omega, &h).unwrap().max_abs() < 1e-10);
}

#[test]
fn fa_requires_horizontal_inputs() {
    let b = LatticeBundleX::new(Graph::ring(5).unwrap(), 0, Group::SU2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let omega = b.random_edges(&mut rng, 0.3);
    let op = GreenOperator::new(&b, &omega).unwrap();
    let xi = b.random_edges(&mut rng, 1.0);
    assert!(matches!(universal_curvature_fa(&op, &xi, &xi), Err(Error::Precondition(_))));
}

#[test]
fn u1_plaquette_is_the_oriented_edge_sum() {
    let b = LatticeBundleX::new(Graph::torus(3, 3).unwrap(), 0, Group::U1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let omega = b.random_edges(&mut rng, 0.3);
    for v in 0..9 {
        let [a, bb, c, d] = b.graph.square(v).unwrap();
        let theta: f64 = [(a, 1.0), (bb, 1.0), (c, -1.0), (d, -1.0)].iter().map(|&(e, s)| s * b.group.coords(&omega.0[e])[0]).sum();
        let f = omega_curvature(&b, &omega, v).unwrap();
        assert!((b.group.coords(&f)[0] - theta).abs() < 1e-14);
    }
    let ring = LatticeBundleX::new(Graph::ring(4).unwrap(), 0, Group::U1).unwrap();
    assert_eq!(omega_curvature(&ring, &ring.random_edges(&mut rng, 1.0), 1).unwrap().max_abs(), 0.0);
}

#[test]
fn full_curvature_on_flat_fibers_reduces_to_mixed_term() {
    // omega = 0 on a U1 torus: F_A and F_omega vanish and only
    // (xi1(zeta2) - xi2(zeta1)) / 2 is left
    let b = LatticeBundleX::new(Graph::torus(3, 4).unwrap(), 0, Group::U1).unwrap();
    let op = GreenOperator::new(&b, &b.zero_edges()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let xi1 = horizontal_project(&op, &b.random_edges(&mut rng, 1.0)).unwrap();
    let xi2 = horizontal_project(&op, &b.random_edges(&mut rng, 1.0)).unwrap();
    let z1 = QTangent { vertical: Group::U1.zero(), horizontal: vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)] };
    let z2 = QTangent { vertical: Group::U1.zero(), horizontal: vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)] };
    let q = QPoint { vertex: 5, g: Group::U1.random_element(&mut rng, 1.0) };
    let f = universal_curvature_full(&op, &q, (&xi1, &z1), (&xi2, &z2)).unwrap();
    let pair = |xi: &EdgeField, z: &QTangent| -> f64 {
        (0..2).map(|d| z.horizontal[d] * Group::U1.coords(&xi.0[b.graph.out_edge(5, d)])[0]).sum()
    };
    let expected = 0.5 * (pair(&xi1, &z2) - pair(&xi2, &z1));
    assert!((Group::U1.coords(&f)[0] - expected).abs() < 1e-13);
    let bad = QTangent { vertical: Group::U1.from_coords(&[1.0]), horizontal: vec![0.0, 0.0] };
    assert!(matches!(universal_curvature_full(&op, &q, (&xi1, &bad), (&xi2, &z2)), Err(Error::Precondition(_))));
}

#[test]
fn graph_limits() {
    assert!(Graph::ring(2).is_err());
    assert!(Graph::parse("ring:8").is_ok());
    assert!(Graph::parse("torus:3x4").is_ok());
    assert!(Graph::parse("ring:600").is_err());
}
