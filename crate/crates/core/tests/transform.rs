use caloron_core::lattice::{sample, AxisSet, Family, FormField, Grid, Group, GroupField, LinkField, Target};
use caloron_core::transform::{
    curvature_split, curvature_split_links, forward_transform, higgs_gauge_action, link_forward, link_inverse, nabla_phi,
    FiberGauge, ProductConnection,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sampled(group: Group, base: &[usize], fiber: &[usize], seed: u64) -> ProductConnection {
    let grid = Grid::product(base, fiber).unwrap();
    let family = match group {
        Group::SU2 => Family::Su2BandLimited { max_mode: 2 },
        Group::U1 => Family::U1Harmonic { max_mode: 2 },
    };
    let s = sample(&family, &grid, group, seed).unwrap();
    ProductConnection::new(s.connection, s.twist).unwrap()
}

fn random_gauge(grid: &Grid, group: Group, seed: u64) -> GroupField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GroupField::from_fn(grid, group, |_| group.random_element(&mut rng, 1.0))
}

#[test]
fn zero_connection_maps_to_zero_pair() {
    let grid = Grid::product(&[4, 5], &[6]).unwrap();
    let w = ProductConnection::zero(&grid, Group::SU2).unwrap();
    let (a, phi) = forward_transform(&w).unwrap();
    assert_eq!(a.max_abs(), 0.0);
    assert_eq!(phi.max_abs(), 0.0);
    assert_eq!(a.axes(), vec![0, 1]);
    assert_eq!(phi.axes(), vec![2]);
}

/// Error of `NablaPhi` against `i cos(m)` for `A_X = i sin(m)` on `S^1 x S^1`.
fn nabla_phi_error(n: usize) -> f64 {
    let grid = Grid::product(&[n], &[n]).unwrap();
    let form = FormField::from_fn(&grid, 1, Target::Algebra(Group::U1), |axes, site| {
        if axes == AxisSet::single(1) {
            Group::U1.from_coords(&[grid.position(site)[0].sin()])
        } else {
            Group::U1.zero()
        }
    });
    let (a, phi) = forward_transform(&ProductConnection::new(form, None).unwrap()).unwrap();
    let d = nabla_phi(&a, &phi).unwrap();
    (0..grid.sites())
        .map(|s| (Group::U1.coords(&d.at(AxisSet::pair(0, 1), s))[0] - grid.position(s)[0].cos()).abs())
        .fold(0.0, f64::max)
}

#[test]
fn nabla_phi_converges_to_analytic_derivative() {
    let (e64, e128) = (nabla_phi_error(64), nabla_phi_error(128));
    assert!(e64 < 2e-3, "{e64}");
    let ratio = e64 / e128;
    assert!((ratio - 4.0).abs() < 0.05, "{ratio}");
}

#[test]
fn link_forward_is_gauge_covariant() {
    for (i, group) in [Group::U1, Group::SU2].into_iter().enumerate() {
        let w = sampled(group, &[4, 4], &[5], 20 + i as u64);
        let u = LinkField::from_connection(w.form(), w.twist()).unwrap();
        let g = random_gauge(w.grid(), group, 30 + i as u64);
        let direct = link_forward(&u.gauge_transform(&g).unwrap()).unwrap();
        let split = link_forward(&u).unwrap().gauge_transform(&g).unwrap();
        assert!(direct.bit_eq(&split), "{group:?}");
        assert!(link_inverse(&direct).unwrap().bit_eq(&u.gauge_transform(&g).unwrap()));
    }
}

#[test]
fn uniform_fiber_gauge_commutes_with_forward() {
    let w = sampled(Group::SU2, &[4], &[8, 6], 40);
    let split_grid = w.grid().restrict(w.grid().fiber_axes()).unwrap();
    let psi = random_gauge(&split_grid, Group::SU2, 41);
    let gauge = FiberGauge::Uniform(psi.clone());
    let g = gauge.on_product(w.grid()).unwrap();
    let (_, phi) = forward_transform(&w.gauge_transform(&g.inverse()).unwrap()).unwrap();
    let (_, phi0) = forward_transform(&w).unwrap();
    let acted = higgs_gauge_action(&phi0, &gauge).unwrap();
    let mut diff = 0.0f64;
    for axis in phi.axes() {
        for m in 0..4 {
            for x in 0..48 {
                diff = diff.max((phi.at(axis, m, x) - acted.at(axis, m, x)).max_abs());
            }
        }
    }
    assert!(diff < 1e-12, "{diff}");
}

#[test]
fn link_curvature_split_partitions_plaquettes() {
    let w = sampled(Group::SU2, &[4, 4], &[4, 4], 50);
    let u = LinkField::from_connection(w.form(), w.twist()).unwrap();
    let t = curvature_split_links(&u).unwrap();
    assert_eq!(t.total().max_abs_diff(&u.plaquette_curvature().unwrap()).unwrap(), 0.0);
    assert_eq!(t.f_a.filter_bidegree(2, 0).max_abs_diff(&t.f_a).unwrap(), 0.0);
    assert_eq!(t.nabla_phi.filter_bidegree(1, 1).max_abs_diff(&t.nabla_phi).unwrap(), 0.0);
}

#[test]
fn twisted_u1_curvature_carries_the_twist_constant() {
    let grid = Grid::product(&[4], &[8, 8]).unwrap();
    let s = sample(&Family::ConstantCurvatureTorus { chern: 2, axes: [1, 2] }, &grid, Group::U1, 0).unwrap();
    let w = ProductConnection::new(s.connection, s.twist).unwrap();
    let t = curvature_split(&w).unwrap();
    let area = grid.axis(1).length * grid.axis(2).length;
    let want = 2.0 * std::f64::consts::TAU / area;
    for site in 0..grid.sites() {
        let f = Group::U1.coords(&t.f_phi.at(AxisSet::pair(1, 2), site))[0];
        assert!((f - want).abs() < 1e-14);
    }
    assert_eq!(t.f_a.max_abs(), 0.0);
    assert_eq!(t.nabla_phi.max_abs(), 0.0);
}
