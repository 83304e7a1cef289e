use std::f64::consts::TAU;

use caloron_core::chern_weil::{
    caloron_class, class_degree, closedness_residual, fiber_integrate, string_class, ClassData, ClassPath, ClassRequest,
    Cycle, InvariantPolynomial, PolyKind,
};
use caloron_core::lattice::{sample, AxisSet, Family, FormField, Grid, Group, GroupField, LinkField, Target};
use caloron_core::transform::{forward_transform, ProductConnection};
use caloron_core::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn twisted(c: i64, base: &[usize], fiber: &[usize], axes: [usize; 2]) -> ProductConnection {
    let grid = Grid::product(base, fiber).unwrap();
    let s = sample(&Family::ConstantCurvatureTorus { chern: c, axes }, &grid, Group::U1, 0).unwrap();
    ProductConnection::new(s.connection, s.twist).unwrap()
}

fn su2(base: &[usize], fiber: &[usize], seed: u64) -> ProductConnection {
    let grid = Grid::product(base, fiber).unwrap();
    let s = sample(&Family::Su2BandLimited { max_mode: 2 }, &grid, Group::SU2, seed).unwrap();
    ProductConnection::new(s.connection, None).unwrap()
}

fn chern(k: usize) -> InvariantPolynomial {
    InvariantPolynomial::new(k, PolyKind::ChernNormalized).unwrap()
}

#[test]
fn fiber_integral_of_mixed_sine() {
    let grid = Grid::product(&[16], &[12]).unwrap();
    let c = 0.7;
    let w = FormField::from_fn(&grid, 2, Target::Algebra(Group::U1), |_, site| {
        Group::U1.from_coords(&[c * grid.position(site)[0].sin()])
    });
    let v = fiber_integrate(&w).unwrap();
    assert_eq!(v.degree(), 1);
    let m = v.grid().clone();
    for site in 0..m.sites() {
        let got = Group::U1.coords(&v.at(AxisSet::single(0), site))[0];
        assert!((got - TAU * c * m.position(site)[0].sin()).abs() < 1e-12);
    }
}

#[test]
fn degree_zero_pairing_is_the_twist() {
    for c in [-3, -1, 1, 2] {
        let w = twisted(c, &[4], &[16, 16], [1, 2]);
        for path in [ClassPath::Numeric, ClassPath::Symbolic] {
            let mut req = ClassRequest::new(chern(1), 0);
            req.path = path;
            req.cycles = (0..4).map(|m| Cycle::point(vec![m])).collect();
            let rep = caloron_class(ClassData::Product(&w), &req).unwrap();
            for p in &rep.pairings {
                assert!((p.value - c as f64).abs() < 1e-10, "c={c}: {}", p.value);
                assert!(p.imag.abs() < 1e-10);
            }
        }
    }
}

#[test]
fn mixed_twist_gives_degree_one_class() {
    // twist in the (M, X) plane of S^1 x S^1: sigma_1 pairs with [M] to c
    let w = twisted(3, &[12], &[10], [0, 1]);
    let rep = caloron_class(ClassData::Product(&w), &ClassRequest::new(chern(1), 1)).unwrap();
    assert!((rep.pairings[0].value - 3.0).abs() < 1e-10);
    let u = LinkField::from_connection(w.form(), w.twist()).unwrap();
    assert!((u.plaquette_winding(0, 1).unwrap() - 3.0).abs() < 1e-10);
}

#[test]
fn numeric_symbolic_and_pair_paths_agree() {
    let w = su2(&[4, 4], &[5, 5], 3);
    let poly = InvariantPolynomial::new(2, PolyKind::SymTrace).unwrap();
    let numeric = caloron_class(ClassData::Product(&w), &ClassRequest::new(poly, 2)).unwrap();
    let mut req = ClassRequest::new(poly, 2);
    req.path = ClassPath::Symbolic;
    let symbolic = caloron_class(ClassData::Product(&w), &req).unwrap();
    let (a, phi) = forward_transform(&w).unwrap();
    let pair = caloron_class(ClassData::Pair(&a, &phi), &ClassRequest::new(poly, 2)).unwrap();
    for other in [&symbolic, &pair] {
        assert!(numeric.class_form.max_abs_diff(&other.class_form).unwrap() < 1e-10);
    }
    assert!(numeric.class_form.max_abs() > 1e-6);
}

#[test]
fn link_classes_are_gauge_invariant() {
    let w = su2(&[4, 4], &[4, 4], 8);
    let u = LinkField::from_connection(w.form(), None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let g = GroupField::from_fn(w.grid(), Group::SU2, |_| Group::SU2.random_element(&mut rng, 1.0));
    let ug = u.gauge_transform(&g).unwrap();
    let poly = InvariantPolynomial::new(2, PolyKind::SymTrace).unwrap();
    let r0 = caloron_class(ClassData::Links(&u), &ClassRequest::new(poly, 2)).unwrap();
    let r1 = caloron_class(ClassData::Links(&ug), &ClassRequest::new(poly, 2)).unwrap();
    assert!(r0.class_form.max_abs_diff(&r1.class_form).unwrap() < 1e-11);
    for (p, q) in r0.pairings.iter().zip(&r1.pairings) {
        assert!((p.value - q.value).abs() < 1e-11);
    }
}

#[test]
fn string_class_matches_generic_path() {
    let w = su2(&[6, 6, 6], &[6], 4);
    let poly = InvariantPolynomial::new(2, PolyKind::SymTrace).unwrap();
    let s = string_class(ClassData::Product(&w), &poly, &[]).unwrap();
    let g = caloron_class(ClassData::Product(&w), &ClassRequest::new(poly, 3)).unwrap();
    assert!(s.class_form.max_abs_diff(&g.class_form).unwrap() < 1e-12);
    let not_circle = su2(&[4], &[4, 4], 4);
    assert!(string_class(ClassData::Product(&not_circle), &poly, &[]).is_err());
}

#[test]
fn parity_and_range_checks() {
    assert!(matches!(class_degree(1, 2), Err(Error::Parity(_))));
    assert!(class_degree(2, 2).is_ok_and(|k| k == 2));
    let w = twisted(1, &[4], &[8, 8], [1, 2]);
    assert!(caloron_class(ClassData::Product(&w), &ClassRequest::new(chern(1), 1)).is_err());
    assert!(InvariantPolynomial::new(0, PolyKind::SymTrace).is_err());
}

#[test]
fn top_degree_forms_are_closed_by_convention() {
    let grid = Grid::product(&[4, 4], &[4]).unwrap();
    let w = FormField::zeros(&grid, 3, Target::SCALAR);
    assert_eq!(closedness_residual(&w).unwrap(), 0.0);
    let rep = caloron_class(ClassData::Product(&su2(&[4, 4], &[4, 4], 1)), &ClassRequest::new(chern(2), 2)).unwrap();
    assert_eq!(rep.closedness_residual, 0.0);
}
