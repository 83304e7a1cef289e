use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::lattice::{FormField, Target};
use crate::{Error, Result};

/// Largest supported polynomial degree.
pub const MAX_POLY_DEGREE: usize = 6;
/// Up to this degree every ordering of the arguments is summed.
pub const FULL_PERMUTATION_DEGREE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolyKind {
    /// `Sym tr(X_1 ... X_k)`.
    SymTrace,
    /// `(1 / (2 pi i))^k Sym tr(X_1 ... X_k)`; a U(1) twist `c` pairs to `+c`.
    ChernNormalized,
    /// Plain product of scalar values (order-1 matrices only).
    AbelianPower,
}

impl PolyKind {
    pub fn parse(name: &str) -> Result<PolyKind> {
        match name {
            "sym_trace" => Ok(PolyKind::SymTrace),
            "chern_normalized" => Ok(PolyKind::ChernNormalized),
            "abelian_power" => Ok(PolyKind::AbelianPower),
            other => Err(Error::Config(format!(
                "unknown polynomial `{other}` (expected sym_trace, chern_normalized or abelian_power)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PolyKind::SymTrace => "sym_trace",
            PolyKind::ChernNormalized => "chern_normalized",
            PolyKind::AbelianPower => "abelian_power",
        }
    }
}

/// Symmetric ad-invariant polynomial of degree `k` on matrix Lie algebras.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantPolynomial {
    pub degree: usize,
    pub kind: PolyKind,
}

impl InvariantPolynomial {
    pub fn new(degree: usize, kind: PolyKind) -> Result<InvariantPolynomial> {
        if degree == 0 || degree > MAX_POLY_DEGREE {
            return Err(Error::Degree(format!("polynomial degree must be 1..={MAX_POLY_DEGREE}, got {degree}")));
        }
        Ok(InvariantPolynomial { degree, kind })
    }

    /// Constant multiplying the symmetrized trace.
    pub fn normalization(&self) -> C64 {
        match self.kind {
            PolyKind::ChernNormalized => C64::new(0.0, TAU).inv().powu(self.degree as u32),
            PolyKind::SymTrace | PolyKind::AbelianPower => C64::new(1.0, 0.0),
        }
    }
}

/// Orderings of the arguments with their weights: all `k!` orderings for
/// small `k`, otherwise the distinct arrangements of the multiset of equal
/// arguments, each weighted by its multiplicity.
fn orderings(args: &[&FormField]) -> Vec<(Vec<usize>, f64)> {
    let k = args.len();
    if k <= FULL_PERMUTATION_DEGREE {
        let all = permutations(k);
        let w = 1.0 / all.len() as f64;
        return all.into_iter().map(|p| (p, w)).collect();
    }
    // class label per argument: index of its first bit-equal occurrence
    let labels: Vec<usize> = (0..k).map(|i| (0..=i).find(|&j| args[j].bit_eq(args[i])).unwrap()).collect();
    let mut counts: Vec<(usize, usize)> = Vec::new();
    for &l in &labels {
        match counts.iter_mut().find(|(c, _)| *c == l) {
            Some((_, n)) => *n += 1,
            None => counts.push((l, 1)),
        }
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    arrangements(&mut counts, &mut current, k, &mut out);
    let w = 1.0 / out.len() as f64;
    out.into_iter().map(|p| (p, w)).collect()
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

fn arrangements(counts: &mut [(usize, usize)], current: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if current.len() == k {
        out.push(current.clone());
        return;
    }
    for i in 0..counts.len() {
        if counts[i].1 == 0 {
            continue;
        }
        counts[i].1 -= 1;
        current.push(counts[i].0);
        arrangements(counts, current, k, out);
        current.pop();
        counts[i].1 += 1;
    }
}

/// Pointwise `f(X_1, ..., X_k)` of even-degree matrix-valued forms, wedged on
/// form indices. The result is a scalar form of degree `sum deg X_i`, with no
/// components above the grid dimension.
pub fn eval_invariant(f: &InvariantPolynomial, args: &[&FormField]) -> Result<FormField> {
    if args.len() != f.degree {
        return Err(Error::Arity { expected: f.degree, got: args.len() });
    }
    let first = args[0];
    for a in args {
        if a.grid() != first.grid() || a.order() != first.order() {
            return Err(Error::Shape("invariant polynomial arguments live on different grids".into()));
        }
        if a.degree() % 2 != 0 {
            return Err(Error::Degree(format!("arguments must have even degree, got {}", a.degree())));
        }
    }
    if f.kind == PolyKind::AbelianPower && first.order() != 1 {
        return Err(Error::Domain("abelian_power needs scalar (u1) values".into()));
    }
    let degree: usize = args.iter().map(|a| a.degree()).sum();
    let mut total = FormField::zeros(first.grid(), degree, Target::SCALAR);
    if degree > first.grid().dim() {
        return Ok(total);
    }
    for (order, weight) in orderings(args) {
        let prod = match order[1..].split_first() {
            None => args[order[0]].trace(),
            Some((&second, rest)) => {
                let mut prod = args[order[0]].wedge(args[second])?;
                for &i in rest {
                    prod = prod.wedge(args[i])?;
                }
                prod.trace()
            }
        };
        total = total.add(&prod.scale(weight))?;
    }
    Ok(total.scale_c(f.normalization()))
}

/// `f(F, ..., F)`.
pub fn chern_weil_form(f: &InvariantPolynomial, curvature: &FormField) -> Result<FormField> {
    let args = vec![curvature; f.degree];
    eval_invariant(f, &args)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{AxisRole, Grid, Group, Mat};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_two_form(grid: &Grid, seed: u64) -> FormField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        FormField::from_fn(grid, 2, Target::Algebra(Group::SU2), |_, _| Group::SU2.random_algebra(&mut rng, 1.0))
    }

    #[test]
    fn permutation_counts() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(4).len(), 24);
    }

    #[test]
    fn symmetric_in_arguments() {
        let grid = Grid::periodic(&[4, 4, 4, 4], AxisRole::Fiber).unwrap();
        let x = random_two_form(&grid, 1);
        let y = random_two_form(&grid, 2);
        let f = InvariantPolynomial::new(2, PolyKind::SymTrace).unwrap();
        let a = eval_invariant(&f, &[&x, &y]).unwrap();
        let b = eval_invariant(&f, &[&y, &x]).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-14);
        assert!(a.max_abs() > 1e-3);
    }

    #[test]
    fn arity_is_checked() {
        let grid = Grid::periodic(&[4, 4], AxisRole::Fiber).unwrap();
        let x = random_two_form(&grid, 1);
        let f = InvariantPolynomial::new(2, PolyKind::SymTrace).unwrap();
        assert!(matches!(eval_invariant(&f, &[&x]), Err(Error::Arity { expected: 2, got: 1 })));
    }

    #[test]
    fn overflow_degree_is_zero_form() {
        let grid = Grid::periodic(&[4, 4], AxisRole::Fiber).unwrap();
        let x = random_two_form(&grid, 1);
        let f = InvariantPolynomial::new(2, PolyKind::SymTrace).unwrap();
        let w = chern_weil_form(&f, &x).unwrap();
        assert_eq!(w.degree(), 4);
        assert_eq!(w.components().count(), 0);
    }

    #[test]
    fn chern_normalized_u1_constant() {
        let grid = Grid::periodic(&[8, 8], AxisRole::Fiber).unwrap();
        let c = 3.0;
        let area = grid.volume();
        let f2 = FormField::from_fn(&grid, 2, Target::Algebra(Group::U1), |_, _| Mat::scalar(C64::new(0.0, TAU * c / area)));
        let f = InvariantPolynomial::new(1, PolyKind::ChernNormalized).unwrap();
        let v = chern_weil_form(&f, &f2).unwrap().integrate().unwrap().get(0, 0);
        assert!((v - C64::new(c, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn multiset_collapse_matches_full_sum() {
        // degree-0 arguments keep k = 5 below the grid dimension
        let grid = Grid::periodic(&[4, 4], AxisRole::Fiber).unwrap();
        let fields: Vec<FormField> = (0..2)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(10 + i);
                FormField::from_fn(&grid, 0, Target::Matrix(2), |_, _| Group::SU2.random_algebra(&mut rng, 1.0))
            })
            .collect();
        let refs: Vec<&FormField> = (0..5).map(|i| &fields[i % 2]).collect();
        let f = InvariantPolynomial::new(5, PolyKind::SymTrace).unwrap();
        let collapsed = eval_invariant(&f, &refs).unwrap();
        let mut brute = FormField::zeros(&grid, 0, Target::SCALAR);
        let perms = permutations(5);
        for p in &perms {
            let mut prod = refs[p[0]].clone();
            for &i in &p[1..] {
                prod = prod.wedge(refs[i]).unwrap();
            }
            brute = brute.add(&prod.trace().scale(1.0 / perms.len() as f64)).unwrap();
        }
        assert!(collapsed.max_abs_diff(&brute).unwrap() < 1e-13);
    }
}
