//! Caloron integrands: the generic expansion, the low-degree closed formulas,
//! the abelian double-binomial formula, string classes and the literal table
//! of integrands for small `(d, k)`.

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;

use super::expression::{canonicalize, expand_power, filter_bidegree, CanonicalForm, Expression};
use super::word::{Generator, Word};
use crate::{Error, Result};

use Generator::{CurvA as A, CurvPhi as P, NablaPhi as N};

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn check_degrees(d: usize, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Degree("polynomial degree k must be at least 1".into()));
    }
    if d == 0 {
        return Err(Error::Degree("fiber dimension d must be at least 1".into()));
    }
    if d > 2 * k {
        return Err(Error::Degree(format!(
            "fiber dimension d = {d} exceeds 2k = {}; the class degree 2k - d would be negative",
            2 * k
        )));
    }
    Ok(())
}

/// Integrand of the degree `2k - d` caloron class over a `d`-dimensional
/// fiber: the `(2k - d, d)` part of `(F_A + F_Phi + NablaPhi)^k`, canonicalized.
pub fn caloron_integrand(d: usize, k: usize) -> Result<CanonicalForm> {
    check_degrees(d, k)?;
    let expanded = expand_power(k)?;
    Ok(canonicalize(&filter_bidegree(&expanded, 2 * k - d, d)))
}

/// Closed formula for the abelian case,
/// `sum_i C(k,i) C(i,d-i) F_A^(k-i) F_Phi^(d-i) NablaPhi^(2i-d)`.
pub fn abelian_closed_form(d: usize, k: usize) -> Result<CanonicalForm> {
    check_degrees(d, k)?;
    let lo = d.div_ceil(2);
    let hi = d.min(k);
    let terms = (lo..=hi)
        .map(|i| {
            let coeff = binomial(BigInt::from(k), BigInt::from(i)) * binomial(BigInt::from(i), BigInt::from(d - i));
            (Word::monomial(k - i, d - i, 2 * i - d), BigRational::from_integer(coeff))
        })
        .collect();
    Ok(CanonicalForm::from_sorted_terms(terms))
}

/// `k F_A^(k-1) NablaPhi`, the integrand over a circle fiber.
pub fn string_class_integrand(k: usize) -> Result<Expression> {
    if k == 0 {
        return Err(Error::Degree("string classes need k >= 1".into()));
    }
    Ok(Expression::term(Word::from_runs(&[(A, k - 1), (N, 1)]), k as i64))
}

/// The integrand of the class of degree `r <= 4` exactly as the nested-sum
/// formula writes it: prefactor `(d + r)/2` distributed over every term, word
/// order as written, no canonicalization.
pub fn low_degree_formula(r: usize, d: usize) -> Result<Expression> {
    if r > 4 {
        return Err(Error::Degree(format!("closed formulas exist for r <= 4, got r = {r}")));
    }
    if d == 0 {
        return Err(Error::Degree("fiber dimension d must be at least 1".into()));
    }
    if !(r + d).is_multiple_of(2) {
        return Err(Error::Parity(format!("r = {r} and d = {d} must have the same parity")));
    }
    // The degree-0 class carries no prefactor.
    let pre = if r == 0 { int(1) } else { frac((d + r) as i64, 2) };
    let mut e = Expression::zero();
    let mut push = |runs: &[(Generator, usize)], c: BigRational| e.add_term(Word::from_runs(runs), &pre * c);

    match r {
        0 => push(&[(P, d / 2)], int(1)),
        1 => push(&[(N, 1), (P, (d - 1) / 2)], int(1)),
        2 => {
            push(&[(A, 1), (P, d / 2)], int(1));
            let top = (d - 2) / 2;
            for j in 0..=top {
                push(&[(N, 1), (P, top - j), (N, 1), (P, j)], frac(1, 2));
            }
        }
        3 => {
            let top = (d - 1) / 2;
            for j in 0..=top {
                push(&[(A, 1), (P, top - j), (N, 1), (P, j)], int(1));
            }
            if d >= 3 {
                let top = (d - 3) / 2;
                for j in 0..=top {
                    for l in 0..=j {
                        push(&[(N, 1), (P, top - j), (N, 1), (P, j - l), (N, 1), (P, l)], frac(1, 3));
                    }
                }
            }
        }
        4 => {
            let top = d / 2;
            for j in 0..=top {
                push(&[(A, 1), (P, top - j), (A, 1), (P, j)], frac(1, 2));
            }
            let top = (d - 2) / 2;
            for j in 0..=top {
                for l in 0..=j {
                    push(&[(A, 1), (P, top - j), (N, 1), (P, j - l), (N, 1), (P, l)], int(1));
                }
            }
            if d >= 4 {
                let top = (d - 4) / 2;
                for j in 0..=top {
                    for l in 0..=j {
                        for m in 0..=l {
                            push(
                                &[(N, 1), (P, top - j), (N, 1), (P, j - l), (N, 1), (P, l - m), (N, 1), (P, m)],
                                frac(1, 4),
                            );
                        }
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    Ok(e)
}

/// Populated `(d, k)` cells of the integrand table.
pub const TABLE_CELLS: [(usize, usize); 12] = [
    (1, 1),
    (2, 1),
    (1, 2),
    (2, 2),
    (3, 2),
    (4, 2),
    (1, 3),
    (2, 3),
    (3, 3),
    (4, 3),
    (5, 3),
    (6, 3),
];

/// Literal table entry for fiber dimension `d` and polynomial degree `k`,
/// terms and letters exactly as printed.
pub fn table_fixture(d: usize, k: usize) -> Result<Expression> {
    let term = |runs: &[(Generator, usize)], c: i64| (Word::from_runs(runs), int(c));
    let terms = match (d, k) {
        (1, 1) => vec![term(&[(N, 1)], 1)],
        (2, 1) => vec![term(&[(P, 1)], 1)],
        (1, 2) => vec![term(&[(A, 1), (N, 1)], 2)],
        (2, 2) => vec![term(&[(N, 2)], 1), term(&[(A, 1), (P, 1)], 2)],
        (3, 2) => vec![term(&[(N, 1), (P, 1)], 2)],
        (4, 2) => vec![term(&[(P, 2)], 1)],
        (1, 3) => vec![term(&[(A, 2), (N, 1)], 3)],
        (2, 3) => vec![term(&[(A, 1), (N, 2)], 3), term(&[(A, 2), (P, 1)], 3)],
        (3, 3) => vec![
            term(&[(N, 3)], 1),
            term(&[(A, 1), (N, 1), (P, 1)], 3),
            term(&[(A, 1), (P, 1), (N, 1)], 3),
        ],
        (4, 3) => vec![term(&[(N, 2), (P, 1)], 3), term(&[(A, 1), (P, 2)], 3)],
        (5, 3) => vec![term(&[(N, 1), (P, 2)], 3)],
        (6, 3) => vec![term(&[(P, 3)], 1)],
        _ => return Err(Error::NotAvailable(format!("no table entry for d = {d}, k = {k}"))),
    };
    Ok(Expression::from_terms(terms))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn multinomial(a: usize, b: usize, c: usize) -> i64 {
        let fact = |n: usize| (1..=n as i64).product::<i64>();
        fact(a + b + c) / (fact(a) * fact(b) * fact(c))
    }

    #[test]
    fn integrand_examples() {
        let c = caloron_integrand(1, 2).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.coefficient(1, 0, 1), int(2));

        let c = caloron_integrand(2, 2).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.coefficient(0, 0, 2), int(1));
        assert_eq!(c.coefficient(1, 1, 0), int(2));

        let c = caloron_integrand(6, 3).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.coefficient(0, 3, 0), int(1));

        let c = caloron_integrand(4, 3).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.coefficient(1, 2, 0), int(3));
        assert_eq!(c.coefficient(0, 1, 2), int(3));
    }

    #[test]
    fn integrand_coefficients_are_multinomial() {
        for k in 1..=6 {
            for d in 1..=2 * k {
                let c = caloron_integrand(d, k).unwrap();
                for (w, coeff) in c.terms() {
                    let (a, b, cc) = w.counts();
                    assert_eq!(a + b + cc, k);
                    assert_eq!(2 * b + cc, d);
                    assert_eq!(*coeff, int(multinomial(a, b, cc)));
                }
            }
        }
    }

    #[test]
    fn integrand_rejects_negative_class_degree() {
        assert!(matches!(caloron_integrand(5, 2), Err(Error::Degree(_))));
        assert!(matches!(caloron_integrand(9, 1), Err(Error::Degree(_))));
    }

    #[test]
    fn low_degree_examples() {
        assert_eq!(low_degree_formula(0, 2).unwrap(), Expression::term(Word::monomial(0, 1, 0), 1));
        assert_eq!(low_degree_formula(0, 6).unwrap(), Expression::term(Word::monomial(0, 3, 0), 1));
        assert_eq!(low_degree_formula(1, 1).unwrap(), Expression::term(Word::monomial(0, 0, 1), 1));
        let e = low_degree_formula(2, 2).unwrap();
        assert_eq!(
            e,
            Expression::from_terms([(Word::monomial(1, 1, 0), int(2)), (Word::monomial(0, 0, 2), int(1))])
        );
    }

    #[test]
    fn low_degree_parity() {
        assert!(matches!(low_degree_formula(1, 2), Err(Error::Parity(_))));
        assert!(matches!(low_degree_formula(0, 3), Err(Error::Parity(_))));
        assert!(matches!(low_degree_formula(5, 1), Err(Error::Degree(_))));
    }

    #[test]
    fn low_degree_keeps_written_order() {
        // r = 3, d = 3: 3 * (F_A F_Phi NablaPhi + F_A NablaPhi F_Phi + (1/3) NablaPhi^3)
        let e = low_degree_formula(3, 3).unwrap();
        let words: Vec<_> = e.terms().map(|(w, _)| w.clone()).collect();
        assert_eq!(
            words,
            vec![
                Word::from_runs(&[(A, 1), (P, 1), (N, 1)]),
                Word::from_runs(&[(A, 1), (N, 1), (P, 1)]),
                Word::monomial(0, 0, 3),
            ]
        );
        assert_eq!(e.coefficient(&Word::monomial(0, 0, 3)), int(1));
    }

    #[test]
    fn abelian_examples() {
        let c = abelian_closed_form(2, 3).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.coefficient(2, 1, 0), int(3));
        assert_eq!(c.coefficient(1, 0, 2), int(3));
        assert_eq!(abelian_closed_form(1, 1).unwrap().coefficient(0, 0, 1), int(1));
        let c = abelian_closed_form(5, 3).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.coefficient(0, 2, 1), int(3));
        assert!(matches!(abelian_closed_form(7, 3), Err(Error::Degree(_))));
    }

    #[test]
    fn string_examples() {
        assert_eq!(string_class_integrand(1).unwrap(), Expression::term(Word::monomial(0, 0, 1), 1));
        assert_eq!(string_class_integrand(2).unwrap(), Expression::term(Word::monomial(1, 0, 1), 2));
        assert_eq!(string_class_integrand(3).unwrap(), Expression::term(Word::monomial(2, 0, 1), 3));
    }

    #[test]
    fn table_examples() {
        assert_eq!(table_fixture(3, 2).unwrap(), Expression::term(Word::from_runs(&[(N, 1), (P, 1)]), 2));
        let e = table_fixture(2, 3).unwrap();
        let words: Vec<_> = e.terms().map(|(w, _)| w.clone()).collect();
        assert_eq!(words, vec![Word::from_runs(&[(A, 1), (N, 2)]), Word::from_runs(&[(A, 2), (P, 1)])]);
        assert!(matches!(table_fixture(3, 1), Err(Error::NotAvailable(_))));
        assert!(matches!(table_fixture(6, 2), Err(Error::NotAvailable(_))));
    }

    #[test]
    fn table_has_exactly_the_populated_cells() {
        let mut populated = Vec::new();
        for k in 1..=3 {
            for d in 1..=6 {
                if table_fixture(d, k).is_ok() {
                    populated.push((d, k));
                }
            }
        }
        let mut listed = TABLE_CELLS.to_vec();
        listed.sort_by_key(|&(d, k)| (k, d));
        assert_eq!(populated, listed);
    }
}
