use caloron_core::symbolic::{
    caloron_integrand, canonicalize, expand_power, render, Expression, Generator, RenderStyle, Word,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

const GENS: [Generator; 3] = [Generator::CurvA, Generator::CurvPhi, Generator::NablaPhi];

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

fn rational(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Multinomial oracle: the integrand is the sum of `k! / (a! b! c!)`
/// `FA^a FPhi^b NablaPhi^c` over `a + b + c = k` with fiber degree
/// `2b + c = d`.
fn integrand_oracle(d: usize, k: usize) -> Vec<((usize, usize, usize), u64)> {
    let mut out = Vec::new();
    for b in 0..=k {
        for c in 0..=k - b {
            if 2 * b + c == d {
                let a = k - b - c;
                out.push(((a, b, c), factorial(k) / (factorial(a) * factorial(b) * factorial(c))));
            }
        }
    }
    out
}

#[test]
fn integrands_match_multinomial_oracle() {
    for k in 1..=6 {
        for d in 1..=8 {
            let Ok(e) = caloron_integrand(d, k) else {
                assert!(d > 2 * k, "d={d} k={k} should be valid");
                continue;
            };
            let oracle = integrand_oracle(d, k);
            assert_eq!(e.len(), oracle.len(), "d={d} k={k}");
            for ((a, b, c), coeff) in oracle {
                assert_eq!(e.coefficient(a, b, c), rational(coeff as i64), "d={d} k={k} ({a},{b},{c})");
            }
        }
    }
}

#[test]
fn expansion_coefficients_sum_to_three_to_the_k() {
    assert!(expand_power(0).is_err());
    for k in 1..=6 {
        let e = expand_power(k).unwrap();
        assert_eq!(e.coefficient_mass(), rational(3i64.pow(k as u32)));
        assert_eq!(e.len(), 3usize.pow(k as u32));
    }
}

#[test]
fn rendering() {
    assert_eq!(render(caloron_integrand(2, 2).unwrap().expression(), RenderStyle::Plain), "NablaPhi^2 + 2*FA*FPhi");
    assert_eq!(render(caloron_integrand(1, 1).unwrap().expression(), RenderStyle::Latex), "\\nabla\\Phi");
    assert_eq!(render(&Expression::zero(), RenderStyle::Plain), "0");
}

fn word_strategy(len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(0usize..3, len).prop_map(|v| Word::new(v.into_iter().map(|i| GENS[i]).collect()))
}

fn expression_strategy() -> impl Strategy<Value = (usize, Expression)> {
    (1usize..6).prop_flat_map(|len| {
        prop::collection::vec((word_strategy(len), -5i64..=5), 1..8)
            .prop_map(move |terms| (len, Expression::from_terms(terms.into_iter().map(|(w, c)| (w, rational(c))))))
    })
}

proptest! {
    #[test]
    fn canonical_form_ignores_letter_order((len, e) in expression_strategy(), seed in any::<u64>()) {
        let mut perm: Vec<usize> = (0..len).collect();
        let mut s = seed;
        for i in (1..len).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        prop_assert_eq!(canonicalize(&e.permute_letters(&perm)), canonicalize(&e));
    }

    #[test]
    fn canonicalize_is_idempotent_and_keeps_mass((_len, e) in expression_strategy()) {
        let c = canonicalize(&e);
        prop_assert_eq!(canonicalize(c.expression()), c.clone());
        prop_assert_eq!(c.expression().coefficient_mass(), e.coefficient_mass());
        prop_assert!(c.terms().all(|(w, _)| w.is_canonical()));
    }

    #[test]
    fn canonical_coefficient_counts_letters((_len, e) in expression_strategy()) {
        let c = canonicalize(&e);
        for (w, coeff) in c.terms() {
            let (a, b, n) = w.counts();
            let direct: BigRational = e
                .terms()
                .filter(|(v, _)| v.counts() == (a, b, n))
                .fold(rational(0), |acc, (_, x)| acc + x);
            prop_assert_eq!(coeff.clone(), direct);
        }
    }
}
