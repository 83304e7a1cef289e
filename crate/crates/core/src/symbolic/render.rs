use num_rational::BigRational;
use num_traits::{One, Signed};

use super::expression::Expression;
use super::word::Word;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderStyle {
    Plain,
    Latex,
}

/// Deterministic text form. Terms are listed in descending lexicographic
/// order of their words (so `NablaPhi`-heavy terms come first), letters are
/// printed as written with repeated runs collapsed into powers, and
/// coefficients are reduced fractions. The empty expression renders as `0`.
pub fn render(e: &Expression, style: RenderStyle) -> String {
    let mut terms: Vec<(&Word, &BigRational)> = e.terms().collect();
    if terms.is_empty() {
        return "0".to_string();
    }
    terms.sort_by(|a, b| b.0.cmp(a.0));

    let mut out = String::new();
    for (i, (word, coeff)) in terms.into_iter().enumerate() {
        let negative = coeff.is_negative();
        match (i, negative) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        let magnitude = coeff.abs();
        let body = render_word(word, style);
        if magnitude.is_one() {
            out.push_str(if body.is_empty() { "1" } else { &body });
            continue;
        }
        let c = render_coeff(&magnitude, style);
        match (style, body.is_empty()) {
            (_, true) => out.push_str(&c),
            (RenderStyle::Plain, false) => {
                out.push_str(&c);
                out.push('*');
                out.push_str(&body);
            }
            (RenderStyle::Latex, false) => {
                out.push_str(&c);
                out.push(' ');
                out.push_str(&body);
            }
        }
    }
    out
}

fn render_coeff(c: &BigRational, style: RenderStyle) -> String {
    if c.is_integer() {
        return c.numer().to_string();
    }
    match style {
        RenderStyle::Plain => format!("{}/{}", c.numer(), c.denom()),
        RenderStyle::Latex => format!("\\frac{{{}}}{{{}}}", c.numer(), c.denom()),
    }
}

fn render_word(word: &Word, style: RenderStyle) -> String {
    let parts: Vec<String> = word
        .runs()
        .into_iter()
        .map(|(g, power)| match (style, power) {
            (RenderStyle::Plain, 1) => g.plain_name().to_string(),
            (RenderStyle::Plain, p) => format!("{}^{p}", g.plain_name()),
            (RenderStyle::Latex, 1) => g.latex_name().to_string(),
            (RenderStyle::Latex, p) => format!("{}^{{{p}}}", g.latex_name()),
        })
        .collect();
    match style {
        RenderStyle::Plain => parts.join("*"),
        RenderStyle::Latex => parts.join(" "),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::{caloron_integrand, Word};
    use num_bigint::BigInt;

    #[test]
    fn plain_product() {
        let e = Expression::term(Word::monomial(1, 1, 0), 2);
        assert_eq!(render(&e, RenderStyle::Plain), "2*FA*FPhi");
    }

    #[test]
    fn empty_is_zero() {
        assert_eq!(render(&Expression::zero(), RenderStyle::Plain), "0");
        assert_eq!(render(&Expression::zero(), RenderStyle::Latex), "0");
    }

    #[test]
    fn latex_power() {
        let e = Expression::term(Word::monomial(0, 0, 3), 1);
        assert_eq!(render(&e, RenderStyle::Latex), "\\nabla\\Phi^{3}");
    }

    #[test]
    fn terms_ordered_nabla_first() {
        let c = caloron_integrand(2, 2).unwrap();
        assert_eq!(render(c.expression(), RenderStyle::Plain), "NablaPhi^2 + 2*FA*FPhi");
        let c = caloron_integrand(2, 3).unwrap();
        assert_eq!(render(c.expression(), RenderStyle::Plain), "3*FA*NablaPhi^2 + 3*FA^2*FPhi");
    }

    #[test]
    fn fractions_and_signs() {
        let mut e = Expression::zero();
        e.add_term(Word::monomial(1, 0, 0), BigRational::new(BigInt::from(-1), BigInt::from(2)));
        e.add_term(Word::monomial(0, 1, 0), BigRational::new(BigInt::from(-1), BigInt::from(1)));
        assert_eq!(render(&e, RenderStyle::Plain), "-FPhi - 1/2*FA");
        assert_eq!(render(&e, RenderStyle::Latex), "-F_\\Phi - \\frac{1}{2} F_A");
    }
}
