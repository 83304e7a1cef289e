use indexmap::IndexMap;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::word::{Bidegree, Generator, Word};
use crate::{Error, Result};

/// Largest `k` accepted by [`expand_power`]; `3^12` words is about half a
/// million terms.
pub const MAX_EXPANSION_DEGREE: usize = 12;

/// Formal sum of words with non-zero rational coefficients.
///
/// Terms keep their insertion order so that literal fixtures can be echoed as
/// written. Equality ignores the order.
#[derive(Debug, Clone, Default)]
pub struct Expression {
    terms: IndexMap<Word, BigRational>,
}

impl PartialEq for Expression {
    fn eq(&self, other: &Self) -> bool {
        self.terms.len() == other.terms.len()
            && self.terms.iter().all(|(w, c)| other.terms.get(w) == Some(c))
    }
}

impl Eq for Expression {}

impl Expression {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (Word, BigRational)>,
    {
        let mut e = Expression::zero();
        for (w, c) in terms {
            e.add_term(w, c);
        }
        e
    }

    /// Single term with an integer coefficient.
    pub fn term(word: Word, coeff: i64) -> Self {
        Self::from_terms([(word, BigRational::from_integer(BigInt::from(coeff)))])
    }

    /// Adds `coeff * word`, dropping the word if the coefficient cancels.
    pub fn add_term(&mut self, word: Word, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&word) {
            Some(existing) => {
                *existing += coeff;
                if existing.is_zero() {
                    self.terms.shift_remove(&word);
                }
            }
            None => {
                self.terms.insert(word, coeff);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &BigRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, word: &Word) -> BigRational {
        self.terms.get(word).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Sum of all coefficients.
    pub fn coefficient_mass(&self) -> BigRational {
        self.terms.values().fold(BigRational::zero(), |acc, c| acc + c)
    }

    /// Common bidegree of every word, if there is one. The empty expression has
    /// none.
    pub fn homogeneous_bidegree(&self) -> Option<Bidegree> {
        let mut words = self.terms.keys();
        let first = words.next()?.bidegree();
        words.all(|w| w.bidegree() == first).then_some(first)
    }

    pub fn scaled(&self, factor: &BigRational) -> Expression {
        Expression::from_terms(self.terms.iter().map(|(w, c)| (w.clone(), c * factor)))
    }

    pub fn plus(&self, other: &Expression) -> Expression {
        let mut out = self.clone();
        for (w, c) in other.terms() {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    /// Applies a permutation of letter positions to every word whose length
    /// matches `perm`; other words are left untouched.
    pub fn permute_letters(&self, perm: &[usize]) -> Expression {
        Expression::from_terms(self.terms.iter().map(|(w, c)| {
            let word = if w.len() == perm.len() {
                perm.iter().map(|&i| w.letters()[i]).collect()
            } else {
                w.clone()
            };
            (word, c.clone())
        }))
    }
}

impl Serialize for Expression {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ExpressionDoc::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Expression {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = ExpressionDoc::deserialize(deserializer)?;
        doc.try_into().map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct ExpressionDoc {
    terms: Vec<TermDoc>,
}

#[derive(Serialize, Deserialize)]
struct TermDoc {
    word: Vec<Generator>,
    coeff: String,
}

impl From<&Expression> for ExpressionDoc {
    fn from(e: &Expression) -> Self {
        ExpressionDoc {
            terms: e
                .terms()
                .map(|(w, c)| TermDoc { word: w.letters().to_vec(), coeff: format!("{}/{}", c.numer(), c.denom()) })
                .collect(),
        }
    }
}

impl TryFrom<ExpressionDoc> for Expression {
    type Error = Error;

    fn try_from(doc: ExpressionDoc) -> Result<Self> {
        let mut e = Expression::zero();
        for t in doc.terms {
            let coeff = parse_rational(&t.coeff)?;
            if coeff.is_zero() {
                return Err(Error::Config("stored coefficients must be non-zero".into()));
            }
            e.add_term(Word::new(t.word), coeff);
        }
        Ok(e)
    }
}

fn parse_rational(text: &str) -> Result<BigRational> {
    let bad = || Error::Config(format!("bad rational `{text}`"));
    let (n, d) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text.trim(), "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

/// An expression whose words are all sorted in the canonical letter order.
/// Terms are stored sorted by word.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CanonicalForm(Expression);

impl CanonicalForm {
    pub fn expression(&self) -> &Expression {
        &self.0
    }

    pub fn into_expression(self) -> Expression {
        self.0
    }

    /// Coefficient of `CurvA^a CurvPhi^b NablaPhi^c`.
    pub fn coefficient(&self, a: usize, b: usize, c: usize) -> BigRational {
        self.0.coefficient(&Word::monomial(a, b, c))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &BigRational)> {
        self.0.terms()
    }

    pub(crate) fn from_sorted_terms(mut terms: Vec<(Word, BigRational)>) -> Self {
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        CanonicalForm(Expression::from_terms(terms))
    }
}

/// Sum of all `3^k` words of length `k`, each with coefficient 1.
pub fn expand_power(k: usize) -> Result<Expression> {
    if k == 0 || k > MAX_EXPANSION_DEGREE {
        return Err(Error::SizeLimit(format!(
            "expand_power needs 1 <= k <= {MAX_EXPANSION_DEGREE}, got {k}"
        )));
    }
    let count = 3usize.pow(k as u32);
    let one = BigRational::one();
    let mut terms = IndexMap::with_capacity(count);
    let mut digits = vec![0usize; k];
    for _ in 0..count {
        let word: Word = digits.iter().map(|&d| Generator::ALL[d]).collect();
        terms.insert(word, one.clone());
        // odometer, last letter fastest
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < 3 {
                break;
            }
            *d = 0;
        }
    }
    Ok(Expression { terms })
}

/// Sub-expression of words with bidegree exactly `(base, fiber)`.
pub fn filter_bidegree(e: &Expression, base: usize, fiber: usize) -> Expression {
    let target = Bidegree::new(base, fiber);
    Expression {
        terms: e.terms.iter().filter(|(w, _)| w.bidegree() == target).map(|(w, c)| (w.clone(), c.clone())).collect(),
    }
}

/// Merges words that agree up to reordering. Sign-free because every
/// generator has even total degree.
pub fn canonicalize(e: &Expression) -> CanonicalForm {
    let mut merged: IndexMap<Word, BigRational> = IndexMap::new();
    for (w, c) in e.terms() {
        *merged.entry(w.sorted()).or_insert_with(BigRational::zero) += c;
    }
    CanonicalForm::from_sorted_terms(merged.into_iter().filter(|(_, c)| !c.is_zero()).collect())
}
