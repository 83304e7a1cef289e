use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Bidegree `(base, fiber)` of a form on a product `M x X`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bidegree {
    pub base: usize,
    pub fiber: usize,
}

impl Bidegree {
    pub const fn new(base: usize, fiber: usize) -> Self {
        Self { base, fiber }
    }

    pub const fn total(self) -> usize {
        self.base + self.fiber
    }
}

impl std::ops::Add for Bidegree {
    type Output = Bidegree;

    fn add(self, rhs: Bidegree) -> Bidegree {
        Bidegree::new(self.base + rhs.base, self.fiber + rhs.fiber)
    }
}

/// One of the three curvature pieces of the caloron connection. The derived
/// order is the canonical letter order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Generator {
    /// `F_A`, type (2,0).
    #[serde(rename = "FA")]
    CurvA,
    /// `F_Phi`, type (0,2).
    #[serde(rename = "FPhi")]
    CurvPhi,
    /// `NablaPhi`, type (1,1).
    #[serde(rename = "NablaPhi")]
    NablaPhi,
}

impl Generator {
    pub const ALL: [Generator; 3] = [Generator::CurvA, Generator::CurvPhi, Generator::NablaPhi];

    pub const fn bidegree(self) -> Bidegree {
        match self {
            Generator::CurvA => Bidegree::new(2, 0),
            Generator::CurvPhi => Bidegree::new(0, 2),
            Generator::NablaPhi => Bidegree::new(1, 1),
        }
    }

    pub const fn plain_name(self) -> &'static str {
        match self {
            Generator::CurvA => "FA",
            Generator::CurvPhi => "FPhi",
            Generator::NablaPhi => "NablaPhi",
        }
    }

    pub const fn latex_name(self) -> &'static str {
        match self {
            Generator::CurvA => "F_A",
            Generator::CurvPhi => "F_\\Phi",
            Generator::NablaPhi => "\\nabla\\Phi",
        }
    }

    pub fn from_name(name: &str) -> Result<Generator> {
        match name {
            "FA" => Ok(Generator::CurvA),
            "FPhi" => Ok(Generator::CurvPhi),
            "NablaPhi" => Ok(Generator::NablaPhi),
            other => Err(Error::Config(format!("unknown generator `{other}`"))),
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.plain_name())
    }
}

/// An ordered product of generators, i.e. the argument list of one term
/// `f(X_1, ..., X_k)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<Generator>);

impl Word {
    pub fn new(letters: Vec<Generator>) -> Self {
        Word(letters)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// `CurvA^a CurvPhi^b NablaPhi^c`, already in canonical order.
    pub fn monomial(a: usize, b: usize, c: usize) -> Self {
        let mut letters = Vec::with_capacity(a + b + c);
        letters.extend(std::iter::repeat_n(Generator::CurvA, a));
        letters.extend(std::iter::repeat_n(Generator::CurvPhi, b));
        letters.extend(std::iter::repeat_n(Generator::NablaPhi, c));
        Word(letters)
    }

    /// Builds a word from `(generator, power)` runs, keeping the written order.
    pub fn from_runs(runs: &[(Generator, usize)]) -> Self {
        let mut letters = Vec::new();
        for &(g, power) in runs {
            letters.extend(std::iter::repeat_n(g, power));
        }
        Word(letters)
    }

    pub fn letters(&self) -> &[Generator] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bidegree(&self) -> Bidegree {
        self.0.iter().fold(Bidegree::new(0, 0), |acc, g| acc + g.bidegree())
    }

    /// Letter counts `(a, b, c)` of `CurvA`, `CurvPhi`, `NablaPhi`.
    pub fn counts(&self) -> (usize, usize, usize) {
        self.0.iter().fold((0, 0, 0), |(a, b, c), g| match g {
            Generator::CurvA => (a + 1, b, c),
            Generator::CurvPhi => (a, b + 1, c),
            Generator::NablaPhi => (a, b, c + 1),
        })
    }

    pub fn sorted(&self) -> Word {
        let mut letters = self.0.clone();
        letters.sort();
        Word(letters)
    }

    pub fn is_canonical(&self) -> bool {
        self.0.windows(2).all(|w| w[0] <= w[1])
    }

    /// Consecutive runs `(generator, power)` in written order.
    pub fn runs(&self) -> Vec<(Generator, usize)> {
        let mut runs: Vec<(Generator, usize)> = Vec::new();
        for &g in &self.0 {
            match runs.last_mut() {
                Some((last, n)) if *last == g => *n += 1,
                _ => runs.push((g, 1)),
            }
        }
        runs
    }
}

impl FromIterator<Generator> for Word {
    fn from_iter<I: IntoIterator<Item = Generator>>(iter: I) -> Self {
        Word(iter.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_bidegrees_have_total_two() {
        for g in Generator::ALL {
            assert_eq!(g.bidegree().total(), 2);
        }
    }

    #[test]
    fn word_bidegree_from_counts() {
        let w = Word::from_runs(&[(Generator::NablaPhi, 1), (Generator::CurvA, 2), (Generator::CurvPhi, 1)]);
        let (a, b, c) = w.counts();
        assert_eq!((a, b, c), (2, 1, 1));
        assert_eq!(w.bidegree(), Bidegree::new(2 * a + c, 2 * b + c));
        assert_eq!(w.bidegree().total(), 2 * w.len());
        assert!(!w.is_canonical());
        assert!(w.sorted().is_canonical());
    }

    #[test]
    fn runs_collapse_repeats() {
        let w = Word::from_runs(&[(Generator::NablaPhi, 2), (Generator::CurvPhi, 1), (Generator::NablaPhi, 1)]);
        assert_eq!(w.runs(), vec![(Generator::NablaPhi, 2), (Generator::CurvPhi, 1), (Generator::NablaPhi, 1)]);
    }
}
