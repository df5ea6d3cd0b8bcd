use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DistError {
    #[error("distribution weight for {element} is negative")]
    NegativeWeight { element: String },
    #[error("distribution mass is {mass}, expected exactly 1")]
    MassNotOne { mass: String },
}

/// A finitely supported probability distribution with exact rational
/// weights. Zero-weight entries are dropped so equal distributions compare
/// equal structurally, and the total mass is exactly one.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct FiniteDist {
    weights: BTreeMap<Element, BigRational>,
}

impl FiniteDist {
    pub fn new(
        pairs: impl IntoIterator<Item = (Element, BigRational)>,
    ) -> Result<Self, DistError> {
        let mut weights: BTreeMap<Element, BigRational> = BTreeMap::new();
        for (e, w) in pairs {
            if w < BigRational::zero() {
                return Err(DistError::NegativeWeight { element: format!("{e}") });
            }
            if w.is_zero() {
                continue;
            }
            *weights.entry(e).or_insert_with(BigRational::zero) += w;
        }
        let mass: BigRational = weights.values().cloned().sum();
        if !mass.is_one() {
            return Err(DistError::MassNotOne { mass: mass.to_string() });
        }
        Ok(FiniteDist { weights })
    }

    /// The point mass on a single element.
    pub fn dirac(e: Element) -> Self {
        let mut weights = BTreeMap::new();
        weights.insert(e, BigRational::one());
        FiniteDist { weights }
    }

    /// The uniform distribution on a nonempty collection of distinct
    /// elements.
    pub fn uniform(elems: impl IntoIterator<Item = Element>) -> Result<Self, DistError> {
        let elems: BTreeSet<Element> = elems.into_iter().collect();
        let n = BigRational::from_integer(elems.len().into());
        Self::new(elems.into_iter().map(|e| (e, BigRational::one() / n.clone())))
    }

    pub fn support(&self) -> impl Iterator<Item = &Element> {
        self.weights.keys()
    }

    pub fn weight(&self, e: &Element) -> BigRational {
        self.weights.get(e).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Element, &BigRational)> {
        self.weights.iter()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Pushforward along `f`: the image weight of `y` is the total weight of
    /// the preimage of `y`. Mass is preserved exactly.
    pub fn pushforward<E>(
        &self,
        mut f: impl FnMut(&Element) -> Result<Element, E>,
    ) -> Result<FiniteDist, E> {
        let mut weights: BTreeMap<Element, BigRational> = BTreeMap::new();
        for (e, w) in &self.weights {
            let image = f(e)?;
            *weights.entry(image).or_insert_with(BigRational::zero) += w.clone();
        }
        Ok(FiniteDist { weights })
    }
}

impl fmt::Display for FiniteDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (e, w)) in self.weights.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{e}: {w}")?;
        }
        write!(f, "}}")
    }
}

/// An element of `F(X)` for some signature `F` over a carrier `X`. The
/// variants mirror the signature constructors; which shapes are legal for a
/// given signature is checked by carrier membership, not by the type.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Element {
    /// A carrier state, the leaf for the identity functor.
    State(String),
    /// A label drawn from a constant functor's label set.
    Label(String),
    /// A total function from an exponent label set, for `F^A`.
    Function(BTreeMap<String, Element>),
    /// A finite subset, for `P(F)`.
    Subset(BTreeSet<Element>),
    /// A probability distribution, for `D(F)`.
    Distribution(FiniteDist),
    /// A pair, for `F x G`.
    Pair(Box<Element>, Box<Element>),
    /// Left injection into `F + G`.
    InLeft(Box<Element>),
    /// Right injection into `F + G`.
    InRight(Box<Element>),
}

impl Element {
    pub fn state(s: impl Into<String>) -> Self {
        Element::State(s.into())
    }

    pub fn label(l: impl Into<String>) -> Self {
        Element::Label(l.into())
    }

    pub fn pair(l: Element, r: Element) -> Self {
        Element::Pair(Box::new(l), Box::new(r))
    }

    pub fn subset(elems: impl IntoIterator<Item = Element>) -> Self {
        Element::Subset(elems.into_iter().collect())
    }

    pub fn function(entries: impl IntoIterator<Item = (String, Element)>) -> Self {
        Element::Function(entries.into_iter().collect())
    }

    pub fn inl(e: Element) -> Self {
        Element::InLeft(Box::new(e))
    }

    pub fn inr(e: Element) -> Self {
        Element::InRight(Box::new(e))
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::State(s) => write!(f, "{s}"),
            Element::Label(l) => write!(f, "{l}"),
            Element::Function(m) => {
                write!(f, "[")?;
                for (i, (k, v)) in m.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{k} -> {v}")?;
                }
                write!(f, "]")
            }
            Element::Subset(s) => {
                write!(f, "{{")?;
                for (i, e) in s.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, "}}")
            }
            Element::Distribution(d) => write!(f, "{d}"),
            Element::Pair(a, b) => write!(f, "({a}, {b})"),
            Element::InLeft(e) => write!(f, "inl({e})"),
            Element::InRight(e) => write!(f, "inr({e})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn mass_must_be_exactly_one() {
        let half = FiniteDist::new(vec![
            (Element::state("x"), rat(1, 2)),
            (Element::state("y"), rat(1, 2)),
        ]);
        assert!(half.is_ok());

        let short = FiniteDist::new(vec![(Element::state("x"), rat(1, 2))]);
        assert!(matches!(short, Err(DistError::MassNotOne { .. })));

        let neg = FiniteDist::new(vec![
            (Element::state("x"), rat(3, 2)),
            (Element::state("y"), rat(-1, 2)),
        ]);
        assert!(matches!(neg, Err(DistError::NegativeWeight { .. })));
    }

    #[test]
    fn zero_weights_are_dropped_and_duplicates_merge() {
        let d = FiniteDist::new(vec![
            (Element::state("x"), rat(1, 3)),
            (Element::state("x"), rat(1, 3)),
            (Element::state("y"), rat(1, 3)),
            (Element::state("z"), rat(0, 1)),
        ])
        .unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.weight(&Element::state("x")), rat(2, 3));
        assert_eq!(d, FiniteDist::new(vec![
            (Element::state("x"), rat(2, 3)),
            (Element::state("y"), rat(1, 3)),
        ]).unwrap());
    }

    #[test]
    fn pushforward_merges_preimages_exactly() {
        let d = FiniteDist::uniform([Element::state("x"), Element::state("y")]).unwrap();
        let image = d
            .pushforward::<()>(|_| Ok(Element::state("z")))
            .unwrap();
        assert_eq!(image, FiniteDist::dirac(Element::state("z")));
    }
}
