use std::collections::BTreeMap;
use std::collections::BTreeSet;

use thiserror::Error;

use super::element::Element;
use super::signature::FunctorSignature;

/// Enumeration is capped so accidental exponential blowups fail loudly
/// instead of exhausting memory.
pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum FunctorError {
    #[error("signature contains D, so the carrier is not enumerable; use membership instead")]
    NotEnumerable,
    #[error("enumeration would exceed the cap of {cap} elements")]
    EnumerationCap { cap: usize },
    #[error("element has the wrong shape for {signature}: {element}")]
    ShapeMismatch { signature: String, element: String },
    #[error("state `{state}` is not in the domain of the map")]
    UnmappedState { state: String },
}

/// The action of a signature on a carrier set: a description of `F(X)`
/// supporting membership tests always and full enumeration whenever the
/// signature is free of `D`.
#[derive(Debug, Clone)]
pub struct FunctorCarrier {
    signature: FunctorSignature,
    base: BTreeSet<Element>,
}

/// Applies `sig` to a carrier set. Carrier elements are arbitrary
/// [`Element`] values so descriptions compose; a plain state space is the
/// set of `Element::State` values.
pub fn apply_functor_set(
    sig: &FunctorSignature,
    carrier: &BTreeSet<Element>,
) -> FunctorCarrier {
    FunctorCarrier { signature: sig.clone(), base: carrier.clone() }
}

impl FunctorCarrier {
    pub fn signature(&self) -> &FunctorSignature {
        &self.signature
    }

    /// Membership in `F(X)`. For `D` nodes this checks that the value is a
    /// distribution whose support lies in the inner carrier; total mass one
    /// is guaranteed by construction of [`super::FiniteDist`].
    pub fn contains(&self, e: &Element) -> bool {
        contains_rec(&self.signature, e, &|x| self.base.contains(x))
    }

    /// Fully enumerates `F(X)` with the default cap.
    pub fn enumerate(&self) -> Result<BTreeSet<Element>, FunctorError> {
        self.enumerate_capped(DEFAULT_ENUMERATION_CAP)
    }

    pub fn enumerate_capped(&self, cap: usize) -> Result<BTreeSet<Element>, FunctorError> {
        enumerate_rec(&self.signature, &self.base, cap)
    }
}

fn contains_rec(
    sig: &FunctorSignature,
    e: &Element,
    base: &dyn Fn(&Element) -> bool,
) -> bool {
    match (sig, e) {
        (FunctorSignature::Identity, e) => base(e),
        (FunctorSignature::Const(ls), Element::Label(l)) => ls.contains(l),
        (FunctorSignature::Const(_), _) => false,
        (FunctorSignature::Exp(inner, exp), Element::Function(m)) => {
            m.len() == exp.len()
                && m.keys().all(|k| exp.contains(k))
                && m.values().all(|v| contains_rec(inner, v, base))
        }
        (FunctorSignature::Exp(..), _) => false,
        (FunctorSignature::Power(inner), Element::Subset(s)) => {
            s.iter().all(|v| contains_rec(inner, v, base))
        }
        (FunctorSignature::Power(_), _) => false,
        (FunctorSignature::Dist(inner), Element::Distribution(d)) => {
            d.support().all(|v| contains_rec(inner, v, base))
        }
        (FunctorSignature::Dist(_), _) => false,
        (FunctorSignature::Compose(outer, inner), e) => {
            contains_rec(outer, e, &|y| contains_rec(inner, y, base))
        }
        (FunctorSignature::Product(l, r), Element::Pair(a, b)) => {
            contains_rec(l, a, base) && contains_rec(r, b, base)
        }
        (FunctorSignature::Product(..), _) => false,
        (FunctorSignature::Coproduct(l, _), Element::InLeft(a)) => contains_rec(l, a, base),
        (FunctorSignature::Coproduct(_, r), Element::InRight(b)) => contains_rec(r, b, base),
        (FunctorSignature::Coproduct(..), _) => false,
    }
}

fn checked(len: usize, cap: usize) -> Result<usize, FunctorError> {
    if len > cap {
        Err(FunctorError::EnumerationCap { cap })
    } else {
        Ok(len)
    }
}

fn enumerate_rec(
    sig: &FunctorSignature,
    base: &BTreeSet<Element>,
    cap: usize,
) -> Result<BTreeSet<Element>, FunctorError> {
    match sig {
        FunctorSignature::Identity => Ok(base.clone()),
        FunctorSignature::Const(ls) => {
            Ok(ls.labels().iter().map(Element::label).collect())
        }
        FunctorSignature::Exp(inner, exp) => {
            let values: Vec<Element> = enumerate_rec(inner, base, cap)?.into_iter().collect();
            let count = values
                .len()
                .checked_pow(exp.len() as u32)
                .ok_or(FunctorError::EnumerationCap { cap })?;
            checked(count, cap)?;
            let keys: Vec<&String> = exp.labels().iter().collect();
            let mut out = BTreeSet::new();
            let mut idx = vec![0usize; keys.len()];
            if values.is_empty() && !keys.is_empty() {
                return Ok(out);
            }
            loop {
                out.insert(Element::Function(
                    keys.iter()
                        .zip(&idx)
                        .map(|(k, &i)| ((*k).clone(), values[i].clone()))
                        .collect(),
                ));
                let mut carry = keys.len();
                for pos in (0..keys.len()).rev() {
                    idx[pos] += 1;
                    if idx[pos] < values.len() {
                        carry = pos;
                        break;
                    }
                    idx[pos] = 0;
                }
                if carry == keys.len() {
                    break;
                }
            }
            Ok(out)
        }
        FunctorSignature::Power(inner) => {
            let values: Vec<Element> = enumerate_rec(inner, base, cap)?.into_iter().collect();
            if values.len() >= usize::BITS as usize - 1 {
                return Err(FunctorError::EnumerationCap { cap });
            }
            checked(1usize << values.len(), cap)?;
            let mut out = BTreeSet::new();
            for mask in 0..(1usize << values.len()) {
                out.insert(Element::Subset(
                    values
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask >> i & 1 == 1)
                        .map(|(_, v)| v.clone())
                        .collect(),
                ));
            }
            Ok(out)
        }
        FunctorSignature::Dist(_) => Err(FunctorError::NotEnumerable),
        FunctorSignature::Compose(outer, inner) => {
            let mid = enumerate_rec(inner, base, cap)?;
            enumerate_rec(outer, &mid, cap)
        }
        FunctorSignature::Product(l, r) => {
            let ls = enumerate_rec(l, base, cap)?;
            let rs = enumerate_rec(r, base, cap)?;
            checked(ls.len().saturating_mul(rs.len()), cap)?;
            let mut out = BTreeSet::new();
            for a in &ls {
                for b in &rs {
                    out.insert(Element::pair(a.clone(), b.clone()));
                }
            }
            Ok(out)
        }
        FunctorSignature::Coproduct(l, r) => {
            let ls = enumerate_rec(l, base, cap)?;
            let rs = enumerate_rec(r, base, cap)?;
            checked(ls.len().saturating_add(rs.len()), cap)?;
            let mut out: BTreeSet<Element> =
                ls.into_iter().map(Element::inl).collect();
            out.extend(rs.into_iter().map(Element::inr));
            Ok(out)
        }
    }
}

/// The action `F(f)` of a signature on a state map `f`, applied elementwise
/// to values of `F(X)`.
#[derive(Debug, Clone)]
pub struct FunctorMap {
    signature: FunctorSignature,
    map: BTreeMap<String, String>,
}

pub fn apply_functor_map(sig: &FunctorSignature, map: &BTreeMap<String, String>) -> FunctorMap {
    FunctorMap { signature: sig.clone(), map: map.clone() }
}

impl FunctorMap {
    pub fn apply(&self, e: &Element) -> Result<Element, FunctorError> {
        let base = |x: &Element| match x {
            Element::State(s) => self
                .map
                .get(s)
                .map(|t| Element::state(t.clone()))
                .ok_or_else(|| FunctorError::UnmappedState { state: s.clone() }),
            other => Err(FunctorError::ShapeMismatch {
                signature: "_".to_string(),
                element: other.to_string(),
            }),
        };
        map_rec(&self.signature, e, &base)
    }
}

fn map_rec(
    sig: &FunctorSignature,
    e: &Element,
    base: &dyn Fn(&Element) -> Result<Element, FunctorError>,
) -> Result<Element, FunctorError> {
    let mismatch = |e: &Element| FunctorError::ShapeMismatch {
        signature: sig.to_string(),
        element: e.to_string(),
    };
    match (sig, e) {
        (FunctorSignature::Identity, e) => base(e),
        (FunctorSignature::Const(ls), Element::Label(l)) if ls.contains(l) => Ok(e.clone()),
        (FunctorSignature::Const(_), e) => Err(mismatch(e)),
        (FunctorSignature::Exp(inner, exp), Element::Function(m)) => {
            if m.len() != exp.len() || !m.keys().all(|k| exp.contains(k)) {
                return Err(mismatch(e));
            }
            let mut out = BTreeMap::new();
            for (k, v) in m {
                out.insert(k.clone(), map_rec(inner, v, base)?);
            }
            Ok(Element::Function(out))
        }
        (FunctorSignature::Power(inner), Element::Subset(s)) => {
            let mut out = BTreeSet::new();
            for v in s {
                out.insert(map_rec(inner, v, base)?);
            }
            Ok(Element::Subset(out))
        }
        (FunctorSignature::Dist(inner), Element::Distribution(d)) => Ok(Element::Distribution(
            d.pushforward(|v| map_rec(inner, v, base))?,
        )),
        (FunctorSignature::Compose(outer, inner), e) => {
            map_rec(outer, e, &|y| map_rec(inner, y, base))
        }
        (FunctorSignature::Product(l, r), Element::Pair(a, b)) => Ok(Element::pair(
            map_rec(l, a, base)?,
            map_rec(r, b, base)?,
        )),
        (FunctorSignature::Coproduct(l, _), Element::InLeft(a)) => {
            Ok(Element::inl(map_rec(l, a, base)?))
        }
        (FunctorSignature::Coproduct(_, r), Element::InRight(b)) => {
            Ok(Element::inr(map_rec(r, b, base)?))
        }
        (_, e) => Err(mismatch(e)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coalgebra::element::FiniteDist;
    use crate::coalgebra::signature::LabelSet;
    use num_rational::BigRational;

    fn states(names: &[&str]) -> BTreeSet<Element> {
        names.iter().map(|s| Element::state(*s)).collect()
    }

    fn lts_sig(labels: &[&str]) -> FunctorSignature {
        FunctorSignature::lts(LabelSet::new("A", labels.iter().copied()).unwrap())
    }

    #[test]
    fn enumerates_lts_functor() {
        let carrier = states(&["x", "y"]);
        let fx = apply_functor_set(&lts_sig(&["a", "b"]), &carrier);
        let all = fx.enumerate().unwrap();
        assert_eq!(all.len(), 16);
        let singleton = Element::subset([Element::pair(Element::label("a"), Element::state("x"))]);
        assert!(all.contains(&singleton));
        assert!(fx.contains(&singleton));
        let stray = Element::subset([Element::pair(Element::label("c"), Element::state("x"))]);
        assert!(!fx.contains(&stray));
    }

    #[test]
    fn enumerates_exponent_functor() {
        let sig = FunctorSignature::parse("_^A{a0,a1}").unwrap();
        let carrier = states(&["x", "y", "z"]);
        let all = apply_functor_set(&sig, &carrier).enumerate().unwrap();
        assert_eq!(all.len(), 9);
    }

    #[test]
    fn dist_carrier_is_intensional() {
        let carrier = states(&["x", "y"]);
        let dx = apply_functor_set(&FunctorSignature::parse("D").unwrap(), &carrier);
        assert!(matches!(dx.enumerate(), Err(FunctorError::NotEnumerable)));

        let uniform = Element::Distribution(
            FiniteDist::uniform([Element::state("x"), Element::state("y")]).unwrap(),
        );
        assert!(dx.contains(&uniform));
        let dirac = Element::Distribution(FiniteDist::dirac(Element::state("x")));
        assert!(dx.contains(&dirac));
        let outside = Element::Distribution(FiniteDist::dirac(Element::state("w")));
        assert!(!dx.contains(&outside));
    }

    #[test]
    fn segala_membership_matches_compose_form() {
        let mut alphabets = BTreeMap::new();
        alphabets.insert("A".to_string(), LabelSet::new("A", ["a", "b"]).unwrap());
        let applied =
            FunctorSignature::parse_with_alphabets("P(D(A x _))", &alphabets).unwrap();
        let composed =
            FunctorSignature::parse_with_alphabets("P o D o (A x _)", &alphabets).unwrap();
        let carrier = states(&["x", "y"]);
        let ca = apply_functor_set(&applied, &carrier);
        let cb = apply_functor_set(&composed, &carrier);
        let member = Element::subset([Element::Distribution(
            FiniteDist::uniform([
                Element::pair(Element::label("a"), Element::state("x")),
                Element::pair(Element::label("b"), Element::state("y")),
            ])
            .unwrap(),
        )]);
        let not_member = Element::subset([Element::Distribution(FiniteDist::dirac(
            Element::pair(Element::label("c"), Element::state("x")),
        ))]);
        for e in [&member, &not_member] {
            assert_eq!(ca.contains(e), cb.contains(e));
        }
        assert!(ca.contains(&member));
        assert!(!ca.contains(&not_member));
    }

    #[test]
    fn pushforward_on_dist_signature() {
        let sig = FunctorSignature::parse("D").unwrap();
        let mut f = BTreeMap::new();
        f.insert("x".to_string(), "z".to_string());
        f.insert("y".to_string(), "z".to_string());
        let ff = apply_functor_map(&sig, &f);
        let uniform = Element::Distribution(
            FiniteDist::uniform([Element::state("x"), Element::state("y")]).unwrap(),
        );
        let image = ff.apply(&uniform).unwrap();
        match image {
            Element::Distribution(d) => {
                assert_eq!(d.weight(&Element::state("z")), BigRational::from_integer(1.into()));
                assert_eq!(d.len(), 1);
            }
            other => panic!("expected a distribution, got {other}"),
        }
    }

    #[test]
    fn functor_map_reports_unmapped_state() {
        let sig = FunctorSignature::parse("P").unwrap();
        let ff = apply_functor_map(&sig, &BTreeMap::new());
        let e = Element::subset([Element::state("x")]);
        assert!(matches!(ff.apply(&e), Err(FunctorError::UnmappedState { .. })));
    }

    /// Functoriality, checked extensionally on small carriers:
    /// `F(id) = id` and `F(g . f) = F(g) . F(f)`.
    #[test]
    fn functoriality_on_enumerable_signatures() {
        let mut alphabets = BTreeMap::new();
        alphabets.insert("A".to_string(), LabelSet::new("A", ["a", "b"]).unwrap());
        let sigs = [
            "_",
            "A",
            "_^A",
            "P",
            "P(A x _)",
            "(_ + A) x _",
            "P o (A x _)",
        ];
        let carrier = states(&["x", "y", "z"]);
        let mut f = BTreeMap::new();
        f.insert("x".to_string(), "y".to_string());
        f.insert("y".to_string(), "y".to_string());
        f.insert("z".to_string(), "x".to_string());
        let mut g = BTreeMap::new();
        g.insert("x".to_string(), "z".to_string());
        g.insert("y".to_string(), "x".to_string());
        g.insert("z".to_string(), "x".to_string());
        let mut gf = BTreeMap::new();
        for (k, v) in &f {
            gf.insert(k.clone(), g[v].clone());
        }
        let ident: BTreeMap<String, String> =
            ["x", "y", "z"].iter().map(|s| (s.to_string(), s.to_string())).collect();

        for text in sigs {
            let sig = FunctorSignature::parse_with_alphabets(text, &alphabets).unwrap();
            let all = apply_functor_set(&sig, &carrier).enumerate().unwrap();
            let fid = apply_functor_map(&sig, &ident);
            let ff = apply_functor_map(&sig, &f);
            let fg = apply_functor_map(&sig, &g);
            let fgf = apply_functor_map(&sig, &gf);
            for e in &all {
                assert_eq!(fid.apply(e).unwrap(), *e, "F(id) /= id for {text}");
                assert_eq!(
                    fgf.apply(e).unwrap(),
                    fg.apply(&ff.apply(e).unwrap()).unwrap(),
                    "F(g.f) /= F(g).F(f) for {text}"
                );
            }
        }
    }
}
