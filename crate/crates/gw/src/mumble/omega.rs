//! Sieves and the subobject classifier.
//!
//! A sieve on `c` is a set of arrows into `c` closed under precomposition.
//! The classifier presheaf has all sieves on `c` as its stalk at `c`,
//! restriction pulls a sieve back along an arrow, and a subpresheaf is
//! recovered from its characteristic map as the preimage of the maximal
//! sieves.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::sync::Arc;

use super::category::FiniteCategory;
use super::presheaf::{NatTrans, Presheaf, PresheafError, SubPresheaf, Value};

/// Whether `arrows` (names of arrows into `c`) is closed under
/// precomposition by every composable arrow.
pub fn is_sieve(cat: &FiniteCategory, c: &str, arrows: &BTreeSet<String>) -> bool {
    arrows.iter().all(|f_name| {
        let f = match cat.arrows().iter().find(|a| &a.name == f_name) {
            Some(f) if f.target == c => f,
            _ => return false,
        };
        cat.arrows_into(&f.source).iter().all(|g| {
            let composed = cat.compose(f_name, &g.name).expect("validated category");
            arrows.contains(composed)
        })
    })
}

/// All sieves on `c`, enumerated by filtering subsets of the arrows into `c`.
pub fn sieves_on(cat: &FiniteCategory, c: &str) -> Vec<BTreeSet<String>> {
    let into: Vec<String> = cat.arrows_into(c).iter().map(|a| a.name.clone()).collect();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << into.len()) {
        let candidate: BTreeSet<String> = into
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, name)| name.clone())
            .collect();
        if is_sieve(cat, c, &candidate) {
            out.push(candidate);
        }
    }
    out
}

/// The maximal sieve on `c`: every arrow into `c`.
pub fn maximal_sieve(cat: &FiniteCategory, c: &str) -> BTreeSet<String> {
    cat.arrows_into(c).iter().map(|a| a.name.clone()).collect()
}

/// Pulls a sieve on `c` back along `f: d -> c`:
/// `{ g into d | f . g  in  sieve }`.
pub fn restrict_sieve(
    cat: &FiniteCategory,
    f: &str,
    sieve: &BTreeSet<String>,
) -> BTreeSet<String> {
    let arrow = cat
        .arrows()
        .iter()
        .find(|a| a.name == f)
        .expect("arrow exists");
    cat.arrows_into(&arrow.source)
        .iter()
        .filter(|g| {
            let composed = cat.compose(f, &g.name).expect("validated category");
            sieve.contains(composed)
        })
        .map(|g| g.name.clone())
        .collect()
}

/// The subobject classifier presheaf: sieves at each object, pulled back
/// along arrows.
pub fn omega(cat: Arc<FiniteCategory>) -> Presheaf {
    let mut sets = BTreeMap::new();
    for object in cat.objects() {
        let stalk: Vec<Value> = sieves_on(&cat, object).into_iter().map(Value::Sieve).collect();
        sets.insert(object.clone(), stalk);
    }
    let mut maps = BTreeMap::new();
    for arrow in cat.arrows() {
        let mut map = BTreeMap::new();
        for element in &sets[&arrow.target] {
            let sieve = match element {
                Value::Sieve(s) => s,
                _ => unreachable!(),
            };
            map.insert(
                element.clone(),
                Value::Sieve(restrict_sieve(&cat, &arrow.name, sieve)),
            );
        }
        maps.insert(arrow.name.clone(), map);
    }
    Presheaf::new(cat, sets, maps).expect("the classifier is lawful")
}

/// The point `true: 1 -> Omega` picking the maximal sieve at each object.
pub fn tru(terminal: &Presheaf, classifier: &Presheaf) -> Result<NatTrans, PresheafError> {
    let cat = terminal.category().clone();
    let components = cat
        .objects()
        .iter()
        .map(|object| {
            (
                object.clone(),
                BTreeMap::from([(
                    Value::atom("*"),
                    Value::Sieve(maximal_sieve(&cat, object)),
                )]),
            )
        })
        .collect();
    NatTrans::new(
        "true".to_string(),
        "1".to_string(),
        "Omega".to_string(),
        terminal,
        classifier,
        components,
    )
}

/// The characteristic map of a subpresheaf `S` of `X`: at `c`, an element
/// `x` goes to the sieve of arrows that restrict `x` into `S`.
pub fn characteristic_map(
    ambient: &Presheaf,
    sub: &SubPresheaf,
    classifier: &Presheaf,
) -> Result<NatTrans, PresheafError> {
    sub.validate(ambient)?;
    let cat = ambient.category().clone();
    let mut components = BTreeMap::new();
    for object in cat.objects() {
        let mut component = BTreeMap::new();
        for element in ambient.stalk(object)? {
            let sieve: BTreeSet<String> = cat
                .arrows_into(object)
                .iter()
                .filter(|f| {
                    let restricted = ambient
                        .restrict(&f.name, element)
                        .expect("total restriction");
                    sub.contains(&f.source, &restricted)
                })
                .map(|f| f.name.clone())
                .collect();
            component.insert(element.clone(), Value::Sieve(sieve));
        }
        components.insert(object.clone(), component);
    }
    NatTrans::new(
        "chi".to_string(),
        "X".to_string(),
        "Omega".to_string(),
        ambient,
        classifier,
        components,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mumble::smallcat;

    #[test]
    fn terminal_category_has_two_sieves() {
        let cat = smallcat::terminal();
        let sieves = sieves_on(&cat, "*");
        assert_eq!(sieves.len(), 2);
        assert!(sieves.contains(&BTreeSet::new()));
        assert!(sieves.contains(&BTreeSet::from(["id".to_string()])));
    }

    #[test]
    fn arrow_category_sieve_counts() {
        let cat = smallcat::arrow_category();
        let at_one = sieves_on(&cat, "1");
        assert_eq!(at_one.len(), 3);
        assert!(at_one.contains(&BTreeSet::new()));
        assert!(at_one.contains(&BTreeSet::from(["u".to_string()])));
        assert!(at_one.contains(&BTreeSet::from(["u".to_string(), "id1".to_string()])));
        // {id1} alone is not closed: id1 . u = u must also be present.
        assert!(!is_sieve(&cat, "1", &BTreeSet::from(["id1".to_string()])));
        assert_eq!(sieves_on(&cat, "0").len(), 2);
    }

    #[test]
    fn classifier_is_a_lawful_presheaf() {
        for (name, cat) in smallcat::gallery() {
            let cat = Arc::new(cat);
            let classifier = omega(cat.clone());
            for object in cat.objects() {
                assert!(
                    !classifier.stalk(object).unwrap().is_empty(),
                    "no sieves at {object} in {name}"
                );
            }
        }
    }

    #[test]
    fn restriction_of_maximal_is_maximal() {
        for (_, cat) in smallcat::gallery() {
            for arrow in cat.arrows() {
                let pulled = restrict_sieve(&cat, &arrow.name, &maximal_sieve(&cat, &arrow.target));
                assert_eq!(pulled, maximal_sieve(&cat, &arrow.source));
            }
        }
    }

    #[test]
    fn tru_is_natural() {
        let cat = Arc::new(smallcat::arrow_category());
        let terminal = Presheaf::terminal(cat.clone());
        let classifier = omega(cat);
        tru(&terminal, &classifier).unwrap();
    }

    #[test]
    fn characteristic_map_recovers_the_subpresheaf() {
        let cat = Arc::new(smallcat::arrow_category());
        let x = Presheaf::representable(cat.clone(), "1").unwrap();
        let classifier = omega(cat.clone());
        // S(1) = {}, S(0) = {u}: a subpresheaf with empty top stalk.
        let mut sub = SubPresheaf::empty(&x);
        sub.insert("0", Value::atom("u"));
        sub.validate(&x).unwrap();
        let chi = characteristic_map(&x, &sub, &classifier).unwrap();
        for object in cat.objects() {
            for element in x.stalk(object).unwrap() {
                let image = chi.apply(object, element).unwrap();
                let maximal = Value::Sieve(maximal_sieve(&cat, object));
                assert_eq!(sub.contains(object, element), image == maximal);
            }
        }
        // The sieve classifying id1 is {u}: u restricts id1 into S, id1 does not.
        assert_eq!(
            chi.apply("1", &Value::atom("id1")).unwrap(),
            Value::Sieve(BTreeSet::from(["u".to_string()]))
        );
    }

    #[test]
    fn characteristic_maps_are_natural_across_gallery() {
        for (_, cat) in smallcat::gallery() {
            let cat = Arc::new(cat);
            let classifier = omega(cat.clone());
            for object in cat.objects().to_vec() {
                let x = Presheaf::representable(cat.clone(), &object).unwrap();
                let full = SubPresheaf::full(&x);
                let empty = SubPresheaf::empty(&x);
                characteristic_map(&x, &full, &classifier).unwrap();
                characteristic_map(&x, &empty, &classifier).unwrap();
            }
        }
    }
}
