//! The Heyting algebra of subpresheaves of a fixed presheaf.
//!
//! Meets and joins are pointwise. Implication quantifies over arrows:
//! `x` lies in `(A => B)(c)` when every restriction of `x` that lands in
//! `A` also lands in `B`. Negation is implication into the empty
//! subpresheaf, and is intuitionistic: double negation can strictly
//! enlarge a subpresheaf.

use super::presheaf::{Presheaf, PresheafError, SubPresheaf};

pub fn meet(a: &SubPresheaf, b: &SubPresheaf) -> SubPresheaf {
    SubPresheaf {
        sets: a
            .sets
            .iter()
            .map(|(object, subset)| {
                let other = b.sets.get(object).cloned().unwrap_or_default();
                (
                    object.clone(),
                    subset.intersection(&other).cloned().collect(),
                )
            })
            .collect(),
    }
}

pub fn join(a: &SubPresheaf, b: &SubPresheaf) -> SubPresheaf {
    SubPresheaf {
        sets: a
            .sets
            .iter()
            .map(|(object, subset)| {
                let other = b.sets.get(object).cloned().unwrap_or_default();
                (object.clone(), subset.union(&other).cloned().collect())
            })
            .collect(),
    }
}

/// Heyting implication inside `ambient`: membership at `c` requires every
/// restriction landing in `a` to land in `b` as well.
pub fn implies(
    ambient: &Presheaf,
    a: &SubPresheaf,
    b: &SubPresheaf,
) -> Result<SubPresheaf, PresheafError> {
    let cat = ambient.category().clone();
    let mut out = SubPresheaf::empty(ambient);
    for object in cat.objects() {
        for element in ambient.stalk(object)? {
            let mut admitted = true;
            for f in cat.arrows_into(object) {
                let restricted = ambient.restrict(&f.name, element)?;
                if a.contains(&f.source, &restricted) && !b.contains(&f.source, &restricted) {
                    admitted = false;
                    break;
                }
            }
            if admitted {
                out.insert(object, element.clone());
            }
        }
    }
    Ok(out)
}

pub fn not(ambient: &Presheaf, a: &SubPresheaf) -> Result<SubPresheaf, PresheafError> {
    implies(ambient, a, &SubPresheaf::empty(ambient))
}

/// Every subpresheaf of `ambient`, by filtering per-object subsets for
/// closure under restriction. Exponential in the total stalk size; meant
/// for small presheaves in exhaustive law checks.
pub fn all_subpresheaves(ambient: &Presheaf) -> Result<Vec<SubPresheaf>, PresheafError> {
    let cat = ambient.category().clone();
    let objects = cat.objects().to_vec();
    let mut candidates = vec![SubPresheaf::empty(ambient)];
    for object in &objects {
        let stalk = ambient.stalk(object)?.to_vec();
        assert!(stalk.len() <= 16, "stalk too large for exhaustive search");
        let mut next = Vec::with_capacity(candidates.len() << stalk.len());
        for candidate in &candidates {
            for mask in 0u32..(1u32 << stalk.len()) {
                let mut extended = candidate.clone();
                for (i, v) in stalk.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        extended.insert(object, v.clone());
                    }
                }
                next.push(extended);
            }
        }
        candidates = next;
    }
    Ok(candidates
        .into_iter()
        .filter(|s| s.validate(ambient).is_ok())
        .collect())
}
