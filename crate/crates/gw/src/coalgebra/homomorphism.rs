use std::collections::BTreeMap;
use std::collections::BTreeSet;

use thiserror::Error;

use super::element::Element;
use super::functor::{apply_functor_map, apply_functor_set, FunctorError};
use super::signature::FunctorSignature;

#[derive(Debug, Error)]
pub enum CoalgebraError {
    #[error("structure map is missing state `{state}`")]
    MissingState { state: String },
    #[error("structure map mentions `{state}`, which is not in the carrier")]
    StrayState { state: String },
    #[error("structure value for `{state}` is not in F(X): {value}")]
    ValueOutsideFunctor { state: String, value: String },
    #[error("source and destination signatures differ: `{src}` vs `{dst}`")]
    SignatureMismatch { src: String, dst: String },
    #[error("map is not total: state `{state}` has no image")]
    PartialMap { state: String },
    #[error("map sends `{state}` to `{image}`, which is not a destination state")]
    ImageOutsideCarrier { state: String, image: String },
    #[error(transparent)]
    Functor(#[from] FunctorError),
}

/// A finite coalgebra: a carrier set of named states together with a
/// structure map into `F(X)`. Construction validates that every state has a
/// structure value and that each value is a member of `F(X)`.
#[derive(Debug, Clone)]
pub struct Coalgebra {
    signature: FunctorSignature,
    carrier: BTreeSet<String>,
    structure: BTreeMap<String, Element>,
}

impl Coalgebra {
    pub fn new(
        signature: FunctorSignature,
        carrier: impl IntoIterator<Item = impl Into<String>>,
        structure: impl IntoIterator<Item = (impl Into<String>, Element)>,
    ) -> Result<Self, CoalgebraError> {
        let carrier: BTreeSet<String> = carrier.into_iter().map(Into::into).collect();
        let structure: BTreeMap<String, Element> =
            structure.into_iter().map(|(k, v)| (k.into(), v)).collect();
        for state in structure.keys() {
            if !carrier.contains(state) {
                return Err(CoalgebraError::StrayState { state: state.clone() });
            }
        }
        let carrier_elems: BTreeSet<Element> =
            carrier.iter().map(Element::state).collect();
        let fx = apply_functor_set(&signature, &carrier_elems);
        for state in &carrier {
            match structure.get(state) {
                None => return Err(CoalgebraError::MissingState { state: state.clone() }),
                Some(v) if !fx.contains(v) => {
                    return Err(CoalgebraError::ValueOutsideFunctor {
                        state: state.clone(),
                        value: v.to_string(),
                    })
                }
                Some(_) => {}
            }
        }
        Ok(Coalgebra { signature, carrier, structure })
    }

    pub fn signature(&self) -> &FunctorSignature {
        &self.signature
    }

    pub fn carrier(&self) -> &BTreeSet<String> {
        &self.carrier
    }

    pub fn structure(&self, state: &str) -> Option<&Element> {
        self.structure.get(state)
    }
}

/// Where a homomorphism check failed: the offending state together with both
/// sides of the commuting square at that state.
#[derive(Debug, Clone)]
pub struct HomFailure {
    pub state: String,
    pub mapped_structure: Element,
    pub structure_of_image: Element,
}

#[derive(Debug, Clone)]
pub enum HomVerdict {
    Holds,
    Fails(HomFailure),
}

impl HomVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, HomVerdict::Holds)
    }
}

/// Checks whether `f` is a coalgebra homomorphism from `src` to `dst`, i.e.
/// whether `F(f)(alpha_src(s)) = alpha_dst(f(s))` for every state `s`.
pub fn check_homomorphism(
    src: &Coalgebra,
    dst: &Coalgebra,
    f: &BTreeMap<String, String>,
) -> Result<HomVerdict, CoalgebraError> {
    if src.signature != dst.signature {
        return Err(CoalgebraError::SignatureMismatch {
            src: src.signature.to_string(),
            dst: dst.signature.to_string(),
        });
    }
    for s in &src.carrier {
        match f.get(s) {
            None => return Err(CoalgebraError::PartialMap { state: s.clone() }),
            Some(t) if !dst.carrier.contains(t) => {
                return Err(CoalgebraError::ImageOutsideCarrier {
                    state: s.clone(),
                    image: t.clone(),
                })
            }
            Some(_) => {}
        }
    }
    let ff = apply_functor_map(&src.signature, f);
    for s in &src.carrier {
        let mapped = ff.apply(&src.structure[s])?;
        let image = &dst.structure[&f[s]];
        if mapped != *image {
            return Ok(HomVerdict::Fails(HomFailure {
                state: s.clone(),
                mapped_structure: mapped,
                structure_of_image: image.clone(),
            }));
        }
    }
    Ok(HomVerdict::Holds)
}
