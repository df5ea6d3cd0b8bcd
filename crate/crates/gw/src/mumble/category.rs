//! Finite categories with fully enumerated composition tables.
//!
//! Composition is written applicatively: `compose(g, f)` is `g . f`, the
//! arrow that does `f` first. In the JSON form the table lists triples
//! `[f, g, h]` meaning `h = g . f`; composites with identities may be
//! omitted and are filled in automatically.

use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CategoryError {
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("arrow `{arrow}` references unknown object `{object}`")]
    UnknownObject { arrow: String, object: String },
    #[error("unknown arrow `{0}`")]
    UnknownArrow(String),
    #[error("object `{0}` has no identity arrow")]
    MissingIdentity(String),
    #[error("identity of `{object}` must be an endo-arrow, got `{arrow}`")]
    BadIdentity { object: String, arrow: String },
    #[error("missing composite for `{g} . {f}`")]
    MissingComposite { f: String, g: String },
    #[error("composite `{g} . {f} = {h}` has wrong endpoints")]
    IllTypedComposite { f: String, g: String, h: String },
    #[error("arrows `{f}` and `{g}` do not compose but the table lists them")]
    NotComposable { f: String, g: String },
    #[error("identity law fails: `{id} . {f}` or `{f} . {id}` is not `{f}`")]
    IdentityLaw { id: String, f: String },
    #[error("associativity fails on (`{f}`, `{g}`, `{h}`): `{left}` vs `{right}`")]
    Associativity { f: String, g: String, h: String, left: String, right: String },
    #[error("malformed category: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrow {
    pub name: String,
    pub source: String,
    pub target: String,
}

/// A finite category; all laws are verified at construction by enumeration.
#[derive(Debug, Clone)]
pub struct FiniteCategory {
    objects: Vec<String>,
    arrows: Vec<Arrow>,
    identities: BTreeMap<String, String>,
    /// Keyed `(g, f)` with value `g . f`.
    table: BTreeMap<(String, String), String>,
}

#[derive(Debug, Deserialize)]
struct CategoryFile {
    objects: Vec<String>,
    arrows: Vec<ArrowFile>,
    identities: BTreeMap<String, String>,
    /// Triples `[f, g, h]` meaning `h = g . f`.
    #[serde(default)]
    composition: Vec<[String; 3]>,
}

#[derive(Debug, Deserialize)]
struct ArrowFile {
    name: String,
    source: String,
    target: String,
}

impl FiniteCategory {
    /// Builds and validates a category. `composition` lists `(f, g) -> g . f`
    /// for non-identity composable pairs; identity composites are derived.
    pub fn new(
        objects: Vec<String>,
        arrows: Vec<Arrow>,
        identities: BTreeMap<String, String>,
        composition: BTreeMap<(String, String), String>,
    ) -> Result<Self, CategoryError> {
        let mut seen = BTreeSet::new();
        for name in objects.iter() {
            if !seen.insert(name.clone()) {
                return Err(CategoryError::DuplicateName(name.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for arrow in &arrows {
            if !seen.insert(arrow.name.clone()) {
                return Err(CategoryError::DuplicateName(arrow.name.clone()));
            }
            for object in [&arrow.source, &arrow.target] {
                if !objects.contains(object) {
                    return Err(CategoryError::UnknownObject {
                        arrow: arrow.name.clone(),
                        object: object.clone(),
                    });
                }
            }
        }
        let by_name: BTreeMap<&str, &Arrow> =
            arrows.iter().map(|a| (a.name.as_str(), a)).collect();
        for object in &objects {
            let id = identities
                .get(object)
                .ok_or_else(|| CategoryError::MissingIdentity(object.clone()))?;
            let arrow = by_name
                .get(id.as_str())
                .ok_or_else(|| CategoryError::UnknownArrow(id.clone()))?;
            if arrow.source != *object || arrow.target != *object {
                return Err(CategoryError::BadIdentity {
                    object: object.clone(),
                    arrow: id.clone(),
                });
            }
        }
        let mut table = BTreeMap::new();
        for ((g, f), h) in composition {
            for name in [&g, &f, &h] {
                if !by_name.contains_key(name.as_str()) {
                    return Err(CategoryError::UnknownArrow(name.clone()));
                }
            }
            table.insert((g, f), h);
        }
        // Identity composites are forced by the laws; fill them in.
        for arrow in &arrows {
            let src_id = identities[&arrow.source].clone();
            let tgt_id = identities[&arrow.target].clone();
            table
                .entry((arrow.name.clone(), src_id))
                .or_insert_with(|| arrow.name.clone());
            table
                .entry((tgt_id, arrow.name.clone()))
                .or_insert_with(|| arrow.name.clone());
        }
        let cat = FiniteCategory { objects, arrows, identities, table };
        cat.check_laws()?;
        Ok(cat)
    }

    fn check_laws(&self) -> Result<(), CategoryError> {
        for f in &self.arrows {
            for g in &self.arrows {
                let key = (g.name.clone(), f.name.clone());
                let composable = f.target == g.source;
                match (composable, self.table.get(&key)) {
                    (true, None) => {
                        return Err(CategoryError::MissingComposite {
                            f: f.name.clone(),
                            g: g.name.clone(),
                        })
                    }
                    (true, Some(h)) => {
                        let h_arrow = self
                            .arrow(h)
                            .map_err(|_| CategoryError::UnknownArrow(h.clone()))?;
                        if h_arrow.source != f.source || h_arrow.target != g.target {
                            return Err(CategoryError::IllTypedComposite {
                                f: f.name.clone(),
                                g: g.name.clone(),
                                h: h.clone(),
                            });
                        }
                    }
                    (false, Some(_)) => {
                        return Err(CategoryError::NotComposable {
                            f: f.name.clone(),
                            g: g.name.clone(),
                        })
                    }
                    (false, None) => {}
                }
            }
        }
        for f in &self.arrows {
            let src_id = &self.identities[&f.source];
            let tgt_id = &self.identities[&f.target];
            if self.table[&(f.name.clone(), src_id.clone())] != f.name
                || self.table[&(tgt_id.clone(), f.name.clone())] != f.name
            {
                return Err(CategoryError::IdentityLaw {
                    id: src_id.clone(),
                    f: f.name.clone(),
                });
            }
        }
        for f in &self.arrows {
            for g in &self.arrows {
                if f.target != g.source {
                    continue;
                }
                for h in &self.arrows {
                    if g.target != h.source {
                        continue;
                    }
                    let left = self.table[&(
                        h.name.clone(),
                        self.table[&(g.name.clone(), f.name.clone())].clone(),
                    )]
                        .clone();
                    let right = self.table[&(
                        self.table[&(h.name.clone(), g.name.clone())].clone(),
                        f.name.clone(),
                    )]
                        .clone();
                    if left != right {
                        return Err(CategoryError::Associativity {
                            f: f.name.clone(),
                            g: g.name.clone(),
                            h: h.name.clone(),
                            left,
                            right,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, CategoryError> {
        let file: CategoryFile =
            serde_json::from_str(text).map_err(|e| CategoryError::Format(e.to_string()))?;
        let arrows = file
            .arrows
            .into_iter()
            .map(|a| Arrow { name: a.name, source: a.source, target: a.target })
            .collect();
        let composition = file
            .composition
            .into_iter()
            .map(|[f, g, h]| ((g, f), h))
            .collect();
        FiniteCategory::new(file.objects, arrows, file.identities, composition)
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn arrow(&self, name: &str) -> Result<&Arrow, CategoryError> {
        self.arrows
            .iter()
            .find(|a| a.name == name)
            .ok_or_else(|| CategoryError::UnknownArrow(name.to_string()))
    }

    pub fn has_object(&self, name: &str) -> bool {
        self.objects.iter().any(|o| o == name)
    }

    pub fn identity(&self, object: &str) -> Result<&str, CategoryError> {
        self.identities
            .get(object)
            .map(String::as_str)
            .ok_or_else(|| CategoryError::MissingIdentity(object.to_string()))
    }

    pub fn is_identity(&self, arrow: &str) -> bool {
        self.identities.values().any(|id| id == arrow)
    }

    /// `g . f` (first `f`, then `g`).
    pub fn compose(&self, g: &str, f: &str) -> Result<&str, CategoryError> {
        self.table
            .get(&(g.to_string(), f.to_string()))
            .map(String::as_str)
            .ok_or_else(|| CategoryError::MissingComposite {
                f: f.to_string(),
                g: g.to_string(),
            })
    }

    /// All arrows with target `c`, identities included.
    pub fn arrows_into(&self, c: &str) -> Vec<&Arrow> {
        self.arrows.iter().filter(|a| a.target == c).collect()
    }

    pub fn arrows_from(&self, c: &str) -> Vec<&Arrow> {
        self.arrows.iter().filter(|a| a.source == c).collect()
    }

    pub fn hom(&self, a: &str, b: &str) -> Vec<&Arrow> {
        self.arrows
            .iter()
            .filter(|f| f.source == a && f.target == b)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mumble::smallcat;

    #[test]
    fn terminal_and_arrow_categories_validate() {
        let one = smallcat::terminal();
        assert_eq!(one.objects().len(), 1);
        assert_eq!(one.arrows().len(), 1);

        let two = smallcat::arrow_category();
        assert_eq!(two.objects().len(), 2);
        assert_eq!(two.arrows().len(), 3);
        assert_eq!(two.compose("u", "id0").unwrap(), "u");
        assert_eq!(two.compose("id1", "u").unwrap(), "u");
        assert_eq!(two.arrows_into("1").len(), 2);
    }

    #[test]
    fn associativity_violations_carry_a_witness() {
        // A one-object "magma" where e.e = e but (e.e).e is redirected.
        let objects = vec!["*".to_string()];
        let arrows = vec![
            Arrow { name: "id".into(), source: "*".into(), target: "*".into() },
            Arrow { name: "e".into(), source: "*".into(), target: "*".into() },
            Arrow { name: "z".into(), source: "*".into(), target: "*".into() },
        ];
        let identities = BTreeMap::from([("*".to_string(), "id".to_string())]);
        let composition = BTreeMap::from([
            (("e".to_string(), "e".to_string()), "z".to_string()),
            (("e".to_string(), "z".to_string()), "e".to_string()),
            (("z".to_string(), "e".to_string()), "z".to_string()),
            (("z".to_string(), "z".to_string()), "z".to_string()),
        ]);
        let err = FiniteCategory::new(objects, arrows, identities, composition).unwrap_err();
        match err {
            CategoryError::Associativity { left, right, .. } => assert_ne!(left, right),
            other => panic!("expected associativity witness, got {other}"),
        }
    }

    #[test]
    fn missing_composites_are_rejected() {
        let objects = vec!["0".to_string(), "1".to_string(), "2".to_string()];
        let arrows = vec![
            Arrow { name: "id0".into(), source: "0".into(), target: "0".into() },
            Arrow { name: "id1".into(), source: "1".into(), target: "1".into() },
            Arrow { name: "id2".into(), source: "2".into(), target: "2".into() },
            Arrow { name: "f".into(), source: "0".into(), target: "1".into() },
            Arrow { name: "g".into(), source: "1".into(), target: "2".into() },
        ];
        let identities = BTreeMap::from([
            ("0".to_string(), "id0".to_string()),
            ("1".to_string(), "id1".to_string()),
            ("2".to_string(), "id2".to_string()),
        ]);
        // g . f composable but absent, and no composite arrow exists anyway.
        let err =
            FiniteCategory::new(objects, arrows, identities, BTreeMap::new()).unwrap_err();
        assert!(matches!(err, CategoryError::MissingComposite { .. }));
    }

    #[test]
    fn json_round_trips_a_chain() {
        let text = r#"{
            "objects": ["0", "1", "2"],
            "arrows": [
                {"name": "id0", "source": "0", "target": "0"},
                {"name": "id1", "source": "1", "target": "1"},
                {"name": "id2", "source": "2", "target": "2"},
                {"name": "f", "source": "0", "target": "1"},
                {"name": "g", "source": "1", "target": "2"},
                {"name": "gf", "source": "0", "target": "2"}
            ],
            "identities": {"0": "id0", "1": "id1", "2": "id2"},
            "composition": [["f", "g", "gf"]]
        }"#;
        let cat = FiniteCategory::from_json(text).unwrap();
        assert_eq!(cat.compose("g", "f").unwrap(), "gf");
        assert_eq!(cat.hom("0", "2").len(), 1);
        assert!(cat.is_identity("id1"));
        assert!(!cat.is_identity("f"));
    }

    #[test]
    fn group_like_categories_validate() {
        let z2 = smallcat::cyclic_two();
        assert_eq!(z2.compose("s", "s").unwrap(), "id");
        let m = smallcat::idempotent();
        assert_eq!(m.compose("e", "e").unwrap(), "e");
    }
}
