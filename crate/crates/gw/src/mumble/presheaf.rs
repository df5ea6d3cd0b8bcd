//! Presheaves on a finite category: contravariant functors into finite
//! sets, with subpresheaves and natural transformations.
//!
//! For an arrow `f: D -> C`, a presheaf `X` carries a restriction map
//! `X(f): X(C) -> X(D)`; functoriality (`X(id) = id` and
//! `X(g . f) = X(f) . X(g)`) is checked exhaustively at construction.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Deserialize;
use thiserror::Error;

use super::category::FiniteCategory;

#[derive(Debug, Error)]
pub enum PresheafError {
    #[error("object `{0}` has no assigned set")]
    MissingSet(String),
    #[error("arrow `{0}` has no restriction map")]
    MissingMap(String),
    #[error("restriction along `{arrow}` is undefined on `{element}`")]
    PartialMap { arrow: String, element: String },
    #[error("restriction along `{arrow}` sends `{element}` outside the target set")]
    EscapingMap { arrow: String, element: String },
    #[error("identity law fails at `{object}` on `{element}`")]
    IdentityLaw { object: String, element: String },
    #[error("functoriality fails on `{g} . {f}` at `{element}`")]
    Functoriality { f: String, g: String, element: String },
    #[error("element `{element}` is not in the stalk at `{object}`")]
    NoSuchElement { object: String, element: String },
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("subpresheaf not closed: `{element}` at `{object}` escapes along `{arrow}`")]
    NotClosed { object: String, element: String, arrow: String },
    #[error("naturality of `{trans}` fails along `{arrow}` at `{element}`")]
    NotNatural { trans: String, arrow: String, element: String },
    #[error("component of `{trans}` at `{object}` is not a map into the target stalk")]
    BadComponent { trans: String, object: String },
    #[error("presheaves live on different categories or differ in shape: {0}")]
    Mismatch(String),
    #[error("malformed presheaf: {0}")]
    Format(String),
}

/// An element of a presheaf stalk. Plain stalks use atoms; products use
/// pairs; the subobject classifier uses sieves (sets of arrow names);
/// context presheaves use tuples of the variables' values.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Value {
    Atom(String),
    Pair(Box<Value>, Box<Value>),
    Tuple(Vec<Value>),
    Sieve(BTreeSet<String>),
}

impl Value {
    pub fn atom(s: &str) -> Value {
        Value::Atom(s.to_string())
    }

    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Box::new(a), Box::new(b))
    }
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Atom(s) => write!(f, "{s}"),
            Value::Pair(a, b) => write!(f, "({a}, {b})"),
            Value::Tuple(vs) => {
                write!(f, "[")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "]")
            }
            Value::Sieve(arrows) => {
                write!(f, "{{")?;
                for (i, a) in arrows.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

/// A presheaf on a finite category, validated at construction.
#[derive(Debug, Clone)]
pub struct Presheaf {
    cat: Arc<FiniteCategory>,
    sets: BTreeMap<String, Vec<Value>>,
    /// For `f: D -> C`, `maps[f]: X(C) -> X(D)`.
    maps: BTreeMap<String, BTreeMap<Value, Value>>,
}

#[derive(Debug, Deserialize)]
struct PresheafFile {
    sets: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    maps: BTreeMap<String, BTreeMap<String, String>>,
}

impl Presheaf {
    /// Builds and validates a presheaf. Identity restriction maps may be
    /// omitted; they are filled in as identities.
    pub fn new(
        cat: Arc<FiniteCategory>,
        sets: BTreeMap<String, Vec<Value>>,
        mut maps: BTreeMap<String, BTreeMap<Value, Value>>,
    ) -> Result<Self, PresheafError> {
        for object in cat.objects() {
            let stalk = sets
                .get(object)
                .ok_or_else(|| PresheafError::MissingSet(object.clone()))?;
            let id = cat.identity(object).expect("validated category").to_string();
            maps.entry(id)
                .or_insert_with(|| stalk.iter().map(|v| (v.clone(), v.clone())).collect());
        }
        let presheaf = Presheaf { cat, sets, maps };
        presheaf.check_laws()?;
        Ok(presheaf)
    }

    fn check_laws(&self) -> Result<(), PresheafError> {
        for arrow in self.cat.arrows() {
            let map = self
                .maps
                .get(&arrow.name)
                .ok_or_else(|| PresheafError::MissingMap(arrow.name.clone()))?;
            let source_stalk = &self.sets[&arrow.target];
            let target_stalk = &self.sets[&arrow.source];
            for element in source_stalk {
                let image = map.get(element).ok_or_else(|| PresheafError::PartialMap {
                    arrow: arrow.name.clone(),
                    element: element.to_string(),
                })?;
                if !target_stalk.contains(image) {
                    return Err(PresheafError::EscapingMap {
                        arrow: arrow.name.clone(),
                        element: element.to_string(),
                    });
                }
            }
        }
        for object in self.cat.objects() {
            let id = self.cat.identity(object).expect("validated category");
            for element in &self.sets[object] {
                if &self.maps[id][element] != element {
                    return Err(PresheafError::IdentityLaw {
                        object: object.clone(),
                        element: element.to_string(),
                    });
                }
            }
        }
        for f in self.cat.arrows() {
            for g in self.cat.arrows() {
                if f.target != g.source {
                    continue;
                }
                let h = self
                    .cat
                    .compose(&g.name, &f.name)
                    .expect("validated category")
                    .to_string();
                // h = g . f : f.source -> g.target, so X(h) = X(f) . X(g).
                for element in &self.sets[&g.target] {
                    let via_g = &self.maps[&g.name][element];
                    let composite = &self.maps[&f.name][via_g];
                    if &self.maps[&h][element] != composite {
                        return Err(PresheafError::Functoriality {
                            f: f.name.clone(),
                            g: g.name.clone(),
                            element: element.to_string(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Reads the JSON form (atom-valued stalks; identity maps implied).
    pub fn from_json(cat: Arc<FiniteCategory>, text: &str) -> Result<Self, PresheafError> {
        let file: PresheafFile =
            serde_json::from_str(text).map_err(|e| PresheafError::Format(e.to_string()))?;
        let sets = file
            .sets
            .into_iter()
            .map(|(o, vs)| (o, vs.iter().map(|v| Value::atom(v)).collect()))
            .collect();
        let maps = file
            .maps
            .into_iter()
            .map(|(arrow, m)| {
                (
                    arrow,
                    m.into_iter()
                        .map(|(k, v)| (Value::atom(&k), Value::atom(&v)))
                        .collect(),
                )
            })
            .collect();
        Presheaf::new(cat, sets, maps)
    }

    pub fn category(&self) -> &Arc<FiniteCategory> {
        &self.cat
    }

    pub fn stalk(&self, object: &str) -> Result<&[Value], PresheafError> {
        self.sets
            .get(object)
            .map(Vec::as_slice)
            .ok_or_else(|| PresheafError::UnknownObject(object.to_string()))
    }

    /// Restricts `element` of `X(C)` along `f: D -> C` into `X(D)`.
    pub fn restrict(&self, arrow: &str, element: &Value) -> Result<Value, PresheafError> {
        let map = self
            .maps
            .get(arrow)
            .ok_or_else(|| PresheafError::MissingMap(arrow.to_string()))?;
        map.get(element).cloned().ok_or_else(|| PresheafError::PartialMap {
            arrow: arrow.to_string(),
            element: element.to_string(),
        })
    }

    pub fn contains(&self, object: &str, element: &Value) -> bool {
        self.sets
            .get(object)
            .map(|stalk| stalk.contains(element))
            .unwrap_or(false)
    }

    /// Total number of elements across stalks.
    pub fn size(&self) -> usize {
        self.sets.values().map(Vec::len).sum()
    }

    /// The terminal presheaf: a single element `*` at every object.
    pub fn terminal(cat: Arc<FiniteCategory>) -> Presheaf {
        let star = Value::atom("*");
        let sets = cat
            .objects()
            .iter()
            .map(|o| (o.clone(), vec![star.clone()]))
            .collect();
        let maps = cat
            .arrows()
            .iter()
            .map(|a| {
                (
                    a.name.clone(),
                    BTreeMap::from([(star.clone(), star.clone())]),
                )
            })
            .collect();
        Presheaf::new(cat, sets, maps).expect("the terminal presheaf is lawful")
    }

    /// The representable presheaf `y(c)`: at `d`, all arrows `d -> c`;
    /// restriction along `f: e -> d` is precomposition.
    pub fn representable(cat: Arc<FiniteCategory>, c: &str) -> Result<Presheaf, PresheafError> {
        if !cat.has_object(c) {
            return Err(PresheafError::UnknownObject(c.to_string()));
        }
        let mut sets = BTreeMap::new();
        for d in cat.objects() {
            let elements = cat
                .hom(d, c)
                .into_iter()
                .map(|a| Value::atom(&a.name))
                .collect();
            sets.insert(d.clone(), elements);
        }
        let mut maps = BTreeMap::new();
        for f in cat.arrows() {
            let mut map = BTreeMap::new();
            for g in cat.hom(&f.target, c) {
                let composed = cat.compose(&g.name, &f.name).expect("validated category");
                map.insert(Value::atom(&g.name), Value::atom(composed));
            }
            maps.insert(f.name.clone(), map);
        }
        Presheaf::new(cat, sets, maps)
    }

    /// The pointwise product `X x Y` with pair elements.
    pub fn product(x: &Presheaf, y: &Presheaf) -> Result<Presheaf, PresheafError> {
        if !Arc::ptr_eq(&x.cat, &y.cat) && x.cat.objects() != y.cat.objects() {
            return Err(PresheafError::Mismatch("different categories".to_string()));
        }
        let cat = x.cat.clone();
        let mut sets = BTreeMap::new();
        for object in cat.objects() {
            let mut elements = Vec::new();
            for a in x.stalk(object)? {
                for b in y.stalk(object)? {
                    elements.push(Value::pair(a.clone(), b.clone()));
                }
            }
            sets.insert(object.clone(), elements);
        }
        let mut maps = BTreeMap::new();
        for arrow in cat.arrows() {
            let mut map = BTreeMap::new();
            for a in x.stalk(&arrow.target)? {
                for b in y.stalk(&arrow.target)? {
                    map.insert(
                        Value::pair(a.clone(), b.clone()),
                        Value::pair(x.restrict(&arrow.name, a)?, y.restrict(&arrow.name, b)?),
                    );
                }
            }
            maps.insert(arrow.name.clone(), map);
        }
        Presheaf::new(cat, sets, maps)
    }

    /// The context presheaf for typed variables: stalks are tuples with one
    /// component per entry of `types`, restricted componentwise. An empty
    /// context yields the terminal presheaf shape with an empty tuple.
    pub fn context(cat: Arc<FiniteCategory>, types: &[&Presheaf]) -> Result<Presheaf, PresheafError> {
        let mut sets: BTreeMap<String, Vec<Value>> = BTreeMap::new();
        for object in cat.objects() {
            let mut tuples = vec![Vec::new()];
            for x in types {
                let stalk = x.stalk(object)?;
                let mut next = Vec::with_capacity(tuples.len() * stalk.len());
                for tuple in &tuples {
                    for v in stalk {
                        let mut extended: Vec<Value> = tuple.clone();
                        extended.push(v.clone());
                        next.push(extended);
                    }
                }
                tuples = next;
            }
            sets.insert(
                object.clone(),
                tuples.into_iter().map(Value::Tuple).collect(),
            );
        }
        let mut maps = BTreeMap::new();
        for arrow in cat.arrows() {
            let mut map = BTreeMap::new();
            for element in &sets[&arrow.target] {
                let components = match element {
                    Value::Tuple(components) => components,
                    _ => unreachable!(),
                };
                let restricted: Result<Vec<Value>, PresheafError> = components
                    .iter()
                    .zip(types.iter())
                    .map(|(v, x)| x.restrict(&arrow.name, v))
                    .collect();
                map.insert(element.clone(), Value::Tuple(restricted?));
            }
            maps.insert(arrow.name.clone(), map);
        }
        Presheaf::new(cat, sets, maps)
    }
}

/// A subpresheaf: per-object subsets closed under restriction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubPresheaf {
    pub sets: BTreeMap<String, BTreeSet<Value>>,
}

impl SubPresheaf {
    pub fn empty(ambient: &Presheaf) -> SubPresheaf {
        SubPresheaf {
            sets: ambient
                .category()
                .objects()
                .iter()
                .map(|o| (o.clone(), BTreeSet::new()))
                .collect(),
        }
    }

    pub fn full(ambient: &Presheaf) -> SubPresheaf {
        SubPresheaf {
            sets: ambient
                .category()
                .objects()
                .iter()
                .map(|o| {
                    (
                        o.clone(),
                        ambient.stalk(o).expect("validated").iter().cloned().collect(),
                    )
                })
                .collect(),
        }
    }

    /// Validates membership in the ambient stalks and closure under
    /// restriction.
    pub fn validate(&self, ambient: &Presheaf) -> Result<(), PresheafError> {
        for (object, subset) in &self.sets {
            for element in subset {
                if !ambient.contains(object, element) {
                    return Err(PresheafError::NoSuchElement {
                        object: object.clone(),
                        element: element.to_string(),
                    });
                }
            }
        }
        for arrow in ambient.category().arrows() {
            let at_target = self.sets.get(&arrow.target).cloned().unwrap_or_default();
            for element in &at_target {
                let image = ambient.restrict(&arrow.name, element)?;
                if !self
                    .sets
                    .get(&arrow.source)
                    .map(|s| s.contains(&image))
                    .unwrap_or(false)
                {
                    return Err(PresheafError::NotClosed {
                        object: arrow.target.clone(),
                        element: element.to_string(),
                        arrow: arrow.name.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, object: &str, element: &Value) -> bool {
        self.sets
            .get(object)
            .map(|s| s.contains(element))
            .unwrap_or(false)
    }

    pub fn insert(&mut self, object: &str, element: Value) {
        self.sets.entry(object.to_string()).or_default().insert(element);
    }

    pub fn is_contained_in(&self, other: &SubPresheaf) -> bool {
        self.sets.iter().all(|(object, subset)| {
            subset.iter().all(|v| other.contains(object, v))
        })
    }

    pub fn total_size(&self) -> usize {
        self.sets.values().map(BTreeSet::len).sum()
    }
}

/// A natural transformation between presheaves on the same category,
/// validated for naturality at construction.
#[derive(Debug, Clone)]
pub struct NatTrans {
    pub name: String,
    pub source: String,
    pub target: String,
    components: BTreeMap<String, BTreeMap<Value, Value>>,
}

#[derive(Debug, Deserialize)]
struct NatTransFile {
    name: String,
    source: String,
    target: String,
    components: BTreeMap<String, BTreeMap<String, String>>,
}

impl NatTrans {
    pub fn new(
        name: String,
        source_name: String,
        target_name: String,
        source: &Presheaf,
        target: &Presheaf,
        components: BTreeMap<String, BTreeMap<Value, Value>>,
    ) -> Result<Self, PresheafError> {
        let trans = NatTrans {
            name,
            source: source_name,
            target: target_name,
            components,
        };
        trans.check_naturality(source, target)?;
        Ok(trans)
    }

    fn check_naturality(&self, source: &Presheaf, target: &Presheaf) -> Result<(), PresheafError> {
        let cat = source.category();
        for object in cat.objects() {
            let component = self
                .components
                .get(object)
                .ok_or_else(|| PresheafError::BadComponent {
                    trans: self.name.clone(),
                    object: object.clone(),
                })?;
            for element in source.stalk(object)? {
                let image = component.get(element).ok_or_else(|| PresheafError::BadComponent {
                    trans: self.name.clone(),
                    object: object.clone(),
                })?;
                if !target.contains(object, image) {
                    return Err(PresheafError::BadComponent {
                        trans: self.name.clone(),
                        object: object.clone(),
                    });
                }
            }
        }
        for arrow in cat.arrows() {
            for element in source.stalk(&arrow.target)? {
                let round_one = target.restrict(
                    &arrow.name,
                    &self.components[&arrow.target][element],
                )?;
                let round_two =
                    &self.components[&arrow.source][&source.restrict(&arrow.name, element)?];
                if &round_one != round_two {
                    return Err(PresheafError::NotNatural {
                        trans: self.name.clone(),
                        arrow: arrow.name.clone(),
                        element: element.to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn from_json(
        source: &Presheaf,
        target: &Presheaf,
        text: &str,
    ) -> Result<Self, PresheafError> {
        let file: NatTransFile =
            serde_json::from_str(text).map_err(|e| PresheafError::Format(e.to_string()))?;
        let components = file
            .components
            .into_iter()
            .map(|(o, m)| {
                (
                    o,
                    m.into_iter()
                        .map(|(k, v)| (Value::atom(&k), Value::atom(&v)))
                        .collect(),
                )
            })
            .collect();
        NatTrans::new(file.name, file.source, file.target, source, target, components)
    }

    pub fn apply(&self, object: &str, element: &Value) -> Result<Value, PresheafError> {
        self.components
            .get(object)
            .and_then(|m| m.get(element))
            .cloned()
            .ok_or_else(|| PresheafError::NoSuchElement {
                object: object.to_string(),
                element: element.to_string(),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mumble::smallcat;

    fn arrow_cat() -> Arc<FiniteCategory> {
        Arc::new(smallcat::arrow_category())
    }

    fn two_point_presheaf(cat: Arc<FiniteCategory>) -> Presheaf {
        // X(1) = {b0, b1}, X(0) = {a0, a1}, u restricts b_i to a_i.
        Presheaf::new(
            cat,
            BTreeMap::from([
                ("0".to_string(), vec![Value::atom("a0"), Value::atom("a1")]),
                ("1".to_string(), vec![Value::atom("b0"), Value::atom("b1")]),
            ]),
            BTreeMap::from([(
                "u".to_string(),
                BTreeMap::from([
                    (Value::atom("b0"), Value::atom("a0")),
                    (Value::atom("b1"), Value::atom("a1")),
                ]),
            )]),
        )
        .unwrap()
    }

    #[test]
    fn functoriality_is_enforced() {
        let cat = Arc::new(smallcat::chain(3));
        // Stalks all {x, y}; a01 and a12 swap, but a02 is the identity map,
        // violating X(a02) = X(a01) . X(a12).
        let swap = BTreeMap::from([
            (Value::atom("x"), Value::atom("y")),
            (Value::atom("y"), Value::atom("x")),
        ]);
        let ident = BTreeMap::from([
            (Value::atom("x"), Value::atom("x")),
            (Value::atom("y"), Value::atom("y")),
        ]);
        let sets: BTreeMap<String, Vec<Value>> = ["0", "1", "2"]
            .iter()
            .map(|o| (o.to_string(), vec![Value::atom("x"), Value::atom("y")]))
            .collect();
        let err = Presheaf::new(
            cat.clone(),
            sets.clone(),
            BTreeMap::from([
                ("a01".to_string(), swap.clone()),
                ("a12".to_string(), swap.clone()),
                ("a02".to_string(), swap.clone()),
            ]),
        )
        .unwrap_err();
        assert!(matches!(err, PresheafError::Functoriality { .. }));

        let ok = Presheaf::new(
            cat,
            sets,
            BTreeMap::from([
                ("a01".to_string(), swap.clone()),
                ("a12".to_string(), swap),
                ("a02".to_string(), ident),
            ]),
        );
        assert!(ok.is_ok());
    }

    #[test]
    fn representables_restrict_by_precomposition() {
        let cat = arrow_cat();
        let y1 = Presheaf::representable(cat.clone(), "1").unwrap();
        assert_eq!(y1.stalk("1").unwrap(), &[Value::atom("id1")]);
        assert_eq!(y1.stalk("0").unwrap(), &[Value::atom("u")]);
        assert_eq!(
            y1.restrict("u", &Value::atom("id1")).unwrap(),
            Value::atom("u")
        );
        let y0 = Presheaf::representable(cat, "0").unwrap();
        assert_eq!(y0.stalk("1").unwrap(), &[] as &[Value]);
        assert_eq!(y0.stalk("0").unwrap(), &[Value::atom("id0")]);
    }

    #[test]
    fn products_restrict_componentwise() {
        let cat = arrow_cat();
        let x = two_point_presheaf(cat.clone());
        let p = Presheaf::product(&x, &x).unwrap();
        assert_eq!(p.stalk("1").unwrap().len(), 4);
        let restricted = p
            .restrict("u", &Value::pair(Value::atom("b0"), Value::atom("b1")))
            .unwrap();
        assert_eq!(restricted, Value::pair(Value::atom("a0"), Value::atom("a1")));
    }

    #[test]
    fn contexts_are_componentwise_tuples() {
        let cat = arrow_cat();
        let x = two_point_presheaf(cat.clone());
        let ctx = Presheaf::context(cat.clone(), &[&x, &x]).unwrap();
        assert_eq!(ctx.stalk("0").unwrap().len(), 4);
        let empty = Presheaf::context(cat, &[]).unwrap();
        assert_eq!(empty.stalk("0").unwrap(), &[Value::Tuple(vec![])]);
    }

    #[test]
    fn subpresheaves_must_be_restriction_closed() {
        let cat = arrow_cat();
        let x = two_point_presheaf(cat);
        let mut open = SubPresheaf::empty(&x);
        open.insert("1", Value::atom("b0"));
        assert!(matches!(
            open.validate(&x),
            Err(PresheafError::NotClosed { .. })
        ));
        open.insert("0", Value::atom("a0"));
        open.validate(&x).unwrap();
        assert!(open.is_contained_in(&SubPresheaf::full(&x)));
        assert!(!SubPresheaf::full(&x).is_contained_in(&open));
    }

    #[test]
    fn naturality_is_enforced() {
        let cat = arrow_cat();
        let x = two_point_presheaf(cat.clone());
        // Swapping at object 1 but not at 0 breaks the naturality square.
        let bad = NatTrans::new(
            "t".to_string(),
            "X".to_string(),
            "X".to_string(),
            &x,
            &x,
            BTreeMap::from([
                (
                    "1".to_string(),
                    BTreeMap::from([
                        (Value::atom("b0"), Value::atom("b1")),
                        (Value::atom("b1"), Value::atom("b0")),
                    ]),
                ),
                (
                    "0".to_string(),
                    BTreeMap::from([
                        (Value::atom("a0"), Value::atom("a0")),
                        (Value::atom("a1"), Value::atom("a1")),
                    ]),
                ),
            ]),
        );
        assert!(matches!(bad, Err(PresheafError::NotNatural { .. })));

        let good = NatTrans::new(
            "swap".to_string(),
            "X".to_string(),
            "X".to_string(),
            &x,
            &x,
            BTreeMap::from([
                (
                    "1".to_string(),
                    BTreeMap::from([
                        (Value::atom("b0"), Value::atom("b1")),
                        (Value::atom("b1"), Value::atom("b0")),
                    ]),
                ),
                (
                    "0".to_string(),
                    BTreeMap::from([
                        (Value::atom("a0"), Value::atom("a1")),
                        (Value::atom("a1"), Value::atom("a0")),
                    ]),
                ),
            ]),
        )
        .unwrap();
        assert_eq!(
            good.apply("1", &Value::atom("b0")).unwrap(),
            Value::atom("b1")
        );
    }

    #[test]
    fn json_ingestion_checks_laws() {
        let cat = arrow_cat();
        let text = r#"{
            "sets": {"0": ["a"], "1": ["b0", "b1"]},
            "maps": {"u": {"b0": "a", "b1": "a"}}
        }"#;
        let x = Presheaf::from_json(cat.clone(), text).unwrap();
        assert_eq!(x.size(), 3);

        let partial = r#"{
            "sets": {"0": ["a"], "1": ["b0", "b1"]},
            "maps": {"u": {"b0": "a"}}
        }"#;
        assert!(matches!(
            Presheaf::from_json(cat.clone(), partial),
            Err(PresheafError::PartialMap { .. })
        ));

        let escaping = r#"{
            "sets": {"0": ["a"], "1": ["b0", "b1"]},
            "maps": {"u": {"b0": "a", "b1": "zzz"}}
        }"#;
        assert!(matches!(
            Presheaf::from_json(cat, escaping),
            Err(PresheafError::EscapingMap { .. })
        ));
    }
}
