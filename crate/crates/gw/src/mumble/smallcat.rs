//! A shelf of small categories for tests and experiments, plus seeded
//! generators for presheaves and formulas over them.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::category::{Arrow, FiniteCategory};
use super::formula::{Formula, Signature, Term, Type};
use super::presheaf::{Presheaf, SubPresheaf, Value};
use super::semantics::Model;

fn arrow(name: &str, source: &str, target: &str) -> Arrow {
    Arrow { name: name.to_string(), source: source.to_string(), target: target.to_string() }
}

/// The one-object, one-arrow category.
pub fn terminal() -> FiniteCategory {
    FiniteCategory::new(
        vec!["*".to_string()],
        vec![arrow("id", "*", "*")],
        BTreeMap::from([("*".to_string(), "id".to_string())]),
        BTreeMap::new(),
    )
    .expect("the terminal category is lawful")
}

/// `n` objects and only identities.
pub fn discrete(n: usize) -> FiniteCategory {
    let objects: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    let arrows = objects.iter().map(|o| arrow(&format!("id{o}"), o, o)).collect();
    let identities = objects.iter().map(|o| (o.clone(), format!("id{o}"))).collect();
    FiniteCategory::new(objects, arrows, identities, BTreeMap::new())
        .expect("discrete categories are lawful")
}

/// Two objects `0`, `1` and one non-identity arrow `u: 0 -> 1`.
pub fn arrow_category() -> FiniteCategory {
    FiniteCategory::new(
        vec!["0".to_string(), "1".to_string()],
        vec![arrow("id0", "0", "0"), arrow("id1", "1", "1"), arrow("u", "0", "1")],
        BTreeMap::from([
            ("0".to_string(), "id0".to_string()),
            ("1".to_string(), "id1".to_string()),
        ]),
        BTreeMap::new(),
    )
    .expect("the arrow category is lawful")
}

/// The linear order `0 -> 1 -> ... -> n-1` with all composites.
pub fn chain(n: usize) -> FiniteCategory {
    assert!(n >= 1, "a chain needs at least one object");
    let objects: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    let mut arrows: Vec<Arrow> = Vec::new();
    for i in 0..n {
        for j in i..n {
            let name = if i == j { format!("id{i}") } else { format!("a{i}{j}") };
            arrows.push(Arrow {
                name,
                source: i.to_string(),
                target: j.to_string(),
            });
        }
    }
    let identities = (0..n).map(|i| (i.to_string(), format!("id{i}"))).collect();
    let name = |i: usize, j: usize| {
        if i == j {
            format!("id{i}")
        } else {
            format!("a{i}{j}")
        }
    };
    let mut composition = BTreeMap::new();
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                composition.insert((name(j, k), name(i, j)), name(i, k));
            }
        }
    }
    FiniteCategory::new(objects, arrows, identities, composition)
        .expect("chains are lawful")
}

/// The span `a <- s -> b`.
pub fn span() -> FiniteCategory {
    FiniteCategory::new(
        vec!["s".to_string(), "a".to_string(), "b".to_string()],
        vec![
            arrow("ids", "s", "s"),
            arrow("ida", "a", "a"),
            arrow("idb", "b", "b"),
            arrow("l", "s", "a"),
            arrow("r", "s", "b"),
        ],
        BTreeMap::from([
            ("s".to_string(), "ids".to_string()),
            ("a".to_string(), "ida".to_string()),
            ("b".to_string(), "idb".to_string()),
        ]),
        BTreeMap::new(),
    )
    .expect("the span is lawful")
}

/// The cospan `a -> t <- b`.
pub fn cospan() -> FiniteCategory {
    FiniteCategory::new(
        vec!["a".to_string(), "b".to_string(), "t".to_string()],
        vec![
            arrow("ida", "a", "a"),
            arrow("idb", "b", "b"),
            arrow("idt", "t", "t"),
            arrow("l", "a", "t"),
            arrow("r", "b", "t"),
        ],
        BTreeMap::from([
            ("a".to_string(), "ida".to_string()),
            ("b".to_string(), "idb".to_string()),
            ("t".to_string(), "idt".to_string()),
        ]),
        BTreeMap::new(),
    )
    .expect("the cospan is lawful")
}

/// The two-element group as a one-object category (`s . s = id`).
pub fn cyclic_two() -> FiniteCategory {
    FiniteCategory::new(
        vec!["*".to_string()],
        vec![arrow("id", "*", "*"), arrow("s", "*", "*")],
        BTreeMap::from([("*".to_string(), "id".to_string())]),
        BTreeMap::from([(("s".to_string(), "s".to_string()), "id".to_string())]),
    )
    .expect("the two-element group is lawful")
}

/// The idempotent monoid `{id, e}` with `e . e = e`.
pub fn idempotent() -> FiniteCategory {
    FiniteCategory::new(
        vec!["*".to_string()],
        vec![arrow("id", "*", "*"), arrow("e", "*", "*")],
        BTreeMap::from([("*".to_string(), "id".to_string())]),
        BTreeMap::from([(("e".to_string(), "e".to_string()), "e".to_string())]),
    )
    .expect("the idempotent monoid is lawful")
}

/// Every curated category, labelled, for sweep tests.
pub fn gallery() -> Vec<(&'static str, FiniteCategory)> {
    vec![
        ("terminal", terminal()),
        ("discrete2", discrete(2)),
        ("arrow", arrow_category()),
        ("chain3", chain(3)),
        ("span", span()),
        ("cospan", cospan()),
        ("cyclic2", cyclic_two()),
        ("idempotent", idempotent()),
    ]
}

/// A seeded random presheaf: random stalks, random maps on generating
/// arrows, composites filled by saturation. Returns `None` when the
/// category's relations reject the sample (retry with the same `rng`).
pub fn random_presheaf<R: rand::Rng>(
    cat: &Arc<FiniteCategory>,
    max_stalk: usize,
    rng: &mut R,
) -> Option<Presheaf> {
    let mut sets: BTreeMap<String, Vec<Value>> = BTreeMap::new();
    for object in cat.objects() {
        let size = rng.gen_range(1..=max_stalk);
        let stalk = (0..size)
            .map(|i| Value::atom(&format!("e{object}_{i}")))
            .collect();
        sets.insert(object.clone(), stalk);
    }

    let non_identities: Vec<&Arrow> = cat
        .arrows()
        .iter()
        .filter(|a| !cat.is_identity(&a.name))
        .collect();
    // An arrow is generating unless it is a composite of two
    // non-identity arrows.
    let composites: std::collections::BTreeSet<&str> = non_identities
        .iter()
        .flat_map(|f| {
            non_identities.iter().filter_map(|g| {
                let h = cat.compose(&g.name, &f.name).ok()?;
                (!cat.is_identity(h)).then_some(h)
            })
        })
        .collect();

    let mut maps: BTreeMap<String, BTreeMap<Value, Value>> = BTreeMap::new();
    let random_map = |arrow: &Arrow, rng: &mut R| -> BTreeMap<Value, Value> {
        let domain = &sets[&arrow.target];
        let codomain = &sets[&arrow.source];
        domain
            .iter()
            .map(|v| (v.clone(), codomain[rng.gen_range(0..codomain.len())].clone()))
            .collect()
    };
    for arrow in &non_identities {
        if !composites.contains(arrow.name.as_str()) {
            maps.insert(arrow.name.clone(), random_map(arrow, rng));
        }
    }

    // Saturate: X(g . f) = X(f) . X(g) whenever both factors are known.
    loop {
        let mut progressed = false;
        for f in &non_identities {
            for g in &non_identities {
                if f.target != g.source {
                    continue;
                }
                let h = cat.compose(&g.name, &f.name).expect("validated category");
                if cat.is_identity(h) || !maps.contains_key(&f.name) || !maps.contains_key(&g.name)
                {
                    continue;
                }
                let composed: BTreeMap<Value, Value> = sets[&g.target]
                    .iter()
                    .map(|v| (v.clone(), maps[&f.name][&maps[&g.name][v]].clone()))
                    .collect();
                match maps.get(h) {
                    Some(existing) if existing != &composed => return None,
                    Some(_) => {}
                    None => {
                        maps.insert(h.to_string(), composed);
                        progressed = true;
                    }
                }
            }
        }
        if !progressed {
            break;
        }
    }
    // Relations may leave arrows undetermined (e.g. idempotents); sample
    // them and let validation reject inconsistent draws.
    for arrow in &non_identities {
        if !maps.contains_key(&arrow.name) {
            let sampled = random_map(arrow, rng);
            maps.insert(arrow.name.clone(), sampled);
        }
    }
    Presheaf::new(cat.clone(), sets, maps).ok()
}

/// A random subpresheaf of `ambient`: seed elements closed under
/// restriction.
pub fn random_subpresheaf<R: rand::Rng>(ambient: &Presheaf, rng: &mut R) -> SubPresheaf {
    let cat = ambient.category().clone();
    let mut sub = SubPresheaf::empty(ambient);
    for object in cat.objects() {
        for element in ambient.stalk(object).expect("validated") {
            if rng.gen_bool(0.4) {
                sub.insert(object, element.clone());
            }
        }
    }
    loop {
        let mut grew = false;
        for arrow in cat.arrows() {
            let at_target: Vec<Value> = sub.sets[&arrow.target].iter().cloned().collect();
            for element in at_target {
                let image = ambient.restrict(&arrow.name, &element).expect("total");
                if !sub.contains(&arrow.source, &image) {
                    sub.insert(&arrow.source, image);
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }
    sub
}

/// A finite sum of representables: elements at `d` are summand-tagged
/// arrows `d -> c_i`, restricted by precomposition. Returns the presheaf
/// together with the summand objects (for natural transformations out of
/// it).
pub fn representable_sum(
    cat: &Arc<FiniteCategory>,
    summands: &[String],
) -> Presheaf {
    let mut sets: BTreeMap<String, Vec<Value>> = BTreeMap::new();
    for d in cat.objects() {
        let mut elements = Vec::new();
        for (i, c) in summands.iter().enumerate() {
            for g in cat.hom(d, c) {
                elements.push(Value::atom(&format!("{i}#{}", g.name)));
            }
        }
        sets.insert(d.clone(), elements);
    }
    let mut maps: BTreeMap<String, BTreeMap<Value, Value>> = BTreeMap::new();
    for f in cat.arrows() {
        let mut map = BTreeMap::new();
        for (i, c) in summands.iter().enumerate() {
            for g in cat.hom(&f.target, c) {
                let composed = cat.compose(&g.name, &f.name).expect("validated category");
                map.insert(
                    Value::atom(&format!("{i}#{}", g.name)),
                    Value::atom(&format!("{i}#{composed}")),
                );
            }
        }
        maps.insert(f.name.clone(), map);
    }
    Presheaf::new(cat.clone(), sets, maps).expect("sums of representables are lawful")
}

/// A natural transformation out of a representable sum, determined by
/// one target element per summand: the tagged arrow `i#g` goes to the
/// chosen element restricted along `g`.
fn yoneda_components(
    cat: &FiniteCategory,
    summands: &[String],
    picks: &[Value],
    target: &Presheaf,
) -> BTreeMap<String, BTreeMap<Value, Value>> {
    let mut components = BTreeMap::new();
    for d in cat.objects() {
        let mut component = BTreeMap::new();
        for (i, c) in summands.iter().enumerate() {
            for g in cat.hom(d, c) {
                let image = target.restrict(&g.name, &picks[i]).expect("total");
                component.insert(Value::atom(&format!("{i}#{}", g.name)), image);
            }
        }
        components.insert(d.clone(), component);
    }
    components
}

/// A seeded random model over `cat`: two representable-sum types `X` and
/// `Y` plus function symbols between them built from random Yoneda picks.
pub fn random_model<R: rand::Rng>(cat: &Arc<FiniteCategory>, rng: &mut R) -> Model {
    let objects = cat.objects().to_vec();
    let pick_summands = |rng: &mut R| -> Vec<String> {
        let count = rng.gen_range(1..=2.min(objects.len()));
        (0..count)
            .map(|_| objects[rng.gen_range(0..objects.len())].clone())
            .collect()
    };
    let x_summands = pick_summands(rng);
    let y_summands = pick_summands(rng);
    let x = representable_sum(cat, &x_summands);
    let y = representable_sum(cat, &y_summands);
    let mut model = Model::new(cat.clone());
    model.add_type("X", x.clone()).unwrap();
    model.add_type("Y", y.clone()).unwrap();

    let add_yoneda =
        |model: &mut Model, name: &str, summands: &[String], target: &Presheaf, domain: Type, codomain: Type, rng: &mut R| {
            let mut picks = Vec::new();
            for c in summands {
                let stalk = target.stalk(c).expect("validated");
                if stalk.is_empty() {
                    return;
                }
                picks.push(stalk[rng.gen_range(0..stalk.len())].clone());
            }
            let components = yoneda_components(cat, summands, &picks, target);
            model.add_function(name, domain, codomain, components).unwrap();
        };
    add_yoneda(&mut model, "f", &x_summands, &y, Type::base("X"), Type::base("Y"), rng);
    add_yoneda(&mut model, "g", &y_summands, &x, Type::base("Y"), Type::base("X"), rng);
    add_yoneda(&mut model, "h", &x_summands, &x, Type::base("X"), Type::base("X"), rng);
    model
}

/// A seeded random well-typed formula in the given context. `depth`
/// bounds the connective nesting; quantifiers introduce fresh variables
/// of base types from the model.
pub fn random_formula<R: rand::Rng>(
    model: &Model,
    bindings: &[(String, Type)],
    depth: usize,
    rng: &mut R,
) -> Formula {
    let base_types: Vec<Type> = model.type_names().map(|n| Type::base(n)).collect();
    let signature = model.signature();
    let mut counter = bindings.len();
    random_formula_inner(&base_types, &signature, bindings, depth, &mut counter, rng)
}

fn random_formula_inner<R: rand::Rng>(
    base_types: &[Type],
    signature: &Signature,
    bindings: &[(String, Type)],
    depth: usize,
    counter: &mut usize,
    rng: &mut R,
) -> Formula {
    let atom = |bindings: &[(String, Type)], rng: &mut R| -> Formula {
        for _ in 0..8 {
            let ty = &base_types[rng.gen_range(0..base_types.len())];
            let left = random_term(base_types, signature, bindings, ty, 2, rng);
            let right = random_term(base_types, signature, bindings, ty, 2, rng);
            if let (Some(left), Some(right)) = (left, right) {
                return Formula::Eq(left, right);
            }
        }
        if rng.gen_bool(0.5) {
            Formula::True
        } else {
            Formula::False
        }
    };
    if depth == 0 {
        return atom(bindings, rng);
    }
    match rng.gen_range(0..8) {
        0 => Formula::and(
            random_formula_inner(base_types, signature, bindings, depth - 1, counter, rng),
            random_formula_inner(base_types, signature, bindings, depth - 1, counter, rng),
        ),
        1 => Formula::or(
            random_formula_inner(base_types, signature, bindings, depth - 1, counter, rng),
            random_formula_inner(base_types, signature, bindings, depth - 1, counter, rng),
        ),
        2 => Formula::implies(
            random_formula_inner(base_types, signature, bindings, depth - 1, counter, rng),
            random_formula_inner(base_types, signature, bindings, depth - 1, counter, rng),
        ),
        3 => Formula::not(random_formula_inner(
            base_types, signature, bindings, depth - 1, counter, rng,
        )),
        4 | 5 => {
            let var = format!("v{}", *counter);
            *counter += 1;
            let ty = base_types[rng.gen_range(0..base_types.len())].clone();
            let extended: Vec<(String, Type)> = bindings
                .iter()
                .cloned()
                .chain(std::iter::once((var.clone(), ty.clone())))
                .collect();
            let body =
                random_formula_inner(base_types, signature, &extended, depth - 1, counter, rng);
            if rng.gen_bool(0.5) {
                Formula::forall(&var, ty, body)
            } else {
                Formula::exists(&var, ty, body)
            }
        }
        _ => atom(bindings, rng),
    }
}

fn random_term<R: rand::Rng>(
    base_types: &[Type],
    signature: &Signature,
    bindings: &[(String, Type)],
    ty: &Type,
    depth: usize,
    rng: &mut R,
) -> Option<Term> {
    let vars: Vec<&String> = bindings
        .iter()
        .filter(|(_, t)| t == ty)
        .map(|(v, _)| v)
        .collect();
    let apps: Vec<&String> = signature
        .names()
        .filter(|n| signature.lookup(n).map(|(_, cod)| cod == ty).unwrap_or(false))
        .collect();
    let mut options: Vec<usize> = Vec::new();
    if !vars.is_empty() {
        options.push(0);
    }
    if depth > 0 && !apps.is_empty() {
        options.push(1);
    }
    if options.is_empty() {
        return None;
    }
    match options[rng.gen_range(0..options.len())] {
        0 => Some(Term::var(vars[rng.gen_range(0..vars.len())])),
        _ => {
            let name = apps[rng.gen_range(0..apps.len())].clone();
            let (domain, _) = signature.lookup(&name).expect("declared");
            let argument =
                random_term(base_types, signature, bindings, &domain.clone(), depth - 1, rng)?;
            Some(Term::app(&name, argument))
        }
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn random_presheaves_are_lawful_across_the_gallery() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (name, cat) in gallery() {
            let cat = Arc::new(cat);
            let mut produced = 0;
            for _ in 0..200 {
                if let Some(presheaf) = random_presheaf(&cat, 3, &mut rng) {
                    produced += 1;
                    let sub = random_subpresheaf(&presheaf, &mut rng);
                    sub.validate(&presheaf).unwrap();
                }
                if produced >= 10 {
                    break;
                }
            }
            assert!(produced >= 10, "generator starved on {name}");
        }
    }

    #[test]
    fn representable_sums_have_tagged_stalks() {
        let cat = Arc::new(arrow_category());
        let x = representable_sum(&cat, &["1".to_string(), "0".to_string()]);
        // y(1) contributes id1 at 1 and u at 0; y(0) contributes id0 at 0.
        assert_eq!(x.stalk("1").unwrap().len(), 1);
        assert_eq!(x.stalk("0").unwrap().len(), 2);
        assert_eq!(
            x.restrict("u", &Value::atom("0#id1")).unwrap(),
            Value::atom("0#u")
        );
    }

    #[test]
    fn random_models_and_formulas_stay_well_typed() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (_, cat) in gallery() {
            let cat = Arc::new(cat);
            for _ in 0..5 {
                let model = random_model(&cat, &mut rng);
                let bindings = vec![("x".to_string(), Type::base("X"))];
                for _ in 0..10 {
                    let formula = random_formula(&model, &bindings, 3, &mut rng);
                    model.check(&bindings, &formula).unwrap();
                }
            }
        }
    }
}
