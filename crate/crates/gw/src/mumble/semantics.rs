//! Two semantics for the internal language, cross-validated.
//!
//! A model binds type names to presheaves and function symbols to
//! natural transformations over one category. `interpret` computes the
//! subpresheaf a formula carves out of its context presheaf,
//! compositionally through the Heyting algebra: equality, conjunction,
//! disjunction, and existentials are pointwise; implication, negation,
//! and universals quantify over arrows into the stage. `forces` is an
//! independent clause-recursive evaluator at a single stage and
//! environment; agreement between the two is a tested property, not an
//! assumption. Verdicts carry certificates: a witness for a forced
//! existential, a refuting arrow for a failed universal or implication.

use std::collections::BTreeMap;

use serde::Deserialize;
use thiserror::Error;

use std::sync::Arc;

use super::category::FiniteCategory;
use super::formula::{check_formula, Context, Formula, FormulaError, Signature, Term, Type};
use super::heyting;
use super::presheaf::{NatTrans, Presheaf, PresheafError, SubPresheaf, Value};

#[derive(Debug, Error)]
pub enum SemanticsError {
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("duplicate type `{0}`")]
    DuplicateType(String),
    #[error("type `{0}` lives on a different category")]
    ForeignCategory(String),
    #[error("unknown stage `{0}`")]
    UnknownStage(String),
    #[error("element `{element}` is not in `{ty}` at stage `{stage}`")]
    BadElement {
        element: String,
        ty: String,
        stage: String,
    },
    #[error("environment length {found} does not match context length {expected}")]
    BadEnvironment { expected: usize, found: usize },
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Presheaf(#[from] PresheafError),
    #[error("malformed model: {0}")]
    Format(String),
}

/// Verdict of a forcing query.
#[derive(Debug, Clone, PartialEq)]
pub struct Forcing {
    pub forced: bool,
    pub certificate: Option<Certificate>,
}

/// Evidence attached to a verdict: a witness when a top-level existential
/// is forced, a refuting arrow (with the failing value for universals)
/// when a top-level universal, implication, or negation is not.
#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    ExistsWitness {
        var: String,
        witness: Value,
    },
    Refutation {
        arrow: String,
        var: Option<String>,
        counterexample: Option<Value>,
    },
}

impl std::fmt::Display for Certificate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Certificate::ExistsWitness { var, witness } => {
                write!(f, "witness {var} := {witness}")
            }
            Certificate::Refutation {
                arrow,
                var: Some(var),
                counterexample: Some(value),
            } => write!(f, "refuted along `{arrow}` by {var} := {value}"),
            Certificate::Refutation { arrow, .. } => write!(f, "refuted along `{arrow}`"),
        }
    }
}

struct FunctionSymbol {
    domain: Type,
    codomain: Type,
    trans: NatTrans,
}

/// A finite model: named type presheaves and function symbols over one
/// category.
pub struct Model {
    cat: Arc<FiniteCategory>,
    types: BTreeMap<String, Presheaf>,
    functions: BTreeMap<String, FunctionSymbol>,
}

#[derive(Debug, Deserialize)]
struct FunctionFile {
    domain: String,
    codomain: String,
    components: BTreeMap<String, BTreeMap<String, String>>,
}

#[derive(Debug, Deserialize)]
struct ModelFile {
    #[serde(default)]
    types: BTreeMap<String, serde_json::Value>,
    #[serde(default)]
    functions: BTreeMap<String, FunctionFile>,
}

impl Model {
    pub fn new(cat: Arc<FiniteCategory>) -> Model {
        Model {
            cat,
            types: BTreeMap::new(),
            functions: BTreeMap::new(),
        }
    }

    pub fn category(&self) -> &Arc<FiniteCategory> {
        &self.cat
    }

    pub fn add_type(&mut self, name: &str, presheaf: Presheaf) -> Result<(), SemanticsError> {
        if self.types.contains_key(name) {
            return Err(SemanticsError::DuplicateType(name.to_string()));
        }
        if presheaf.category().objects() != self.cat.objects() {
            return Err(SemanticsError::ForeignCategory(name.to_string()));
        }
        self.types.insert(name.to_string(), presheaf);
        Ok(())
    }

    /// Declares a function symbol; naturality of the components is
    /// validated against the domain and codomain presheaves.
    pub fn add_function(
        &mut self,
        name: &str,
        domain: Type,
        codomain: Type,
        components: BTreeMap<String, BTreeMap<Value, Value>>,
    ) -> Result<(), SemanticsError> {
        if self.functions.contains_key(name) {
            return Err(SemanticsError::Formula(FormulaError::DuplicateFunction(
                name.to_string(),
            )));
        }
        let source = self.type_presheaf(&domain)?;
        let target = self.type_presheaf(&codomain)?;
        let trans = NatTrans::new(
            name.to_string(),
            domain.to_string(),
            codomain.to_string(),
            &source,
            &target,
            components,
        )?;
        self.functions.insert(
            name.to_string(),
            FunctionSymbol {
                domain,
                codomain,
                trans,
            },
        );
        Ok(())
    }

    pub fn from_json(cat: Arc<FiniteCategory>, text: &str) -> Result<Model, SemanticsError> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| SemanticsError::Format(e.to_string()))?;
        let mut model = Model::new(cat.clone());
        for (name, raw) in file.types {
            let presheaf = Presheaf::from_json(cat.clone(), &raw.to_string())?;
            model.add_type(&name, presheaf)?;
        }
        for (name, raw) in file.functions {
            let domain = super::parser::parse_type(&raw.domain)
                .map_err(|e| SemanticsError::Format(e.to_string()))?;
            let codomain = super::parser::parse_type(&raw.codomain)
                .map_err(|e| SemanticsError::Format(e.to_string()))?;
            let components = raw
                .components
                .into_iter()
                .map(|(object, m)| {
                    (
                        object,
                        m.into_iter()
                            .map(|(k, v)| (Value::atom(&k), Value::atom(&v)))
                            .collect(),
                    )
                })
                .collect();
            model.add_function(&name, domain, codomain, components)?;
        }
        Ok(model)
    }

    pub fn type_names(&self) -> impl Iterator<Item = &String> {
        self.types.keys()
    }

    pub fn signature(&self) -> Signature {
        let mut signature = Signature::new();
        for (name, symbol) in &self.functions {
            signature
                .declare(name, symbol.domain.clone(), symbol.codomain.clone())
                .expect("names are unique by construction");
        }
        signature
    }

    /// The presheaf a type denotes: a named stalk or a binary product.
    pub fn type_presheaf(&self, ty: &Type) -> Result<Presheaf, SemanticsError> {
        match ty {
            Type::Base(name) => self
                .types
                .get(name)
                .cloned()
                .ok_or_else(|| SemanticsError::UnknownType(name.clone())),
            Type::Prod(a, b) => Ok(Presheaf::product(
                &self.type_presheaf(a)?,
                &self.type_presheaf(b)?,
            )?),
        }
    }

    fn context_presheaf(&self, bindings: &[(String, Type)]) -> Result<Presheaf, SemanticsError> {
        let presheaves: Vec<Presheaf> = bindings
            .iter()
            .map(|(_, ty)| self.type_presheaf(ty))
            .collect::<Result<_, _>>()?;
        let refs: Vec<&Presheaf> = presheaves.iter().collect();
        Ok(Presheaf::context(self.cat.clone(), &refs)?)
    }

    /// Type-checks `formula` in the given context.
    pub fn check(
        &self,
        bindings: &[(String, Type)],
        formula: &Formula,
    ) -> Result<(), SemanticsError> {
        let mut context = Context::new();
        for (var, ty) in bindings {
            context = context.extended(var, ty.clone());
        }
        check_formula(&self.signature(), &context, formula)?;
        Ok(())
    }

    fn eval_term(
        &self,
        bindings: &[(String, Type)],
        object: &str,
        env: &[Value],
        term: &Term,
    ) -> Result<Value, SemanticsError> {
        match term {
            Term::Var(name) => {
                let position = bindings
                    .iter()
                    .rposition(|(bound, _)| bound == name)
                    .ok_or_else(|| {
                        SemanticsError::Formula(FormulaError::UnknownVariable(name.clone()))
                    })?;
                Ok(env[position].clone())
            }
            Term::App(name, argument) => {
                let value = self.eval_term(bindings, object, env, argument)?;
                let symbol = self.functions.get(name).ok_or_else(|| {
                    SemanticsError::Formula(FormulaError::UnknownFunction(name.clone()))
                })?;
                Ok(symbol.trans.apply(object, &value)?)
            }
            Term::Pair(a, b) => Ok(Value::pair(
                self.eval_term(bindings, object, env, a)?,
                self.eval_term(bindings, object, env, b)?,
            )),
            Term::Fst(t) => match self.eval_term(bindings, object, env, t)? {
                Value::Pair(a, _) => Ok(*a),
                other => Err(SemanticsError::Formula(FormulaError::NotAProduct(
                    other.to_string(),
                ))),
            },
            Term::Snd(t) => match self.eval_term(bindings, object, env, t)? {
                Value::Pair(_, b) => Ok(*b),
                other => Err(SemanticsError::Formula(FormulaError::NotAProduct(
                    other.to_string(),
                ))),
            },
        }
    }

    fn restrict_env(
        &self,
        bindings: &[(String, Type)],
        env: &[Value],
        arrow: &str,
    ) -> Result<Vec<Value>, SemanticsError> {
        bindings
            .iter()
            .zip(env.iter())
            .map(|((_, ty), value)| {
                let presheaf = self.type_presheaf(ty)?;
                Ok(presheaf.restrict(arrow, value)?)
            })
            .collect()
    }

    /// The subpresheaf of the context presheaf carved out by `formula`.
    /// Stalk elements are tuples aligned with `bindings`.
    pub fn interpret_in_context(
        &self,
        bindings: &[(String, Type)],
        formula: &Formula,
    ) -> Result<SubPresheaf, SemanticsError> {
        self.check(bindings, formula)?;
        self.interpret_unchecked(bindings, formula)
    }

    fn interpret_unchecked(
        &self,
        bindings: &[(String, Type)],
        formula: &Formula,
    ) -> Result<SubPresheaf, SemanticsError> {
        let ctx = self.context_presheaf(bindings)?;
        match formula {
            Formula::True => Ok(SubPresheaf::full(&ctx)),
            Formula::False => Ok(SubPresheaf::empty(&ctx)),
            Formula::Eq(s, t) => {
                let mut out = SubPresheaf::empty(&ctx);
                for object in self.cat.objects() {
                    for element in ctx.stalk(object)? {
                        let env = tuple_components(element);
                        let left = self.eval_term(bindings, object, env, s)?;
                        let right = self.eval_term(bindings, object, env, t)?;
                        if left == right {
                            out.insert(object, element.clone());
                        }
                    }
                }
                Ok(out)
            }
            Formula::And(a, b) => Ok(heyting::meet(
                &self.interpret_unchecked(bindings, a)?,
                &self.interpret_unchecked(bindings, b)?,
            )),
            Formula::Or(a, b) => Ok(heyting::join(
                &self.interpret_unchecked(bindings, a)?,
                &self.interpret_unchecked(bindings, b)?,
            )),
            Formula::Implies(a, b) => Ok(heyting::implies(
                &ctx,
                &self.interpret_unchecked(bindings, a)?,
                &self.interpret_unchecked(bindings, b)?,
            )?),
            Formula::Not(a) => Ok(heyting::not(
                &ctx,
                &self.interpret_unchecked(bindings, a)?,
            )?),
            Formula::Exists(var, ty, body) => {
                let extended = extend(bindings, var, ty);
                let inner = self.interpret_unchecked(&extended, body)?;
                let fiber = self.type_presheaf(ty)?;
                let mut out = SubPresheaf::empty(&ctx);
                for object in self.cat.objects() {
                    for element in ctx.stalk(object)? {
                        let witnessed = fiber.stalk(object)?.iter().any(|value| {
                            inner.contains(object, &extend_tuple(element, value))
                        });
                        if witnessed {
                            out.insert(object, element.clone());
                        }
                    }
                }
                Ok(out)
            }
            Formula::Forall(var, ty, body) => {
                let extended = extend(bindings, var, ty);
                let inner = self.interpret_unchecked(&extended, body)?;
                let fiber = self.type_presheaf(ty)?;
                let mut out = SubPresheaf::empty(&ctx);
                for object in self.cat.objects() {
                    'elements: for element in ctx.stalk(object)? {
                        for arrow in self.cat.arrows_into(object) {
                            let restricted = ctx.restrict(&arrow.name, element)?;
                            for value in fiber.stalk(&arrow.source)? {
                                if !inner.contains(
                                    &arrow.source,
                                    &extend_tuple(&restricted, value),
                                ) {
                                    continue 'elements;
                                }
                            }
                        }
                        out.insert(object, element.clone());
                    }
                }
                Ok(out)
            }
        }
    }

    /// Interprets a formula with one free variable as a subpresheaf of
    /// that variable's type.
    pub fn interpret(
        &self,
        var: &str,
        ty: &Type,
        formula: &Formula,
    ) -> Result<SubPresheaf, SemanticsError> {
        let bindings = vec![(var.to_string(), ty.clone())];
        let inner = self.interpret_in_context(&bindings, formula)?;
        let mut sets = BTreeMap::new();
        for (object, subset) in inner.sets {
            sets.insert(
                object,
                subset
                    .into_iter()
                    .map(|tuple| tuple_components(&tuple)[0].clone())
                    .collect(),
            );
        }
        Ok(SubPresheaf { sets })
    }

    /// The clause-recursive evaluator: does `formula` hold at `object`
    /// under the environment `env` for `bindings`?
    pub fn forces_in_context(
        &self,
        bindings: &[(String, Type)],
        object: &str,
        env: &[Value],
        formula: &Formula,
    ) -> Result<bool, SemanticsError> {
        if env.len() != bindings.len() {
            return Err(SemanticsError::BadEnvironment {
                expected: bindings.len(),
                found: env.len(),
            });
        }
        if !self.cat.has_object(object) {
            return Err(SemanticsError::UnknownStage(object.to_string()));
        }
        self.force_clauses(bindings, object, env, formula)
    }

    fn force_clauses(
        &self,
        bindings: &[(String, Type)],
        object: &str,
        env: &[Value],
        formula: &Formula,
    ) -> Result<bool, SemanticsError> {
        match formula {
            Formula::True => Ok(true),
            Formula::False => Ok(false),
            Formula::Eq(s, t) => Ok(self.eval_term(bindings, object, env, s)?
                == self.eval_term(bindings, object, env, t)?),
            Formula::And(a, b) => Ok(self.force_clauses(bindings, object, env, a)?
                && self.force_clauses(bindings, object, env, b)?),
            Formula::Or(a, b) => Ok(self.force_clauses(bindings, object, env, a)?
                || self.force_clauses(bindings, object, env, b)?),
            Formula::Implies(a, b) => {
                for arrow in self.cat.arrows_into(object) {
                    let restricted = self.restrict_env(bindings, env, &arrow.name)?;
                    if self.force_clauses(bindings, &arrow.source, &restricted, a)?
                        && !self.force_clauses(bindings, &arrow.source, &restricted, b)?
                    {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Formula::Not(a) => {
                for arrow in self.cat.arrows_into(object) {
                    let restricted = self.restrict_env(bindings, env, &arrow.name)?;
                    if self.force_clauses(bindings, &arrow.source, &restricted, a)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Formula::Exists(var, ty, body) => {
                let extended = extend(bindings, var, ty);
                let fiber = self.type_presheaf(ty)?;
                for value in fiber.stalk(object)? {
                    let mut extended_env = env.to_vec();
                    extended_env.push(value.clone());
                    if self.force_clauses(&extended, object, &extended_env, body)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Formula::Forall(var, ty, body) => {
                let extended = extend(bindings, var, ty);
                let fiber = self.type_presheaf(ty)?;
                for arrow in self.cat.arrows_into(object) {
                    let restricted = self.restrict_env(bindings, env, &arrow.name)?;
                    for value in fiber.stalk(&arrow.source)? {
                        let mut extended_env = restricted.clone();
                        extended_env.push(value.clone());
                        if !self.force_clauses(&extended, &arrow.source, &extended_env, body)? {
                            return Ok(false);
                        }
                    }
                }
                Ok(true)
            }
        }
    }

    fn certificate(
        &self,
        bindings: &[(String, Type)],
        object: &str,
        env: &[Value],
        formula: &Formula,
        forced: bool,
    ) -> Result<Option<Certificate>, SemanticsError> {
        match (formula, forced) {
            (Formula::Exists(var, ty, body), true) => {
                let extended = extend(bindings, var, ty);
                let fiber = self.type_presheaf(ty)?;
                for value in fiber.stalk(object)? {
                    let mut extended_env = env.to_vec();
                    extended_env.push(value.clone());
                    if self.force_clauses(&extended, object, &extended_env, body)? {
                        return Ok(Some(Certificate::ExistsWitness {
                            var: var.clone(),
                            witness: value.clone(),
                        }));
                    }
                }
                Ok(None)
            }
            (Formula::Forall(var, ty, body), false) => {
                let extended = extend(bindings, var, ty);
                let fiber = self.type_presheaf(ty)?;
                for arrow in self.cat.arrows_into(object) {
                    let restricted = self.restrict_env(bindings, env, &arrow.name)?;
                    for value in fiber.stalk(&arrow.source)? {
                        let mut extended_env = restricted.clone();
                        extended_env.push(value.clone());
                        if !self.force_clauses(&extended, &arrow.source, &extended_env, body)? {
                            return Ok(Some(Certificate::Refutation {
                                arrow: arrow.name.clone(),
                                var: Some(var.clone()),
                                counterexample: Some(value.clone()),
                            }));
                        }
                    }
                }
                Ok(None)
            }
            (Formula::Implies(a, b), false) => {
                for arrow in self.cat.arrows_into(object) {
                    let restricted = self.restrict_env(bindings, env, &arrow.name)?;
                    if self.force_clauses(bindings, &arrow.source, &restricted, a)?
                        && !self.force_clauses(bindings, &arrow.source, &restricted, b)?
                    {
                        return Ok(Some(Certificate::Refutation {
                            arrow: arrow.name.clone(),
                            var: None,
                            counterexample: None,
                        }));
                    }
                }
                Ok(None)
            }
            (Formula::Not(a), false) => {
                for arrow in self.cat.arrows_into(object) {
                    let restricted = self.restrict_env(bindings, env, &arrow.name)?;
                    if self.force_clauses(bindings, &arrow.source, &restricted, a)? {
                        return Ok(Some(Certificate::Refutation {
                            arrow: arrow.name.clone(),
                            var: None,
                            counterexample: None,
                        }));
                    }
                }
                Ok(None)
            }
            _ => Ok(None),
        }
    }

    /// Forcing of a one-free-variable formula at a stage and element,
    /// with a certificate where one applies.
    pub fn forces(
        &self,
        var: &str,
        ty: &Type,
        formula: &Formula,
        stage: &str,
        element: &Value,
    ) -> Result<Forcing, SemanticsError> {
        let presheaf = self.type_presheaf(ty)?;
        if !self.cat.has_object(stage) {
            return Err(SemanticsError::UnknownStage(stage.to_string()));
        }
        if !presheaf.contains(stage, element) {
            return Err(SemanticsError::BadElement {
                element: element.to_string(),
                ty: ty.to_string(),
                stage: stage.to_string(),
            });
        }
        let bindings = vec![(var.to_string(), ty.clone())];
        self.check(&bindings, formula)?;
        let env = vec![element.clone()];
        let forced = self.force_clauses(&bindings, stage, &env, formula)?;
        let certificate = self.certificate(&bindings, stage, &env, formula, forced)?;
        Ok(Forcing { forced, certificate })
    }

    /// Forcing of a closed formula at a stage.
    pub fn forces_closed(&self, formula: &Formula, stage: &str) -> Result<Forcing, SemanticsError> {
        if !self.cat.has_object(stage) {
            return Err(SemanticsError::UnknownStage(stage.to_string()));
        }
        self.check(&[], formula)?;
        let forced = self.force_clauses(&[], stage, &[], formula)?;
        let certificate = self.certificate(&[], stage, &[], formula, forced)?;
        Ok(Forcing { forced, certificate })
    }
}

fn extend(bindings: &[(String, Type)], var: &str, ty: &Type) -> Vec<(String, Type)> {
    let mut extended = bindings.to_vec();
    extended.push((var.to_string(), ty.clone()));
    extended
}

fn tuple_components(value: &Value) -> &[Value] {
    match value {
        Value::Tuple(components) => components,
        _ => panic!("context elements are tuples"),
    }
}

fn extend_tuple(value: &Value, appended: &Value) -> Value {
    let mut components = tuple_components(value).to_vec();
    components.push(appended.clone());
    Value::Tuple(components)
}

/// Classical one-stage evaluation for models over a single-object,
/// identity-only category: the reference semantics that forcing must
/// collapse to there.
pub fn classical_truth(
    model: &Model,
    bindings: &[(String, Type)],
    env: &[Value],
    formula: &Formula,
) -> Result<bool, SemanticsError> {
    let cat = model.category();
    assert_eq!(cat.objects().len(), 1, "classical evaluation needs one object");
    assert_eq!(cat.arrows().len(), 1, "classical evaluation needs identities only");
    let object = cat.objects()[0].clone();
    match formula {
        Formula::True => Ok(true),
        Formula::False => Ok(false),
        Formula::Eq(s, t) => Ok(model.eval_term(bindings, &object, env, s)?
            == model.eval_term(bindings, &object, env, t)?),
        Formula::And(a, b) => Ok(classical_truth(model, bindings, env, a)?
            && classical_truth(model, bindings, env, b)?),
        Formula::Or(a, b) => Ok(classical_truth(model, bindings, env, a)?
            || classical_truth(model, bindings, env, b)?),
        Formula::Implies(a, b) => Ok(!classical_truth(model, bindings, env, a)?
            || classical_truth(model, bindings, env, b)?),
        Formula::Not(a) => Ok(!classical_truth(model, bindings, env, a)?),
        Formula::Exists(var, ty, body) => {
            let extended = extend(bindings, var, ty);
            let fiber = model.type_presheaf(ty)?;
            for value in fiber.stalk(&object)? {
                let mut extended_env = env.to_vec();
                extended_env.push(value.clone());
                if classical_truth(model, &extended, &extended_env, body)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Formula::Forall(var, ty, body) => {
            let extended = extend(bindings, var, ty);
            let fiber = model.type_presheaf(ty)?;
            for value in fiber.stalk(&object)? {
                let mut extended_env = env.to_vec();
                extended_env.push(value.clone());
                if !classical_truth(model, &extended, &extended_env, body)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mumble::parser::parse_formula;
    use crate::mumble::smallcat;

    fn terminal_model() -> Model {
        let cat = Arc::new(smallcat::terminal());
        let text = r#"{
            "types": {
                "X": {"sets": {"*": ["a", "b"]}},
                "Y": {"sets": {"*": ["c", "d"]}}
            },
            "functions": {
                "f": {"domain": "X", "codomain": "Y",
                      "components": {"*": {"a": "c", "b": "d"}}},
                "g": {"domain": "X", "codomain": "Y",
                      "components": {"*": {"a": "c", "b": "c"}}}
            }
        }"#;
        Model::from_json(cat, text).unwrap()
    }

    /// Arrow-category model whose type S carves out the subpresheaf
    /// with empty top stalk inside the representable X = y(1).
    fn arrow_model() -> Model {
        let cat = Arc::new(smallcat::arrow_category());
        let mut model = Model::new(cat.clone());
        model
            .add_type("X", Presheaf::representable(cat.clone(), "1").unwrap())
            .unwrap();
        let z = Presheaf::from_json(
            cat,
            r#"{"sets": {"0": ["z"], "1": []}, "maps": {"u": {}}}"#,
        )
        .unwrap();
        model.add_type("Z", z).unwrap();
        model
            .add_function(
                "m",
                Type::base("Z"),
                Type::base("X"),
                BTreeMap::from([
                    (
                        "0".to_string(),
                        BTreeMap::from([(Value::atom("z"), Value::atom("u"))]),
                    ),
                    ("1".to_string(), BTreeMap::new()),
                ]),
            )
            .unwrap();
        model
    }

    #[test]
    fn reflexivity_interprets_to_the_full_subpresheaf() {
        let model = terminal_model();
        let formula = parse_formula("x = x").unwrap();
        let sub = model.interpret("x", &Type::base("X"), &formula).unwrap();
        let full = SubPresheaf::full(&model.type_presheaf(&Type::base("X")).unwrap());
        assert_eq!(sub, full);
    }

    #[test]
    fn terminal_forcing_is_ordinary_equality() {
        let model = terminal_model();
        let formula = parse_formula("f(x) = g(x)").unwrap();
        let a = model
            .forces("x", &Type::base("X"), &formula, "*", &Value::atom("a"))
            .unwrap();
        assert!(a.forced);
        let b = model
            .forces("x", &Type::base("X"), &formula, "*", &Value::atom("b"))
            .unwrap();
        assert!(!b.forced);
    }

    #[test]
    fn surjectivity_verdicts_carry_certificates() {
        let model = terminal_model();
        let surjective = parse_formula("forall y:Y. exists x:X. f(x) = y").unwrap();
        let verdict = model.forces_closed(&surjective, "*").unwrap();
        assert!(verdict.forced);

        let not_surjective = parse_formula("forall y:Y. exists x:X. g(x) = y").unwrap();
        let verdict = model.forces_closed(&not_surjective, "*").unwrap();
        assert!(!verdict.forced);
        assert_eq!(
            verdict.certificate,
            Some(Certificate::Refutation {
                arrow: "id".to_string(),
                var: Some("y".to_string()),
                counterexample: Some(Value::atom("d")),
            })
        );

        let witnessed = parse_formula("exists x:X. f(x) = y").unwrap();
        let verdict = model
            .forces("y", &Type::base("Y"), &witnessed, "*", &Value::atom("c"))
            .unwrap();
        assert!(verdict.forced);
        assert_eq!(
            verdict.certificate,
            Some(Certificate::ExistsWitness {
                var: "x".to_string(),
                witness: Value::atom("a"),
            })
        );
    }

    #[test]
    fn double_negation_is_not_the_identity_on_the_arrow_category() {
        let model = arrow_model();
        let member = parse_formula("exists z:Z. m(z) = x").unwrap();
        let sub = model.interpret("x", &Type::base("X"), &member).unwrap();
        // S(1) is empty, S(0) = {u}.
        assert!(sub.sets["1"].is_empty());
        assert_eq!(sub.sets["0"], std::collections::BTreeSet::from([Value::atom("u")]));

        let doubled = parse_formula("~~(exists z:Z. m(z) = x)").unwrap();
        let sub2 = model.interpret("x", &Type::base("X"), &doubled).unwrap();
        let full = SubPresheaf::full(&model.type_presheaf(&Type::base("X")).unwrap());
        assert_eq!(sub2, full);
        assert_ne!(sub2, sub);

        // Stage 1 does not force membership of id1 but does force its
        // double negation.
        let plain = model
            .forces("x", &Type::base("X"), &member, "1", &Value::atom("id1"))
            .unwrap();
        assert!(!plain.forced);
        let twice = model
            .forces("x", &Type::base("X"), &doubled, "1", &Value::atom("id1"))
            .unwrap();
        assert!(twice.forced);
    }

    #[test]
    fn forcing_agrees_with_interpretation() {
        let model = arrow_model();
        let formulas = [
            "x = x",
            "exists z:Z. m(z) = x",
            "~(exists z:Z. m(z) = x)",
            "~~(exists z:Z. m(z) = x)",
            "exists z:Z. m(z) = x -> false",
            "forall w:X. w = x | ~(w = x)",
            "(x = x & true) | false",
            "forall z:Z. m(z) = x",
        ];
        for text in formulas {
            let formula = parse_formula(text).unwrap();
            let sub = model.interpret("x", &Type::base("X"), &formula).unwrap();
            let x = model.type_presheaf(&Type::base("X")).unwrap();
            for object in model.category().objects() {
                for element in x.stalk(object).unwrap() {
                    let forced = model
                        .forces("x", &Type::base("X"), &formula, object, element)
                        .unwrap()
                        .forced;
                    assert_eq!(
                        forced,
                        sub.contains(object, element),
                        "disagreement on `{text}` at {object}/{element}"
                    );
                }
            }
        }
    }

    #[test]
    fn forcing_is_monotone_along_arrows() {
        let model = arrow_model();
        let formulas = [
            "exists z:Z. m(z) = x",
            "~~(exists z:Z. m(z) = x)",
            "forall w:X. w = x | ~(w = x)",
            "x = x",
        ];
        let x = model.type_presheaf(&Type::base("X")).unwrap();
        for text in formulas {
            let formula = parse_formula(text).unwrap();
            for object in model.category().objects() {
                for element in x.stalk(object).unwrap() {
                    let here = model
                        .forces("x", &Type::base("X"), &formula, object, element)
                        .unwrap()
                        .forced;
                    if !here {
                        continue;
                    }
                    for arrow in model.category().arrows_into(object) {
                        let restricted = x.restrict(&arrow.name, element).unwrap();
                        let there = model
                            .forces("x", &Type::base("X"), &formula, &arrow.source, &restricted)
                            .unwrap()
                            .forced;
                        assert!(there, "monotonicity fails for `{text}` along {}", arrow.name);
                    }
                }
            }
        }
    }

    #[test]
    fn classical_truth_matches_interpretation_on_the_terminal_category() {
        let model = terminal_model();
        let formulas = [
            "f(x) = g(x)",
            "~(f(x) = g(x))",
            "f(x) = g(x) | ~(f(x) = g(x))",
            "forall y:Y. exists x:X. f(x) = y",
            "exists w:X. ~(w = x)",
            "f(x) = g(x) -> x = x",
            "~~(f(x) = g(x)) -> f(x) = g(x)",
        ];
        let x = model.type_presheaf(&Type::base("X")).unwrap();
        let bindings = vec![("x".to_string(), Type::base("X"))];
        for text in formulas {
            let formula = parse_formula(text).unwrap();
            let sub = model.interpret("x", &Type::base("X"), &formula).unwrap();
            for element in x.stalk("*").unwrap() {
                let classical =
                    classical_truth(&model, &bindings, &[element.clone()], &formula).unwrap();
                assert_eq!(classical, sub.contains("*", element), "mismatch on `{text}`");
            }
        }
    }

    #[test]
    fn pairing_projections_evaluate() {
        let model = terminal_model();
        let formula = parse_formula("fst(pair(x, f(x))) = x & snd(pair(x, f(x))) = f(x)").unwrap();
        let verdict = model
            .forces("x", &Type::base("X"), &formula, "*", &Value::atom("a"))
            .unwrap();
        assert!(verdict.forced);
    }

    #[test]
    fn stage_and_element_are_validated() {
        let model = terminal_model();
        let formula = parse_formula("x = x").unwrap();
        assert!(matches!(
            model.forces("x", &Type::base("X"), &formula, "nowhere", &Value::atom("a")),
            Err(SemanticsError::UnknownStage(_))
        ));
        assert!(matches!(
            model.forces("x", &Type::base("X"), &formula, "*", &Value::atom("zzz")),
            Err(SemanticsError::BadElement { .. })
        ));
        let ill_typed = parse_formula("x = q").unwrap();
        assert!(matches!(
            model.forces("x", &Type::base("X"), &ill_typed, "*", &Value::atom("a")),
            Err(SemanticsError::Formula(_))
        ));
    }

    #[test]
    fn local_character_holds_for_jointly_surjective_families() {
        let model = arrow_model();
        let cat = model.category().clone();
        let x = model.type_presheaf(&Type::base("X")).unwrap();
        let formulas = [
            "exists z:Z. m(z) = x",
            "~(exists z:Z. m(z) = x)",
            "forall w:X. w = x | ~(w = x)",
        ];
        for text in formulas {
            let formula = parse_formula(text).unwrap();
            for object in cat.objects() {
                let into: Vec<_> = cat.arrows_into(object).into_iter().cloned().collect();
                for mask in 1u32..(1 << into.len()) {
                    let family: Vec<_> = into
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask >> i & 1 == 1)
                        .map(|(_, a)| a.clone())
                        .collect();
                    // Jointly surjective: the generated sieve is maximal.
                    let generated: std::collections::BTreeSet<String> = family
                        .iter()
                        .flat_map(|f| {
                            cat.arrows_into(&f.source)
                                .into_iter()
                                .map(|g| cat.compose(&f.name, &g.name).unwrap().to_string())
                                .collect::<Vec<_>>()
                        })
                        .collect();
                    if generated != crate::mumble::omega::maximal_sieve(&cat, object) {
                        continue;
                    }
                    for element in x.stalk(object).unwrap() {
                        let members_force = family.iter().all(|f| {
                            let restricted = x.restrict(&f.name, element).unwrap();
                            model
                                .forces("x", &Type::base("X"), &formula, &f.source, &restricted)
                                .unwrap()
                                .forced
                        });
                        if members_force {
                            let here = model
                                .forces("x", &Type::base("X"), &formula, object, element)
                                .unwrap()
                                .forced;
                            assert!(here, "local character fails for `{text}`");
                        }
                    }
                }
            }
        }
    }
}
