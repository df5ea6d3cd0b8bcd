//! Terms and formulas of a typed internal language.
//!
//! Types name presheaves or form binary products. Terms are variables,
//! applications of declared function symbols, pairing, and projections.
//! Formulas close terms under equality, the propositional connectives,
//! and typed quantifiers. A signature assigns each function symbol a
//! domain and codomain type; the checker is fully syntax-directed.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FormulaError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unknown function symbol `{0}`")]
    UnknownFunction(String),
    #[error("type mismatch: expected `{expected}`, found `{found}`")]
    TypeMismatch { expected: String, found: String },
    #[error("equality between `{left}` and `{right}`")]
    UnequalSides { left: String, right: String },
    #[error("projection applied to non-product `{0}`")]
    NotAProduct(String),
    #[error("duplicate function symbol `{0}`")]
    DuplicateFunction(String),
    #[error("variable `{0}` shadows an existing binding")]
    Shadowing(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Type {
    Base(String),
    Prod(Box<Type>, Box<Type>),
}

impl Type {
    pub fn base(name: &str) -> Type {
        Type::Base(name.to_string())
    }

    pub fn prod(a: Type, b: Type) -> Type {
        Type::Prod(Box::new(a), Box::new(b))
    }
}

impl std::fmt::Display for Type {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Type::Base(name) => write!(f, "{name}"),
            Type::Prod(a, b) => write!(f, "({a} * {b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    App(String, Box<Term>),
    Pair(Box<Term>, Box<Term>),
    Fst(Box<Term>),
    Snd(Box<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn app(function: &str, argument: Term) -> Term {
        Term::App(function.to_string(), Box::new(argument))
    }

    pub fn pair(a: Term, b: Term) -> Term {
        Term::Pair(Box::new(a), Box::new(b))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        match self {
            Term::Var(v) => BTreeSet::from([v.clone()]),
            Term::App(_, t) | Term::Fst(t) | Term::Snd(t) => t.free_vars(),
            Term::Pair(a, b) => {
                let mut vars = a.free_vars();
                vars.extend(b.free_vars());
                vars
            }
        }
    }

    pub fn subst(&self, var: &str, replacement: &Term) -> Term {
        match self {
            Term::Var(v) if v == var => replacement.clone(),
            Term::Var(_) => self.clone(),
            Term::App(f, t) => Term::App(f.clone(), Box::new(t.subst(var, replacement))),
            Term::Pair(a, b) => Term::pair(a.subst(var, replacement), b.subst(var, replacement)),
            Term::Fst(t) => Term::Fst(Box::new(t.subst(var, replacement))),
            Term::Snd(t) => Term::Snd(Box::new(t.subst(var, replacement))),
        }
    }
}

impl std::fmt::Display for Term {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::App(name, t) => write!(f, "{name}({t})"),
            Term::Pair(a, b) => write!(f, "pair({a}, {b})"),
            Term::Fst(t) => write!(f, "fst({t})"),
            Term::Snd(t) => write!(f, "snd({t})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    True,
    False,
    Eq(Term, Term),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Not(Box<Formula>),
    Forall(String, Type, Box<Formula>),
    Exists(String, Type, Box<Formula>),
}

impl Formula {
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn not(a: Formula) -> Formula {
        Formula::Not(Box::new(a))
    }

    pub fn forall(var: &str, ty: Type, body: Formula) -> Formula {
        Formula::Forall(var.to_string(), ty, Box::new(body))
    }

    pub fn exists(var: &str, ty: Type, body: Formula) -> Formula {
        Formula::Exists(var.to_string(), ty, Box::new(body))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        match self {
            Formula::True | Formula::False => BTreeSet::new(),
            Formula::Eq(s, t) => {
                let mut vars = s.free_vars();
                vars.extend(t.free_vars());
                vars
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                let mut vars = a.free_vars();
                vars.extend(b.free_vars());
                vars
            }
            Formula::Not(a) => a.free_vars(),
            Formula::Forall(v, _, body) | Formula::Exists(v, _, body) => {
                let mut vars = body.free_vars();
                vars.remove(v);
                vars
            }
        }
    }

    /// Capture-avoiding substitution of `replacement` for `var`. Bound
    /// variables that would capture a free variable of the replacement are
    /// renamed with primes.
    pub fn subst(&self, var: &str, replacement: &Term) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Eq(s, t) => {
                Formula::Eq(s.subst(var, replacement), t.subst(var, replacement))
            }
            Formula::And(a, b) => {
                Formula::and(a.subst(var, replacement), b.subst(var, replacement))
            }
            Formula::Or(a, b) => {
                Formula::or(a.subst(var, replacement), b.subst(var, replacement))
            }
            Formula::Implies(a, b) => {
                Formula::implies(a.subst(var, replacement), b.subst(var, replacement))
            }
            Formula::Not(a) => Formula::not(a.subst(var, replacement)),
            Formula::Forall(bound, ty, body) | Formula::Exists(bound, ty, body) => {
                let rebuild = |v: String, b: Formula| match self {
                    Formula::Forall(..) => Formula::Forall(v, ty.clone(), Box::new(b)),
                    _ => Formula::Exists(v, ty.clone(), Box::new(b)),
                };
                if bound == var {
                    return self.clone();
                }
                let incoming = replacement.free_vars();
                if incoming.contains(bound) && body.free_vars().contains(var) {
                    let mut avoid = incoming;
                    avoid.extend(body.free_vars());
                    let fresh = fresh_name(bound, &avoid);
                    let renamed = body.subst(bound, &Term::var(&fresh));
                    rebuild(fresh, renamed.subst(var, replacement))
                } else {
                    rebuild(bound.clone(), body.subst(var, replacement))
                }
            }
        }
    }
}

fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let mut candidate = format!("{base}'");
    while avoid.contains(&candidate) {
        candidate.push('\'');
    }
    candidate
}

impl std::fmt::Display for Formula {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Eq(s, t) => write!(f, "{s} = {t}"),
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
            Formula::Implies(a, b) => write!(f, "({a} -> {b})"),
            Formula::Not(a) => write!(f, "~{a}"),
            Formula::Forall(v, ty, body) => write!(f, "forall {v}:{ty}. {body}"),
            Formula::Exists(v, ty, body) => write!(f, "exists {v}:{ty}. {body}"),
        }
    }
}

/// Declared function symbols with their domain and codomain types.
#[derive(Debug, Clone, Default)]
pub struct Signature {
    functions: BTreeMap<String, (Type, Type)>,
}

impl Signature {
    pub fn new() -> Signature {
        Signature::default()
    }

    pub fn declare(&mut self, name: &str, domain: Type, codomain: Type) -> Result<(), FormulaError> {
        if self.functions.contains_key(name) {
            return Err(FormulaError::DuplicateFunction(name.to_string()));
        }
        self.functions.insert(name.to_string(), (domain, codomain));
        Ok(())
    }

    pub fn lookup(&self, name: &str) -> Option<&(Type, Type)> {
        self.functions.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.functions.keys()
    }
}

/// Typing context: an ordered list of variable bindings.
#[derive(Debug, Clone, Default)]
pub struct Context {
    bindings: Vec<(String, Type)>,
}

impl Context {
    pub fn new() -> Context {
        Context::default()
    }

    pub fn extended(&self, var: &str, ty: Type) -> Context {
        let mut bindings = self.bindings.clone();
        bindings.push((var.to_string(), ty));
        Context { bindings }
    }

    pub fn lookup(&self, var: &str) -> Option<&Type> {
        self.bindings
            .iter()
            .rev()
            .find(|(name, _)| name == var)
            .map(|(_, ty)| ty)
    }

    pub fn bindings(&self) -> &[(String, Type)] {
        &self.bindings
    }

    pub fn contains(&self, var: &str) -> bool {
        self.lookup(var).is_some()
    }
}

pub fn type_of_term(
    signature: &Signature,
    context: &Context,
    term: &Term,
) -> Result<Type, FormulaError> {
    match term {
        Term::Var(v) => context
            .lookup(v)
            .cloned()
            .ok_or_else(|| FormulaError::UnknownVariable(v.clone())),
        Term::App(name, argument) => {
            let (domain, codomain) = signature
                .lookup(name)
                .ok_or_else(|| FormulaError::UnknownFunction(name.clone()))?;
            let actual = type_of_term(signature, context, argument)?;
            if &actual != domain {
                return Err(FormulaError::TypeMismatch {
                    expected: domain.to_string(),
                    found: actual.to_string(),
                });
            }
            Ok(codomain.clone())
        }
        Term::Pair(a, b) => Ok(Type::prod(
            type_of_term(signature, context, a)?,
            type_of_term(signature, context, b)?,
        )),
        Term::Fst(t) => match type_of_term(signature, context, t)? {
            Type::Prod(a, _) => Ok(*a),
            other => Err(FormulaError::NotAProduct(other.to_string())),
        },
        Term::Snd(t) => match type_of_term(signature, context, t)? {
            Type::Prod(_, b) => Ok(*b),
            other => Err(FormulaError::NotAProduct(other.to_string())),
        },
    }
}

/// Checks a formula in context; equality sides must share a type and
/// quantifiers extend the context.
pub fn check_formula(
    signature: &Signature,
    context: &Context,
    formula: &Formula,
) -> Result<(), FormulaError> {
    match formula {
        Formula::True | Formula::False => Ok(()),
        Formula::Eq(s, t) => {
            let left = type_of_term(signature, context, s)?;
            let right = type_of_term(signature, context, t)?;
            if left != right {
                return Err(FormulaError::UnequalSides {
                    left: left.to_string(),
                    right: right.to_string(),
                });
            }
            Ok(())
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            check_formula(signature, context, a)?;
            check_formula(signature, context, b)
        }
        Formula::Not(a) => check_formula(signature, context, a),
        Formula::Forall(v, ty, body) | Formula::Exists(v, ty, body) => {
            check_formula(signature, &context.extended(v, ty.clone()), body)
        }
    }
}
