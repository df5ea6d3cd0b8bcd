use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SignatureError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("label set `{name}` must be nonempty")]
    EmptyLabelSet { name: String },
    #[error("`{name}` is reserved and cannot name a label set")]
    ReservedName { name: String },
    #[error("unknown alphabet `{name}` at byte {position}")]
    UnknownAlphabet { name: String, position: usize },
}

/// A named, finite, nonempty set of labels, e.g. `Act{send,recv}`.
///
/// The name is part of the value so that signatures print back to the exact
/// text they were parsed from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct LabelSet {
    name: String,
    labels: BTreeSet<String>,
}

impl LabelSet {
    pub fn new(
        name: impl Into<String>,
        labels: impl IntoIterator<Item = impl Into<String>>,
    ) -> Result<Self, SignatureError> {
        let name = name.into();
        if RESERVED.contains(&name.as_str()) {
            return Err(SignatureError::ReservedName { name });
        }
        let labels: BTreeSet<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(SignatureError::EmptyLabelSet { name });
        }
        Ok(LabelSet { name, labels })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn labels(&self) -> &BTreeSet<String> {
        &self.labels
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.contains(label)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{{", self.name)?;
        for (i, l) in self.labels.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "}}")
    }
}

const RESERVED: &[&str] = &["P", "D", "x", "o", "_", "fst", "snd", "in"];

/// Abstract syntax for the functor grammar
///
/// ```text
/// F ::= _ | A | F^A | P | D | F o F | F x F | F + F
/// ```
///
/// where `A` ranges over finite label sets. `P(G)` and `D(G)` denote the
/// powerset and probability-distribution functors applied directly to an
/// inner signature; bare `P` and `D` parse as `Power(Identity)` and
/// `Dist(Identity)`. Explicit composition is written `F o G`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum FunctorSignature {
    /// The identity functor `_`.
    Identity,
    /// The constant functor onto a finite label set.
    Const(LabelSet),
    /// Exponentiation `F^A`: functions from the label set into `F(X)`.
    Exp(Box<FunctorSignature>, LabelSet),
    /// Finite powerset of the inner signature.
    Power(Box<FunctorSignature>),
    /// Finitely supported probability distributions over the inner signature.
    Dist(Box<FunctorSignature>),
    /// Composition `outer o inner`.
    Compose(Box<FunctorSignature>, Box<FunctorSignature>),
    /// Binary product `F x G`.
    Product(Box<FunctorSignature>, Box<FunctorSignature>),
    /// Binary coproduct `F + G`.
    Coproduct(Box<FunctorSignature>, Box<FunctorSignature>),
}

impl FunctorSignature {
    pub fn power(inner: FunctorSignature) -> Self {
        FunctorSignature::Power(Box::new(inner))
    }

    pub fn dist(inner: FunctorSignature) -> Self {
        FunctorSignature::Dist(Box::new(inner))
    }

    pub fn exp(base: FunctorSignature, exponent: LabelSet) -> Self {
        FunctorSignature::Exp(Box::new(base), exponent)
    }

    pub fn compose(outer: FunctorSignature, inner: FunctorSignature) -> Self {
        FunctorSignature::Compose(Box::new(outer), Box::new(inner))
    }

    pub fn product(left: FunctorSignature, right: FunctorSignature) -> Self {
        FunctorSignature::Product(Box::new(left), Box::new(right))
    }

    pub fn coproduct(left: FunctorSignature, right: FunctorSignature) -> Self {
        FunctorSignature::Coproduct(Box::new(left), Box::new(right))
    }

    /// The labelled-transition-system signature `P(A x _)`.
    pub fn lts(alphabet: LabelSet) -> Self {
        Self::power(Self::product(FunctorSignature::Const(alphabet), FunctorSignature::Identity))
    }

    /// Syntactic depth of the tree; a leaf has depth 1.
    pub fn depth(&self) -> usize {
        match self {
            FunctorSignature::Identity | FunctorSignature::Const(_) => 1,
            FunctorSignature::Exp(b, _)
            | FunctorSignature::Power(b)
            | FunctorSignature::Dist(b) => 1 + b.depth(),
            FunctorSignature::Compose(l, r)
            | FunctorSignature::Product(l, r)
            | FunctorSignature::Coproduct(l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    /// True when the signature contains a `Dist` node, in which case the
    /// functor's action on a set cannot be enumerated.
    pub fn has_dist(&self) -> bool {
        match self {
            FunctorSignature::Identity | FunctorSignature::Const(_) => false,
            FunctorSignature::Dist(_) => true,
            FunctorSignature::Exp(b, _) | FunctorSignature::Power(b) => b.has_dist(),
            FunctorSignature::Compose(l, r)
            | FunctorSignature::Product(l, r)
            | FunctorSignature::Coproduct(l, r) => l.has_dist() || r.has_dist(),
        }
    }

    /// Parses the concrete syntax with no predeclared alphabets, so every
    /// label set must be written inline as `Name{a,b,...}`.
    pub fn parse(text: &str) -> Result<Self, SignatureError> {
        Self::parse_with_alphabets(text, &BTreeMap::new())
    }

    /// Parses the concrete syntax. Bare names such as `A` are looked up in
    /// `alphabets`; inline forms `A{a,b}` declare their labels on the spot.
    pub fn parse_with_alphabets(
        text: &str,
        alphabets: &BTreeMap<String, LabelSet>,
    ) -> Result<Self, SignatureError> {
        let mut p = Parser { tokens: tokenize(text)?, pos: 0, alphabets };
        let sig = p.coproduct()?;
        p.expect_end()?;
        Ok(sig)
    }
}

// Precedence levels used by the printer. Children at strictly lower binding
// strength than their context are parenthesized so parsing is inverse to
// printing.
fn binding(sig: &FunctorSignature) -> u8 {
    match sig {
        FunctorSignature::Coproduct(..) => 1,
        FunctorSignature::Product(..) => 2,
        FunctorSignature::Compose(..) => 3,
        FunctorSignature::Exp(..) => 4,
        _ => 5,
    }
}

fn write_child(
    f: &mut fmt::Formatter<'_>,
    child: &FunctorSignature,
    min: u8,
) -> fmt::Result {
    if binding(child) < min {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for FunctorSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctorSignature::Identity => write!(f, "_"),
            FunctorSignature::Const(ls) => write!(f, "{ls}"),
            FunctorSignature::Exp(base, exp) => {
                // Exponent binds tighter than the binary operators, and
                // left-nested exponents need parens to round-trip.
                if binding(base) < 5 {
                    write!(f, "({base})^{exp}")
                } else {
                    write!(f, "{base}^{exp}")
                }
            }
            FunctorSignature::Power(inner) => match **inner {
                FunctorSignature::Identity => write!(f, "P"),
                _ => write!(f, "P({inner})"),
            },
            FunctorSignature::Dist(inner) => match **inner {
                FunctorSignature::Identity => write!(f, "D"),
                _ => write!(f, "D({inner})"),
            },
            FunctorSignature::Compose(l, r) => {
                write_child(f, l, 3)?;
                write!(f, " o ")?;
                write_child(f, r, 4)
            }
            FunctorSignature::Product(l, r) => {
                write_child(f, l, 2)?;
                write!(f, " x ")?;
                write_child(f, r, 3)
            }
            FunctorSignature::Coproduct(l, r) => {
                write_child(f, l, 1)?;
                write!(f, " + ")?;
                write_child(f, r, 2)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Underscore,
    Name(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Plus,
    Caret,
    Times,
    Circ,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, SignatureError> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = text[i..].chars().next().unwrap();
        let tok = match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += c.len_utf8();
                continue;
            }
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            ',' => Tok::Comma,
            '+' => Tok::Plus,
            '^' => Tok::Caret,
            '_' => Tok::Underscore,
            '∘' => Tok::Circ,
            c if c.is_ascii_alphanumeric() || c == '*' || c == '.' || c == '-' => {
                let start = i;
                let mut j = i;
                while j < bytes.len() {
                    let d = text[j..].chars().next().unwrap();
                    if d.is_ascii_alphanumeric() || d == '*' || d == '.' || d == '-' || d == '_' {
                        j += d.len_utf8();
                    } else {
                        break;
                    }
                }
                let word = &text[start..j];
                i = j;
                let tok = match word {
                    "x" => Tok::Times,
                    "o" => Tok::Circ,
                    _ => Tok::Name(word.to_string()),
                };
                out.push((start, tok));
                continue;
            }
            other => {
                return Err(SignatureError::Syntax {
                    position: i,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        out.push((i, tok));
        i += c.len_utf8();
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(usize, Tok)>,
    pos: usize,
    alphabets: &'a BTreeMap<String, LabelSet>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn position(&self) -> usize {
        self.tokens.get(self.pos).map(|(p, _)| *p).unwrap_or(usize::MAX)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn err(&self, message: impl Into<String>) -> SignatureError {
        SignatureError::Syntax {
            position: self.tokens.get(self.pos).map(|(p, _)| *p).unwrap_or(usize::MAX),
            message: message.into(),
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), SignatureError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn expect_end(&self) -> Result<(), SignatureError> {
        if self.pos == self.tokens.len() {
            Ok(())
        } else {
            Err(self.err("trailing input after signature"))
        }
    }

    fn coproduct(&mut self) -> Result<FunctorSignature, SignatureError> {
        let mut acc = self.product()?;
        while self.peek() == Some(&Tok::Plus) {
            self.pos += 1;
            let rhs = self.product()?;
            acc = FunctorSignature::coproduct(acc, rhs);
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<FunctorSignature, SignatureError> {
        let mut acc = self.compose()?;
        while self.peek() == Some(&Tok::Times) {
            self.pos += 1;
            let rhs = self.compose()?;
            acc = FunctorSignature::product(acc, rhs);
        }
        Ok(acc)
    }

    fn compose(&mut self) -> Result<FunctorSignature, SignatureError> {
        let mut acc = self.exponent()?;
        while self.peek() == Some(&Tok::Circ) {
            self.pos += 1;
            let rhs = self.exponent()?;
            acc = FunctorSignature::compose(acc, rhs);
        }
        Ok(acc)
    }

    fn exponent(&mut self) -> Result<FunctorSignature, SignatureError> {
        let mut acc = self.atom()?;
        while self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let exp = self.label_set()?;
            acc = FunctorSignature::exp(acc, exp);
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<FunctorSignature, SignatureError> {
        match self.bump() {
            Some(Tok::Underscore) => Ok(FunctorSignature::Identity),
            Some(Tok::LParen) => {
                let inner = self.coproduct()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Name(name)) if name == "P" || name == "D" => {
                let inner = if self.peek() == Some(&Tok::LParen) {
                    self.pos += 1;
                    let inner = self.coproduct()?;
                    self.expect(Tok::RParen, "`)`")?;
                    inner
                } else {
                    FunctorSignature::Identity
                };
                Ok(if name == "P" {
                    FunctorSignature::power(inner)
                } else {
                    FunctorSignature::dist(inner)
                })
            }
            Some(Tok::Name(_)) => {
                self.pos -= 1;
                let ls = self.label_set()?;
                Ok(FunctorSignature::Const(ls))
            }
            _ => Err(self.err("expected `_`, `P`, `D`, an alphabet, or `(`")),
        }
    }

    fn label_set(&mut self) -> Result<LabelSet, SignatureError> {
        let position = self.position();
        let name = match self.bump() {
            Some(Tok::Name(n)) => n,
            _ => {
                self.pos -= 1;
                return Err(self.err("expected an alphabet name"));
            }
        };
        if self.peek() == Some(&Tok::LBrace) {
            self.pos += 1;
            let mut labels = Vec::new();
            loop {
                match self.bump() {
                    Some(Tok::Name(l)) => labels.push(l),
                    Some(Tok::Underscore) => labels.push("_".to_string()),
                    _ => {
                        self.pos -= 1;
                        return Err(self.err("expected a label"));
                    }
                }
                match self.bump() {
                    Some(Tok::Comma) => continue,
                    Some(Tok::RBrace) => break,
                    _ => {
                        self.pos -= 1;
                        return Err(self.err("expected `,` or `}`"));
                    }
                }
            }
            LabelSet::new(name, labels)
        } else {
            self.alphabets
                .get(&name)
                .cloned()
                .ok_or(SignatureError::UnknownAlphabet { name, position })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alpha(name: &str, labels: &[&str]) -> LabelSet {
        LabelSet::new(name, labels.iter().copied()).unwrap()
    }

    fn std_alphabets() -> BTreeMap<String, LabelSet> {
        let mut m = BTreeMap::new();
        m.insert("A".to_string(), alpha("A", &["a", "b"]));
        m
    }

    #[test]
    fn parses_lts_signature() {
        let sig = FunctorSignature::parse_with_alphabets("P(A x _)", &std_alphabets()).unwrap();
        assert_eq!(
            sig,
            FunctorSignature::power(FunctorSignature::product(
                FunctorSignature::Const(alpha("A", &["a", "b"])),
                FunctorSignature::Identity,
            ))
        );
    }

    #[test]
    fn bare_d_is_dist_of_identity() {
        assert_eq!(
            FunctorSignature::parse("D").unwrap(),
            FunctorSignature::dist(FunctorSignature::Identity)
        );
        assert_eq!(
            FunctorSignature::parse("P").unwrap(),
            FunctorSignature::power(FunctorSignature::Identity)
        );
    }

    #[test]
    fn parses_segala_signature() {
        let sig = FunctorSignature::parse_with_alphabets("P(D(A x _))", &std_alphabets()).unwrap();
        assert_eq!(
            sig,
            FunctorSignature::power(FunctorSignature::dist(FunctorSignature::product(
                FunctorSignature::Const(alpha("A", &["a", "b"])),
                FunctorSignature::Identity,
            )))
        );
    }

    #[test]
    fn parses_explicit_composition() {
        let sig = FunctorSignature::parse_with_alphabets("P o D o (A x _)", &std_alphabets())
            .unwrap();
        assert_eq!(
            sig,
            FunctorSignature::compose(
                FunctorSignature::compose(
                    FunctorSignature::power(FunctorSignature::Identity),
                    FunctorSignature::dist(FunctorSignature::Identity),
                ),
                FunctorSignature::product(
                    FunctorSignature::Const(alpha("A", &["a", "b"])),
                    FunctorSignature::Identity,
                ),
            )
        );
    }

    #[test]
    fn parses_inline_alphabets_and_exponent() {
        let sig = FunctorSignature::parse("(_ + One{*})^Act{a0,a1}").unwrap();
        assert_eq!(
            sig,
            FunctorSignature::exp(
                FunctorSignature::coproduct(
                    FunctorSignature::Identity,
                    FunctorSignature::Const(alpha("One", &["*"])),
                ),
                alpha("Act", &["a0", "a1"]),
            )
        );
    }

    #[test]
    fn rejects_empty_and_unknown_alphabets() {
        assert!(matches!(
            FunctorSignature::parse("A{}"),
            Err(SignatureError::Syntax { .. })
        ));
        assert!(matches!(
            LabelSet::new("A", Vec::<String>::new()),
            Err(SignatureError::EmptyLabelSet { .. })
        ));
        let err = FunctorSignature::parse("P(B x _)").unwrap_err();
        assert!(matches!(err, SignatureError::UnknownAlphabet { ref name, .. } if name == "B"));
    }

    #[test]
    fn rejects_trailing_input_with_position() {
        let err = FunctorSignature::parse("_ _").unwrap_err();
        match err {
            SignatureError::Syntax { position, .. } => assert_eq!(position, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn display_examples() {
        let m = std_alphabets();
        for text in [
            "P(A{a,b} x _)",
            "D",
            "P(D(A{a,b} x _))",
            "(_ + One{*})^Act{a0,a1}",
            "P o D o (A{a,b} x _)",
            "A{a,b} x _ x P",
            "A{a,b} + _ x D",
        ] {
            let sig = FunctorSignature::parse_with_alphabets(text, &m).unwrap();
            assert_eq!(sig.to_string(), text);
        }
    }

    proptest::proptest! {
        #[test]
        fn pretty_parse_round_trip(sig in arbitrary_signature(3)) {
            let printed = sig.to_string();
            let reparsed = FunctorSignature::parse(&printed).unwrap();
            proptest::prop_assert_eq!(reparsed, sig);
        }
    }

    fn arbitrary_signature(depth: u32) -> impl proptest::strategy::Strategy<Value = FunctorSignature> {
        use proptest::prelude::*;
        let label_set = proptest::sample::select(vec![
            alpha("A", &["a", "b"]),
            alpha("B", &["u"]),
            alpha("Act", &["go", "stop", "wait"]),
        ]);
        let leaf = prop_oneof![
            Just(FunctorSignature::Identity),
            label_set.clone().prop_map(FunctorSignature::Const),
        ];
        leaf.prop_recursive(depth, 24, 3, move |inner| {
            prop_oneof![
                inner.clone().prop_map(FunctorSignature::power),
                inner.clone().prop_map(FunctorSignature::dist),
                (inner.clone(), label_set.clone())
                    .prop_map(|(b, a)| FunctorSignature::exp(b, a)),
                (inner.clone(), inner.clone())
                    .prop_map(|(l, r)| FunctorSignature::compose(l, r)),
                (inner.clone(), inner.clone())
                    .prop_map(|(l, r)| FunctorSignature::product(l, r)),
                (inner.clone(), inner)
                    .prop_map(|(l, r)| FunctorSignature::coproduct(l, r)),
            ]
        })
    }
}
