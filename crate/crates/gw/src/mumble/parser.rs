//! Concrete syntax for formulas.
//!
//! Connectives in order of loosening precedence: `~`, `&`, `|`, `->`
//! (right-associative). Quantifier bodies extend as far right as
//! possible. Terms use functional syntax (`f(t)`, `fst(t)`, `snd(t)`,
//! `pair(s, t)`), so a parenthesis in formula position always opens a
//! formula. Membership `t in {v:T | phi}` is sugar for `phi[v := t]`,
//! expanded capture-avoidingly at parse time. Errors carry byte offsets
//! into the input.

use thiserror::Error;

use super::formula::{Formula, Term, Type};

#[derive(Debug, Error, PartialEq)]
#[error("parse error at byte {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

fn err<T>(position: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        position,
        message: message.into(),
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Arrow,
    Bar,
    Amp,
    Tilde,
    Equals,
    Star,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Colon,
    Dot,
    Comma,
}

impl std::fmt::Display for Token {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let text = match self {
            Token::Ident(s) => return write!(f, "`{s}`"),
            Token::Arrow => "`->`",
            Token::Bar => "`|`",
            Token::Amp => "`&`",
            Token::Tilde => "`~`",
            Token::Equals => "`=`",
            Token::Star => "`*`",
            Token::LParen => "`(`",
            Token::RParen => "`)`",
            Token::LBrace => "`{`",
            Token::RBrace => "`}`",
            Token::Colon => "`:`",
            Token::Dot => "`.`",
            Token::Comma => "`,`",
        };
        write!(f, "{text}")
    }
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    tokens.push((Token::Arrow, i));
                    i += 2;
                } else {
                    return err(i, "expected `->`");
                }
            }
            b'|' => {
                tokens.push((Token::Bar, i));
                i += 1;
            }
            b'&' => {
                tokens.push((Token::Amp, i));
                i += 1;
            }
            b'~' => {
                tokens.push((Token::Tilde, i));
                i += 1;
            }
            b'=' => {
                tokens.push((Token::Equals, i));
                i += 1;
            }
            b'*' => {
                tokens.push((Token::Star, i));
                i += 1;
            }
            b'(' => {
                tokens.push((Token::LParen, i));
                i += 1;
            }
            b')' => {
                tokens.push((Token::RParen, i));
                i += 1;
            }
            b'{' => {
                tokens.push((Token::LBrace, i));
                i += 1;
            }
            b'}' => {
                tokens.push((Token::RBrace, i));
                i += 1;
            }
            b':' => {
                tokens.push((Token::Colon, i));
                i += 1;
            }
            b'.' => {
                tokens.push((Token::Dot, i));
                i += 1;
            }
            b',' => {
                tokens.push((Token::Comma, i));
                i += 1;
            }
            b if b.is_ascii_alphabetic() || b == b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'')
                {
                    i += 1;
                }
                tokens.push((Token::Ident(text[start..i].to_string()), start));
            }
            _ => return err(i, format!("unexpected byte `{}`", bytes[i] as char)),
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn position(&self) -> usize {
        self.tokens.get(self.pos).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn advance(&mut self) -> Option<Token> {
        let token = self.tokens.get(self.pos).map(|(t, _)| t.clone());
        if token.is_some() {
            self.pos += 1;
        }
        token
    }

    fn expect(&mut self, token: Token) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if t == &token => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => err(self.position(), format!("expected {token}, found {t}")),
            None => err(self.position(), format!("expected {token}, found end of input")),
        }
    }

    fn expect_ident(&mut self) -> Result<String, ParseError> {
        match self.advance() {
            Some(Token::Ident(name)) => Ok(name),
            Some(t) => err(self.position(), format!("expected an identifier, found {t}")),
            None => err(self.position(), "expected an identifier, found end of input"),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let left = self.disjunction()?;
        if self.peek() == Some(&Token::Arrow) {
            self.pos += 1;
            let right = self.formula()?;
            return Ok(Formula::implies(left, right));
        }
        Ok(left)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.conjunction()?;
        while self.peek() == Some(&Token::Bar) {
            self.pos += 1;
            let right = self.conjunction()?;
            left = Formula::or(left, right);
        }
        Ok(left)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.unary()?;
        while self.peek() == Some(&Token::Amp) {
            self.pos += 1;
            let right = self.unary()?;
            left = Formula::and(left, right);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Token::Tilde) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Token::Ident(name)) if name == "forall" || name == "exists" => {
                let universal = name == "forall";
                self.pos += 1;
                let var = self.expect_ident()?;
                self.expect(Token::Colon)?;
                let ty = self.ty()?;
                self.expect(Token::Dot)?;
                let body = self.formula()?;
                Ok(if universal {
                    Formula::forall(&var, ty, body)
                } else {
                    Formula::exists(&var, ty, body)
                })
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Token::LParen) => {
                self.pos += 1;
                let inner = self.formula()?;
                self.expect(Token::RParen)?;
                Ok(inner)
            }
            Some(Token::Ident(name)) if name == "true" => {
                self.pos += 1;
                Ok(Formula::True)
            }
            Some(Token::Ident(name)) if name == "false" => {
                self.pos += 1;
                Ok(Formula::False)
            }
            Some(Token::Ident(_)) => {
                let left = self.term()?;
                match self.peek() {
                    Some(Token::Equals) => {
                        self.pos += 1;
                        let right = self.term()?;
                        Ok(Formula::Eq(left, right))
                    }
                    Some(Token::Ident(kw)) if kw == "in" => {
                        self.pos += 1;
                        self.comprehension(left)
                    }
                    _ => err(
                        self.position(),
                        "expected `=` or `in` after a term",
                    ),
                }
            }
            Some(t) => {
                let t = t.clone();
                err(self.position(), format!("expected a formula, found {t}"))
            }
            None => err(self.position(), "expected a formula, found end of input"),
        }
    }

    fn comprehension(&mut self, subject: Term) -> Result<Formula, ParseError> {
        self.expect(Token::LBrace)?;
        let var = self.expect_ident()?;
        self.expect(Token::Colon)?;
        let _ty = self.ty()?;
        self.expect(Token::Bar)?;
        let body = self.formula()?;
        self.expect(Token::RBrace)?;
        Ok(body.subst(&var, &subject))
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let name = self.expect_ident()?;
        if matches!(name.as_str(), "true" | "false" | "forall" | "exists" | "in") {
            return err(self.position(), format!("keyword `{name}` used as a term"));
        }
        if self.peek() != Some(&Token::LParen) {
            return Ok(Term::var(&name));
        }
        self.pos += 1;
        match name.as_str() {
            "fst" => {
                let inner = self.term()?;
                self.expect(Token::RParen)?;
                Ok(Term::Fst(Box::new(inner)))
            }
            "snd" => {
                let inner = self.term()?;
                self.expect(Token::RParen)?;
                Ok(Term::Snd(Box::new(inner)))
            }
            "pair" => {
                let first = self.term()?;
                self.expect(Token::Comma)?;
                let second = self.term()?;
                self.expect(Token::RParen)?;
                Ok(Term::pair(first, second))
            }
            _ => {
                let argument = self.term()?;
                self.expect(Token::RParen)?;
                Ok(Term::app(&name, argument))
            }
        }
    }

    fn ty(&mut self) -> Result<Type, ParseError> {
        let mut left = self.ty_atom()?;
        while self.peek() == Some(&Token::Star) {
            self.pos += 1;
            let right = self.ty_atom()?;
            left = Type::prod(left, right);
        }
        Ok(left)
    }

    fn ty_atom(&mut self) -> Result<Type, ParseError> {
        match self.peek() {
            Some(Token::LParen) => {
                self.pos += 1;
                let inner = self.ty()?;
                self.expect(Token::RParen)?;
                Ok(inner)
            }
            Some(Token::Ident(_)) => Ok(Type::Base(self.expect_ident()?)),
            Some(t) => {
                let t = t.clone();
                err(self.position(), format!("expected a type, found {t}"))
            }
            None => err(self.position(), "expected a type, found end of input"),
        }
    }
}

/// Parses a formula; the entire input must be consumed.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut parser = Parser {
        tokens: tokenize(text)?,
        pos: 0,
        end: text.len(),
    };
    let formula = parser.formula()?;
    if parser.pos < parser.tokens.len() {
        return err(parser.position(), "trailing input after formula");
    }
    Ok(formula)
}

/// Parses a type; the entire input must be consumed.
pub fn parse_type(text: &str) -> Result<Type, ParseError> {
    let mut parser = Parser {
        tokens: tokenize(text)?,
        pos: 0,
        end: text.len(),
    };
    let ty = parser.ty()?;
    if parser.pos < parser.tokens.len() {
        return err(parser.position(), "trailing input after type");
    }
    Ok(ty)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::mumble::formula::{check_formula, Context, FormulaError, Signature};

    #[test]
    fn surjectivity_parses_and_checks() {
        let formula = parse_formula("forall y:Y. exists x:X. f(x) = y").unwrap();
        assert_eq!(
            formula,
            Formula::forall(
                "y",
                Type::base("Y"),
                Formula::exists(
                    "x",
                    Type::base("X"),
                    Formula::Eq(Term::app("f", Term::var("x")), Term::var("y")),
                ),
            )
        );
        let mut sig = Signature::new();
        sig.declare("f", Type::base("X"), Type::base("Y")).unwrap();
        check_formula(&sig, &Context::new(), &formula).unwrap();
    }

    #[test]
    fn cross_type_equality_fails_the_checker() {
        let formula = parse_formula("x = y").unwrap();
        let ctx = Context::new()
            .extended("x", Type::base("X"))
            .extended("y", Type::base("Y"));
        assert!(matches!(
            check_formula(&Signature::new(), &ctx, &formula),
            Err(FormulaError::UnequalSides { .. })
        ));
    }

    #[test]
    fn membership_desugars_to_substitution() {
        let sugared = parse_formula("a in {z:X | g(z) = b}").unwrap();
        let plain = parse_formula("g(a) = b").unwrap();
        assert_eq!(sugared, plain);
    }

    #[test]
    fn membership_desugaring_avoids_capture() {
        let sugared = parse_formula("f(y) in {z:Y | exists y:X. h(y) = z}").unwrap();
        match &sugared {
            Formula::Exists(bound, _, inner) => {
                assert_ne!(bound, "y");
                assert_eq!(
                    **inner,
                    Formula::Eq(
                        Term::app("h", Term::var(bound)),
                        Term::app("f", Term::var("y")),
                    )
                );
            }
            other => panic!("unexpected shape {other}"),
        }
        assert_eq!(sugared.free_vars(), BTreeSet::from(["y".to_string()]));
    }

    #[test]
    fn precedence_orders_connectives() {
        let formula = parse_formula("a = b -> c = d | e = f & ~g = h").unwrap();
        let expected = Formula::implies(
            Formula::Eq(Term::var("a"), Term::var("b")),
            Formula::or(
                Formula::Eq(Term::var("c"), Term::var("d")),
                Formula::and(
                    Formula::Eq(Term::var("e"), Term::var("f")),
                    Formula::not(Formula::Eq(Term::var("g"), Term::var("h"))),
                ),
            ),
        );
        assert_eq!(formula, expected);
    }

    #[test]
    fn implication_is_right_associative() {
        let formula = parse_formula("true -> true -> false").unwrap();
        assert_eq!(
            formula,
            Formula::implies(
                Formula::True,
                Formula::implies(Formula::True, Formula::False),
            )
        );
    }

    #[test]
    fn quantifier_bodies_extend_to_the_end() {
        let formula = parse_formula("exists x:X. x = a & x = b").unwrap();
        assert_eq!(
            formula,
            Formula::exists(
                "x",
                Type::base("X"),
                Formula::and(
                    Formula::Eq(Term::var("x"), Term::var("a")),
                    Formula::Eq(Term::var("x"), Term::var("b")),
                ),
            )
        );
    }

    #[test]
    fn parentheses_group_formulas() {
        let formula = parse_formula("(true | false) & true").unwrap();
        assert_eq!(
            formula,
            Formula::and(Formula::or(Formula::True, Formula::False), Formula::True)
        );
    }

    #[test]
    fn projections_and_pairs_parse() {
        let formula = parse_formula("fst(pair(a, b)) = a").unwrap();
        assert_eq!(
            formula,
            Formula::Eq(
                Term::Fst(Box::new(Term::pair(Term::var("a"), Term::var("b")))),
                Term::var("a"),
            )
        );
        let ty = parse_type("X * Y * Z").unwrap();
        assert_eq!(
            ty,
            Type::prod(Type::prod(Type::base("X"), Type::base("Y")), Type::base("Z"))
        );
    }

    #[test]
    fn errors_carry_byte_positions() {
        let missing_colon = parse_formula("forall x X. true").unwrap_err();
        assert_eq!(missing_colon.position, 9);

        let unclosed = parse_formula("(true").unwrap_err();
        assert_eq!(unclosed.position, 5);

        let stray = parse_formula("true ? false").unwrap_err();
        assert_eq!(stray.position, 5);

        let trailing = parse_formula("true false").unwrap_err();
        assert_eq!(trailing.position, 5);
    }
}
