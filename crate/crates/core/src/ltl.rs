//! LTL formulas over primitive-call atoms: the AST, finite-trace evaluation,
//! the sequenced-visit pattern, and an ASCII surface syntax.
//!
//! Semantics are finite-trace: plans are finite, so `G` at the end of a trace
//! is vacuously true, while `F`/`U` without a witness are false.

use std::collections::HashSet;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::model::PrimitiveCall;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LtlError {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("sequenced visit over an empty list")]
    EmptySequence,
    #[error("connective references action ordinal {ordinal}, but only {count} actions exist")]
    DanglingConnective { ordinal: usize, count: usize },
    #[error("formula is outside the plan fragment: {0}")]
    NonPlanFormula(String),
}

/// An LTL formula. Atoms are rendered primitive calls; zero-argument atoms
/// are condition propositions (Wait payloads).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    Atom(PrimitiveCall),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Globally(Box<Formula>),
    Finally(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(call: PrimitiveCall) -> Self {
        Formula::Atom(call)
    }

    /// A zero-argument condition atom.
    pub fn condition(name: impl Into<String>) -> Self {
        Formula::Atom(PrimitiveCall { name: name.into(), args: Vec::new() })
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Self {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Self {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn globally(f: Formula) -> Self {
        Formula::Globally(Box::new(f))
    }

    pub fn finally(f: Formula) -> Self {
        Formula::Finally(Box::new(f))
    }

    pub fn until(l: Formula, r: Formula) -> Self {
        Formula::Until(Box::new(l), Box::new(r))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        render_into(self, &mut out, false);
        out
    }

    /// Unicode rendering for report output.
    pub fn render_unicode(&self) -> String {
        self.render()
            .replace("F(", "\u{1d405}(")
            .replace("G(", "\u{1d406}(")
            .replace(" U ", " \u{1d414} ")
            .replace('&', "\u{2227}")
            .replace('|', "\u{2228}")
            .replace('!', "\u{00ac}")
    }

    pub fn parse(text: &str) -> Result<Formula, LtlError> {
        let mut parser = Parser { src: text, pos: 0 };
        let f = parser.parse_or()?;
        parser.skip_ws();
        if parser.pos != text.len() {
            return Err(LtlError::Parse {
                offset: parser.pos,
                message: "trailing input after formula".into(),
            });
        }
        Ok(f)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl Serialize for Formula {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.render())
    }
}

impl<'de> Deserialize<'de> for Formula {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Formula::parse(&s).map_err(D::Error::custom)
    }
}

// operator precedence: | < & < U < !
fn precedence(f: &Formula) -> u8 {
    match f {
        Formula::Or(..) => 1,
        Formula::And(..) => 2,
        Formula::Until(..) => 3,
        Formula::Not(..) => 4,
        _ => 5,
    }
}

fn render_child(child: &Formula, out: &mut String, needs_parens: bool) {
    if needs_parens {
        out.push('(');
        render_into(child, out, false);
        out.push(')');
    } else {
        render_into(child, out, false);
    }
}

fn render_into(f: &Formula, out: &mut String, _top: bool) {
    match f {
        Formula::True => out.push_str("true"),
        Formula::Atom(call) => out.push_str(&call.render()),
        Formula::Not(x) => {
            out.push('!');
            render_child(x, out, precedence(x) < 4);
        }
        Formula::And(l, r) => {
            render_child(l, out, precedence(l) < 2);
            out.push_str(" & ");
            render_child(r, out, precedence(r) <= 2);
        }
        Formula::Or(l, r) => {
            render_child(l, out, precedence(l) < 1);
            out.push_str(" | ");
            render_child(r, out, precedence(r) <= 1);
        }
        Formula::Until(l, r) => {
            // right-associative
            render_child(l, out, precedence(l) <= 3);
            out.push_str(" U ");
            render_child(r, out, precedence(r) < 3);
        }
        Formula::Globally(x) => {
            out.push_str("G(");
            render_into(x, out, false);
            out.push(')');
        }
        Formula::Finally(x) => {
            out.push_str("F(");
            render_into(x, out, false);
            out.push(')');
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn error(&self, message: impl Into<String>) -> LtlError {
        LtlError::Parse { offset: self.pos, message: message.into() }
    }

    fn eat(&mut self, c: char) -> Result<(), LtlError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`")))
        }
    }

    fn parse_or(&mut self) -> Result<Formula, LtlError> {
        let mut left = self.parse_and()?;
        loop {
            self.skip_ws();
            if self.peek() == Some('|') {
                self.pos += 1;
                let right = self.parse_and()?;
                left = Formula::or(left, right);
            } else {
                return Ok(left);
            }
        }
    }

    fn parse_and(&mut self) -> Result<Formula, LtlError> {
        let mut left = self.parse_until()?;
        loop {
            self.skip_ws();
            if self.peek() == Some('&') {
                self.pos += 1;
                let right = self.parse_until()?;
                left = Formula::and(left, right);
            } else {
                return Ok(left);
            }
        }
    }

    fn parse_until(&mut self) -> Result<Formula, LtlError> {
        let left = self.parse_unary()?;
        self.skip_ws();
        if self.peek_ident() == Some("U") {
            self.take_ident();
            let right = self.parse_until()?;
            return Ok(Formula::until(left, right));
        }
        Ok(left)
    }

    fn parse_unary(&mut self) -> Result<Formula, LtlError> {
        self.skip_ws();
        match self.peek() {
            Some('!') => {
                self.pos += 1;
                Ok(Formula::not(self.parse_unary()?))
            }
            Some('(') => {
                self.pos += 1;
                let inner = self.parse_or()?;
                self.eat(')')?;
                Ok(inner)
            }
            Some(c) if c.is_alphabetic() || c == '_' => self.parse_ident_form(),
            Some(c) => Err(self.error(format!("unexpected character `{c}`"))),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn peek_ident(&self) -> Option<&'a str> {
        let rest = &self.src[self.pos..];
        let trimmed = rest.trim_start();
        let start = self.pos + (rest.len() - trimmed.len());
        let end = trimmed
            .char_indices()
            .find(|(_, c)| !(c.is_alphanumeric() || *c == '_'))
            .map(|(i, _)| i)
            .unwrap_or(trimmed.len());
        if end == 0 {
            None
        } else {
            Some(&self.src[start..start + end])
        }
    }

    fn take_ident(&mut self) -> &'a str {
        self.skip_ws();
        let ident = self.peek_ident().unwrap_or("");
        self.pos += ident.len();
        ident
    }

    fn parse_ident_form(&mut self) -> Result<Formula, LtlError> {
        let at = self.pos;
        let ident = self.take_ident();
        match ident {
            "true" => return Ok(Formula::True),
            "F" | "G" => {
                self.eat('(').map_err(|_| LtlError::Parse {
                    offset: at,
                    message: format!("`{ident}` must be followed by `(`"),
                })?;
                let inner = self.parse_or()?;
                self.eat(')')?;
                return Ok(if ident == "F" {
                    Formula::finally(inner)
                } else {
                    Formula::globally(inner)
                });
            }
            "U" => {
                return Err(LtlError::Parse {
                    offset: at,
                    message: "`U` is an infix operator, not an atom".into(),
                })
            }
            _ => {}
        }
        // atom, optionally with arguments
        self.skip_ws();
        if self.peek() == Some('(') {
            self.pos += 1;
            let close = self.src[self.pos..]
                .find(')')
                .map(|i| self.pos + i)
                .ok_or_else(|| self.error("unterminated argument list"))?;
            let body = &self.src[self.pos..close];
            let args: Vec<String> = if body.trim().is_empty() {
                Vec::new()
            } else {
                body.split(',').map(|a| a.trim().to_string()).collect()
            };
            if args.iter().any(|a| a.is_empty()) {
                return Err(self.error("empty argument in atom"));
            }
            self.pos = close + 1;
            Ok(Formula::Atom(PrimitiveCall { name: ident.to_string(), args }))
        } else {
            Ok(Formula::Atom(PrimitiveCall { name: ident.to_string(), args: Vec::new() }))
        }
    }
}

/// A finite trace: at each step, the set of atomic propositions that hold.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    states: Vec<HashSet<String>>,
}

impl Trace {
    pub fn new() -> Self {
        Trace::default()
    }

    pub fn from_states<I, S>(states: I) -> Self
    where
        I: IntoIterator,
        I::Item: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Trace {
            states: states
                .into_iter()
                .map(|s| s.into_iter().map(Into::into).collect())
                .collect(),
        }
    }

    pub fn push(&mut self, atoms: HashSet<String>) {
        self.states.push(atoms);
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn holds(&self, atom: &str, position: usize) -> bool {
        self.states.get(position).map(|s| s.contains(atom)).unwrap_or(false)
    }

    pub fn states(&self) -> &[HashSet<String>] {
        &self.states
    }
}

/// Finite-trace satisfaction of `f` on `trace` from position 0.
pub fn evaluate(f: &Formula, trace: &Trace) -> bool {
    evaluate_at(f, trace, 0)
}

/// Finite-trace satisfaction from a given position.
pub fn evaluate_at(f: &Formula, trace: &Trace, position: usize) -> bool {
    let n = trace.len();
    match f {
        Formula::True => true,
        Formula::Atom(call) => trace.holds(&call.render(), position),
        Formula::Not(x) => !evaluate_at(x, trace, position),
        Formula::And(l, r) => evaluate_at(l, trace, position) && evaluate_at(r, trace, position),
        Formula::Or(l, r) => evaluate_at(l, trace, position) || evaluate_at(r, trace, position),
        Formula::Globally(x) => (position..n).all(|j| evaluate_at(x, trace, j)),
        Formula::Finally(x) => (position..n).any(|j| evaluate_at(x, trace, j)),
        Formula::Until(l, r) => (position..n).any(|j| {
            evaluate_at(r, trace, j) && (position..j).all(|m| evaluate_at(l, trace, m))
        }),
    }
}

/// The sequenced-visit pattern `F(x1 & F(x2 & ... F(xn)))`: achieve the items
/// in order.
pub fn sequenced_visit(items: &[Formula]) -> Result<Formula, LtlError> {
    let (last, init) = items.split_last().ok_or(LtlError::EmptySequence)?;
    let mut acc = Formula::finally(last.clone());
    for item in init.iter().rev() {
        acc = Formula::finally(Formula::and(item.clone(), acc));
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(name: &str) -> Formula {
        Formula::condition(name)
    }

    #[test]
    fn sequenced_visit_shapes() {
        let a = atom("a");
        let b = atom("b");
        assert_eq!(sequenced_visit(&[a.clone()]).unwrap().render(), "F(a)");
        assert_eq!(sequenced_visit(&[a.clone(), b.clone()]).unwrap().render(), "F(a & F(b))");
        let four: Vec<Formula> = ["p1", "p2", "p3", "p4"].iter().map(|n| atom(n)).collect();
        assert_eq!(
            sequenced_visit(&four).unwrap().render(),
            "F(p1 & F(p2 & F(p3 & F(p4))))"
        );
        assert_eq!(sequenced_visit(&[]), Err(LtlError::EmptySequence));
    }

    #[test]
    fn evaluate_examples() {
        let f = sequenced_visit(&[atom("a"), atom("b")]).unwrap();
        assert!(evaluate(&f, &Trace::from_states([vec!["a"], vec!["b"]])));
        assert!(!evaluate(&f, &Trace::from_states([vec!["b"], vec!["a"]])));
        // same position may witness both items: F uses j >= i
        assert!(evaluate(&f, &Trace::from_states([vec!["a", "b"]])));
        assert!(evaluate(&Formula::globally(Formula::True), &Trace::new()));
        assert!(!evaluate(&Formula::finally(atom("a")), &Trace::new()));
    }

    #[test]
    fn until_semantics() {
        let f = Formula::until(atom("a"), atom("b"));
        assert!(evaluate(&f, &Trace::from_states([vec!["a"], vec!["a"], vec!["b"]])));
        assert!(evaluate(&f, &Trace::from_states([vec!["b"]])));
        assert!(!evaluate(&f, &Trace::from_states([vec!["a"], vec![], vec!["b"]])));
        assert!(!evaluate(&f, &Trace::from_states([vec!["a"], vec!["a"]])));
    }

    #[test]
    fn parse_examples() {
        assert_eq!(
            Formula::parse("a U b").unwrap(),
            Formula::until(atom("a"), atom("b"))
        );
        assert_eq!(Formula::parse("F(a & F(b))").unwrap().render(), "F(a & F(b))");
        let f = Formula::parse("!PickUp(eggs) U water_boiling & F(PickUp(eggs))").unwrap();
        // U binds tighter than &
        assert!(matches!(f, Formula::And(..)));
        assert!(Formula::parse("F(a").is_err());
        assert!(Formula::parse("a &").is_err());
        let err = Formula::parse("a @ b").unwrap_err();
        assert!(matches!(err, LtlError::Parse { offset: 2, .. }));
    }

    #[test]
    fn atoms_with_args() {
        let f = Formula::parse("F(PutIn(apple, fridge))").unwrap();
        assert_eq!(
            f,
            Formula::finally(Formula::atom(PrimitiveCall::new("PutIn", &["apple", "fridge"])))
        );
        assert_eq!(f.render(), "F(PutIn(apple, fridge))");
    }

    #[test]
    fn render_preserves_shape() {
        // right-nested And needs parens; left-nested does not
        let a = atom("a");
        let b = atom("b");
        let c = atom("c");
        let left = Formula::and(Formula::and(a.clone(), b.clone()), c.clone());
        let right = Formula::and(a.clone(), Formula::and(b.clone(), c.clone()));
        assert_eq!(left.render(), "a & b & c");
        assert_eq!(right.render(), "a & (b & c)");
        assert_eq!(Formula::parse(&left.render()).unwrap(), left);
        assert_eq!(Formula::parse(&right.render()).unwrap(), right);

        let u = Formula::until(Formula::until(a.clone(), b.clone()), c.clone());
        assert_eq!(u.render(), "(a U b) U c");
        assert_eq!(Formula::parse(&u.render()).unwrap(), u);
    }

    #[test]
    fn unicode_rendering() {
        let f = Formula::parse("F(!a U b & c)").unwrap();
        let u = f.render_unicode();
        assert!(u.contains('\u{2227}'));
        assert!(u.contains('\u{00ac}'));
        assert!(!u.contains('&'));
    }
}
