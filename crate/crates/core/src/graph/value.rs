//! Composite context values and their textual form.
//!
//! ```text
//! expr  := term { ("AND" | "OR") term }      one operator per level
//! term  := "(" expr ")" | pair
//! pair  := path ("=" | "==") value
//! value := word | '"' chars '"'
//! ```
//!
//! Mixing `AND` and `OR` on one level requires parentheses. Compositions
//! (see [`Composition`]) use the same grammar with bare paths as leaves.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use super::{Composition, GraphError};
use crate::context::Scalar;
use crate::ident::AttrPath;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ValueExpr {
    Pair { attribute: AttrPath, value: Scalar },
    And(Vec<ValueExpr>),
    Or(Vec<ValueExpr>),
}

impl ValueExpr {
    pub fn pair(attribute: impl Into<AttrPath>, value: impl Into<Scalar>) -> Self {
        ValueExpr::Pair {
            attribute: attribute.into(),
            value: value.into(),
        }
    }

    /// Flattened, sorted and deduplicated form. Two expressions with the same
    /// normal form denote the same composite value.
    pub fn normalized(&self) -> ValueExpr {
        match self {
            ValueExpr::Pair { .. } => self.clone(),
            ValueExpr::And(xs) => Self::normalize_op(xs, true),
            ValueExpr::Or(xs) => Self::normalize_op(xs, false),
        }
    }

    fn normalize_op(xs: &[ValueExpr], and: bool) -> ValueExpr {
        let mut flat = Vec::new();
        for x in xs {
            match x.normalized() {
                ValueExpr::And(inner) if and => flat.extend(inner),
                ValueExpr::Or(inner) if !and => flat.extend(inner),
                other => flat.push(other),
            }
        }
        flat.sort();
        flat.dedup();
        if flat.len() == 1 {
            return flat.pop().unwrap();
        }
        if and {
            ValueExpr::And(flat)
        } else {
            ValueExpr::Or(flat)
        }
    }

    /// Every `(attribute, value)` pair, left to right.
    pub fn pairs(&self) -> Vec<(&AttrPath, &Scalar)> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect<'a>(&'a self, out: &mut Vec<(&'a AttrPath, &'a Scalar)>) {
        match self {
            ValueExpr::Pair { attribute, value } => out.push((attribute, value)),
            ValueExpr::And(xs) | ValueExpr::Or(xs) => xs.iter().for_each(|x| x.collect(out)),
        }
    }
}

fn needs_quotes(s: &str) -> bool {
    s.is_empty()
        || s.chars()
            .any(|c| c.is_whitespace() || matches!(c, '(' | ')' | '=' | '"'))
        || s.eq_ignore_ascii_case("and")
        || s.eq_ignore_ascii_case("or")
        || !matches!(Scalar::parse_lenient(s), Scalar::Text(_))
}

impl fmt::Display for ValueExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (op, xs) = match self {
            ValueExpr::Pair { attribute, value } => {
                let v = value.to_string();
                return if matches!(value, Scalar::Text(_)) && needs_quotes(&v) {
                    write!(f, "{attribute} = \"{v}\"")
                } else {
                    write!(f, "{attribute} = {v}")
                };
            }
            ValueExpr::And(xs) => (" AND ", xs),
            ValueExpr::Or(xs) => (" OR ", xs),
        };
        for (i, x) in xs.iter().enumerate() {
            if i > 0 {
                f.write_str(op)?;
            }
            if matches!(x, ValueExpr::Pair { .. }) {
                write!(f, "{x}")?;
            } else {
                write!(f, "({x})")?;
            }
        }
        Ok(())
    }
}

impl FromStr for ValueExpr {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser::new(s)?;
        let e = p.expr(
            &mut |p| {
                let (attr, _) = p.word("attribute path")?;
                match p.next() {
                    Some((Tok::Eq, _)) => {}
                    other => return Err(p.unexpected(other, "`=`")),
                }
                let value = match p.next() {
                    Some((Tok::Word(w), _)) => Scalar::parse_lenient(&w),
                    Some((Tok::Quoted(q), _)) => Scalar::Text(q),
                    other => return Err(p.unexpected(other, "value")),
                };
                Ok(ValueExpr::Pair {
                    attribute: AttrPath::from(attr),
                    value,
                })
            },
            ValueExpr::And,
            ValueExpr::Or,
        )?;
        p.finish()?;
        Ok(e)
    }
}

impl FromStr for Composition {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser::new(s)?;
        let e = p.expr(
            &mut |p| {
                p.word("attribute path")
                    .map(|(w, _)| Composition::Attr(w.into()))
            },
            Composition::And,
            Composition::Or,
        )?;
        p.finish()?;
        Ok(e)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    Eq,
    Word(String),
    Quoted(String),
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    len: usize,
}

fn syntax(position: usize, message: impl Into<String>) -> GraphError {
    GraphError::ValueSyntax {
        position,
        message: message.into(),
    }
}

impl Parser {
    fn new(src: &str) -> Result<Self, GraphError> {
        let mut toks = Vec::new();
        let mut it = src.char_indices().peekable();
        while let Some(&(i, c)) = it.peek() {
            match c {
                c if c.is_whitespace() => {
                    it.next();
                }
                '(' => {
                    it.next();
                    toks.push((Tok::LParen, i));
                }
                ')' => {
                    it.next();
                    toks.push((Tok::RParen, i));
                }
                '=' => {
                    it.next();
                    if matches!(it.peek(), Some((_, '='))) {
                        it.next();
                    }
                    toks.push((Tok::Eq, i));
                }
                '"' => {
                    it.next();
                    let mut s = String::new();
                    loop {
                        match it.next() {
                            Some((_, '"')) => break,
                            Some((_, ch)) => s.push(ch),
                            None => return Err(syntax(i, "unterminated quote")),
                        }
                    }
                    toks.push((Tok::Quoted(s), i));
                }
                _ => {
                    let mut s = String::new();
                    while let Some(&(_, ch)) = it.peek() {
                        if ch.is_whitespace() || matches!(ch, '(' | ')' | '=' | '"') {
                            break;
                        }
                        s.push(ch);
                        it.next();
                    }
                    toks.push((Tok::Word(s), i));
                }
            }
        }
        Ok(Parser {
            toks,
            at: 0,
            len: src.len(),
        })
    }

    fn peek(&self) -> Option<&(Tok, usize)> {
        self.toks.get(self.at)
    }

    fn next(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.at).cloned();
        self.at += 1;
        t
    }

    fn unexpected(&self, got: Option<(Tok, usize)>, expected: &str) -> GraphError {
        match got {
            Some((t, pos)) => syntax(pos, alloc::format!("expected {expected}, found {t:?}")),
            None => syntax(
                self.len,
                alloc::format!("expected {expected}, found end of input"),
            ),
        }
    }

    fn word(&mut self, expected: &str) -> Result<(String, usize), GraphError> {
        match self.next() {
            Some((Tok::Word(w), pos)) if is_op(&w).is_none() => Ok((w, pos)),
            other => Err(self.unexpected(other, expected)),
        }
    }

    fn finish(&mut self) -> Result<(), GraphError> {
        match self.next() {
            None => Ok(()),
            other => Err(self.unexpected(other, "end of input")),
        }
    }

    fn expr<T>(
        &mut self,
        leaf: &mut dyn FnMut(&mut Parser) -> Result<T, GraphError>,
        and: fn(Vec<T>) -> T,
        or: fn(Vec<T>) -> T,
    ) -> Result<T, GraphError> {
        let mut items = alloc::vec![self.term(leaf, and, or)?];
        let mut op: Option<bool> = None;
        while let Some((Tok::Word(w), pos)) = self.peek().cloned() {
            let Some(is_and) = is_op(&w) else { break };
            if op.is_some_and(|o| o != is_and) {
                return Err(syntax(pos, "mixing AND and OR needs parentheses"));
            }
            op = Some(is_and);
            self.at += 1;
            items.push(self.term(leaf, and, or)?);
        }
        Ok(match op {
            None => items.pop().unwrap(),
            Some(true) => and(items),
            Some(false) => or(items),
        })
    }

    fn term<T>(
        &mut self,
        leaf: &mut dyn FnMut(&mut Parser) -> Result<T, GraphError>,
        and: fn(Vec<T>) -> T,
        or: fn(Vec<T>) -> T,
    ) -> Result<T, GraphError> {
        if matches!(self.peek(), Some((Tok::LParen, _))) {
            self.at += 1;
            let e = self.expr(leaf, and, or)?;
            match self.next() {
                Some((Tok::RParen, _)) => Ok(e),
                other => Err(self.unexpected(other, "`)`")),
            }
        } else {
            leaf(self)
        }
    }
}

fn is_op(w: &str) -> Option<bool> {
    if w.eq_ignore_ascii_case("and") {
        Some(true)
    } else if w.eq_ignore_ascii_case("or") {
        Some(false)
    } else {
        None
    }
}

/// Value `V_a` observed at a state node's composite slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositeValue {
    pub expr: ValueExpr,
    /// Largest constituent delay in minutes; 0 when all are untimed.
    pub max_delay: u32,
}

impl CompositeValue {
    pub fn untimed(expr: ValueExpr) -> Self {
        CompositeValue { expr, max_delay: 0 }
    }

    pub fn is_timed(&self) -> bool {
        self.max_delay > 0
    }

    /// Equality of normal forms; delays are not part of the identity.
    pub fn matches(&self, pattern: &ValueExpr) -> bool {
        self.expr.normalized() == pattern.normalized()
    }
}

impl fmt::Display for CompositeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.expr)?;
        if self.max_delay > 0 {
            write!(f, " ({} min)", self.max_delay)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec;

    #[test]
    fn parse_and_print_round_trip() {
        let src = "Receptionist.Status = Absent AND Healthcare_Assistant.Status = Present";
        let e: ValueExpr = src.parse().unwrap();
        assert_eq!(
            e,
            ValueExpr::And(vec![
                ValueExpr::pair("Receptionist.Status", "Absent"),
                ValueExpr::pair("Healthcare_Assistant.Status", "Present"),
            ])
        );
        assert_eq!(format!("{e}"), src);
        let nested: ValueExpr = "A.x = 1 OR (B.y == \"very poor\" AND C.z = true)"
            .parse()
            .unwrap();
        assert_eq!(nested.to_string().parse::<ValueExpr>().unwrap(), nested);
    }

    #[test]
    fn mixed_operators_need_parentheses() {
        let err = "A.x = 1 AND B.y = 2 OR C.z = 3"
            .parse::<ValueExpr>()
            .unwrap_err();
        assert!(matches!(err, GraphError::ValueSyntax { position: 20, .. }));
        assert!("".parse::<ValueExpr>().is_err());
        assert!("A.x =".parse::<ValueExpr>().is_err());
    }

    #[test]
    fn normal_form_ignores_order_case_and_nesting() {
        let a: ValueExpr = "A.x = rainy AND (B.y = 2 AND C.z = on)".parse().unwrap();
        let b: ValueExpr = "C.z = ON AND A.x = Rainy AND B.y = 2".parse().unwrap();
        assert_eq!(a.normalized(), b.normalized());
        let c: ValueExpr = "C.z = ON OR A.x = Rainy OR B.y = 2".parse().unwrap();
        assert_ne!(a.normalized(), c.normalized());
        let v = CompositeValue {
            expr: b,
            max_delay: 30,
        };
        assert!(v.matches(&a));
    }

    #[test]
    fn composition_parses() {
        let c: Composition = "A.x AND (B.y OR C.z)".parse().unwrap();
        assert_eq!(c.leaves().len(), 3);
        assert_eq!(format!("{c}"), "(A.x AND (B.y OR C.z))");
    }
}
