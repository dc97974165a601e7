use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use super::{
    ArithOp, Comparison, Condition, Field, Group, Negand, Operand, ParamFilter, Predicate, Query,
};
use crate::context::{Connector, Scalar};

/// Syntax error with the byte offset where parsing stopped.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at {position}: expected {}, found {found}", expected.join(" or "))]
pub struct ParseError {
    pub position: usize,
    pub expected: Vec<&'static str>,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Quoted(String),
    Op(&'static str),
    LParen,
    RParen,
    Comma,
    Arrow,
    AndAnd,
    Plus,
    Minus,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "`{w}`"),
            Tok::Quoted(q) => write!(f, "\"{q}\""),
            Tok::Op(o) => write!(f, "`{o}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::AndAnd => f.write_str("`&&`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
        }
    }
}

fn word_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '.' | ':')
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut out = Vec::new();
    let mut it = src.char_indices().peekable();
    while let Some(&(i, c)) = it.peek() {
        it.next();
        let next = it.peek().map(|&(_, n)| n);
        let tok = match c {
            c if c.is_whitespace() => continue,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '+' => Tok::Plus,
            '-' if next == Some('>') => {
                it.next();
                Tok::Arrow
            }
            '-' => Tok::Minus,
            '&' if next == Some('&') => {
                it.next();
                Tok::AndAnd
            }
            '=' => {
                if next == Some('=') {
                    it.next();
                }
                Tok::Op("=")
            }
            '!' if next == Some('=') => {
                it.next();
                Tok::Op("!=")
            }
            '>' | '<' => {
                if next == Some('=') {
                    it.next();
                    Tok::Op(if c == '>' { ">=" } else { "<=" })
                } else {
                    Tok::Op(if c == '>' { ">" } else { "<" })
                }
            }
            '≥' => Tok::Op(">="),
            '≤' => Tok::Op("<="),
            '≠' => Tok::Op("!="),
            '"' => {
                let mut s = String::new();
                loop {
                    match it.next() {
                        Some((_, '"')) => break,
                        Some((_, ch)) => s.push(ch),
                        None => {
                            return Err(ParseError {
                                position: i,
                                expected: alloc::vec!["closing quote"],
                                found: "end of input".into(),
                            })
                        }
                    }
                }
                Tok::Quoted(s)
            }
            c if word_char(c) => {
                let mut s = String::from(c);
                while let Some(&(_, ch)) = it.peek() {
                    if !word_char(ch) {
                        break;
                    }
                    s.push(ch);
                    it.next();
                }
                Tok::Word(s)
            }
            other => {
                return Err(ParseError {
                    position: i,
                    expected: alloc::vec!["token"],
                    found: alloc::format!("`{other}`"),
                })
            }
        };
        out.push((tok, i));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    end: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn position(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(_, p)| *p)
    }

    fn fail<T>(&self, expected: &[&'static str]) -> PResult<T> {
        Err(ParseError {
            position: self.position(),
            expected: expected.to_vec(),
            found: self
                .peek()
                .map_or_else(|| "end of input".into(), |t| t.to_string()),
        })
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(w)) if w.eq_ignore_ascii_case(kw))
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        let hit = self.is_kw(kw);
        if hit {
            self.at += 1;
        }
        hit
    }

    fn expect_kw(&mut self, kw: &'static str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.fail(&[kw])
        }
    }

    fn expect(&mut self, tok: Tok, name: &'static str) -> PResult<()> {
        if self.peek() == Some(&tok) {
            self.at += 1;
            Ok(())
        } else {
            self.fail(&[name])
        }
    }

    fn name(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                let w = w.clone();
                self.at += 1;
                Ok(w)
            }
            _ => self.fail(&["name"]),
        }
    }

    fn value(&mut self) -> PResult<Scalar> {
        let negative = self.peek() == Some(&Tok::Minus);
        if negative {
            self.at += 1;
        }
        match self.peek().cloned() {
            Some(Tok::Quoted(q)) => {
                self.at += 1;
                Ok(Scalar::Text(q))
            }
            Some(Tok::Word(w)) => {
                if negative {
                    if let Ok(n) = w.parse::<f64>() {
                        self.at += 1;
                        return Ok(Scalar::Number(-n));
                    }
                    return self.fail(&["number"]);
                }
                self.at += 1;
                Ok(Scalar::parse_lenient(&w))
            }
            _ => self.fail(&["value"]),
        }
    }

    fn connector(&mut self) -> PResult<Connector> {
        let parsed = match self.peek() {
            Some(Tok::Op(o)) => o.parse().ok(),
            Some(Tok::Word(w)) => w.parse().ok(),
            _ => None,
        };
        match parsed {
            Some(c) => {
                self.at += 1;
                Ok(c)
            }
            None => self.fail(&["connector"]),
        }
    }

    fn query(&mut self) -> PResult<Query> {
        if self.eat_kw("AND") {
            self.and_query()
        } else if self.eat_kw("OR") {
            self.or_query()
        } else if self.eat_kw("NOT") {
            self.not_query()
        } else if self.eat_kw("ARITH") {
            self.arith()
        } else {
            self.fail(&["AND", "OR", "NOT", "ARITH"])
        }
    }

    fn and_query(&mut self) -> PResult<Query> {
        if self.eat_kw("CHAIN") {
            let mut links = alloc::vec![self.name()?];
            self.expect(Tok::Arrow, "`->`")?;
            links.push(self.name()?);
            while self.peek() == Some(&Tok::Arrow) {
                self.at += 1;
                links.push(self.name()?);
            }
            return Ok(Query::AndChain { links });
        }
        let category = self.name()?;
        self.expect_kw("WHERE")?;
        if self.eat_kw("parameter") {
            let filter = if self.eat_kw("INSTANCE_OF") {
                ParamFilter::InstanceOf(self.name()?)
            } else if self.peek() == Some(&Tok::Op("=")) {
                self.at += 1;
                ParamFilter::Is(self.name()?)
            } else {
                return self.fail(&["INSTANCE_OF", "`=`"]);
            };
            return Ok(Query::AndByParameter { category, filter });
        }
        let condition = self.condition()?;
        Ok(Query::AndConditional {
            category,
            condition,
        })
    }

    fn condition(&mut self) -> PResult<Condition> {
        let mut disj = alloc::vec![self.conj()?];
        while self.eat_kw("OR") {
            disj.push(self.conj()?);
        }
        Ok(Condition(disj))
    }

    fn conj(&mut self) -> PResult<Vec<Group>> {
        let mut groups = alloc::vec![self.group()?];
        while self.eat_kw("AND") {
            groups.push(self.group()?);
        }
        Ok(groups)
    }

    fn group(&mut self) -> PResult<Group> {
        self.expect(Tok::LParen, "`(`")?;
        let mut cmps = alloc::vec![self.comparison()?];
        while self.peek() == Some(&Tok::AndAnd) {
            self.at += 1;
            cmps.push(self.comparison()?);
        }
        self.expect(Tok::RParen, "`)`")?;
        Ok(Group(cmps))
    }

    fn comparison(&mut self) -> PResult<Comparison> {
        let field = if self.eat_kw("attr") {
            Field::Attr
        } else if self.eat_kw("parameter") {
            Field::Parameter
        } else if self.eat_kw("instance") {
            Field::Instance
        } else if self.eat_kw("subject") {
            Field::Subject
        } else if self.eat_kw("value") {
            Field::Value
        } else {
            return self.fail(&["attr", "parameter", "instance", "subject", "value"]);
        };
        let attribute = match field {
            Field::Attr => Some(self.name()?),
            _ => None,
        };
        let connector = self.connector()?;
        let value = self.value()?;
        Ok(Comparison {
            field,
            attribute,
            connector,
            value,
        })
    }

    fn or_query(&mut self) -> PResult<Query> {
        let category = self.name()?;
        self.expect_kw("SAME")?;
        if self.eat_kw("INSTANCE") {
            let instance = if self.eat_kw("instance") {
                Some(self.name()?)
            } else {
                None
            };
            let attribute = if self.eat_kw("attr") {
                Some(self.name()?)
            } else {
                None
            };
            Ok(Query::OrSameInstance {
                category,
                instance,
                attribute,
            })
        } else if self.eat_kw("VALUE") {
            let attribute = if self.eat_kw("attr") {
                Some(self.name()?)
            } else {
                None
            };
            let value = if self.eat_kw("value") {
                Some(self.value()?)
            } else {
                None
            };
            Ok(Query::OrSameValue {
                category,
                attribute,
                value,
            })
        } else {
            self.fail(&["INSTANCE", "VALUE"])
        }
    }

    fn not_query(&mut self) -> PResult<Query> {
        if self.eat_kw("NOT") {
            return Ok(Query::negation(self.not_query()?));
        }
        if self.peek() == Some(&Tok::LParen) {
            self.at += 1;
            let q = self.query()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(Query::negation(q));
        }
        let category = self.name()?;
        self.expect(Tok::LParen, "`(`")?;
        let subject = self.name()?;
        self.expect(Tok::Comma, "`,`")?;
        let attribute = self.name()?;
        self.expect(Tok::Comma, "`,`")?;
        let connector = self.connector()?;
        self.expect(Tok::Comma, "`,`")?;
        let value = self.value()?;
        self.expect(Tok::RParen, "`)`")?;
        Ok(Query::Not(Negand::Literal(Predicate::new(
            &category, &subject, &attribute, connector, value,
        ))))
    }

    fn operand(&mut self) -> PResult<Operand> {
        let category = self.name()?;
        self.expect(Tok::LParen, "`(`")?;
        let subject = self.name()?;
        self.expect(Tok::Comma, "`,`")?;
        let attribute = self.name()?;
        self.expect(Tok::RParen, "`)`")?;
        Ok(Operand {
            category,
            subject,
            attribute,
        })
    }

    fn arith(&mut self) -> PResult<Query> {
        let left = self.operand()?;
        let op = match self.peek() {
            Some(Tok::Plus) => ArithOp::Add,
            Some(Tok::Minus) => ArithOp::Sub,
            _ => return self.fail(&["`+`", "`-`"]),
        };
        self.at += 1;
        let right = self.operand()?;
        Ok(Query::Arith { op, left, right })
    }
}

/// Parses one query; see the module docs for the grammar.
pub fn parse_query(src: &str) -> Result<Query, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        at: 0,
        end: src.len(),
    };
    let q = p.query()?;
    if p.peek().is_some() {
        return p.fail(&["end of input"]);
    }
    Ok(q)
}

struct V<'a>(&'a Scalar);

impl fmt::Display for V<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.0.to_string();
        let plain = !s.is_empty()
            && s.chars().all(word_char)
            && (!matches!(self.0, Scalar::Text(_))
                || matches!(Scalar::parse_lenient(&s), Scalar::Text(_)));
        if plain || matches!(self.0, Scalar::Number(_)) {
            f.write_str(&s)
        } else {
            write!(f, "\"{s}\"")
        }
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}, {})", self.category, self.subject, self.attribute)
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let field = match self.field {
            Field::Attr => {
                return write!(
                    f,
                    "attr {} {} {}",
                    self.attribute.as_deref().unwrap_or(""),
                    self.connector,
                    V(&self.value)
                )
            }
            Field::Parameter => "parameter",
            Field::Instance => "instance",
            Field::Subject => "subject",
            Field::Value => "value",
        };
        write!(f, "{field} {} {}", self.connector, V(&self.value))
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, conj) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" OR ")?;
            }
            for (j, g) in conj.iter().enumerate() {
                if j > 0 {
                    f.write_str(" AND ")?;
                }
                f.write_str("(")?;
                for (k, c) in g.0.iter().enumerate() {
                    if k > 0 {
                        f.write_str(" && ")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Query::AndByParameter { category, filter } => match filter {
                ParamFilter::InstanceOf(p) => {
                    write!(f, "AND {category} WHERE parameter INSTANCE_OF {p}")
                }
                ParamFilter::Is(p) => write!(f, "AND {category} WHERE parameter = {p}"),
            },
            Query::AndChain { links } => write!(f, "AND CHAIN {}", links.join(" -> ")),
            Query::AndConditional {
                category,
                condition,
            } => write!(f, "AND {category} WHERE {condition}"),
            Query::OrSameInstance {
                category,
                instance,
                attribute,
            } => {
                write!(f, "OR {category} SAME INSTANCE")?;
                if let Some(i) = instance {
                    write!(f, " instance {i}")?;
                }
                if let Some(a) = attribute {
                    write!(f, " attr {a}")?;
                }
                Ok(())
            }
            Query::OrSameValue {
                category,
                attribute,
                value,
            } => {
                write!(f, "OR {category} SAME VALUE")?;
                if let Some(a) = attribute {
                    write!(f, " attr {a}")?;
                }
                if let Some(v) = value {
                    write!(f, " value {}", V(v))?;
                }
                Ok(())
            }
            Query::Not(Negand::Literal(p)) => write!(
                f,
                "NOT {}({}, {}, {}, {})",
                p.category,
                p.subject,
                p.attribute,
                p.connector,
                V(&p.value)
            ),
            Query::Not(Negand::Query(q)) => match **q {
                Query::Not(_) => write!(f, "NOT {q}"),
                _ => write!(f, "NOT ({q})"),
            },
            Query::Arith { op, left, right } => {
                let sym = match op {
                    ArithOp::Add => "+",
                    ArithOp::Sub => "-",
                };
                write!(f, "ARITH {left} {sym} {right}")
            }
        }
    }
}

impl core::str::FromStr for Query {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_query(s)
    }
}
