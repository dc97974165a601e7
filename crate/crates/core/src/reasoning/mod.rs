//! Context predicate algebra.
//!
//! Every context of a situation reads as a predicate
//! `Category(subject, attribute, connector, value)`, where the category is the
//! context's specialization (`Resource`, `Caregiver`, `Season`, ...). Queries
//! combine predicates with AND, OR, NOT and numeric addition/subtraction.
//!
//! # Grammar
//!
//! Keywords are case-insensitive; values may be quoted (`"Very Poor"`).
//!
//! ```text
//! query     := and_query | or_query | not_query | arith
//!
//! and_query := "AND" name "WHERE" "parameter" ("INSTANCE_OF" | "=") name
//!            | "AND" name "WHERE" condition
//!            | "AND" "CHAIN" name "->" name { "->" name }
//! condition := conj { "OR" conj }
//! conj      := group { "AND" group }
//! group     := "(" cmp { "&&" cmp } ")"
//! cmp       := "attr" name connector value
//!            | ("parameter" | "instance" | "subject" | "value") connector value
//!
//! or_query  := "OR" name "SAME" "INSTANCE" [ "instance" name ] [ "attr" name ]
//!            | "OR" name "SAME" "VALUE" [ "attr" name ] [ "value" value ]
//!
//! not_query := "NOT" ( literal | not_query | "(" query ")" )
//! literal   := name "(" name "," name "," connector "," value ")"
//!
//! arith     := "ARITH" operand ("+" | "-") operand
//! operand   := name "(" name "," name ")"
//! ```
//!
//! # Semantics
//!
//! * `AND c WHERE parameter INSTANCE_OF p` joins every `c` predicate whose
//!   parameter is `p` and that names an instance of it; `parameter = p` drops
//!   the instance requirement.
//! * `AND CHAIN c1 -> c2 ...` joins predicates `x1, x2, ...` where the value of
//!   each `x_i` names the parameter or instance of `x_{i+1}`. Chains longer
//!   than two links are supported but experimental.
//! * `AND c WHERE condition` works per subject: a group holds when one of the
//!   subject's predicates satisfies all its comparisons, and `AND`/`OR`
//!   combine groups. The predicates witnessing the true groups of every
//!   qualifying subject are joined.
//! * `OR c SAME INSTANCE` joins predicates sharing subject and attribute but
//!   carrying at least two different values; `OR c SAME VALUE` joins
//!   predicates sharing attribute and value across at least two subjects.
//! * `NOT` negates a literal or a query result; double negation cancels.
//! * `ARITH` resolves both operands in the situation. They must share category
//!   and subject and hold numbers; the result keeps the first operand's
//!   attribute.
//!
//! Results list predicates in situation order. A query that selects nothing
//! yields `NULL`.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::context::{AtomicContext, Connector, ContextualSituation, Scalar};

mod parser;

pub use parser::{parse_query, ParseError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReasoningError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("incompatible-operands: {0}")]
    IncompatibleOperands(String),
    #[error("missing-operand: {0} is not in the situation")]
    MissingOperand(String),
}

/// `Category(subject, attribute, connector, value)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Predicate {
    pub category: String,
    /// The context parameter; equals `subject` when no instance is named.
    pub parameter: String,
    pub subject: String,
    pub attribute: String,
    pub connector: Connector,
    pub value: Scalar,
}

impl Predicate {
    pub fn new(
        category: &str,
        subject: &str,
        attribute: &str,
        connector: Connector,
        value: Scalar,
    ) -> Self {
        Predicate {
            category: category.into(),
            parameter: subject.into(),
            subject: subject.into(),
            attribute: attribute.into(),
            connector,
            value,
        }
    }

    pub fn from_context(c: &AtomicContext) -> Self {
        Predicate {
            category: c.predicate_name().into(),
            parameter: c.parameter.clone(),
            subject: c.subject().into(),
            attribute: c.attribute.clone(),
            connector: c.connector,
            value: c.value.clone(),
        }
    }

    fn has_instance(&self) -> bool {
        self.subject != self.parameter
    }

    fn in_category(&self, category: &str) -> bool {
        self.category.eq_ignore_ascii_case(category)
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}({}, {}, {}, {})",
            self.category, self.subject, self.attribute, self.connector, self.value
        )
    }
}

/// Predicate expression returned by a query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PredExpr {
    Pred(Predicate),
    And(Vec<PredExpr>),
    Or(Vec<PredExpr>),
    Not(Box<PredExpr>),
}

impl PredExpr {
    /// Negation with double negations removed.
    pub fn negate(self) -> PredExpr {
        match self {
            PredExpr::Not(inner) => *inner,
            other => PredExpr::Not(Box::new(other)),
        }
    }

    fn join(preds: Vec<Predicate>, and: bool) -> Option<PredExpr> {
        let mut xs: Vec<PredExpr> = preds.into_iter().map(PredExpr::Pred).collect();
        match xs.len() {
            0 => None,
            1 => xs.pop(),
            _ if and => Some(PredExpr::And(xs)),
            _ => Some(PredExpr::Or(xs)),
        }
    }

    /// Predicates in left-to-right order.
    pub fn predicates(&self) -> Vec<&Predicate> {
        match self {
            PredExpr::Pred(p) => alloc::vec![p],
            PredExpr::And(xs) | PredExpr::Or(xs) => {
                xs.iter().flat_map(|x| x.predicates()).collect()
            }
            PredExpr::Not(x) => x.predicates(),
        }
    }
}

impl fmt::Display for PredExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (op, xs) = match self {
            PredExpr::Pred(p) => return write!(f, "{p}"),
            PredExpr::Not(x) => {
                return match **x {
                    PredExpr::Pred(_) | PredExpr::Not(_) => write!(f, "¬{x}"),
                    _ => write!(f, "¬({x})"),
                }
            }
            PredExpr::And(xs) => (" AND ", xs),
            PredExpr::Or(xs) => (" OR ", xs),
        };
        for (i, x) in xs.iter().enumerate() {
            if i > 0 {
                f.write_str(op)?;
            }
            match x {
                PredExpr::And(_) | PredExpr::Or(_) => write!(f, "({x})")?,
                _ => write!(f, "{x}")?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryResult {
    Null,
    /// Outcome of an arithmetic query.
    Predicate(Predicate),
    Expr(PredExpr),
}

impl QueryResult {
    pub fn is_null(&self) -> bool {
        matches!(self, QueryResult::Null)
    }

    fn from_expr(e: Option<PredExpr>) -> Self {
        e.map_or(QueryResult::Null, QueryResult::Expr)
    }

    pub fn predicates(&self) -> Vec<&Predicate> {
        match self {
            QueryResult::Null => Vec::new(),
            QueryResult::Predicate(p) => alloc::vec![p],
            QueryResult::Expr(e) => e.predicates(),
        }
    }
}

impl fmt::Display for QueryResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueryResult::Null => f.write_str("NULL"),
            QueryResult::Predicate(p) => write!(f, "{p}"),
            QueryResult::Expr(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParamFilter {
    InstanceOf(String),
    Is(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Parameter,
    Instance,
    Subject,
    Value,
    /// `attr NAME`: the predicate's attribute is NAME and its value compares.
    Attr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comparison {
    pub field: Field,
    /// Attribute name for [`Field::Attr`].
    pub attribute: Option<String>,
    pub connector: Connector,
    pub value: Scalar,
}

impl Comparison {
    fn holds(&self, p: &Predicate) -> bool {
        let text = |s: &str| Scalar::Text(s.into());
        match self.field {
            Field::Parameter => self.connector.holds(&text(&p.parameter), &self.value),
            Field::Subject => self.connector.holds(&text(&p.subject), &self.value),
            Field::Instance => {
                p.has_instance() && self.connector.holds(&text(&p.subject), &self.value)
            }
            Field::Value => self.connector.holds(&p.value, &self.value),
            Field::Attr => {
                self.attribute
                    .as_deref()
                    .is_some_and(|a| a.eq_ignore_ascii_case(&p.attribute))
                    && self.connector.holds(&p.value, &self.value)
            }
        }
    }
}

/// Comparisons that must all hold on one predicate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group(pub Vec<Comparison>);

impl Group {
    pub fn holds(&self, p: &Predicate) -> bool {
        self.0.iter().all(|c| c.holds(p))
    }
}

/// Disjunction of conjunctions of groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condition(pub Vec<Vec<Group>>);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Operand {
    pub category: String,
    pub subject: String,
    pub attribute: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Negand {
    Literal(Predicate),
    Query(Box<Query>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Query {
    AndByParameter {
        category: String,
        filter: ParamFilter,
    },
    AndChain {
        links: Vec<String>,
    },
    AndConditional {
        category: String,
        condition: Condition,
    },
    OrSameInstance {
        category: String,
        instance: Option<String>,
        attribute: Option<String>,
    },
    OrSameValue {
        category: String,
        attribute: Option<String>,
        value: Option<Scalar>,
    },
    Not(Negand),
    Arith {
        op: ArithOp,
        left: Operand,
        right: Operand,
    },
}

impl Query {
    pub fn negation(inner: Query) -> Query {
        Query::Not(Negand::Query(Box::new(inner)))
    }
}

/// Evaluates `q` over the bindings of a contextual situation.
pub fn evaluate(q: &Query, cs: &ContextualSituation) -> Result<QueryResult, ReasoningError> {
    evaluate_contexts(q, &cs.bindings)
}

/// Evaluates `q` over contexts given in declaration order.
pub fn evaluate_contexts(
    q: &Query,
    contexts: &[AtomicContext],
) -> Result<QueryResult, ReasoningError> {
    let preds: Vec<Predicate> = contexts.iter().map(Predicate::from_context).collect();
    eval(q, &preds)
}

fn eval(q: &Query, preds: &[Predicate]) -> Result<QueryResult, ReasoningError> {
    Ok(match q {
        Query::AndByParameter { category, filter } => {
            let hits = preds
                .iter()
                .filter(|p| p.in_category(category))
                .filter(|p| match filter {
                    ParamFilter::InstanceOf(param) => {
                        p.has_instance() && p.parameter.eq_ignore_ascii_case(param)
                    }
                    ParamFilter::Is(param) => p.parameter.eq_ignore_ascii_case(param),
                })
                .cloned()
                .collect();
            QueryResult::from_expr(PredExpr::join(hits, true))
        }
        Query::AndChain { links } => {
            QueryResult::from_expr(PredExpr::join(chain(links, preds), true))
        }
        Query::AndConditional {
            category,
            condition,
        } => QueryResult::from_expr(PredExpr::join(
            conditional(category, condition, preds),
            true,
        )),
        Query::OrSameInstance {
            category,
            instance,
            attribute,
        } => {
            let pool: Vec<&Predicate> = preds
                .iter()
                .filter(|p| p.in_category(category))
                .filter(|p| {
                    instance
                        .as_deref()
                        .is_none_or(|i| p.subject.eq_ignore_ascii_case(i))
                })
                .filter(|p| {
                    attribute
                        .as_deref()
                        .is_none_or(|a| p.attribute.eq_ignore_ascii_case(a))
                })
                .collect();
            let hits = pool
                .iter()
                .filter(|p| {
                    pool.iter().any(|o| {
                        o.subject.eq_ignore_ascii_case(&p.subject)
                            && o.attribute.eq_ignore_ascii_case(&p.attribute)
                            && o.value != p.value
                    })
                })
                .map(|p| (*p).clone())
                .collect();
            QueryResult::from_expr(PredExpr::join(hits, false))
        }
        Query::OrSameValue {
            category,
            attribute,
            value,
        } => {
            let pool: Vec<&Predicate> = preds
                .iter()
                .filter(|p| p.in_category(category))
                .filter(|p| {
                    attribute
                        .as_deref()
                        .is_none_or(|a| p.attribute.eq_ignore_ascii_case(a))
                })
                .filter(|p| value.as_ref().is_none_or(|v| p.value == *v))
                .collect();
            let hits = pool
                .iter()
                .filter(|p| {
                    pool.iter().any(|o| {
                        o.attribute.eq_ignore_ascii_case(&p.attribute)
                            && o.value == p.value
                            && !o.subject.eq_ignore_ascii_case(&p.subject)
                    })
                })
                .map(|p| (*p).clone())
                .collect();
            QueryResult::from_expr(PredExpr::join(hits, false))
        }
        Query::Not(Negand::Literal(p)) => QueryResult::Expr(PredExpr::Pred(p.clone()).negate()),
        Query::Not(Negand::Query(inner)) => match eval(inner, preds)? {
            QueryResult::Null => QueryResult::Null,
            QueryResult::Predicate(p) => QueryResult::Expr(PredExpr::Pred(p).negate()),
            QueryResult::Expr(e) => match e.negate() {
                PredExpr::Pred(p) => QueryResult::Expr(PredExpr::Pred(p)),
                other => QueryResult::Expr(other),
            },
        },
        Query::Arith { op, left, right } => QueryResult::Predicate(arith(*op, left, right, preds)?),
    })
}

fn same(a: &str, b: &str) -> bool {
    a.eq_ignore_ascii_case(b)
}

/// Does `value` name the parameter or instance of `next`?
fn links_to(value: &Scalar, next: &Predicate) -> bool {
    let text = value.to_string();
    same(&text, &next.subject) || same(&text, &next.parameter)
}

fn chain(links: &[String], preds: &[Predicate]) -> Vec<Predicate> {
    let mut picked = BTreeSet::new();
    let mut partial: Vec<Vec<usize>> = preds
        .iter()
        .enumerate()
        .filter(|(_, p)| links.first().is_some_and(|c| p.in_category(c)))
        .map(|(i, _)| alloc::vec![i])
        .collect();
    for category in links.iter().skip(1) {
        let mut next = Vec::new();
        for path in &partial {
            let last = &preds[*path.last().unwrap()];
            for (j, p) in preds.iter().enumerate() {
                if p.in_category(category) && links_to(&last.value, p) && !path.contains(&j) {
                    let mut ext = path.clone();
                    ext.push(j);
                    next.push(ext);
                }
            }
        }
        partial = next;
    }
    if links.len() < 2 {
        return Vec::new();
    }
    for path in partial {
        picked.extend(path);
    }
    picked.into_iter().map(|i| preds[i].clone()).collect()
}

fn conditional(category: &str, cond: &Condition, preds: &[Predicate]) -> Vec<Predicate> {
    let pool: Vec<&Predicate> = preds.iter().filter(|p| p.in_category(category)).collect();
    let mut subjects: Vec<&str> = Vec::new();
    for p in &pool {
        if !subjects.iter().any(|s| same(s, &p.subject)) {
            subjects.push(&p.subject);
        }
    }
    let mut keep: BTreeSet<usize> = BTreeSet::new();
    for subject in subjects {
        let own: Vec<usize> = preds
            .iter()
            .enumerate()
            .filter(|(_, p)| p.in_category(category) && same(&p.subject, subject))
            .map(|(i, _)| i)
            .collect();
        let group_true = |g: &Group| own.iter().any(|&i| g.holds(&preds[i]));
        let qualifies = cond.0.iter().any(|conj| conj.iter().all(group_true));
        if !qualifies {
            continue;
        }
        for conj in cond.0.iter().filter(|conj| conj.iter().all(group_true)) {
            for g in conj {
                keep.extend(own.iter().copied().filter(|&i| g.holds(&preds[i])));
            }
        }
    }
    keep.into_iter().map(|i| preds[i].clone()).collect()
}

fn arith(
    op: ArithOp,
    left: &Operand,
    right: &Operand,
    preds: &[Predicate],
) -> Result<Predicate, ReasoningError> {
    let resolve = |o: &Operand| {
        preds
            .iter()
            .find(|p| {
                p.in_category(&o.category)
                    && same(&p.subject, &o.subject)
                    && same(&p.attribute, &o.attribute)
            })
            .ok_or_else(|| ReasoningError::MissingOperand(o.to_string()))
    };
    let (a, b) = (resolve(left)?, resolve(right)?);
    if !same(&a.category, &b.category) || !same(&a.subject, &b.subject) {
        return Err(ReasoningError::IncompatibleOperands(alloc::format!(
            "{left} and {right} describe different contexts"
        )));
    }
    let (Some(x), Some(y)) = (a.value.as_number(), b.value.as_number()) else {
        return Err(ReasoningError::IncompatibleOperands(alloc::format!(
            "{left} and {right} are not both numeric"
        )));
    };
    let v = match op {
        ArithOp::Add => x + y,
        ArithOp::Sub => x - y,
    };
    Ok(Predicate {
        category: a.category.clone(),
        parameter: a.parameter.clone(),
        subject: a.subject.clone(),
        attribute: a.attribute.clone(),
        connector: Connector::Eq,
        value: Scalar::Number(v),
    })
}
