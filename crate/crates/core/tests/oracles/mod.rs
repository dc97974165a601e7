//! Reference models the engine is checked against. Each suite draws its
//! cases from a seeded ChaCha stream and returns the first disagreement.
//!
//! Shared by the core property tests and the acceptance target.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet};

use cbpmn_core::graph::{
    Condition, ContextGraph, DependencyRule, GraphError, SubgraphInstance, TimedValue,
};
use cbpmn_core::process::ActivityTemplate;
use cbpmn_core::process::{AttributeKind, Permutation, Position, Slot};
use cbpmn_core::reasoning::{evaluate, evaluate_contexts, parse_query, QueryResult};
use cbpmn_core::{
    diff, ActivityChain, ActivityId, AtomicContext, AttrPath, ChainError, Connector, ContextState,
    ContextVector, ContextualSituation, LogicalTime, Scalar, Temporality,
};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Both outcomes must make up at least a tenth of the cases, otherwise the
/// generator is not exercising the comparison.
fn covers(what: &str, hits: usize, total: usize) -> Result<(), String> {
    if total >= 50 && (hits * 10 < total || (total - hits) * 10 < total) {
        return Err(format!(
            "degenerate generator: {hits} of {total} cases had {what}"
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Activity chain against a plain vector of names.

#[derive(Debug, Clone)]
enum ChainOp {
    Add(usize, Position, Vec<String>),
    Replace(usize, Vec<String>),
    Bypass(usize),
    Reorder(usize, Permutation),
    Role(usize, String),
    Data(usize, String),
    Missing,
}

/// Same naming rule as the engine: a taken name gets the first free `~k`.
fn fresh(existing: &[String], taken: &[String], name: &str) -> String {
    let free = |n: &str| !existing.iter().any(|e| e == n) && !taken.iter().any(|t| t == n);
    if free(name) {
        return name.to_string();
    }
    (2..)
        .map(|k| format!("{name}~{k}"))
        .find(|n| free(n))
        .unwrap()
}

fn insert_names(existing: &[String], names: &[String]) -> Vec<String> {
    let mut taken = Vec::new();
    for n in names {
        let id = fresh(existing, &taken, n);
        taken.push(id);
    }
    taken
}

fn templates(names: &[String]) -> Vec<ActivityTemplate> {
    names
        .iter()
        .map(|n| ActivityTemplate::new(n, "g"))
        .collect()
}

fn random_op<R: Rng>(r: &mut R, len: usize, counter: &mut usize, pool: &[String]) -> ChainOp {
    let mut fragment = |r: &mut R| -> Vec<String> {
        (0..r.gen_range(1..=3))
            .map(|_| {
                if r.gen_bool(0.2) && !pool.is_empty() {
                    pool.choose(r).unwrap().clone()
                } else {
                    *counter += 1;
                    format!("F{counter}")
                }
            })
            .collect()
    };
    let at = r.gen_range(0..len);
    match r.gen_range(0..20) {
        0..=3 => {
            let f = fragment(r);
            ChainOp::Add(at, Position::Before, f)
        }
        4..=7 => {
            let f = fragment(r);
            ChainOp::Add(at, Position::After, f)
        }
        8..=9 => {
            let f = fragment(r);
            ChainOp::Replace(at, f)
        }
        10..=12 => ChainOp::Bypass(at),
        13..=16 => ChainOp::Reorder(at, *Permutation::ALL.choose(r).unwrap()),
        17 => ChainOp::Role(at, format!("role{}", r.gen_range(0..3))),
        18 => ChainOp::Data(at, format!("d{}", r.gen_range(0..3))),
        _ => ChainOp::Missing,
    }
}

/// Applies `op` to the oracle; `Err` carries the error the engine must give.
fn oracle_apply(v: &mut Vec<String>, op: &ChainOp) -> Result<Vec<String>, &'static str> {
    match op {
        ChainOp::Add(i, pos, names) => {
            let ids = insert_names(v, names);
            let at = if *pos == Position::Before { *i } else { *i + 1 };
            v.splice(at..at, ids.iter().cloned());
            Ok(ids)
        }
        ChainOp::Replace(i, names) => {
            let mut rest = v.clone();
            rest.remove(*i);
            let ids = insert_names(&rest, names);
            v.splice(*i..=*i, ids.iter().cloned());
            Ok(ids)
        }
        ChainOp::Bypass(i) => {
            if v.len() == 1 {
                return Err("empty-chain");
            }
            v.remove(*i);
            Ok(vec![])
        }
        ChainOp::Reorder(i, perm) => {
            let lo = i.saturating_sub(1);
            let hi = (*i + 1).min(v.len() - 1);
            let slot_index = |s: &Slot| match s {
                Slot::Prev => (*i > 0).then(|| i - 1),
                Slot::Current => Some(*i),
                Slot::Next => (*i + 1 < v.len()).then(|| i + 1),
            };
            let picked: Vec<String> = perm
                .0
                .iter()
                .filter_map(slot_index)
                .map(|k| v[k].clone())
                .collect();
            v.splice(lo..=hi, picked);
            Ok(vec![])
        }
        ChainOp::Role(..) | ChainOp::Data(..) => Ok(vec![]),
        ChainOp::Missing => Err("unknown-activity"),
    }
}

fn engine_apply(
    c: &mut ActivityChain,
    names: &[String],
    op: &ChainOp,
) -> Result<Vec<ActivityId>, ChainError> {
    let id = |i: &usize| ActivityId::from(names[*i].as_str());
    match op {
        ChainOp::Add(i, pos, f) => c.add_fragment(&id(i), *pos, &templates(f)),
        ChainOp::Replace(i, f) => c.replace_activity(&id(i), &templates(f)),
        ChainOp::Bypass(i) => c.bypass(&id(i)).map(|_| vec![]),
        ChainOp::Reorder(i, perm) => {
            let w = c.window_around(&id(i))?;
            c.reorder(&w, *perm).map(|_| vec![])
        }
        ChainOp::Role(i, role) => c
            .replace_attribute(&id(i), AttributeKind::Role, role)
            .map(|_| vec![]),
        ChainOp::Data(i, d) => c
            .data_level_change(&id(i), &[d.clone()].into_iter().collect())
            .map(|_| vec![]),
        ChainOp::Missing => c
            .bypass(&ActivityId::from("no such activity"))
            .map(|_| vec![]),
    }
}

fn error_code(e: &ChainError) -> &'static str {
    match e {
        ChainError::EmptyChain(_) => "empty-chain",
        ChainError::UnknownActivity(_) => "unknown-activity",
        _ => "other",
    }
}

/// One random rewrite sequence of up to `max_ops` operations.
pub fn chain_case<R: Rng>(r: &mut R, max_ops: usize) -> Result<(), String> {
    let n = r.gen_range(1..=6);
    let mut names: Vec<String> = (0..n).map(|i| format!("L{i}")).collect();
    let mut chain = ActivityChain::from_templates(&templates(&names)).map_err(|e| e.to_string())?;
    let mut roles: HashMap<String, String> = HashMap::new();
    let mut data: HashMap<String, BTreeSet<String>> = HashMap::new();
    let mut counter = 0;
    let ops = r.gen_range(1..=max_ops);
    for step in 0..ops {
        let op = random_op(r, names.len(), &mut counter, &names);
        let before = names.clone();
        let expected = oracle_apply(&mut names, &op);
        let got = engine_apply(&mut chain, &before, &op);
        match (&expected, &got) {
            (Ok(ids), Ok(got_ids)) => {
                let got_ids: Vec<String> = got_ids.iter().map(|a| a.to_string()).collect();
                if *ids != got_ids {
                    return Err(format!(
                        "step {step} {op:?}: inserted {got_ids:?}, oracle {ids:?}"
                    ));
                }
            }
            (Err(code), Err(e)) if *code == error_code(e) => {}
            _ => {
                return Err(format!(
                    "step {step} {op:?}: engine {got:?}, oracle {expected:?}"
                ))
            }
        }
        match &op {
            ChainOp::Role(i, role) => {
                roles.insert(before[*i].clone(), role.clone());
            }
            ChainOp::Data(i, d) => {
                data.entry(before[*i].clone())
                    .or_default()
                    .insert(d.clone());
            }
            ChainOp::Replace(i, _) | ChainOp::Bypass(i) if expected.is_ok() => {
                roles.remove(&before[*i]);
                data.remove(&before[*i]);
            }
            _ => {}
        }
        chain
            .check_well_formed()
            .map_err(|e| format!("step {step} {op:?}: {e}"))?;
        let order: Vec<String> = chain.order().iter().map(|a| a.to_string()).collect();
        if order != names {
            return Err(format!(
                "step {step} {op:?}: order {order:?}, oracle {names:?}"
            ));
        }
        if chain.len() != names.len() {
            return Err(format!(
                "step {step}: {} nodes for {} names",
                chain.len(),
                names.len()
            ));
        }
    }
    for (name, role) in &roles {
        if let Some(node) = chain.get(name) {
            if node.role != *role {
                return Err(format!("{name}: role {} instead of {role}", node.role));
            }
        }
    }
    for (name, items) in &data {
        if let Some(node) = chain.get(name) {
            if !items.is_subset(&node.output_data) {
                return Err(format!(
                    "{name}: output {:?} lacks {items:?}",
                    node.output_data
                ));
            }
        }
    }
    Ok(())
}

pub fn chain_suite(seed: u64, sequences: usize) -> Result<(), String> {
    let mut r = rng(seed);
    for i in 0..sequences {
        chain_case(&mut r, 20).map_err(|e| format!("sequence {i}: {e}"))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Situation difference against a direct classification.

fn random_context<R: Rng>(r: &mut R) -> AtomicContext {
    let subjects = ["P0", "P1", "P2", "P3"];
    let attributes = ["a", "b", "c"];
    let values = ["x", "X", "y", "z"];
    let mut c = AtomicContext::new(
        *subjects.choose(r).unwrap(),
        *attributes.choose(r).unwrap(),
        Scalar::text(*values.choose(r).unwrap()),
    );
    if r.gen_bool(0.2) {
        c = c.with_connector(Connector::Ne);
    }
    if r.gen_bool(0.1) {
        c = c.with_temporality(Temporality::Static);
    }
    c
}

pub fn random_vector<R: Rng>(r: &mut R, time: i64) -> ContextVector {
    let mut seen = HashSet::new();
    let contexts = (0..r.gen_range(0..=6))
        .map(|_| random_context(r))
        .filter(|c| seen.insert((c.parameter.clone(), c.attribute.clone())))
        .collect();
    ContextVector::new(LogicalTime(time), contexts).unwrap()
}

struct Classified {
    parameters: Vec<String>,
    attributes: Vec<String>,
    removed: Vec<String>,
}

/// Independent reading of the change rules over plain strings.
fn classify(old: &[AtomicContext], new: &[AtomicContext]) -> Option<Classified> {
    let key = |c: &AtomicContext| format!("{}.{}", c.subject(), c.attribute);
    let old_payload: HashMap<String, (Connector, String)> = old
        .iter()
        .map(|c| (key(c), (c.connector, c.value.to_string().to_lowercase())))
        .collect();
    let old_subjects: HashSet<&str> = old.iter().map(|c| c.subject()).collect();
    let new_subjects: HashSet<&str> = new.iter().map(|c| c.subject()).collect();
    let mut parameters: Vec<String> = Vec::new();
    let mut attributes = Vec::new();
    for c in new {
        if !old_subjects.contains(c.subject()) {
            if !parameters.contains(&c.subject().to_string()) {
                parameters.push(c.subject().to_string());
            }
        } else if old_payload.get(&key(c))
            != Some(&(c.connector, c.value.to_string().to_lowercase()))
        {
            attributes.push(key(c));
        }
    }
    if parameters.is_empty() && attributes.is_empty() {
        return None;
    }
    let mut removed: Vec<String> = Vec::new();
    for c in old {
        let s = c.subject().to_string();
        if !new_subjects.contains(c.subject()) && !removed.contains(&s) {
            removed.push(s);
        }
    }
    Some(Classified {
        parameters,
        attributes,
        removed,
    })
}

/// Returns whether the state changed.
pub fn diff_case<R: Rng>(r: &mut R) -> Result<bool, String> {
    let t_old = r.gen_range(0..4);
    let t_new = r.gen_range(0..4);
    let old_vec = random_vector(r, t_old);
    let new_vec = random_vector(r, t_new);
    let old = ContextState {
        activity: "act".into(),
        situation: ContextualSituation::empty()
            .advance(&old_vec)
            .map_err(|e| e.to_string())?,
    };
    let dynamic = |v: &ContextVector| -> Vec<AtomicContext> {
        v.contexts()
            .iter()
            .filter(|c| c.temporality != Temporality::Static)
            .cloned()
            .collect()
    };
    let mut new_cs = ContextualSituation::empty();
    new_cs.timestamp = LogicalTime(t_new);
    new_cs.bindings = dynamic(&new_vec);
    let got = diff(&new_cs, &old);

    let old_bindings = &old.situation.bindings;
    let expected = if t_new <= old.situation.timestamp.0 {
        None
    } else {
        classify(old_bindings, &new_cs.bindings)
    };
    match expected {
        None => {
            if got != old {
                return Err(format!(
                    "{old_vec:?} → {new_vec:?}: expected the old state, got {got:?}"
                ));
            }
        }
        Some(c) => {
            let s = &got.situation;
            let attrs: Vec<String> = s.changed_attributes.iter().map(|a| a.to_string()).collect();
            if s.changed_parameters != c.parameters
                || attrs != c.attributes
                || s.removed_parameters != c.removed
                || s.timestamp != LogicalTime(t_new)
                || s.bindings != new_cs.bindings
                || got.activity != old.activity
            {
                return Err(format!(
                    "{old_vec:?} → {new_vec:?}: got P={:?} A={attrs:?} R={:?}, oracle P={:?} A={:?} R={:?}",
                    s.changed_parameters, s.removed_parameters, c.parameters, c.attributes, c.removed
                ));
            }
            return Ok(true);
        }
    }
    Ok(false)
}

pub fn diff_suite(seed: u64, vectors: usize) -> Result<(), String> {
    let mut r = rng(seed);
    let mut changed = 0;
    for i in 0..vectors {
        changed += diff_case(&mut r).map_err(|e| format!("case {i}: {e}"))? as usize;
    }
    covers("changed states", changed, vectors)
}

// ---------------------------------------------------------------------------
// Dependency fixpoint under every rule order.

pub fn random_dependency_fixture<R: Rng>(r: &mut R) -> (SubgraphInstance, Vec<DependencyRule>) {
    let attrs: Vec<AttrPath> = (0..r.gen_range(2..=5))
        .map(|i| AttrPath::from(format!("E{}.x", i).as_str()))
        .collect();
    let values = ["a", "b", "c"];
    let mut inst = SubgraphInstance {
        activated_attributes: attrs.iter().cloned().collect(),
        ..SubgraphInstance::default()
    };
    for a in &attrs {
        if r.gen_bool(0.6) {
            let v = Scalar::text(*values.choose(r).unwrap());
            let delay = if r.gen_bool(0.3) {
                r.gen_range(1..30)
            } else {
                0
            };
            inst.bound_values
                .insert(a.clone(), TimedValue::timed(v, delay));
        }
    }
    let rules = (0..r.gen_range(1..=5))
        .map(|_| DependencyRule {
            kind: Default::default(),
            antecedent: (0..r.gen_range(0..=2))
                .map(|_| {
                    Condition::new(
                        attrs.choose(r).unwrap().clone(),
                        if r.gen_bool(0.8) {
                            Connector::Eq
                        } else {
                            Connector::Ne
                        },
                        Scalar::text(*values.choose(r).unwrap()),
                    )
                })
                .collect(),
            target: if r.gen_bool(0.9) {
                attrs.choose(r).unwrap().clone()
            } else {
                AttrPath::from("Outside.x")
            },
            value: Scalar::text(*values.choose(r).unwrap()),
        })
        .collect();
    (inst, rules)
}

fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head.clone());
            out.push(p);
        }
    }
    out
}

fn outcome_key(
    r: &Result<SubgraphInstance, GraphError>,
) -> Result<&SubgraphInstance, &'static str> {
    match r {
        Ok(i) => Ok(i),
        Err(GraphError::DependencyConflict { .. }) => Err("conflict"),
        Err(GraphError::DependencyCycle { .. }) => Err("cycle"),
        Err(_) => Err("other"),
    }
}

/// Evaluates under every order of the rules and compares the outcomes.
pub fn fixpoint_is_order_independent(
    graph: &ContextGraph,
    inst: &SubgraphInstance,
    rules: &[DependencyRule],
) -> Result<bool, String> {
    let reference = graph.apply_dependencies(inst, rules);
    for order in permutations(rules) {
        let got = graph.apply_dependencies(inst, &order);
        if outcome_key(&got) != outcome_key(&reference) {
            return Err(format!(
                "rules {rules:?} on {:?}: {reference:?} but reordered {got:?}",
                inst.bound_values
            ));
        }
    }
    Ok(reference.is_ok())
}

pub fn fixpoint_suite(seed: u64, fixtures: usize) -> Result<(), String> {
    let mut r = rng(seed);
    let graph = ContextGraph::default();
    let mut settled = 0;
    for i in 0..fixtures {
        let (inst, rules) = random_dependency_fixture(&mut r);
        settled += fixpoint_is_order_independent(&graph, &inst, &rules)
            .map_err(|e| format!("fixture {i}: {e}"))? as usize;
    }
    covers("fixpoints reached", settled, fixtures)
}

// ---------------------------------------------------------------------------
// Query results against subset enumeration.

#[derive(Debug, Clone)]
struct Pred {
    category: String,
    parameter: String,
    subject: String,
    attribute: String,
    value: String,
}

fn eq(a: &str, b: &str) -> bool {
    a.to_lowercase() == b.to_lowercase()
}

impl Pred {
    fn of(c: &AtomicContext) -> Self {
        Pred {
            category: c.predicate_name().to_string(),
            parameter: c.parameter.clone(),
            subject: c.subject().to_string(),
            attribute: c.attribute.clone(),
            value: c.value.to_string(),
        }
    }
}

#[derive(Debug, Clone)]
enum Cmp {
    Attr(String, bool, String),
    Value(bool, String),
    Subject(String),
}

impl Cmp {
    fn holds(&self, p: &Pred) -> bool {
        match self {
            Cmp::Attr(a, equal, v) => eq(a, &p.attribute) && eq(v, &p.value) == *equal,
            Cmp::Value(equal, v) => eq(v, &p.value) == *equal,
            Cmp::Subject(s) => eq(s, &p.subject),
        }
    }

    fn text(&self) -> String {
        let op = |e: &bool| if *e { "=" } else { "!=" };
        match self {
            Cmp::Attr(a, e, v) => format!("attr {a} {} {v}", op(e)),
            Cmp::Value(e, v) => format!("value {} {v}", op(e)),
            Cmp::Subject(s) => format!("subject = {s}"),
        }
    }
}

#[derive(Debug, Clone)]
enum OracleQuery {
    ByParameter {
        category: String,
        parameter: String,
        instance_only: bool,
    },
    Conditional {
        category: String,
        condition: Vec<Vec<Vec<Cmp>>>,
    },
    SameValue {
        category: String,
        attribute: Option<String>,
    },
    SameInstance {
        category: String,
        attribute: Option<String>,
    },
    Chain {
        from: String,
        to: String,
    },
}

impl OracleQuery {
    fn text(&self) -> String {
        match self {
            OracleQuery::ByParameter {
                category,
                parameter,
                instance_only,
            } => format!(
                "AND {category} WHERE parameter {} {parameter}",
                if *instance_only { "INSTANCE_OF" } else { "=" }
            ),
            OracleQuery::Conditional {
                category,
                condition,
            } => {
                let conj: Vec<String> = condition
                    .iter()
                    .map(|groups| {
                        groups
                            .iter()
                            .map(|g| {
                                let cmps: Vec<String> = g.iter().map(Cmp::text).collect();
                                format!("({})", cmps.join(" && "))
                            })
                            .collect::<Vec<_>>()
                            .join(" AND ")
                    })
                    .collect();
                format!("AND {category} WHERE {}", conj.join(" OR "))
            }
            OracleQuery::SameValue {
                category,
                attribute,
            } => match attribute {
                Some(a) => format!("OR {category} SAME VALUE attr {a}"),
                None => format!("OR {category} SAME VALUE"),
            },
            OracleQuery::SameInstance {
                category,
                attribute,
            } => match attribute {
                Some(a) => format!("OR {category} SAME INSTANCE attr {a}"),
                None => format!("OR {category} SAME INSTANCE"),
            },
            OracleQuery::Chain { from, to } => format!("AND CHAIN {from} -> {to}"),
        }
    }

    fn is_conjunction(&self) -> bool {
        !matches!(
            self,
            OracleQuery::SameValue { .. } | OracleQuery::SameInstance { .. }
        )
    }

    /// Whether the chosen predicates jointly witness the query.
    fn witnessed_by(&self, ps: &[&Pred]) -> bool {
        match self {
            OracleQuery::ByParameter {
                category,
                parameter,
                instance_only,
            } => {
                ps.len() == 1
                    && eq(&ps[0].category, category)
                    && eq(&ps[0].parameter, parameter)
                    && (!instance_only || ps[0].subject != ps[0].parameter)
            }
            OracleQuery::SameValue {
                category,
                attribute,
            } => {
                ps.len() == 2
                    && ps.iter().all(|p| {
                        eq(&p.category, category)
                            && attribute.as_deref().is_none_or(|a| eq(a, &p.attribute))
                    })
                    && eq(&ps[0].attribute, &ps[1].attribute)
                    && eq(&ps[0].value, &ps[1].value)
                    && !eq(&ps[0].subject, &ps[1].subject)
            }
            OracleQuery::SameInstance {
                category,
                attribute,
            } => {
                ps.len() == 2
                    && ps.iter().all(|p| {
                        eq(&p.category, category)
                            && attribute.as_deref().is_none_or(|a| eq(a, &p.attribute))
                    })
                    && eq(&ps[0].attribute, &ps[1].attribute)
                    && eq(&ps[0].subject, &ps[1].subject)
                    && !eq(&ps[0].value, &ps[1].value)
            }
            OracleQuery::Chain { from, to } => {
                let names =
                    |x: &Pred, y: &Pred| eq(&x.value, &y.subject) || eq(&x.value, &y.parameter);
                ps.len() == 2
                    && ((eq(&ps[0].category, from)
                        && eq(&ps[1].category, to)
                        && names(ps[0], ps[1]))
                        || (eq(&ps[1].category, from)
                            && eq(&ps[0].category, to)
                            && names(ps[1], ps[0])))
            }
            OracleQuery::Conditional {
                category,
                condition,
            } => {
                if ps.is_empty()
                    || !ps
                        .iter()
                        .all(|p| eq(&p.category, category) && eq(&p.subject, &ps[0].subject))
                {
                    return false;
                }
                // Some disjunct is true for this subject (judged on all of
                // its predicates) and the chosen ones witness its groups.
                condition.iter().any(|groups| {
                    groups
                        .iter()
                        .all(|g| ps.iter().any(|p| g.iter().all(|c| c.holds(p))))
                        && ps
                            .iter()
                            .all(|p| groups.iter().any(|g| g.iter().all(|c| c.holds(p))))
                })
            }
        }
    }
}

/// Union of every witnessing subset, in situation order.
fn enumerate(q: &OracleQuery, preds: &[Pred]) -> Vec<usize> {
    let n = preds.len();
    let mut keep = BTreeSet::new();
    for mask in 1u32..(1 << n) {
        let chosen: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let ps: Vec<&Pred> = chosen.iter().map(|i| &preds[*i]).collect();
        if q.witnessed_by(&ps) {
            keep.extend(chosen);
        }
    }
    keep.into_iter().collect()
}

fn random_query<R: Rng>(r: &mut R) -> OracleQuery {
    let category = ["Res", "Cg"].choose(r).unwrap().to_string();
    let attribute = ["s", "e"];
    let value = ["x", "y", "N", "C", "i1"];
    let cmp = |r: &mut R| match r.gen_range(0..4) {
        0 | 1 => Cmp::Attr(
            attribute.choose(r).unwrap().to_string(),
            r.gen_bool(0.8),
            value.choose(r).unwrap().to_string(),
        ),
        2 => Cmp::Value(r.gen_bool(0.8), value.choose(r).unwrap().to_string()),
        _ => Cmp::Subject(["N", "C", "i1", "i2"].choose(r).unwrap().to_string()),
    };
    match r.gen_range(0..5) {
        0 => OracleQuery::ByParameter {
            category,
            parameter: ["N", "C"].choose(r).unwrap().to_string(),
            instance_only: r.gen_bool(0.5),
        },
        1 => OracleQuery::Conditional {
            category,
            condition: (0..r.gen_range(1..=2))
                .map(|_| {
                    (0..r.gen_range(1..=2))
                        .map(|_| (0..r.gen_range(1..=2)).map(|_| cmp(r)).collect())
                        .collect()
                })
                .collect(),
        },
        2 => OracleQuery::SameValue {
            category,
            attribute: r
                .gen_bool(0.5)
                .then(|| attribute.choose(r).unwrap().to_string()),
        },
        3 => OracleQuery::SameInstance {
            category,
            attribute: r
                .gen_bool(0.5)
                .then(|| attribute.choose(r).unwrap().to_string()),
        },
        _ => OracleQuery::Chain {
            from: category,
            to: ["Res", "Cg"].choose(r).unwrap().to_string(),
        },
    }
}

fn random_predicate_context<R: Rng>(r: &mut R) -> AtomicContext {
    let parameter = *["N", "C"].choose(r).unwrap();
    let mut c = AtomicContext::new(
        parameter,
        *["s", "e"].choose(r).unwrap(),
        Scalar::text(*["x", "X", "y", "N", "C", "i1"].choose(r).unwrap()),
    )
    .with_specialization(*["Res", "Cg"].choose(r).unwrap());
    if let Some(i) = [None, Some("i1"), Some("i2")].choose(r).unwrap() {
        c = c.with_instance(*i);
    }
    if r.gen_bool(0.2) {
        c = c.with_connector(Connector::In);
    }
    c
}

/// Returns whether the result was non-null.
pub fn query_case<R: Rng>(r: &mut R) -> Result<bool, String> {
    let contexts: Vec<AtomicContext> = (0..r.gen_range(0..=8))
        .map(|_| random_predicate_context(r))
        .collect();
    let q = random_query(r);
    let text = q.text();
    let parsed = parse_query(&text).map_err(|e| format!("{text}: {e}"))?;
    let got = evaluate_contexts(&parsed, &contexts).map_err(|e| format!("{text}: {e}"))?;

    let preds: Vec<Pred> = contexts.iter().map(Pred::of).collect();
    let keep = enumerate(&q, &preds);
    let describe = |i: &usize| {
        let p = &preds[*i];
        format!(
            "{}({}, {}, {})",
            p.category, p.subject, p.attribute, p.value
        )
    };
    let expected: Vec<String> = keep.iter().map(describe).collect();
    let got_list: Vec<String> = got
        .predicates()
        .iter()
        .map(|p| {
            format!(
                "{}({}, {}, {})",
                p.category, p.subject, p.attribute, p.value
            )
        })
        .collect();
    if got_list != expected {
        return Err(format!(
            "{text} over {contexts:?}: got {got_list:?}, oracle {expected:?}"
        ));
    }
    let shape_ok = match (&got, keep.len()) {
        (QueryResult::Null, 0) => true,
        (QueryResult::Expr(e), 1) => e.to_string() == format!("{}", got.predicates()[0]),
        (QueryResult::Expr(e), _) => {
            let sep = if q.is_conjunction() { " AND " } else { " OR " };
            e.to_string().split(sep).count() == keep.len()
        }
        _ => false,
    };
    if !shape_ok {
        return Err(format!(
            "{text}: result {got} does not join {} predicates",
            keep.len()
        ));
    }

    // A situation without repeated attributes gives the same answer.
    let paths: BTreeSet<AttrPath> = contexts.iter().map(|c| c.path()).collect();
    if paths.len() == contexts.len() {
        let v = ContextVector::new(LogicalTime(1), contexts.clone()).map_err(|e| e.to_string())?;
        let cs = ContextualSituation::empty()
            .advance(&v)
            .map_err(|e| e.to_string())?;
        let via_cs = evaluate(&parsed, &cs).map_err(|e| e.to_string())?;
        if via_cs != got {
            return Err(format!(
                "{text}: situation gives {via_cs}, contexts give {got}"
            ));
        }
    }
    Ok(!got.is_null())
}

pub fn query_suite(seed: u64, cases: usize) -> Result<(), String> {
    let mut r = rng(seed);
    let mut hits = 0;
    for i in 0..cases {
        hits += query_case(&mut r).map_err(|e| format!("case {i}: {e}"))? as usize;
    }
    covers("non-null results", hits, cases)
}
