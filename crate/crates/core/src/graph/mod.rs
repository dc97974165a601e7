//! Three-level context graph.
//!
//! Level 1 holds state nodes (one per context state a model cares about),
//! level 2 holds entities and their attributes, level 3 holds value slots:
//! one atomic slot per attribute (the green link, optionally timed) and one
//! composite slot per state node. Red links map a state node's parameters to
//! entities, blue links map its attributes to attribute nodes.
//!
//! Entity relations are structural only. Dependency rules drive value
//! propagation between attributes (see [`eval`]).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::context::{Category, Connector, Scalar, Temporality};
use crate::ident::{AttrPath, StateNodeId};

pub mod eval;
mod value;

pub use eval::{InstanceStats, SubgraphInstance, TimedValue};
pub use value::{CompositeValue, ValueExpr};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("unknown-context: {0} is not mapped by the context graph")]
    UnknownContext(String),
    #[error("unknown state node {0}")]
    UnknownStateNode(StateNodeId),
    #[error("unobserved-attribute: no observation for {0}")]
    UnobservedAttribute(AttrPath),
    #[error("dependency-conflict: rules write {first} and {second} to {target} in one pass")]
    DependencyConflict {
        target: AttrPath,
        first: Scalar,
        second: Scalar,
    },
    #[error("dependency-cycle: no fixpoint after {passes} passes")]
    DependencyCycle { passes: usize },
    #[error("incomplete-binding: {0} has no value")]
    IncompleteBinding(AttrPath),
    #[error("invalid value expression at {position}: {message}")]
    ValueSyntax { position: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EntityNode {
    pub id: String,
    #[cfg_attr(feature = "serde", serde(default))]
    pub category: Category,
}

/// Whether an attribute takes observed input or is computed by a total rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum AttrSource {
    #[default]
    Direct,
    Derived,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AttributeNode {
    pub path: AttrPath,
    pub entity: String,
    #[cfg_attr(feature = "serde", serde(default))]
    pub temporality: Temporality,
    #[cfg_attr(feature = "serde", serde(default))]
    pub source: AttrSource,
}

/// Green link from an attribute node to its atomic value slot.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GreenLink {
    pub slot: String,
    /// Activation delay in minutes; 0 means untimed.
    #[cfg_attr(feature = "serde", serde(default))]
    pub delay: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Cardinality {
    #[default]
    OneOne,
    OneMany,
    ManyOne,
    ManyMany,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EntityRelation {
    pub from: String,
    pub to: String,
    #[cfg_attr(feature = "serde", serde(default))]
    pub cardinality: Cardinality,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum DependencyKind {
    /// May overwrite an observed value.
    #[default]
    Partial,
    /// Sole source of a derived attribute's value.
    Total,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Condition {
    pub attribute: AttrPath,
    #[cfg_attr(feature = "serde", serde(default))]
    pub connector: Connector,
    pub value: Scalar,
}

impl Condition {
    pub fn new(attribute: impl Into<AttrPath>, connector: Connector, value: Scalar) -> Self {
        Condition {
            attribute: attribute.into(),
            connector,
            value,
        }
    }
}

/// `IF C_a THEN C_b`: a conjunction of conditions forcing one attribute's value.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DependencyRule {
    #[cfg_attr(feature = "serde", serde(default))]
    pub kind: DependencyKind,
    pub antecedent: Vec<Condition>,
    pub target: AttrPath,
    pub value: Scalar,
}

/// AND/OR tree over attribute references.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Composition {
    Attr(AttrPath),
    And(Vec<Composition>),
    Or(Vec<Composition>),
}

impl Composition {
    pub fn leaves(&self) -> Vec<&AttrPath> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a AttrPath>) {
        match self {
            Composition::Attr(a) => out.push(a),
            Composition::And(xs) | Composition::Or(xs) => {
                xs.iter().for_each(|x| x.collect_leaves(out))
            }
        }
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (op, xs) = match self {
            Composition::Attr(a) => return write!(f, "{a}"),
            Composition::And(xs) => (" AND ", xs),
            Composition::Or(xs) => (" OR ", xs),
        };
        f.write_str("(")?;
        for (i, x) in xs.iter().enumerate() {
            if i > 0 {
                f.write_str(op)?;
            }
            write!(f, "{x}")?;
        }
        f.write_str(")")
    }
}

/// Level-1 node. `parameters` are red links (context subject → entity),
/// `attributes` blue links (qualified attribute → attribute node).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateNodeDef {
    pub id: StateNodeId,
    pub parameters: Vec<(String, String)>,
    pub attributes: Vec<(AttrPath, AttrPath)>,
    /// `None` means the conjunction of all attributes in declaration order.
    pub composition: Option<Composition>,
}

impl StateNodeDef {
    /// A node whose red and blue links are identities.
    pub fn identity(
        id: impl Into<StateNodeId>,
        parameters: impl IntoIterator<Item = &'static str>,
        attributes: impl IntoIterator<Item = &'static str>,
    ) -> Self {
        StateNodeDef {
            id: id.into(),
            parameters: parameters
                .into_iter()
                .map(|p| (p.into(), p.into()))
                .collect(),
            attributes: attributes
                .into_iter()
                .map(|a| (a.into(), a.into()))
                .collect(),
            composition: None,
        }
    }

    pub fn entity_for(&self, parameter: &str) -> Option<&str> {
        self.parameters
            .iter()
            .find(|(p, _)| p == parameter)
            .map(|(_, e)| e.as_str())
    }

    pub fn node_for(&self, attribute: &AttrPath) -> Option<&AttrPath> {
        self.attributes
            .iter()
            .find(|(a, _)| a == attribute)
            .map(|(_, n)| n)
    }

    pub fn effective_composition(&self) -> Composition {
        self.composition.clone().unwrap_or_else(|| {
            Composition::And(
                self.attributes
                    .iter()
                    .map(|(a, _)| Composition::Attr(a.clone()))
                    .collect(),
            )
        })
    }
}

/// Level-3 composite value slot of one state node.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CompositeNode {
    pub id: String,
    pub state: StateNodeId,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ContextGraph {
    pub state_nodes: Vec<StateNodeDef>,
    pub entities: Vec<EntityNode>,
    pub attributes: Vec<AttributeNode>,
    pub green_links: BTreeMap<AttrPath, GreenLink>,
    pub composite_nodes: Vec<CompositeNode>,
    pub relations: Vec<EntityRelation>,
    pub rules: Vec<DependencyRule>,
}

impl ContextGraph {
    pub fn state_node(&self, id: &str) -> Option<&StateNodeDef> {
        self.state_nodes.iter().find(|s| s.id.as_str() == id)
    }

    pub fn entity(&self, id: &str) -> Option<&EntityNode> {
        self.entities.iter().find(|e| e.id == id)
    }

    pub fn attribute(&self, path: &AttrPath) -> Option<&AttributeNode> {
        self.attributes.iter().find(|a| a.path == *path)
    }

    /// Adds one composite slot `V<state>` for every state node lacking one.
    pub fn fill_composite_nodes(&mut self) {
        for s in &self.state_nodes {
            if !self.composite_nodes.iter().any(|c| c.state == s.id) {
                self.composite_nodes.push(CompositeNode {
                    id: format!("V_{}", s.id),
                    state: s.id.clone(),
                });
            }
        }
    }

    /// Adds an untimed green link `v_<path>` for every attribute lacking one.
    pub fn fill_green_links(&mut self) {
        for a in &self.attributes {
            self.green_links
                .entry(a.path.clone())
                .or_insert_with(|| GreenLink {
                    slot: format!("v_{}", a.path),
                    delay: 0,
                });
        }
    }

    /// Checks every structural constraint and reports all violations.
    pub fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::default();

        let mut ids: BTreeMap<&str, &'static str> = BTreeMap::new();
        let mut all: Vec<(&str, &'static str)> = Vec::new();
        all.extend(
            self.state_nodes
                .iter()
                .map(|s| (s.id.as_str(), "state node")),
        );
        all.extend(self.entities.iter().map(|e| (e.id.as_str(), "entity")));
        all.extend(
            self.attributes
                .iter()
                .map(|a| (a.path.as_str(), "attribute")),
        );
        all.extend(
            self.green_links
                .values()
                .map(|g| (g.slot.as_str(), "value slot")),
        );
        all.extend(
            self.composite_nodes
                .iter()
                .map(|c| (c.id.as_str(), "composite slot")),
        );
        let mut slots = BTreeSet::new();
        for g in self.green_links.values() {
            if !slots.insert(g.slot.as_str()) {
                r.push(
                    "duplicate-value-slot",
                    format!("value slot {} is targeted twice", g.slot),
                );
            }
        }
        let mut seen_slot_once = BTreeSet::new();
        for (id, kind) in all {
            if kind == "value slot" && !seen_slot_once.insert(id) {
                continue;
            }
            match ids.get(id) {
                Some(prev) if *prev == kind => {
                    r.push("duplicate-node", format!("{kind} {id} is declared twice"))
                }
                Some(prev) => r.push(
                    "node-overlap",
                    format!("{id} is both a {prev} and a {kind}"),
                ),
                None => {
                    ids.insert(id, kind);
                }
            }
        }

        if self.composite_nodes.len() != self.state_nodes.len() {
            r.push(
                "composite-count",
                format!(
                    "{} composite value slots for {} state nodes",
                    self.composite_nodes.len(),
                    self.state_nodes.len()
                ),
            );
        }
        for c in &self.composite_nodes {
            if self.state_node(c.state.as_str()).is_none() {
                r.push(
                    "composite-count",
                    format!(
                        "composite slot {} belongs to unknown state node {}",
                        c.id, c.state
                    ),
                );
            }
        }

        for a in &self.attributes {
            if self.entity(&a.entity).is_none() {
                r.push(
                    "unknown-entity",
                    format!(
                        "attribute {} belongs to unknown entity {}",
                        a.path, a.entity
                    ),
                );
            }
            if !self.green_links.contains_key(&a.path) {
                r.push(
                    "missing-green-link",
                    format!("attribute {} has no value slot", a.path),
                );
            }
        }
        for path in self.green_links.keys() {
            if self.attribute(path).is_none() {
                r.push(
                    "unknown-attribute",
                    format!("green link from unknown attribute {path}"),
                );
            }
        }
        for rel in &self.relations {
            for end in [&rel.from, &rel.to] {
                if self.entity(end).is_none() {
                    r.push(
                        "unknown-entity",
                        format!("relation end {end} is not an entity"),
                    );
                }
            }
        }

        for rule in &self.rules {
            for c in &rule.antecedent {
                if self.attribute(&c.attribute).is_none() {
                    r.push(
                        "rule-unknown-attribute",
                        format!("rule antecedent references unknown {}", c.attribute),
                    );
                }
            }
            match self.attribute(&rule.target) {
                None => r.push(
                    "rule-unknown-attribute",
                    format!("rule targets unknown {}", rule.target),
                ),
                Some(t) if rule.kind == DependencyKind::Total && t.source == AttrSource::Direct => {
                    r.push(
                        "total-rule-target",
                        format!("total rule targets direct attribute {}", rule.target),
                    )
                }
                Some(_) => {}
            }
        }

        for s in &self.state_nodes {
            self.validate_state_node(s, &mut r);
        }
        r
    }

    fn validate_state_node(&self, s: &StateNodeDef, r: &mut ValidationReport) {
        if s.attributes.is_empty() {
            r.push(
                "empty-state-node",
                format!("state node {} has no attributes", s.id),
            );
        }
        let mut entities = BTreeSet::new();
        for (p, e) in &s.parameters {
            if self.entity(e).is_none() {
                r.push(
                    "unknown-entity",
                    format!("state node {} maps {p} to unknown entity {e}", s.id),
                );
            }
            if !entities.insert(e.as_str()) {
                r.push(
                    "red-injectivity",
                    format!("state node {} maps two parameters to entity {e}", s.id),
                );
            }
        }
        let mut nodes = BTreeSet::new();
        for (a, n) in &s.attributes {
            match self.attribute(n) {
                None => r.push(
                    "unknown-attribute",
                    format!("state node {} maps {a} to unknown attribute {n}", s.id),
                ),
                Some(node) if !entities.contains(node.entity.as_str()) => r.push(
                    "composition-unreachable",
                    format!(
                        "state node {}: attribute {n} belongs to {} which has no red link",
                        s.id, node.entity
                    ),
                ),
                Some(_) => {}
            }
            if !nodes.insert(n) {
                r.push(
                    "blue-injectivity",
                    format!("state node {} maps two attributes to {n}", s.id),
                );
            }
        }
        if let Some(c) = &s.composition {
            for leaf in c.leaves() {
                if s.node_for(leaf).is_none() {
                    r.push(
                        "composition-unreachable",
                        format!("state node {} composes {leaf} without a blue link", s.id),
                    );
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub code: &'static str,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn push(&mut self, code: &'static str, message: String) {
        self.findings.push(Finding { code, message });
    }

    pub fn is_empty(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn has(&self, code: &str) -> bool {
        self.findings.iter().any(|f| f.code == code)
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.findings.extend(other.findings);
    }
}
