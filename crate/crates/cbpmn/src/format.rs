//! TOML documents for graphs, models, repositories, rules and scenarios.
//!
//! Every document starts with a header naming its kind and schema version:
//!
//! ```toml
//! format = "cbpmn-scenario"
//! version = 1
//! ```
//!
//! Loaders reject other kinds and versions before reading anything else.
//! Unknown keys are errors too, so a typo never silently drops data.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use cbpmn_core::fragments::RepoEntry;
use cbpmn_core::graph::{
    AttrSource, AttributeNode, Composition, Condition, DependencyKind, DependencyRule, EntityNode,
    EntityRelation, GreenLink, StateNodeDef, ValueExpr,
};
use cbpmn_core::process::{
    ActivityTemplate, EventBinding, FragmentRef, Permutation, Slot, Step, StepTarget,
};
use cbpmn_core::{
    Action, ActivityChain, AdaptationRule, AtomicContext, Category, Connector, ContextGraph,
    ContextVector, FragmentRepository, LogicalTime, ProcessFragment, Scalar, Scenario, Temporality,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Schema version written and accepted by this build.
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("syntax: {0}")]
    Syntax(String),
    #[error("header: {0}")]
    Header(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Format { path: PathBuf, source: FormatError },
}

impl LoadError {
    pub fn path(&self) -> &Path {
        match self {
            LoadError::Io { path, .. } | LoadError::Format { path, .. } => path,
        }
    }
}

fn invalid(msg: impl Into<String>) -> FormatError {
    FormatError::Invalid(msg.into())
}

/// Document kinds and their header names.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Graph,
    Model,
    Repository,
    Rules,
    Scenario,
}

impl Kind {
    pub fn header(self) -> &'static str {
        match self {
            Kind::Graph => "cbpmn-graph",
            Kind::Model => "cbpmn-model",
            Kind::Repository => "cbpmn-repository",
            Kind::Rules => "cbpmn-rules",
            Kind::Scenario => "cbpmn-scenario",
        }
    }
}

/// Checks the header, then decodes the whole document.
fn decode<T: DeserializeOwned>(text: &str, kind: Kind) -> Result<T, FormatError> {
    let table: toml::Table =
        toml::from_str(text).map_err(|e| FormatError::Syntax(e.to_string()))?;
    match table.get("format").and_then(|v| v.as_str()) {
        Some(f) if f == kind.header() => {}
        Some(f) => {
            return Err(FormatError::Header(format!(
                "expected format \"{}\", found \"{f}\"",
                kind.header()
            )))
        }
        None => {
            return Err(FormatError::Header(format!(
                "missing `format = \"{}\"`",
                kind.header()
            )))
        }
    }
    match table.get("version").and_then(|v| v.as_integer()) {
        Some(v) if v == VERSION as i64 => {}
        Some(v) => {
            return Err(FormatError::Header(format!(
                "unsupported version {v} (supported: {VERSION})"
            )))
        }
        None => return Err(FormatError::Header("missing integer `version`".into())),
    }
    table
        .try_into()
        .map_err(|e: toml::de::Error| FormatError::Syntax(e.to_string()))
}

fn encode<T: Serialize>(doc: &T) -> String {
    toml::to_string(doc).expect("documents serialize to TOML")
}

pub fn read(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_with<T>(
    path: &Path,
    parse: impl Fn(&str) -> Result<T, FormatError>,
) -> Result<T, LoadError> {
    let text = read(path)?;
    parse(&text).map_err(|source| LoadError::Format {
        path: path.to_path_buf(),
        source,
    })
}

fn header(kind: Kind) -> String {
    kind.header().to_string()
}

// ---------------------------------------------------------------- scalars

/// A scalar as TOML writes it. Strings are read leniently, so `"11:00"`
/// becomes a time and `"16"` a number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueRepr {
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
}

impl ValueRepr {
    pub fn to_scalar(&self) -> Result<Scalar, FormatError> {
        match self {
            ValueRepr::Bool(b) => Ok(Scalar::Bool(*b)),
            ValueRepr::Int(n) => Ok(Scalar::Number(*n as f64)),
            ValueRepr::Float(x) => Scalar::number(*x).map_err(|e| invalid(e.to_string())),
            ValueRepr::Text(s) => Ok(Scalar::parse_lenient(s)),
        }
    }

    pub fn from_scalar(s: &Scalar) -> Self {
        match s {
            Scalar::Bool(b) => ValueRepr::Bool(*b),
            Scalar::Number(n) if n.fract() == 0.0 && n.abs() < 1e15 => ValueRepr::Int(*n as i64),
            Scalar::Number(n) => ValueRepr::Float(*n),
            Scalar::Text(t) => ValueRepr::Text(t.clone()),
            Scalar::Time(t) => ValueRepr::Text(t.to_string()),
        }
    }
}

/// `"14:00"` or a bare number of minutes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeRepr {
    Minutes(i64),
    Clock(String),
}

impl TimeRepr {
    fn to_time(&self) -> Result<LogicalTime, FormatError> {
        match self {
            TimeRepr::Minutes(m) => Ok(LogicalTime(*m)),
            TimeRepr::Clock(s) => s
                .parse()
                .map_err(|e: cbpmn_core::ContextError| invalid(e.to_string())),
        }
    }
}

/// `"A"` or `"A -> B"`.
fn split_link(s: &str) -> (String, String) {
    match s.split_once("->") {
        Some((a, b)) => (a.trim().to_string(), b.trim().to_string()),
        None => (s.trim().to_string(), s.trim().to_string()),
    }
}

// ---------------------------------------------------------------- contexts

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextRepr {
    pub parameter: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<String>,
    pub attribute: String,
    #[serde(default)]
    pub connector: Connector,
    pub value: ValueRepr,
    #[serde(default)]
    pub category: Category,
    #[serde(default)]
    pub temporality: Temporality,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub specialization: Option<String>,
}

impl ContextRepr {
    fn to_context(&self) -> Result<AtomicContext, FormatError> {
        let mut c = AtomicContext::new(
            self.parameter.as_str(),
            self.attribute.as_str(),
            self.value.to_scalar()?,
        )
        .with_connector(self.connector)
        .with_category(self.category)
        .with_temporality(self.temporality);
        c.instance = self.instance.clone();
        c.specialization = self.specialization.clone();
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotRepr {
    pub time: TimeRepr,
    #[serde(default)]
    pub contexts: Vec<ContextRepr>,
}

impl SnapshotRepr {
    fn to_vector(&self) -> Result<ContextVector, FormatError> {
        let t = self.time.to_time()?;
        let contexts = self
            .contexts
            .iter()
            .map(ContextRepr::to_context)
            .collect::<Result<Vec<_>, _>>()?;
        ContextVector::new(t, contexts).map_err(|e| invalid(format!("snapshot at {t}: {e}")))
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    format: String,
    version: u32,
    #[serde(default, rename = "snapshot")]
    snapshots: Vec<SnapshotRepr>,
}

pub fn parse_scenario(text: &str) -> Result<Scenario, FormatError> {
    let doc: ScenarioDoc = decode(text, Kind::Scenario)?;
    let vectors = doc
        .snapshots
        .iter()
        .map(SnapshotRepr::to_vector)
        .collect::<Result<Vec<_>, _>>()?;
    Scenario::new(vectors).map_err(|e| invalid(format!("scenario: {e}")))
}

pub fn load_scenario(path: &Path) -> Result<Scenario, LoadError> {
    load_with(path, parse_scenario)
}

// ---------------------------------------------------------------- graph

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AttributeRepr {
    path: String,
    /// Defaults to the path's subject.
    #[serde(default)]
    entity: Option<String>,
    #[serde(default)]
    temporality: Temporality,
    #[serde(default)]
    source: AttrSource,
    /// Value slot name; defaults to `v_<path>`.
    #[serde(default)]
    slot: Option<String>,
    /// Green-link activation delay in minutes.
    #[serde(default)]
    delay: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateNodeRepr {
    id: String,
    #[serde(default)]
    parameters: Vec<String>,
    #[serde(default)]
    attributes: Vec<String>,
    #[serde(default)]
    composition: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConditionRepr {
    attribute: String,
    #[serde(default)]
    connector: Connector,
    value: ValueRepr,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DependencyRepr {
    #[serde(default)]
    kind: DependencyKind,
    when: Vec<ConditionRepr>,
    target: String,
    value: ValueRepr,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    format: String,
    version: u32,
    #[serde(default, rename = "entity")]
    entities: Vec<EntityNode>,
    #[serde(default, rename = "attribute")]
    attributes: Vec<AttributeRepr>,
    #[serde(default, rename = "relation")]
    relations: Vec<EntityRelation>,
    #[serde(default, rename = "state_node")]
    state_nodes: Vec<StateNodeRepr>,
    #[serde(default, rename = "rule")]
    rules: Vec<DependencyRepr>,
}

pub fn parse_graph(text: &str) -> Result<ContextGraph, FormatError> {
    let doc: GraphDoc = decode(text, Kind::Graph)?;
    let mut g = ContextGraph {
        entities: doc.entities,
        relations: doc.relations,
        ..Default::default()
    };
    for a in doc.attributes {
        let path: cbpmn_core::AttrPath = a.path.as_str().into();
        let entity = a.entity.unwrap_or_else(|| path.subject().to_string());
        if a.slot.is_some() || a.delay > 0 {
            let slot = a.slot.unwrap_or_else(|| format!("v_{path}"));
            g.green_links.insert(
                path.clone(),
                GreenLink {
                    slot,
                    delay: a.delay,
                },
            );
        }
        g.attributes.push(AttributeNode {
            path,
            entity,
            temporality: a.temporality,
            source: a.source,
        });
    }
    for s in doc.state_nodes {
        let composition = match &s.composition {
            Some(c) => Some(
                c.parse::<Composition>()
                    .map_err(|e| invalid(format!("state node {}: {e}", s.id)))?,
            ),
            None => None,
        };
        g.state_nodes.push(StateNodeDef {
            id: s.id.as_str().into(),
            parameters: s.parameters.iter().map(|p| split_link(p)).collect(),
            attributes: s
                .attributes
                .iter()
                .map(|a| {
                    let (from, to) = split_link(a);
                    (from.into(), to.into())
                })
                .collect(),
            composition,
        });
    }
    for (i, r) in doc.rules.into_iter().enumerate() {
        let antecedent = r
            .when
            .iter()
            .map(|c| {
                Ok(Condition::new(
                    c.attribute.as_str(),
                    c.connector,
                    c.value.to_scalar()?,
                ))
            })
            .collect::<Result<Vec<_>, FormatError>>()
            .map_err(|e| invalid(format!("dependency rule {}: {e}", i + 1)))?;
        g.rules.push(DependencyRule {
            kind: r.kind,
            antecedent,
            target: r.target.as_str().into(),
            value: r.value.to_scalar()?,
        });
    }
    g.fill_green_links();
    g.fill_composite_nodes();
    Ok(g)
}

pub fn load_graph(path: &Path) -> Result<ContextGraph, LoadError> {
    load_with(path, parse_graph)
}

// ---------------------------------------------------------------- activities

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventRepr {
    pub state_node: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parameters: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub attributes: Vec<String>,
}

fn default_duration() -> u32 {
    1
}

fn is_default_duration(d: &u32) -> bool {
    *d == 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActivityRepr {
    pub name: String,
    pub sub_goal: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub role: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub medium: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub output: Vec<String>,
    #[serde(
        default = "default_duration",
        skip_serializing_if = "is_default_duration"
    )]
    pub duration: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event: Option<EventRepr>,
}

impl ActivityRepr {
    pub fn to_template(&self) -> ActivityTemplate {
        let mut t = ActivityTemplate::new(&self.name, &self.sub_goal);
        t.role = self.role.clone();
        t.medium = self.medium.clone();
        t.output_data = self.output.iter().cloned().collect();
        t.duration = self.duration;
        t.event = self.event.as_ref().map(|e| EventBinding {
            state_node: e.state_node.as_str().into(),
            parameters: e.parameters.iter().cloned().collect(),
            attributes: e.attributes.iter().map(|a| a.as_str().into()).collect(),
        });
        t
    }

    pub fn from_template(t: &ActivityTemplate) -> Self {
        ActivityRepr {
            name: t.name.to_string(),
            sub_goal: t.sub_goal.to_string(),
            role: t.role.clone(),
            medium: t.medium.clone(),
            output: t.output_data.iter().cloned().collect(),
            duration: t.duration,
            event: t.event.as_ref().map(|e| EventRepr {
                state_node: e.state_node.to_string(),
                parameters: e.parameters.iter().cloned().collect(),
                attributes: e.attributes.iter().map(|a| a.to_string()).collect(),
            }),
        }
    }
}

// ---------------------------------------------------------------- model

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    format: String,
    version: u32,
    name: String,
    #[serde(default)]
    gateway_branches: usize,
    #[serde(rename = "activity")]
    activities: Vec<ActivityRepr>,
    #[serde(default)]
    ideal: Option<SnapshotRepr>,
}

/// The process part of a model file.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessDecl {
    pub name: String,
    pub chain: ActivityChain,
    pub ideal: Option<ContextVector>,
    pub gateway_branches: usize,
}

pub fn parse_model(text: &str) -> Result<ProcessDecl, FormatError> {
    let doc: ModelDoc = decode(text, Kind::Model)?;
    let templates: Vec<ActivityTemplate> = doc
        .activities
        .iter()
        .map(ActivityRepr::to_template)
        .collect();
    let chain = ActivityChain::from_templates(&templates).map_err(|e| invalid(e.to_string()))?;
    let ideal = match &doc.ideal {
        Some(s) => Some(s.to_vector().map_err(|e| invalid(format!("ideal: {e}")))?),
        None => None,
    };
    Ok(ProcessDecl {
        name: doc.name,
        chain,
        ideal,
        gateway_branches: doc.gateway_branches,
    })
}

pub fn load_model(path: &Path) -> Result<ProcessDecl, LoadError> {
    load_with(path, parse_model)
}

// ---------------------------------------------------------------- repository

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryRepr {
    value: String,
    fragment: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SubgoalRepr {
    id: String,
    #[serde(default, rename = "entry", skip_serializing_if = "Vec::is_empty")]
    entries: Vec<EntryRepr>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FragmentRepr {
    id: String,
    #[serde(rename = "activity")]
    activities: Vec<ActivityRepr>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RepoDoc {
    format: String,
    version: u32,
    #[serde(default, rename = "subgoal", skip_serializing_if = "Vec::is_empty")]
    subgoals: Vec<SubgoalRepr>,
    #[serde(default, rename = "fragment", skip_serializing_if = "Vec::is_empty")]
    fragments: Vec<FragmentRepr>,
}

pub fn parse_repository(text: &str) -> Result<FragmentRepository, FormatError> {
    let doc: RepoDoc = decode(text, Kind::Repository)?;
    let fragments = doc
        .fragments
        .iter()
        .map(|f| ProcessFragment {
            id: f.id.as_str().into(),
            activities: f.activities.iter().map(ActivityRepr::to_template).collect(),
        })
        .collect();
    let mut subgoals = Vec::with_capacity(doc.subgoals.len());
    for sg in &doc.subgoals {
        let mut entries = Vec::with_capacity(sg.entries.len());
        for e in &sg.entries {
            let pattern: ValueExpr = e
                .value
                .parse()
                .map_err(|err| invalid(format!("sub-goal {}: {err}", sg.id)))?;
            entries.push(RepoEntry {
                pattern,
                fragment: e.fragment.as_str().into(),
            });
        }
        subgoals.push((sg.id.as_str().into(), entries));
    }
    FragmentRepository::new(subgoals, fragments).map_err(|e| invalid(e.to_string()))
}

pub fn load_repository(path: &Path) -> Result<FragmentRepository, LoadError> {
    load_with(path, parse_repository)
}

/// Canonical document: sub-goals in index order, fragments by id.
pub fn store_repository(repo: &FragmentRepository) -> String {
    let doc = RepoDoc {
        format: header(Kind::Repository),
        version: VERSION,
        subgoals: repo
            .subgoals()
            .iter()
            .map(|sg| SubgoalRepr {
                id: sg.to_string(),
                entries: repo
                    .entries(sg.as_str())
                    .map(|e| EntryRepr {
                        value: e.pattern.to_string(),
                        fragment: e.fragment.to_string(),
                    })
                    .collect(),
            })
            .collect(),
        fragments: repo
            .fragments()
            .map(|f| FragmentRepr {
                id: f.id.to_string(),
                activities: f
                    .activities
                    .iter()
                    .map(ActivityRepr::from_template)
                    .collect(),
            })
            .collect(),
    };
    encode(&doc)
}

// ---------------------------------------------------------------- rules

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ActionRepr {
    /// `fragment` absent means the fragment the repository selected.
    AddBefore {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        fragment: Option<String>,
    },
    AddAfter {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        fragment: Option<String>,
    },
    ReplaceByFragment {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        fragment: Option<String>,
    },
    ReplaceRole {
        role: String,
    },
    ReplaceMedium {
        medium: String,
    },
    Bypass,
    Reorder {
        order: Vec<String>,
    },
    DataLevelChange {
        data: Vec<String>,
    },
    Nested {
        steps: Vec<StepRepr>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepRepr {
    /// Activity the step rewrites; absent means the event's own activity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    pub action: ActionRepr,
}

fn fragment_ref(f: &Option<String>) -> FragmentRef {
    match f {
        Some(id) => FragmentRef::Named(id.as_str().into()),
        None => FragmentRef::Selected,
    }
}

fn fragment_name(r: &FragmentRef) -> Option<String> {
    match r {
        FragmentRef::Selected => None,
        FragmentRef::Named(id) => Some(id.to_string()),
    }
}

fn parse_slot(s: &str) -> Result<Slot, FormatError> {
    match s.to_ascii_lowercase().as_str() {
        "prev" => Ok(Slot::Prev),
        "current" => Ok(Slot::Current),
        "next" => Ok(Slot::Next),
        _ => Err(invalid(format!(
            "reorder slot `{s}` is not prev, current or next"
        ))),
    }
}

fn slot_name(s: Slot) -> &'static str {
    match s {
        Slot::Prev => "prev",
        Slot::Current => "current",
        Slot::Next => "next",
    }
}

impl ActionRepr {
    pub fn to_action(&self) -> Result<Action, FormatError> {
        Ok(match self {
            ActionRepr::AddBefore { fragment } => Action::AddBefore(fragment_ref(fragment)),
            ActionRepr::AddAfter { fragment } => Action::AddAfter(fragment_ref(fragment)),
            ActionRepr::ReplaceByFragment { fragment } => {
                Action::ReplaceByFragment(fragment_ref(fragment))
            }
            ActionRepr::ReplaceRole { role } => Action::ReplaceRole(role.clone()),
            ActionRepr::ReplaceMedium { medium } => Action::ReplaceMedium(medium.clone()),
            ActionRepr::Bypass => Action::Bypass,
            ActionRepr::Reorder { order } => {
                let slots = order
                    .iter()
                    .map(|s| parse_slot(s))
                    .collect::<Result<Vec<_>, _>>()?;
                let slots: [Slot; 3] = slots
                    .try_into()
                    .map_err(|_| invalid("reorder needs exactly three slots"))?;
                Action::Reorder(Permutation(slots))
            }
            ActionRepr::DataLevelChange { data } => {
                Action::DataLevelChange(data.iter().cloned().collect::<BTreeSet<_>>())
            }
            ActionRepr::Nested { steps } => Action::Nested(
                steps
                    .iter()
                    .map(|s| {
                        Ok(Step {
                            target: match &s.target {
                                Some(a) => StepTarget::Activity(a.as_str().into()),
                                None => StepTarget::Current,
                            },
                            action: s.action.to_action()?,
                        })
                    })
                    .collect::<Result<Vec<_>, FormatError>>()?,
            ),
        })
    }

    pub fn from_action(a: &Action) -> Self {
        match a {
            Action::AddBefore(r) => ActionRepr::AddBefore {
                fragment: fragment_name(r),
            },
            Action::AddAfter(r) => ActionRepr::AddAfter {
                fragment: fragment_name(r),
            },
            Action::ReplaceByFragment(r) => ActionRepr::ReplaceByFragment {
                fragment: fragment_name(r),
            },
            Action::ReplaceRole(v) => ActionRepr::ReplaceRole { role: v.clone() },
            Action::ReplaceMedium(v) => ActionRepr::ReplaceMedium { medium: v.clone() },
            Action::Bypass => ActionRepr::Bypass,
            Action::Reorder(p) => ActionRepr::Reorder {
                order: p.0.iter().map(|s| slot_name(*s).to_string()).collect(),
            },
            Action::DataLevelChange(d) => ActionRepr::DataLevelChange {
                data: d.iter().cloned().collect(),
            },
            Action::Nested(steps) => ActionRepr::Nested {
                steps: steps
                    .iter()
                    .map(|s| StepRepr {
                        target: match &s.target {
                            StepTarget::Current => None,
                            StepTarget::Activity(a) => Some(a.to_string()),
                        },
                        action: ActionRepr::from_action(&s.action),
                    })
                    .collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    activity: Option<String>,
    value: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fragment: Option<String>,
    action: ActionRepr,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RulesDoc {
    format: String,
    version: u32,
    #[serde(default, rename = "rule")]
    rules: Vec<RuleRepr>,
}

/// Rules numbered from 1 in file order.
pub fn parse_rules(text: &str) -> Result<Vec<AdaptationRule>, FormatError> {
    let doc: RulesDoc = decode(text, Kind::Rules)?;
    doc.rules
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let n = i + 1;
            let value_pattern = r
                .value
                .parse()
                .map_err(|e| invalid(format!("rule {n}: {e}")))?;
            let action = r
                .action
                .to_action()
                .map_err(|e| invalid(format!("rule {n}: {e}")))?;
            Ok(AdaptationRule {
                activity: r.activity.as_deref().map(Into::into),
                value_pattern,
                fragment_pattern: r.fragment.as_deref().map(Into::into),
                action,
                declaration_order: n,
            })
        })
        .collect()
}

pub fn load_rules(path: &Path) -> Result<Vec<AdaptationRule>, LoadError> {
    load_with(path, parse_rules)
}

pub fn store_rules(rules: &[AdaptationRule]) -> String {
    let mut sorted: Vec<&AdaptationRule> = rules.iter().collect();
    sorted.sort_by_key(|r| r.declaration_order);
    let doc = RulesDoc {
        format: header(Kind::Rules),
        version: VERSION,
        rules: sorted
            .into_iter()
            .map(|r| RuleRepr {
                activity: r.activity.as_ref().map(|a| a.to_string()),
                value: r.value_pattern.to_string(),
                fragment: r.fragment_pattern.as_ref().map(|f| f.to_string()),
                action: ActionRepr::from_action(&r.action),
            })
            .collect(),
    };
    encode(&doc)
}

/// Scenario document from context vectors (used for generated inputs).
pub fn store_scenario(scenario: &Scenario) -> String {
    let doc = ScenarioDoc {
        format: header(Kind::Scenario),
        version: VERSION,
        snapshots: scenario
            .vectors()
            .iter()
            .map(|v| SnapshotRepr {
                time: TimeRepr::Clock(v.timestamp().to_string()),
                contexts: v
                    .contexts()
                    .iter()
                    .map(|c| ContextRepr {
                        parameter: c.parameter.clone(),
                        instance: c.instance.clone(),
                        attribute: c.attribute.clone(),
                        connector: c.connector,
                        value: ValueRepr::from_scalar(&c.value),
                        category: c.category,
                        temporality: c.temporality,
                        specialization: c.specialization.clone(),
                    })
                    .collect(),
            })
            .collect(),
    };
    encode(&doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn headers_are_checked_first() {
        let e = parse_scenario("format = \"cbpmn-scenario\"\nversion = 2\n").unwrap_err();
        assert!(
            matches!(e, FormatError::Header(ref m) if m.contains("version 2")),
            "{e}"
        );
        let e = parse_scenario("format = \"cbpmn-rules\"\nversion = 1\n").unwrap_err();
        assert!(matches!(e, FormatError::Header(_)));
        let e = parse_scenario("version = 1\n").unwrap_err();
        assert!(matches!(e, FormatError::Header(_)));
        let e =
            parse_scenario("format = \"cbpmn-scenario\"\nversion = 1\nextra = 3\n").unwrap_err();
        assert!(matches!(e, FormatError::Syntax(_)));
    }

    #[test]
    fn scenario_timestamps_must_increase() {
        let doc = r#"
format = "cbpmn-scenario"
version = 1

[[snapshot]]
time = "11:00"
contexts = [{ parameter = "Weather", attribute = "Status", value = "Rainy" }]

[[snapshot]]
time = "10:30"
contexts = [{ parameter = "Weather", attribute = "Status", value = "Sunny" }]
"#;
        let e = parse_scenario(doc).unwrap_err();
        assert!(e.to_string().contains("backwards"), "{e}");
    }

    #[test]
    fn values_are_read_leniently() {
        assert_eq!(
            ValueRepr::Text("11:00".into()).to_scalar().unwrap(),
            Scalar::Time(LogicalTime::hm(11, 0))
        );
        assert_eq!(
            ValueRepr::Int(16).to_scalar().unwrap(),
            Scalar::Number(16.0)
        );
        assert_eq!(
            ValueRepr::from_scalar(&Scalar::Number(2.5)),
            ValueRepr::Float(2.5)
        );
    }

    #[test]
    fn actions_round_trip() {
        let doc = r#"
format = "cbpmn-rules"
version = 1

[[rule]]
value = "A.s = x"
fragment = "f"
action = { kind = "nested", steps = [
    { action = { kind = "add-after" } },
    { target = "Other", action = { kind = "reorder", order = ["next", "current", "prev"] } },
    { action = { kind = "data-level-change", data = ["note"] } },
] }

[[rule]]
activity = "Pay"
value = "B.s = \"not possible\""
action = { kind = "replace-medium", medium = "cash" }
"#;
        let rules = parse_rules(doc).unwrap();
        assert_eq!(rules.len(), 2);
        assert_eq!(rules[1].declaration_order, 2);
        let again = parse_rules(&store_rules(&rules)).unwrap();
        assert_eq!(again, rules);
        assert!(parse_rules(&doc.replace("\"next\", ", "")).is_err());
    }

    #[test]
    fn links_split_on_arrows() {
        assert_eq!(split_link("P -> E"), ("P".into(), "E".into()));
        assert_eq!(split_link("P"), ("P".into(), "P".into()));
    }
}
