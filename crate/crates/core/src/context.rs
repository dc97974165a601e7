//! Context algebra: atomic contexts, context vectors, contextual situations
//! and per-activity context states.
//!
//! An observation `CON(t)` is a [`ContextVector`]. Consecutive observations
//! are differenced into a [`ContextualSituation`], which records the newly
//! present subjects (`P_c`), the attributes that were added or changed under
//! subjects already present (`A_c`), and the subjects that disappeared. The
//! two change sets are kept disjoint: an attribute of a subject that is itself
//! new is not repeated in `A_c`. [`ContextualSituation::involved_parameters`]
//! and [`ContextualSituation::involved_attributes`] give the merged view that
//! is usually printed, e.g. `[⟨Weather, Watch⟩⟨Weather.Status, Watch.Time⟩⟨11:00⟩]`.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::ident::{ActivityId, AttrPath};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContextError {
    #[error("context has an empty {0}")]
    EmptyField(&'static str),
    #[error("duplicate context key {0}")]
    DuplicateKey(AttrPath),
    #[error("unknown connector `{0}`")]
    UnknownConnector(String),
    #[error("invalid time `{0}` (expected hh:mm)")]
    InvalidTime(String),
    #[error("number is not finite")]
    NonFiniteNumber,
    #[error("scope of {scope} does not match state of {state}")]
    ScopeMismatch {
        scope: ActivityId,
        state: ActivityId,
    },
    #[error("timestamps go backwards: {later} after {earlier}")]
    NonMonotone {
        earlier: LogicalTime,
        later: LogicalTime,
    },
}

/// Logical time in minutes since scenario start (or since midnight when a
/// scenario uses clock times).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct LogicalTime(pub i64);

impl LogicalTime {
    /// Earlier than any observation; the timestamp of a never-updated state.
    pub const NEVER: LogicalTime = LogicalTime(i64::MIN);

    pub const fn minutes(m: i64) -> Self {
        LogicalTime(m)
    }

    pub const fn hm(hours: i64, minutes: i64) -> Self {
        LogicalTime(hours * 60 + minutes)
    }

    pub fn plus(self, minutes: u32) -> Self {
        LogicalTime(self.0.saturating_add(minutes as i64))
    }
}

impl fmt::Display for LogicalTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Self::NEVER {
            return f.write_str("never");
        }
        let sign = if self.0 < 0 { "-" } else { "" };
        let m = self.0.unsigned_abs();
        write!(f, "{sign}{:02}:{:02}", m / 60, m % 60)
    }
}

impl FromStr for LogicalTime {
    type Err = ContextError;

    /// Accepts `hh:mm` or a bare number of minutes.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || ContextError::InvalidTime(s.into());
        if let Some((h, m)) = s.split_once(':') {
            let h: i64 = h.parse().map_err(|_| bad())?;
            let m: i64 = m.parse().map_err(|_| bad())?;
            if h < 0 || !(0..60).contains(&m) {
                return Err(bad());
            }
            Ok(LogicalTime::hm(h, m))
        } else {
            s.parse().map(LogicalTime).map_err(|_| bad())
        }
    }
}

/// Tagged scalar value of an atomic context.
///
/// Equality is structural after normalization: text compares
/// case-insensitively, numbers exactly.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(
    feature = "serde",
    serde(tag = "type", content = "value", rename_all = "lowercase")
)]
pub enum Scalar {
    Text(String),
    Number(f64),
    Bool(bool),
    Time(LogicalTime),
}

impl Scalar {
    pub fn text(s: impl Into<String>) -> Self {
        Scalar::Text(s.into())
    }

    pub fn number(n: f64) -> Result<Self, ContextError> {
        if n.is_finite() {
            Ok(Scalar::Number(n))
        } else {
            Err(ContextError::NonFiniteNumber)
        }
    }

    /// Reads `true`/`false`, numbers and `hh:mm` times; everything else is text.
    pub fn parse_lenient(s: &str) -> Self {
        let t = s.trim();
        if t.eq_ignore_ascii_case("true") {
            return Scalar::Bool(true);
        }
        if t.eq_ignore_ascii_case("false") {
            return Scalar::Bool(false);
        }
        if let Ok(n) = t.parse::<f64>() {
            if n.is_finite() {
                return Scalar::Number(n);
            }
        }
        if t.contains(':') {
            if let Ok(time) = t.parse::<LogicalTime>() {
                return Scalar::Time(time);
            }
        }
        Scalar::Text(t.into())
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Scalar::Number(n) => Some(*n),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Scalar::Text(_) => 0,
            Scalar::Number(_) => 1,
            Scalar::Bool(_) => 2,
            Scalar::Time(_) => 3,
        }
    }

    /// Ordering between comparable scalars (numbers, times, booleans, and
    /// text case-insensitively). `None` across different tags.
    pub fn compare(&self, other: &Scalar) -> Option<Ordering> {
        match (self, other) {
            (Scalar::Number(a), Scalar::Number(b)) => Some(a.total_cmp(b)),
            (Scalar::Time(a), Scalar::Time(b)) => Some(a.cmp(b)),
            (Scalar::Bool(a), Scalar::Bool(b)) => Some(a.cmp(b)),
            (Scalar::Text(a), Scalar::Text(b)) => Some(cmp_caseless(a, b)),
            _ => None,
        }
    }
}

fn cmp_caseless(a: &str, b: &str) -> Ordering {
    a.chars()
        .flat_map(char::to_lowercase)
        .cmp(b.chars().flat_map(char::to_lowercase))
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scalar {}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        self.compare(other)
            .unwrap_or_else(|| self.rank().cmp(&other.rank()))
    }
}

impl core::hash::Hash for Scalar {
    fn hash<H: core::hash::Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            Scalar::Text(s) => s
                .chars()
                .flat_map(char::to_lowercase)
                .for_each(|c| c.hash(state)),
            Scalar::Number(n) => n.to_bits().hash(state),
            Scalar::Bool(b) => b.hash(state),
            Scalar::Time(t) => t.hash(state),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Text(s) => f.write_str(s),
            Scalar::Number(n) => {
                if libm::trunc(*n) == *n && libm::fabs(*n) < 1e15 {
                    write!(f, "{}", *n as i64)
                } else {
                    write!(f, "{n}")
                }
            }
            Scalar::Bool(b) => write!(f, "{b}"),
            Scalar::Time(t) => write!(f, "{t}"),
        }
    }
}

impl From<&str> for Scalar {
    fn from(s: &str) -> Self {
        Scalar::Text(s.into())
    }
}

/// Connector `l` between an attribute and its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Connector {
    #[default]
    Eq,
    Gt,
    Lt,
    Ge,
    Le,
    Ne,
    In,
    At,
    Near,
    From,
}

impl Connector {
    pub const ALL: [Connector; 10] = [
        Connector::Eq,
        Connector::Gt,
        Connector::Lt,
        Connector::Ge,
        Connector::Le,
        Connector::Ne,
        Connector::In,
        Connector::At,
        Connector::Near,
        Connector::From,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Connector::Eq => "=",
            Connector::Gt => ">",
            Connector::Lt => "<",
            Connector::Ge => ">=",
            Connector::Le => "<=",
            Connector::Ne => "!=",
            Connector::In => "In",
            Connector::At => "At",
            Connector::Near => "near",
            Connector::From => "from",
        }
    }

    /// Whether `observed <connector> expected` holds. The prepositional
    /// connectors (`In`, `At`, `near`, `from`) test equality.
    pub fn holds(self, observed: &Scalar, expected: &Scalar) -> bool {
        match self {
            Connector::Eq | Connector::In | Connector::At | Connector::Near | Connector::From => {
                observed == expected
            }
            Connector::Ne => observed != expected,
            Connector::Gt => observed.compare(expected) == Some(Ordering::Greater),
            Connector::Lt => observed.compare(expected) == Some(Ordering::Less),
            Connector::Ge => matches!(
                observed.compare(expected),
                Some(Ordering::Greater | Ordering::Equal)
            ),
            Connector::Le => matches!(
                observed.compare(expected),
                Some(Ordering::Less | Ordering::Equal)
            ),
        }
    }
}

impl fmt::Display for Connector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Connector {
    type Err = ContextError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim() {
            "=" | "==" => Connector::Eq,
            ">" => Connector::Gt,
            "<" => Connector::Lt,
            ">=" | "≥" => Connector::Ge,
            "<=" | "≤" => Connector::Le,
            "!=" | "≠" => Connector::Ne,
            t if t.eq_ignore_ascii_case("in") => Connector::In,
            t if t.eq_ignore_ascii_case("at") => Connector::At,
            t if t.eq_ignore_ascii_case("near") => Connector::Near,
            t if t.eq_ignore_ascii_case("from") => Connector::From,
            other => return Err(ContextError::UnknownConnector(other.into())),
        })
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for Connector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.symbol())
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for Connector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = <String as serde::Deserialize>::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The three context perspectives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Category {
    Organization,
    Role,
    #[default]
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Temporality {
    /// Never changes; validated but ignored by the change pipeline.
    Static,
    Steady,
    #[default]
    Dynamic,
}

/// Atomic context `⟨p, a, l, v⟩`, optionally naming an instance of the
/// parameter (e.g. `BSNL_Network` of `Network`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AtomicContext {
    pub parameter: String,
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub instance: Option<String>,
    pub attribute: String,
    #[cfg_attr(feature = "serde", serde(default))]
    pub connector: Connector,
    pub value: Scalar,
    #[cfg_attr(feature = "serde", serde(default))]
    pub category: Category,
    #[cfg_attr(feature = "serde", serde(default))]
    pub temporality: Temporality,
    /// Predicate name used by the reasoning layer (`Resource`, `Season`, ...).
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub specialization: Option<String>,
}

impl AtomicContext {
    pub fn new(parameter: impl Into<String>, attribute: impl Into<String>, value: Scalar) -> Self {
        AtomicContext {
            parameter: parameter.into(),
            instance: None,
            attribute: attribute.into(),
            connector: Connector::Eq,
            value,
            category: Category::External,
            temporality: Temporality::Dynamic,
            specialization: None,
        }
    }

    pub fn with_instance(mut self, instance: impl Into<String>) -> Self {
        self.instance = Some(instance.into());
        self
    }

    pub fn with_connector(mut self, connector: Connector) -> Self {
        self.connector = connector;
        self
    }

    pub fn with_category(mut self, category: Category) -> Self {
        self.category = category;
        self
    }

    pub fn with_temporality(mut self, temporality: Temporality) -> Self {
        self.temporality = temporality;
        self
    }

    pub fn with_specialization(mut self, name: impl Into<String>) -> Self {
        self.specialization = Some(name.into());
        self
    }

    /// The instance when present, otherwise the parameter.
    pub fn subject(&self) -> &str {
        self.instance.as_deref().unwrap_or(&self.parameter)
    }

    pub fn path(&self) -> AttrPath {
        AttrPath::from_parts(self.subject(), &self.attribute)
    }

    pub fn predicate_name(&self) -> &str {
        self.specialization.as_deref().unwrap_or(&self.parameter)
    }

    pub fn validate(&self) -> Result<(), ContextError> {
        if self.parameter.trim().is_empty() {
            return Err(ContextError::EmptyField("parameter"));
        }
        if self.attribute.trim().is_empty() {
            return Err(ContextError::EmptyField("attribute"));
        }
        if matches!(self.instance.as_deref(), Some(i) if i.trim().is_empty()) {
            return Err(ContextError::EmptyField("instance"));
        }
        if let Scalar::Number(n) = self.value {
            if !n.is_finite() {
                return Err(ContextError::NonFiniteNumber);
            }
        }
        Ok(())
    }

    /// Same connector and value.
    fn same_payload(&self, other: &AtomicContext) -> bool {
        self.connector == other.connector && self.value == other.value
    }
}

impl fmt::Display for AtomicContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "⟨{}, {}, {}, {}⟩",
            self.subject(),
            self.attribute,
            self.connector,
            self.value
        )
    }
}

/// `CON(t) = [C1, …, Cn]`: the contexts observed at one instant, in
/// declaration order. No two entries share a qualified attribute.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ContextVector {
    timestamp: LogicalTime,
    contexts: Vec<AtomicContext>,
}

impl ContextVector {
    pub fn new(timestamp: LogicalTime, contexts: Vec<AtomicContext>) -> Result<Self, ContextError> {
        let mut seen = BTreeSet::new();
        for c in &contexts {
            c.validate()?;
            if !seen.insert(c.path()) {
                return Err(ContextError::DuplicateKey(c.path()));
            }
        }
        Ok(ContextVector {
            timestamp,
            contexts,
        })
    }

    pub fn timestamp(&self) -> LogicalTime {
        self.timestamp
    }

    pub fn contexts(&self) -> &[AtomicContext] {
        &self.contexts
    }

    pub fn is_empty(&self) -> bool {
        self.contexts.is_empty()
    }
}

/// Change set `⟨P_c, A_c, t_c⟩` plus the observed bindings it was computed
/// from.
///
/// `bindings` is the full (non-static) snapshot at `timestamp`, so the next
/// difference can detect removals and value changes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextualSituation {
    pub changed_parameters: Vec<String>,
    pub changed_attributes: Vec<AttrPath>,
    /// Subjects present before and absent now. Never part of `P_c`.
    pub removed_parameters: Vec<String>,
    pub timestamp: LogicalTime,
    pub bindings: Vec<AtomicContext>,
}

impl Default for ContextualSituation {
    fn default() -> Self {
        Self::empty()
    }
}

impl ContextualSituation {
    pub fn empty() -> Self {
        ContextualSituation {
            changed_parameters: Vec::new(),
            changed_attributes: Vec::new(),
            removed_parameters: Vec::new(),
            timestamp: LogicalTime::NEVER,
            bindings: Vec::new(),
        }
    }

    /// Difference of an observation against this situation. Returns `None`
    /// when the observation is not newer or nothing changed.
    pub fn observe(&self, next: &ContextVector) -> Option<ContextualSituation> {
        let bindings: Vec<AtomicContext> = next
            .contexts()
            .iter()
            .filter(|c| c.temporality != Temporality::Static)
            .cloned()
            .collect();
        difference(&bindings, next.timestamp(), self)
    }

    /// Folds `next` into the running situation; an unchanged observation
    /// leaves `self` as is.
    pub fn advance(&self, next: &ContextVector) -> Result<ContextualSituation, ContextError> {
        if self.timestamp != LogicalTime::NEVER && next.timestamp() < self.timestamp {
            return Err(ContextError::NonMonotone {
                earlier: self.timestamp,
                later: next.timestamp(),
            });
        }
        Ok(self.observe(next).unwrap_or_else(|| self.clone()))
    }

    pub fn is_unchanged(&self) -> bool {
        self.changed_parameters.is_empty() && self.changed_attributes.is_empty()
    }

    pub fn binding(&self, path: &AttrPath) -> Option<&AtomicContext> {
        self.bindings.iter().find(|c| c.path() == *path)
    }

    /// `P_c` together with the subjects of `A_c`, in binding order.
    pub fn involved_parameters(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for c in &self.bindings {
            let s = c.subject();
            let hit = self.changed_parameters.iter().any(|p| p == s)
                || self.changed_attributes.iter().any(|a| a.subject() == s);
            if hit && !out.iter().any(|p| p == s) {
                out.push(s.to_string());
            }
        }
        out
    }

    /// `A_c` together with the bound attributes of `P_c` members.
    pub fn involved_attributes(&self) -> Vec<AttrPath> {
        self.bindings
            .iter()
            .filter(|c| {
                self.changed_parameters.iter().any(|p| p == c.subject())
                    || self.changed_attributes.contains(&c.path())
            })
            .map(AtomicContext::path)
            .collect()
    }

    /// Values of [`Self::involved_attributes`], same order.
    pub fn involved_values(&self) -> Vec<Scalar> {
        self.involved_attributes()
            .iter()
            .filter_map(|p| self.binding(p).map(|c| c.value.clone()))
            .collect()
    }

    /// Keeps only the bindings inside `scope` and recomputes nothing else;
    /// change sets are filtered the same way.
    pub fn restrict(&self, scope: &ScopeFilter) -> ContextualSituation {
        ContextualSituation {
            changed_parameters: self
                .changed_parameters
                .iter()
                .filter(|p| scope.relevant_parameters.contains(*p))
                .cloned()
                .collect(),
            changed_attributes: self
                .changed_attributes
                .iter()
                .filter(|a| scope.admits(a))
                .cloned()
                .collect(),
            removed_parameters: self
                .removed_parameters
                .iter()
                .filter(|p| scope.relevant_parameters.contains(*p))
                .cloned()
                .collect(),
            timestamp: self.timestamp,
            bindings: self
                .bindings
                .iter()
                .filter(|c| scope.admits(&c.path()))
                .cloned()
                .collect(),
        }
    }
}

impl fmt::Display for ContextualSituation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[⟨")?;
        write_joined(f, &self.involved_parameters())?;
        f.write_str("⟩⟨")?;
        write_joined(f, &self.involved_attributes())?;
        write!(f, "⟩⟨{}⟩]", self.timestamp)
    }
}

fn write_joined<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}

/// Core difference between a snapshot and a previous situation.
fn difference(
    bindings: &[AtomicContext],
    timestamp: LogicalTime,
    old: &ContextualSituation,
) -> Option<ContextualSituation> {
    if timestamp <= old.timestamp {
        return None;
    }
    let old_subjects: BTreeSet<&str> = old.bindings.iter().map(AtomicContext::subject).collect();
    let new_subjects: BTreeSet<&str> = bindings.iter().map(AtomicContext::subject).collect();

    let mut changed_parameters: Vec<String> = Vec::new();
    let mut changed_attributes = Vec::new();
    for c in bindings {
        let subject = c.subject();
        if !old_subjects.contains(subject) {
            if !changed_parameters.iter().any(|p| p == subject) {
                changed_parameters.push(subject.to_string());
            }
            continue;
        }
        let path = c.path();
        let unchanged = old
            .bindings
            .iter()
            .any(|o| o.path() == path && o.same_payload(c));
        if !unchanged {
            changed_attributes.push(path);
        }
    }
    if changed_parameters.is_empty() && changed_attributes.is_empty() {
        return None;
    }
    let mut removed_parameters: Vec<String> = Vec::new();
    for o in &old.bindings {
        let s = o.subject();
        if !new_subjects.contains(s) && !removed_parameters.iter().any(|p| p == s) {
            removed_parameters.push(s.to_string());
        }
    }
    Some(ContextualSituation {
        changed_parameters,
        changed_attributes,
        removed_parameters,
        timestamp,
        bindings: bindings.to_vec(),
    })
}

/// Per-activity restriction of a contextual situation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextState {
    pub activity: ActivityId,
    pub situation: ContextualSituation,
}

impl ContextState {
    /// A state that has never observed anything.
    pub fn empty(activity: ActivityId) -> Self {
        ContextState {
            activity,
            situation: ContextualSituation::empty(),
        }
    }

    pub fn timestamp(&self) -> LogicalTime {
        self.situation.timestamp
    }

    /// The same snapshot with every bound context counted as changed.
    pub fn full_view(&self) -> ContextState {
        let mut parameters: Vec<String> = Vec::new();
        for c in &self.situation.bindings {
            if !parameters.iter().any(|p| p == c.subject()) {
                parameters.push(c.subject().to_string());
            }
        }
        ContextState {
            activity: self.activity.clone(),
            situation: ContextualSituation {
                changed_parameters: parameters,
                changed_attributes: Vec::new(),
                removed_parameters: self.situation.removed_parameters.clone(),
                timestamp: self.situation.timestamp,
                bindings: self.situation.bindings.clone(),
            },
        }
    }
}

impl fmt::Display for ContextState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.situation)
    }
}

/// Contexts an activity is sensitive to. A binding is in scope when its
/// subject is a relevant parameter or its qualified attribute is listed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScopeFilter {
    pub activity: ActivityId,
    #[cfg_attr(feature = "serde", serde(default))]
    pub relevant_parameters: BTreeSet<String>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub relevant_attributes: BTreeSet<AttrPath>,
}

impl ScopeFilter {
    pub fn new(
        activity: ActivityId,
        parameters: impl IntoIterator<Item = String>,
        attributes: impl IntoIterator<Item = AttrPath>,
    ) -> Self {
        ScopeFilter {
            activity,
            relevant_parameters: parameters.into_iter().collect(),
            relevant_attributes: attributes.into_iter().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.relevant_parameters.is_empty() && self.relevant_attributes.is_empty()
    }

    pub fn admits(&self, path: &AttrPath) -> bool {
        self.relevant_attributes.contains(path) || self.relevant_parameters.contains(path.subject())
    }
}

/// `S_c := CS ~ S_a`.
///
/// Returns `old` unchanged when `new` is not later than `old` or when no
/// parameter was added and no attribute added or changed. Otherwise the
/// result carries `new`'s timestamp and bindings.
pub fn diff(new: &ContextualSituation, old: &ContextState) -> ContextState {
    match difference(&new.bindings, new.timestamp, &old.situation) {
        Some(situation) => ContextState {
            activity: old.activity.clone(),
            situation,
        },
        None => old.clone(),
    }
}

/// Restricts `cs` to the activity's scope and differences it against the
/// stored state.
pub fn catch_context(
    cs: &ContextualSituation,
    state: &ContextState,
    scope: &ScopeFilter,
) -> Result<ContextState, ContextError> {
    if scope.activity != state.activity {
        return Err(ContextError::ScopeMismatch {
            scope: scope.activity.clone(),
            state: state.activity.clone(),
        });
    }
    Ok(diff(&cs.restrict(scope), state))
}
