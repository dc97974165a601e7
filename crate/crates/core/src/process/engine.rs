//! Instance execution: observe contexts, evaluate contextual events and
//! adapt the chain before each activity runs.
//!
//! The engine walks the chain on a logical clock. Before an activity with a
//! contextual event executes, the event is evaluated against every
//! observation due so far. A change in the activity's scope runs the graph
//! pipeline, selects a fragment and a rule, and rewrites the chain. A
//! composite value carrying a delay postpones the action until the clock
//! reaches it; the target activity waits for it.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use super::chain::{ActivityChain, AttributeKind, ChainError, Position, Slot};
use super::model::{CbpmnModel, EventBinding};
use super::rules::{select_rule, Action, FragmentRef, StepTarget};
use crate::context::{
    catch_context, ContextError, ContextState, ContextVector, ContextualSituation, LogicalTime,
};
use crate::fragments::{ProcessFragment, RepoError};
use crate::graph::{CompositeValue, GraphError, InstanceStats};
use crate::ident::{ActivityId, FragmentId};

/// How many fragment insertions may nest below a declared activity.
pub const MAX_INSERTION_DEPTH: u8 = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("scenario: {0}")]
    Scenario(ContextError),
    #[error("{activity}: {source}")]
    Context {
        activity: ActivityId,
        source: ContextError,
    },
    #[error("{activity}: {source}")]
    Graph {
        activity: ActivityId,
        source: GraphError,
    },
    #[error("{activity}: {source}")]
    Repository {
        activity: ActivityId,
        source: RepoError,
    },
    #[error("{activity}: {source}")]
    Chain {
        activity: ActivityId,
        source: ChainError,
    },
    #[error("{activity}: rule {rule} needs a selected fragment but none was selected")]
    NoSelectedFragment { activity: ActivityId, rule: usize },
    #[error("{activity}: unknown-fragment {fragment}")]
    UnknownFragment {
        activity: ActivityId,
        fragment: FragmentId,
    },
}

/// Context observations ordered by strictly increasing timestamp.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scenario {
    vectors: Vec<ContextVector>,
}

impl Scenario {
    pub fn new(vectors: Vec<ContextVector>) -> Result<Self, ContextError> {
        for w in vectors.windows(2) {
            if w[1].timestamp() <= w[0].timestamp() {
                return Err(ContextError::NonMonotone {
                    earlier: w[0].timestamp(),
                    later: w[1].timestamp(),
                });
            }
        }
        Ok(Scenario { vectors })
    }

    pub fn vectors(&self) -> &[ContextVector] {
        &self.vectors
    }

    pub fn start(&self) -> LogicalTime {
        self.vectors
            .first()
            .map_or(LogicalTime(0), |v| v.timestamp())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Applied,
    Deferred {
        until: LogicalTime,
    },
    DeferredApplied,
    /// A deferred action whose target left the chain or already ran.
    Expired,
    /// No rule anticipated the situation.
    NoChange,
    /// The value equals the ideal one; nothing to adapt.
    Ideal,
    /// Would nest fragments deeper than [`MAX_INSERTION_DEPTH`] or move an
    /// activity that already ran.
    Refused,
}

impl Outcome {
    pub fn name(&self) -> &'static str {
        match self {
            Outcome::Applied => "applied",
            Outcome::Deferred { .. } => "deferred",
            Outcome::DeferredApplied => "deferred-applied",
            Outcome::Expired => "expired",
            Outcome::NoChange => "no-change",
            Outcome::Ideal => "ideal",
            Outcome::Refused => "refused",
        }
    }

    /// Whether the chain was rewritten.
    pub fn changed_chain(&self) -> bool {
        matches!(self, Outcome::Applied | Outcome::DeferredApplied)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub at: LogicalTime,
    pub activity: ActivityId,
    pub value: Option<CompositeValue>,
    pub fragment: Option<FragmentId>,
    pub action: Option<Action>,
    pub outcome: Outcome,
    pub inserted: Vec<ActivityId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptationTrace {
    pub entries: Vec<TraceEntry>,
    pub execution_order: Vec<ActivityId>,
    pub final_chain: ActivityChain,
    /// Sum of the instantiated subgraph sizes.
    pub stats: InstanceStats,
    pub warnings: Vec<String>,
}

impl AdaptationTrace {
    /// Entries that rewrote the chain.
    pub fn adaptations(&self) -> impl Iterator<Item = &TraceEntry> {
        self.entries.iter().filter(|e| e.outcome.changed_chain())
    }

    pub fn end_time(&self) -> Option<LogicalTime> {
        self.entries.last().map(|e| e.at)
    }
}

#[derive(Debug, Clone)]
struct Pending {
    until: LogicalTime,
    activity: ActivityId,
    value: CompositeValue,
    fragment: Option<FragmentId>,
    rule: usize,
    action: Action,
}

struct Run<'m> {
    model: &'m CbpmnModel,
    chain: ActivityChain,
    clock: LogicalTime,
    executed: BTreeSet<ActivityId>,
    depth: BTreeMap<ActivityId, u8>,
    trace: AdaptationTrace,
}

/// Executes one process instance against a scenario.
pub fn run_instance(
    model: &CbpmnModel,
    scenario: &Scenario,
) -> Result<AdaptationTrace, EngineError> {
    let mut run = Run {
        model,
        chain: model.chain.clone(),
        clock: scenario.start(),
        executed: BTreeSet::new(),
        depth: BTreeMap::new(),
        trace: AdaptationTrace {
            entries: Vec::new(),
            execution_order: Vec::new(),
            final_chain: model.chain.clone(),
            stats: InstanceStats::default(),
            warnings: Vec::new(),
        },
    };
    let mut cs = ContextualSituation::empty();
    let mut due = 0;
    let mut pending: Vec<Pending> = Vec::new();
    let mut states: BTreeMap<ActivityId, ContextState> = BTreeMap::new();
    let mut evaluated: BTreeMap<ActivityId, LogicalTime> = BTreeMap::new();
    let vectors = scenario.vectors();

    loop {
        while due < vectors.len() && vectors[due].timestamp() <= run.clock {
            cs = cs.advance(&vectors[due]).map_err(EngineError::Scenario)?;
            due += 1;
        }

        let mut i = 0;
        while i < pending.len() {
            if pending[i].until > run.clock {
                i += 1;
                continue;
            }
            let p = pending.remove(i);
            run.apply_deferred(p)?;
        }

        let Some(next) = run
            .chain
            .order()
            .into_iter()
            .find(|a| !run.executed.contains(a))
        else {
            break;
        };

        if let Some(wait) = pending
            .iter()
            .filter(|p| p.activity == next)
            .map(|p| p.until)
            .min()
        {
            run.clock = wait;
            continue;
        }

        let node = run
            .chain
            .get(next.as_str())
            .expect("ordered id is in the chain");
        if let Some(ev) = node.event.clone() {
            if evaluated.get(&next) != Some(&cs.timestamp) {
                evaluated.insert(next.clone(), cs.timestamp);
                let old = states
                    .get(&next)
                    .cloned()
                    .unwrap_or_else(|| ContextState::empty(next.clone()));
                let state = catch_context(&cs, &old, &ev.scope(&next)).map_err(|source| {
                    EngineError::Context {
                        activity: next.clone(),
                        source,
                    }
                })?;
                if state != old {
                    states.insert(next.clone(), state.clone());
                    if let Some(p) = run.evaluate(&next, &ev, &state)? {
                        pending.push(p);
                    }
                    continue;
                }
            }
        }

        let duration = node.duration;
        run.executed.insert(next.clone());
        run.trace.execution_order.push(next);
        run.clock = run.clock.plus(duration);
    }

    for p in pending {
        run.expire(p);
    }
    run.trace.final_chain = run.chain;
    Ok(run.trace)
}

impl Run<'_> {
    fn warn(&mut self, message: String) {
        log::warn!("{message}");
        self.trace.warnings.push(message);
    }

    /// Runs the graph pipeline for `state` under the event's state node.
    fn composite(
        &self,
        ev: &EventBinding,
        state: &ContextState,
    ) -> Result<(CompositeValue, InstanceStats), GraphError> {
        let graph = &self.model.graph;
        let def = graph
            .state_node(ev.state_node.as_str())
            .ok_or_else(|| GraphError::UnknownStateNode(ev.state_node.clone()))?;
        let view = state.full_view();
        let inst = graph.instantiate_at(&ev.state_node, &view)?;
        let obs = graph.observations(def, &view.situation.bindings);
        let inst = graph.assign_values(&inst, &obs)?;
        let inst = graph.apply_dependencies(&inst, &graph.rules)?;
        let stats = inst.stats;
        let value = graph.compose_value(&inst, def)?;
        Ok((value, stats))
    }

    fn ideal_value(&self, activity: &ActivityId, ev: &EventBinding) -> Option<CompositeValue> {
        let ideal = self.model.ideal.as_ref()?;
        let cs = ContextualSituation::empty().advance(ideal).ok()?;
        let state = catch_context(
            &cs,
            &ContextState::empty(activity.clone()),
            &ev.scope(activity),
        )
        .ok()?;
        self.composite(ev, &state).ok().map(|(v, _)| v)
    }

    /// Evaluates the contextual event of `activity`. A deferred action is
    /// returned for queueing.
    fn evaluate(
        &mut self,
        activity: &ActivityId,
        ev: &EventBinding,
        state: &ContextState,
    ) -> Result<Option<Pending>, EngineError> {
        let (value, stats) = self
            .composite(ev, state)
            .map_err(|source| EngineError::Graph {
                activity: activity.clone(),
                source,
            })?;
        self.trace.stats += stats;
        let mut entry = TraceEntry {
            at: self.clock,
            activity: activity.clone(),
            value: Some(value.clone()),
            fragment: None,
            action: None,
            outcome: Outcome::NoChange,
            inserted: Vec::new(),
        };
        if self
            .ideal_value(activity, ev)
            .is_some_and(|ideal| value.matches(&ideal.expr))
        {
            entry.outcome = Outcome::Ideal;
            self.trace.entries.push(entry);
            return Ok(None);
        }

        let sub_goal = self
            .chain
            .get(activity.as_str())
            .expect("evaluated activity is linked")
            .sub_goal
            .clone();
        let selected = self
            .model
            .repository
            .throw_activity(&sub_goal, &value)
            .map_err(|source| EngineError::Repository {
                activity: activity.clone(),
                source,
            })?;
        let fragment = selected.fragment.map(|f| f.id.clone());
        entry.fragment = fragment.clone();

        let Some(rule) = select_rule(&self.model.rules, activity, &value, fragment.as_ref()) else {
            self.warn(format!(
                "{activity}: no rule for [{}]; process kept",
                value.expr
            ));
            self.trace.entries.push(entry);
            return Ok(None);
        };
        entry.action = Some(rule.action.clone());

        if value.is_timed() && rule.action.is_deferrable() {
            let until = self.clock.plus(value.max_delay);
            entry.outcome = Outcome::Deferred { until };
            self.trace.entries.push(entry);
            return Ok(Some(Pending {
                until,
                activity: activity.clone(),
                value,
                fragment,
                rule: rule.declaration_order,
                action: rule.action.clone(),
            }));
        }

        let rule_no = rule.declaration_order;
        let action = rule.action.clone();
        entry.outcome = match self.apply(activity, &action, fragment.as_ref(), rule_no)? {
            Some(inserted) => {
                entry.inserted = inserted;
                Outcome::Applied
            }
            None => Outcome::Refused,
        };
        self.trace.entries.push(entry);
        Ok(None)
    }

    fn apply_deferred(&mut self, p: Pending) -> Result<(), EngineError> {
        if !self.chain.contains(p.activity.as_str()) || self.executed.contains(&p.activity) {
            self.expire(p);
            return Ok(());
        }
        let outcome = match self.apply(&p.activity, &p.action, p.fragment.as_ref(), p.rule)? {
            Some(inserted) => (Outcome::DeferredApplied, inserted),
            None => (Outcome::Refused, Vec::new()),
        };
        self.trace.entries.push(TraceEntry {
            at: self.clock,
            activity: p.activity,
            value: Some(p.value),
            fragment: p.fragment,
            action: Some(p.action),
            outcome: outcome.0,
            inserted: outcome.1,
        });
        Ok(())
    }

    fn expire(&mut self, p: Pending) {
        self.warn(format!("{}: deferred {} expired", p.activity, p.action));
        self.trace.entries.push(TraceEntry {
            at: self.clock,
            activity: p.activity,
            value: Some(p.value),
            fragment: p.fragment,
            action: Some(p.action),
            outcome: Outcome::Expired,
            inserted: Vec::new(),
        });
    }

    fn resolve(
        &self,
        activity: &ActivityId,
        r: &FragmentRef,
        selected: Option<&FragmentId>,
        rule: usize,
    ) -> Result<&'_ ProcessFragment, EngineError> {
        let id = match r {
            FragmentRef::Selected => selected.ok_or_else(|| EngineError::NoSelectedFragment {
                activity: activity.clone(),
                rule,
            })?,
            FragmentRef::Named(id) => id,
        };
        self.model
            .repository
            .fragment(id.as_str())
            .ok_or_else(|| EngineError::UnknownFragment {
                activity: activity.clone(),
                fragment: id.clone(),
            })
    }

    /// Applies `action` to `target`. `Ok(None)` means the action was refused
    /// and the chain is unchanged.
    fn apply(
        &mut self,
        target: &ActivityId,
        action: &Action,
        selected: Option<&FragmentId>,
        rule: usize,
    ) -> Result<Option<Vec<ActivityId>>, EngineError> {
        if !self.admissible(target, action) {
            self.warn(format!("{target}: {action} refused"));
            return Ok(None);
        }
        let mut inserted = Vec::new();
        self.apply_unchecked(target, action, selected, rule, &mut inserted)?;
        Ok(Some(inserted))
    }

    fn admissible(&self, target: &ActivityId, action: &Action) -> bool {
        let depth = self.depth.get(target).copied().unwrap_or(0);
        let mut ok = true;
        action.visit(&mut |a| match a {
            Action::AddBefore(_) | Action::AddAfter(_) | Action::ReplaceByFragment(_) => {
                ok &= depth < MAX_INSERTION_DEPTH;
            }
            Action::Reorder(perm) => {
                if let Ok(w) = self.chain.window_around(target) {
                    let slots = [Slot::Prev, Slot::Current, Slot::Next];
                    let kept: Vec<Slot> =
                        slots.into_iter().filter(|s| w.get(*s).is_some()).collect();
                    let moved: Vec<Slot> = perm
                        .0
                        .iter()
                        .copied()
                        .filter(|s| w.get(*s).is_some())
                        .collect();
                    for (i, s) in kept.iter().enumerate() {
                        let ran = w.get(*s).is_some_and(|id| self.executed.contains(id));
                        ok &= !ran || moved[i] == *s;
                    }
                }
            }
            _ => {}
        });
        ok
    }

    fn apply_unchecked(
        &mut self,
        target: &ActivityId,
        action: &Action,
        selected: Option<&FragmentId>,
        rule: usize,
        inserted: &mut Vec<ActivityId>,
    ) -> Result<(), EngineError> {
        let wrap = |source| EngineError::Chain {
            activity: target.clone(),
            source,
        };
        let depth = self.depth.get(target).copied().unwrap_or(0);
        let fresh = match action {
            Action::AddBefore(r) | Action::AddAfter(r) | Action::ReplaceByFragment(r) => {
                let templates = self.resolve(target, r, selected, rule)?.activities.clone();
                match action {
                    Action::AddBefore(_) => {
                        self.chain
                            .add_fragment(target, Position::Before, &templates)
                    }
                    Action::AddAfter(_) => {
                        self.chain.add_fragment(target, Position::After, &templates)
                    }
                    _ => self.chain.replace_activity(target, &templates),
                }
                .map_err(wrap)?
            }
            Action::ReplaceRole(v) => {
                self.chain
                    .replace_attribute(target, AttributeKind::Role, v)
                    .map_err(wrap)?;
                Vec::new()
            }
            Action::ReplaceMedium(v) => {
                self.chain
                    .replace_attribute(target, AttributeKind::Medium, v)
                    .map_err(wrap)?;
                Vec::new()
            }
            Action::Bypass => {
                self.chain.bypass(target).map_err(wrap)?;
                Vec::new()
            }
            Action::Reorder(perm) => {
                let w = self.chain.window_around(target).map_err(wrap)?;
                self.chain.reorder(&w, *perm).map_err(wrap)?;
                Vec::new()
            }
            Action::DataLevelChange(d) => {
                self.chain.data_level_change(target, d).map_err(wrap)?;
                Vec::new()
            }
            Action::Nested(steps) => {
                for s in steps {
                    let t = match &s.target {
                        StepTarget::Current => target.clone(),
                        StepTarget::Activity(a) => a.clone(),
                    };
                    self.apply_unchecked(&t, &s.action, selected, rule, inserted)?;
                }
                Vec::new()
            }
        };
        for id in &fresh {
            self.depth.insert(id.clone(), depth + 1);
        }
        inserted.extend(fresh);
        Ok(())
    }
}
