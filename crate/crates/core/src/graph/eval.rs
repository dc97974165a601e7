//! Run-time evaluation: instantiate the sub-graph a context state touches,
//! bind observed values, run dependency rules to a fixpoint, and read off
//! the composite value of a state node.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{
    AttrSource, CompositeValue, Composition, ContextGraph, DependencyRule, GraphError,
    StateNodeDef, ValueExpr,
};
use crate::context::{AtomicContext, ContextState, Scalar};
use crate::ident::{AttrPath, StateNodeId};

/// `Val(a) ← (v, d)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimedValue {
    pub value: Scalar,
    /// Minutes; 0 when untimed.
    pub delay: u32,
}

impl TimedValue {
    pub fn untimed(value: Scalar) -> Self {
        TimedValue { value, delay: 0 }
    }

    pub fn timed(value: Scalar, delay: u32) -> Self {
        TimedValue { value, delay }
    }
}

/// Size of an instantiated sub-graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct InstanceStats {
    pub nodes: usize,
    pub edges: usize,
}

impl core::ops::AddAssign for InstanceStats {
    fn add_assign(&mut self, rhs: Self) {
        self.nodes += rhs.nodes;
        self.edges += rhs.edges;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SubgraphInstance {
    pub activated_state: Option<StateNodeId>,
    pub activated_entities: BTreeSet<String>,
    /// Attribute nodes (level 2), not the state's qualified names.
    pub activated_attributes: BTreeSet<AttrPath>,
    pub bound_values: BTreeMap<AttrPath, TimedValue>,
    pub stats: InstanceStats,
}

impl SubgraphInstance {
    pub fn is_empty(&self) -> bool {
        self.activated_state.is_none()
    }
}

impl ContextGraph {
    /// Activates the red/blue image of the state's involved contexts under
    /// the first state node that maps all of them.
    pub fn instantiate(&self, s: &ContextState) -> Result<SubgraphInstance, GraphError> {
        let params = s.situation.involved_parameters();
        let attrs = s.situation.involved_attributes();
        if params.is_empty() && attrs.is_empty() {
            return Ok(SubgraphInstance::default());
        }
        let covering = self.state_nodes.iter().find(|n| {
            params.iter().all(|p| n.entity_for(p).is_some())
                && attrs.iter().all(|a| n.node_for(a).is_some())
        });
        match covering {
            Some(node) => self.activate(node, &params, &attrs),
            None => {
                let unmapped = params
                    .iter()
                    .find(|p| self.state_nodes.iter().all(|n| n.entity_for(p).is_none()))
                    .cloned()
                    .or_else(|| {
                        attrs
                            .iter()
                            .find(|a| self.state_nodes.iter().all(|n| n.node_for(a).is_none()))
                            .map(|a| String::from(a.as_str()))
                    })
                    .unwrap_or_else(|| format!("{s} (no single state node covers it)"));
                Err(GraphError::UnknownContext(unmapped))
            }
        }
    }

    /// Like [`Self::instantiate`] but under a given state node.
    pub fn instantiate_at(
        &self,
        node: &StateNodeId,
        s: &ContextState,
    ) -> Result<SubgraphInstance, GraphError> {
        let def = self
            .state_node(node.as_str())
            .ok_or_else(|| GraphError::UnknownStateNode(node.clone()))?;
        let params = s.situation.involved_parameters();
        let attrs = s.situation.involved_attributes();
        if params.is_empty() && attrs.is_empty() {
            return Ok(SubgraphInstance::default());
        }
        if let Some(p) = params.iter().find(|p| def.entity_for(p).is_none()) {
            return Err(GraphError::UnknownContext(p.clone()));
        }
        if let Some(a) = attrs.iter().find(|a| def.node_for(a).is_none()) {
            return Err(GraphError::UnknownContext(a.as_str().into()));
        }
        self.activate(def, &params, &attrs)
    }

    fn activate(
        &self,
        node: &StateNodeDef,
        params: &[String],
        attrs: &[AttrPath],
    ) -> Result<SubgraphInstance, GraphError> {
        let entities: BTreeSet<String> = params
            .iter()
            .filter_map(|p| node.entity_for(p))
            .map(String::from)
            .collect();
        let attributes: BTreeSet<AttrPath> = attrs
            .iter()
            .filter_map(|a| node.node_for(a))
            .cloned()
            .collect();
        let mut inst = SubgraphInstance {
            activated_state: Some(node.id.clone()),
            activated_entities: entities,
            activated_attributes: attributes,
            bound_values: BTreeMap::new(),
            stats: InstanceStats::default(),
        };
        inst.stats = self.stats_of(&inst);
        Ok(inst)
    }

    /// Node and edge counts of an instance: each attribute brings its atomic
    /// slot, the state node brings its composite slot. Edges are red, blue
    /// and green links, plus relations and dependency arcs inside the
    /// activated part.
    pub fn stats_of(&self, inst: &SubgraphInstance) -> InstanceStats {
        if inst.is_empty() {
            return InstanceStats::default();
        }
        let e = inst.activated_entities.len();
        let a = inst.activated_attributes.len();
        let relations = self
            .relations
            .iter()
            .filter(|r| {
                inst.activated_entities.contains(&r.from) && inst.activated_entities.contains(&r.to)
            })
            .count();
        let dependencies: usize = self
            .rules
            .iter()
            .filter(|r| inst.activated_attributes.contains(&r.target))
            .map(|r| {
                r.antecedent
                    .iter()
                    .filter(|c| inst.activated_attributes.contains(&c.attribute))
                    .count()
            })
            .sum();
        InstanceStats {
            nodes: e + 2 * a + 2,
            edges: e + 2 * a + relations + dependencies,
        }
    }

    /// Maps a snapshot's bindings to attribute nodes through `node`'s blue
    /// links, timing each with its green-link delay.
    pub fn observations(
        &self,
        node: &StateNodeDef,
        bindings: &[AtomicContext],
    ) -> BTreeMap<AttrPath, TimedValue> {
        bindings
            .iter()
            .filter_map(|c| {
                let target = node.node_for(&c.path())?;
                let delay = self.green_links.get(target).map_or(0, |g| g.delay);
                Some((target.clone(), TimedValue::timed(c.value.clone(), delay)))
            })
            .collect()
    }

    /// Binds every activated direct attribute from `observations`. Derived
    /// attributes stay unbound until a rule computes them.
    pub fn assign_values(
        &self,
        inst: &SubgraphInstance,
        observations: &BTreeMap<AttrPath, TimedValue>,
    ) -> Result<SubgraphInstance, GraphError> {
        let mut out = inst.clone();
        for a in &inst.activated_attributes {
            if self
                .attribute(a)
                .is_some_and(|n| n.source == AttrSource::Derived)
            {
                continue;
            }
            let v = observations
                .get(a)
                .ok_or_else(|| GraphError::UnobservedAttribute(a.clone()))?;
            out.bound_values.insert(a.clone(), v.clone());
        }
        Ok(out)
    }

    /// Fires `rules` in synchronous passes until nothing changes. Each pass
    /// reads the bindings left by the previous one, so the result does not
    /// depend on rule order. A rule writes only activated attributes; its
    /// value inherits the largest delay among the antecedents.
    pub fn apply_dependencies(
        &self,
        inst: &SubgraphInstance,
        rules: &[DependencyRule],
    ) -> Result<SubgraphInstance, GraphError> {
        let mut out = inst.clone();
        let cap = rules.len() * inst.activated_attributes.len() + 1;
        for _ in 0..cap {
            let mut writes: BTreeMap<&AttrPath, TimedValue> = BTreeMap::new();
            for rule in rules {
                if !out.activated_attributes.contains(&rule.target) {
                    continue;
                }
                let Some(delay) = antecedent_delay(rule, &out.bound_values) else {
                    continue;
                };
                let write = TimedValue::timed(rule.value.clone(), delay);
                match writes.get_mut(&rule.target) {
                    Some(prev) if prev.value != write.value => {
                        return Err(GraphError::DependencyConflict {
                            target: rule.target.clone(),
                            first: prev.value.clone(),
                            second: write.value,
                        });
                    }
                    Some(prev) => prev.delay = prev.delay.max(write.delay),
                    None => {
                        writes.insert(&rule.target, write);
                    }
                }
            }
            let mut changed = false;
            for (target, v) in writes {
                if out.bound_values.get(target) != Some(&v) {
                    out.bound_values.insert(target.clone(), v);
                    changed = true;
                }
            }
            if !changed {
                return Ok(out);
            }
        }
        Err(GraphError::DependencyCycle { passes: cap })
    }

    /// Reads the composite value of `node` from an instance's bindings.
    pub fn compose_value(
        &self,
        inst: &SubgraphInstance,
        node: &StateNodeDef,
    ) -> Result<CompositeValue, GraphError> {
        let mut max_delay = 0;
        let expr = compose(&node.effective_composition(), node, inst, &mut max_delay)?;
        Ok(CompositeValue { expr, max_delay })
    }
}

/// `Some(max delay)` when every condition holds on a bound value.
fn antecedent_delay(rule: &DependencyRule, bound: &BTreeMap<AttrPath, TimedValue>) -> Option<u32> {
    let mut delay = 0;
    for c in &rule.antecedent {
        let v = bound.get(&c.attribute)?;
        if !c.connector.holds(&v.value, &c.value) {
            return None;
        }
        delay = delay.max(v.delay);
    }
    Some(delay)
}

fn compose(
    c: &Composition,
    node: &StateNodeDef,
    inst: &SubgraphInstance,
    max_delay: &mut u32,
) -> Result<ValueExpr, GraphError> {
    let children = |xs: &[Composition], max_delay: &mut u32| {
        xs.iter()
            .map(|x| compose(x, node, inst, max_delay))
            .collect::<Result<Vec<_>, _>>()
    };
    Ok(match c {
        Composition::Attr(a) => {
            let v = node
                .node_for(a)
                .and_then(|n| inst.bound_values.get(n))
                .ok_or_else(|| GraphError::IncompleteBinding(a.clone()))?;
            *max_delay = (*max_delay).max(v.delay);
            ValueExpr::Pair {
                attribute: a.clone(),
                value: v.value.clone(),
            }
        }
        Composition::And(xs) => ValueExpr::And(children(xs, max_delay)?),
        Composition::Or(xs) => ValueExpr::Or(children(xs, max_delay)?),
    })
}
