use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::chain::ActivityChain;
use super::engine::AdaptationTrace;
use super::rules::{AdaptationRule, FragmentRef};
use crate::context::{ContextVector, ScopeFilter};
use crate::fragments::FragmentRepository;
use crate::graph::{ContextGraph, ValidationReport};
use crate::ident::{ActivityId, AttrPath, StateNodeId};

/// Contextual event in front of an activity: the state node it reads and
/// the contexts it listens to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventBinding {
    pub state_node: StateNodeId,
    pub parameters: BTreeSet<String>,
    pub attributes: BTreeSet<AttrPath>,
}

impl EventBinding {
    pub fn scope(&self, activity: &ActivityId) -> ScopeFilter {
        ScopeFilter {
            activity: activity.clone(),
            relevant_parameters: self.parameters.clone(),
            relevant_attributes: self.attributes.clone(),
        }
    }
}

/// Context graph, activity chain with contextual events, fragment
/// repository, adaptation rules and the ideal context assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct CbpmnModel {
    pub graph: ContextGraph,
    pub chain: ActivityChain,
    pub repository: FragmentRepository,
    pub rules: Vec<AdaptationRule>,
    /// Contexts under which the declared chain runs unchanged.
    pub ideal: Option<ContextVector>,
    /// Split branches of the declared process (control-flow complexity).
    pub gateway_branches: usize,
}

impl CbpmnModel {
    /// Same model with the chain a run ended with.
    pub fn adapted(&self, trace: &AdaptationTrace) -> CbpmnModel {
        CbpmnModel {
            chain: trace.final_chain.clone(),
            ..self.clone()
        }
    }

    /// Every structural problem of the model and its parts.
    pub fn validate(&self) -> ValidationReport {
        let mut r = self.graph.validate();
        if let Err(e) = self.chain.check_well_formed() {
            r.push("malformed-chain", format!("{e}"));
        }
        if self.chain.is_empty() {
            r.push("empty-chain", "the model declares no activity".into());
        }
        for node in self.chain.nodes() {
            if !self.repository.has_subgoal(node.sub_goal.as_str()) {
                r.push(
                    "unknown-subgoal",
                    format!(
                        "{} pursues sub-goal {} missing from the repository",
                        node.id, node.sub_goal
                    ),
                );
            }
            let Some(ev) = &node.event else { continue };
            if ev.parameters.is_empty() && ev.attributes.is_empty() {
                r.push(
                    "empty-scope",
                    format!("contextual event of {} has an empty scope", node.id),
                );
            }
            if self.graph.state_node(ev.state_node.as_str()).is_none() {
                r.push(
                    "unknown-state-node",
                    format!(
                        "contextual event of {} reads unknown state node {}",
                        node.id, ev.state_node
                    ),
                );
            }
        }
        for f in self.repository.fragments() {
            for a in &f.activities {
                if !self.repository.has_subgoal(a.sub_goal.as_str()) {
                    r.push(
                        "unknown-subgoal",
                        format!(
                            "fragment {} activity {} pursues unknown sub-goal {}",
                            f.id, a.name, a.sub_goal
                        ),
                    );
                }
            }
        }
        for rule in &self.rules {
            if let Err(e) = rule.validate() {
                r.push("rule-pairing", format!("{e}"));
            }
            if let Some(a) = &rule.activity {
                if !self.chain.contains(a.as_str()) {
                    r.push(
                        "unknown-activity",
                        format!(
                            "rule {} is bound to unknown activity {a}",
                            rule.declaration_order
                        ),
                    );
                }
            }
            if let Some(f) = &rule.fragment_pattern {
                if self.repository.fragment(f.as_str()).is_none() {
                    r.push(
                        "unknown-fragment",
                        format!(
                            "rule {} expects undefined fragment {f}",
                            rule.declaration_order
                        ),
                    );
                }
            }
            rule.action.visit(&mut |a| {
                if let Some(FragmentRef::Named(f)) = a.fragment_ref() {
                    if self.repository.fragment(f.as_str()).is_none() {
                        r.push(
                            "unknown-fragment",
                            format!(
                                "rule {} inserts undefined fragment {f}",
                                rule.declaration_order
                            ),
                        );
                    }
                }
            });
        }
        r
    }
}
