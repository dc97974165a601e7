//! A family of generated models: activity `A{i}` listens to `P{i}.Status`
//! through state node `S{i}`. "Bad" is the anticipated deviation and
//! selects fragment `fix{i}`; "Good" is the ideal value.

#![allow(dead_code)]

use std::collections::BTreeSet;

use cbpmn_core::fragments::RepoEntry;
use cbpmn_core::graph::{AttrSource, AttributeNode, EntityNode, GreenLink, StateNodeDef};
use cbpmn_core::process::{ActivityTemplate, EventBinding, FragmentRef};
use cbpmn_core::{
    Action, ActivityChain, AdaptationRule, AtomicContext, AttrPath, CbpmnModel, ContextGraph,
    ContextVector, FragmentRepository, LogicalTime, ProcessFragment, Scalar, Scenario,
};

pub fn status(i: usize) -> AttrPath {
    AttrPath::from(format!("P{i}.Status").as_str())
}

pub fn graph(n: usize, delays: &[u32]) -> ContextGraph {
    let mut g = ContextGraph::default();
    for i in 0..n {
        let entity = format!("P{i}");
        g.entities.push(EntityNode {
            id: entity.clone(),
            category: Default::default(),
        });
        g.attributes.push(AttributeNode {
            path: status(i),
            entity: entity.clone(),
            temporality: Default::default(),
            source: AttrSource::Direct,
        });
        g.green_links.insert(
            status(i),
            GreenLink {
                slot: format!("v_P{i}"),
                delay: delays.get(i).copied().unwrap_or(0),
            },
        );
        g.state_nodes.push(StateNodeDef {
            id: format!("S{i}").as_str().into(),
            parameters: vec![(entity.clone(), entity)],
            attributes: vec![(status(i), status(i))],
            composition: None,
        });
    }
    g.fill_composite_nodes();
    g
}

pub fn activity(i: usize, with_event: bool) -> ActivityTemplate {
    let mut t = ActivityTemplate::new(&format!("A{i}"), &format!("G{i}"));
    t.output_data = [format!("d{i}")].into();
    if with_event {
        t.event = Some(EventBinding {
            state_node: format!("S{i}").as_str().into(),
            parameters: [format!("P{i}")].into(),
            attributes: BTreeSet::new(),
        });
    }
    t
}

/// `n` activities; `actions[i]` is the rule bound to `A{i}` (none when
/// shorter). Fragment-taking actions use the selected fragment; the others
/// see no selection.
pub fn model(n: usize, events: &[bool], delays: &[u32], actions: &[Action]) -> CbpmnModel {
    let templates: Vec<ActivityTemplate> = (0..n)
        .map(|i| activity(i, events.get(i).copied().unwrap_or(true)))
        .collect();
    let subgoals = (0..n)
        .map(|i| {
            // A rule without a fragment only fires when nothing is selected.
            let takes_fragment = actions.get(i).is_none_or(|a| a.fragment_ref().is_some());
            let entries = takes_fragment.then(|| RepoEntry {
                pattern: format!("P{i}.Status = Bad").parse().unwrap(),
                fragment: format!("fix{i}").as_str().into(),
            });
            (
                format!("G{i}").as_str().into(),
                entries.into_iter().collect(),
            )
        })
        .collect();
    let fragments = (0..n)
        .map(|i| ProcessFragment {
            id: format!("fix{i}").as_str().into(),
            activities: vec![ActivityTemplate::new(&format!("Fix{i}"), &format!("G{i}"))],
        })
        .collect();
    let rules = actions
        .iter()
        .enumerate()
        .map(|(i, a)| AdaptationRule {
            activity: Some(format!("A{i}").as_str().into()),
            value_pattern: format!("P{i}.Status = Bad").parse().unwrap(),
            fragment_pattern: a
                .fragment_ref()
                .is_some()
                .then(|| format!("fix{i}").as_str().into()),
            action: a.clone(),
            declaration_order: i + 1,
        })
        .collect();
    CbpmnModel {
        graph: graph(n, delays),
        chain: ActivityChain::from_templates(&templates).unwrap(),
        repository: FragmentRepository::new(subgoals, fragments).unwrap(),
        rules,
        ideal: Some(snapshot(0, &vec![false; n])),
        gateway_branches: 0,
    }
}

/// `P{i}.Status` is Bad where `bad[i]`, Good elsewhere.
pub fn snapshot(time: i64, bad: &[bool]) -> ContextVector {
    ContextVector::new(
        LogicalTime(time),
        bad.iter()
            .enumerate()
            .map(|(i, b)| {
                AtomicContext::new(
                    format!("P{i}"),
                    "Status",
                    Scalar::text(if *b { "Bad" } else { "Good" }),
                )
            })
            .collect(),
    )
    .unwrap()
}

pub fn scenario(snapshots: Vec<ContextVector>) -> Scenario {
    Scenario::new(snapshots).unwrap()
}

pub fn add_after() -> Action {
    Action::AddAfter(FragmentRef::Selected)
}
