//! Model → net translation.
//!
//! Upper layer, per activity `i` in chain order:
//!
//! ```text
//! Start / INFO_{i-1} ──► Activity_i.task_1 ─► … ─► task_k ──► INFO_i / End
//!        │ (read)              ▲
//!        ▼                     │
//! ContextualSituation ─► catchContext_i ─► ContextualEvent_i ─► throwActivity_i ─► Returned_i
//! ```
//!
//! The lower layer mirrors the state node the event reads:
//! `PropagateState_i` moves the context state to `State_i`, `Mapping_i`
//! activates its entities, the shared `Attributes_k` and `Grab_value_l`
//! transitions produce atomic values, `Composition_i` joins them into
//! `VALUE_i` and `PropagateV_i` hands the composite back to the event.
//! Lower-layer places are shared between activities reading the same
//! entities, so tokens there carry the activity index and `Composition_i`
//! only takes its own.
//!
//! The contextual-situation token is borrowed by `catchContext_i` and given
//! back by the activity's last task, except after the last activity that
//! has an event. A single case token therefore ends alone on `End`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::net::{Color, InArc, Net, OutArc, OutExpr, PlaceId, Substitution};
use super::VerifyError;
use crate::ident::AttrPath;
use crate::process::CbpmnModel;

/// Tasks generated inside each substitution transition.
pub const DEFAULT_TASKS: usize = 3;

/// Token values on `ContextualEvent_i`.
pub const CE_STATE: u32 = 0;
pub const CE_VALUE: u32 = 1;

fn consume(place: PlaceId) -> InArc {
    InArc {
        place,
        pattern: None,
    }
}

fn produce(place: PlaceId) -> OutArc {
    OutArc {
        place,
        expr: OutExpr::Input(0),
    }
}

fn produce_const(place: PlaceId, v: u32) -> OutArc {
    OutArc {
        place,
        expr: OutExpr::Const(v),
    }
}

struct Layer1 {
    entity: BTreeMap<String, PlaceId>,
    entity_attrs: BTreeMap<String, Vec<AttrPath>>,
    attr: BTreeMap<AttrPath, PlaceId>,
    value: BTreeMap<AttrPath, PlaceId>,
}

/// Translates a valid model with [`DEFAULT_TASKS`] tasks per activity.
pub fn translate(model: &CbpmnModel) -> Result<Net, VerifyError> {
    translate_with(model, DEFAULT_TASKS)
}

pub fn translate_with(model: &CbpmnModel, tasks: usize) -> Result<Net, VerifyError> {
    let report = model.validate();
    if let Some(f) = report.findings.first() {
        return Err(VerifyError::InvalidModel(format!(
            "{} finding(s), first: {}: {}",
            report.findings.len(),
            f.code,
            f.message
        )));
    }
    if tasks == 0 {
        return Err(VerifyError::InvalidModel(
            "activities need at least one task".into(),
        ));
    }
    let graph = &model.graph;
    let order = model.chain.order();
    let nodes: Vec<_> = order
        .iter()
        .map(|id| model.chain.get(id.as_str()).expect("ordered id is linked"))
        .collect();

    // Attribute nodes each event's state node maps to, in chain order.
    let mut node_attrs: Vec<Vec<AttrPath>> = Vec::with_capacity(nodes.len());
    for n in &nodes {
        let attrs = match &n.event {
            Some(ev) => {
                let def = graph.state_node(ev.state_node.as_str()).ok_or_else(|| {
                    VerifyError::InvalidModel(format!("unknown state node {}", ev.state_node))
                })?;
                let mut v: Vec<AttrPath> = Vec::new();
                for (_, target) in &def.attributes {
                    if !v.contains(target) {
                        v.push(target.clone());
                    }
                }
                v
            }
            None => Vec::new(),
        };
        node_attrs.push(attrs);
    }

    let mut net = Net::new();
    let start = net.add_place("Start", Color::Start, "start event");
    let cs = net.add_place("ContextualSituation", Color::Cs, "contextual situation");

    let mut l1 = Layer1 {
        entity: BTreeMap::new(),
        entity_attrs: BTreeMap::new(),
        attr: BTreeMap::new(),
        value: BTreeMap::new(),
    };
    let mut entity_order: Vec<String> = Vec::new();
    for attrs in &node_attrs {
        for a in attrs {
            let entity = graph
                .attribute(a)
                .map(|n| n.entity.clone())
                .unwrap_or_else(|| a.subject().to_string());
            let list = l1.entity_attrs.entry(entity.clone()).or_default();
            if !entity_order.contains(&entity) {
                entity_order.push(entity.clone());
            }
            if !list.contains(a) {
                list.push(a.clone());
            }
        }
    }
    for (k, e) in entity_order.iter().enumerate() {
        let p = net.add_place(format!("Entity_{}", k + 1), Color::Entity, e.clone());
        l1.entity.insert(e.clone(), p);
    }
    let mut l = 0;
    for e in &entity_order {
        for a in &l1.entity_attrs[e] {
            l += 1;
            let ap = net.add_place(format!("A_{l}"), Color::Att, a.as_str());
            let vp = net.add_place(format!("value_{l}"), Color::Atomic, a.as_str());
            l1.attr.insert(a.clone(), ap);
            l1.value.insert(a.clone(), vp);
        }
    }
    for (k, e) in entity_order.iter().enumerate() {
        let outs = l1.entity_attrs[e]
            .iter()
            .map(|a| produce(l1.attr[a]))
            .collect();
        net.add_transition(
            format!("Attributes_{}", k + 1),
            vec![consume(l1.entity[e])],
            outs,
        )?;
    }
    let mut l = 0;
    for e in &entity_order {
        for a in &l1.entity_attrs[e] {
            l += 1;
            net.add_transition(
                format!("Grab_value_{l}"),
                vec![consume(l1.attr[a])],
                vec![produce(l1.value[a])],
            )?;
        }
    }

    let last_event = nodes.iter().rposition(|n| n.event.is_some());
    let mut control = start;
    for (idx, node) in nodes.iter().enumerate() {
        let i = idx + 1;
        let mut first_inputs = vec![consume(control)];
        if node.event.is_some() {
            let ce = net.add_place(format!("ContextualEvent_{i}"), Color::Ce, node.id.as_str());
            let ret = net.add_place(format!("Returned_{i}"), Color::Return, node.id.as_str());
            let state = net.add_place(format!("State_{i}"), Color::State, node.id.as_str());
            let value = net.add_place(format!("VALUE_{i}"), Color::Composite, node.id.as_str());
            net.add_transition(
                format!("catchContext_{i}"),
                vec![consume(control), consume(cs)],
                vec![produce(control), produce_const(ce, CE_STATE)],
            )?;
            net.add_transition(
                format!("PropagateState_{i}"),
                vec![InArc {
                    place: ce,
                    pattern: Some(CE_STATE),
                }],
                vec![produce(state)],
            )?;
            let mut entities: Vec<&String> = Vec::new();
            for a in &node_attrs[idx] {
                let e = entity_order
                    .iter()
                    .find(|e| l1.entity_attrs[*e].contains(a))
                    .expect("attribute was assigned an entity");
                if !entities.contains(&e) {
                    entities.push(e);
                }
            }
            if entities.is_empty() {
                net.add_transition(
                    format!("Mapping_{i}"),
                    vec![consume(state)],
                    vec![produce(value)],
                )?;
            } else {
                net.add_transition(
                    format!("Mapping_{i}"),
                    vec![consume(state)],
                    entities
                        .iter()
                        .map(|e| produce_const(l1.entity[*e], i as u32))
                        .collect(),
                )?;
                let inputs = entities
                    .iter()
                    .flat_map(|e| {
                        l1.entity_attrs[*e].iter().map(|a| InArc {
                            place: l1.value[a],
                            pattern: Some(i as u32),
                        })
                    })
                    .collect();
                net.add_transition(
                    format!("Composition_{i}"),
                    inputs,
                    vec![produce_const(value, 0)],
                )?;
            }
            net.add_transition(
                format!("PropagateV_{i}"),
                vec![consume(value)],
                vec![produce_const(ce, CE_VALUE)],
            )?;
            net.add_transition(
                format!("throwActivity_{i}"),
                vec![InArc {
                    place: ce,
                    pattern: Some(CE_VALUE),
                }],
                vec![produce_const(ret, 0)],
            )?;
            first_inputs.push(consume(ret));
        }

        let out = if i == nodes.len() {
            net.add_place("End", Color::End, "end event")
        } else {
            net.add_place(format!("INFO_{i}"), Color::Info, node.id.as_str())
        };
        let mut task_ids = Vec::with_capacity(tasks);
        let mut inputs = first_inputs;
        for k in 1..=tasks {
            let mut outputs = Vec::new();
            let target = if k == tasks {
                out
            } else {
                net.add_place(format!("Activity_{i}.p{k}"), Color::Task, node.id.as_str())
            };
            outputs.push(produce(target));
            if k == tasks && node.event.is_some() && Some(idx) != last_event {
                outputs.push(produce_const(cs, 0));
            }
            task_ids.push(net.add_transition(format!("Activity_{i}.task_{k}"), inputs, outputs)?);
            inputs = vec![consume(target)];
        }
        net.substitutions.push(Substitution {
            name: format!("Activity_{i}"),
            activity: node.id.as_str().into(),
            tasks: task_ids,
        });
        control = out;
    }

    net.mark(start, 0);
    if last_event.is_some() {
        net.mark(cs, 0);
    }
    Ok(net)
}
