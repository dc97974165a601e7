//! Doubly linked activity chain and its rewrite operations.
//!
//! Every node stores `prev` and `next` links; `None` on either side means the
//! node is attached to the start or end event. All operations keep the chain
//! well formed: one head, one tail, mutually consistent links, no cycles.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use super::model::EventBinding;
use crate::ident::{ActivityId, SubGoalId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("unknown-activity: {0}")]
    UnknownActivity(ActivityId),
    #[error("duplicate activity {0}")]
    DuplicateActivity(ActivityId),
    #[error("empty-chain: removing {0} would leave no activity")]
    EmptyChain(ActivityId),
    #[error("empty fragment")]
    EmptyFragment,
    #[error("invalid-window: {0}")]
    InvalidWindow(String),
    #[error("malformed chain: {0}")]
    Malformed(String),
}

/// Blueprint of an activity, used for the declared model and for fragments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivityTemplate {
    pub name: ActivityId,
    pub sub_goal: SubGoalId,
    pub role: String,
    pub medium: String,
    pub output_data: BTreeSet<String>,
    /// Logical minutes the activity takes.
    pub duration: u32,
    pub event: Option<EventBinding>,
}

impl ActivityTemplate {
    pub fn new(name: &str, sub_goal: &str) -> Self {
        ActivityTemplate {
            name: name.into(),
            sub_goal: sub_goal.into(),
            role: String::new(),
            medium: String::new(),
            output_data: BTreeSet::new(),
            duration: 1,
            event: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivityNode {
    pub id: ActivityId,
    pub prev: Option<ActivityId>,
    pub next: Option<ActivityId>,
    pub sub_goal: SubGoalId,
    pub role: String,
    pub medium: String,
    pub output_data: BTreeSet<String>,
    pub duration: u32,
    pub event: Option<EventBinding>,
}

impl ActivityNode {
    fn from_template(id: ActivityId, t: &ActivityTemplate) -> Self {
        ActivityNode {
            id,
            prev: None,
            next: None,
            sub_goal: t.sub_goal.clone(),
            role: t.role.clone(),
            medium: t.medium.clone(),
            output_data: t.output_data.clone(),
            duration: t.duration,
            event: t.event.clone(),
        }
    }

    pub fn template(&self) -> ActivityTemplate {
        ActivityTemplate {
            name: self.id.clone(),
            sub_goal: self.sub_goal.clone(),
            role: self.role.clone(),
            medium: self.medium.clone(),
            output_data: self.output_data.clone(),
            duration: self.duration,
            event: self.event.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    Before,
    After,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttributeKind {
    Role,
    Medium,
}

/// Slot of the ideal window `prev → current → next`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Slot {
    Prev,
    Current,
    Next,
}

/// New order of a window's slots, e.g. `[Current, Prev, Next]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Permutation(pub [Slot; 3]);

impl Permutation {
    pub const IDENTITY: Permutation = Permutation([Slot::Prev, Slot::Current, Slot::Next]);

    /// All six orders of a three-activity window.
    pub const ALL: [Permutation; 6] = [
        Permutation([Slot::Prev, Slot::Current, Slot::Next]),
        Permutation([Slot::Prev, Slot::Next, Slot::Current]),
        Permutation([Slot::Current, Slot::Prev, Slot::Next]),
        Permutation([Slot::Current, Slot::Next, Slot::Prev]),
        Permutation([Slot::Next, Slot::Prev, Slot::Current]),
        Permutation([Slot::Next, Slot::Current, Slot::Prev]),
    ];

    pub fn is_valid(&self) -> bool {
        let mut s = self.0;
        s.sort();
        s == [Slot::Prev, Slot::Current, Slot::Next]
    }
}

/// Contiguous `prev → current → next` window; the outer slots are `None`
/// when `current` is attached to the start or end event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    pub prev: Option<ActivityId>,
    pub current: ActivityId,
    pub next: Option<ActivityId>,
}

impl Window {
    pub fn get(&self, slot: Slot) -> Option<&ActivityId> {
        match slot {
            Slot::Prev => self.prev.as_ref(),
            Slot::Current => Some(&self.current),
            Slot::Next => self.next.as_ref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ActivityChain {
    nodes: BTreeMap<ActivityId, ActivityNode>,
    head: Option<ActivityId>,
    tail: Option<ActivityId>,
}

impl ActivityChain {
    /// Links `templates` in order. Names must be unique.
    pub fn from_templates(templates: &[ActivityTemplate]) -> Result<Self, ChainError> {
        let mut chain = ActivityChain::default();
        let mut prev: Option<ActivityId> = None;
        for t in templates {
            if chain.nodes.contains_key(&t.name) {
                return Err(ChainError::DuplicateActivity(t.name.clone()));
            }
            let mut node = ActivityNode::from_template(t.name.clone(), t);
            node.prev = prev.clone();
            if let Some(p) = &prev {
                chain.node_mut(p).next = Some(t.name.clone());
            } else {
                chain.head = Some(t.name.clone());
            }
            chain.nodes.insert(t.name.clone(), node);
            prev = Some(t.name.clone());
        }
        chain.tail = prev;
        Ok(chain)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn head(&self) -> Option<&ActivityId> {
        self.head.as_ref()
    }

    pub fn tail(&self) -> Option<&ActivityId> {
        self.tail.as_ref()
    }

    pub fn get(&self, id: &str) -> Option<&ActivityNode> {
        self.nodes.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.nodes.contains_key(id)
    }

    /// Ids from start to end.
    pub fn order(&self) -> Vec<ActivityId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut at = self.head.clone();
        while let Some(id) = at {
            if out.len() > self.nodes.len() {
                break;
            }
            at = self.nodes.get(&id).and_then(|n| n.next.clone());
            out.push(id);
        }
        out
    }

    pub fn nodes(&self) -> impl Iterator<Item = &ActivityNode> {
        self.order()
            .into_iter()
            .filter_map(move |id| self.nodes.get(&id))
    }

    pub fn check_well_formed(&self) -> Result<(), ChainError> {
        let bad = |m: String| Err(ChainError::Malformed(m));
        if self.nodes.is_empty() {
            return if self.head.is_none() && self.tail.is_none() {
                Ok(())
            } else {
                bad("empty chain with dangling head or tail".into())
            };
        }
        let heads: Vec<_> = self.nodes.values().filter(|n| n.prev.is_none()).collect();
        let tails: Vec<_> = self.nodes.values().filter(|n| n.next.is_none()).collect();
        if heads.len() != 1 || tails.len() != 1 {
            return bad(format!(
                "{} start-attached and {} end-attached nodes",
                heads.len(),
                tails.len()
            ));
        }
        if self.head.as_ref() != Some(&heads[0].id) || self.tail.as_ref() != Some(&tails[0].id) {
            return bad("head or tail pointer disagrees with the links".into());
        }
        for n in self.nodes.values() {
            if let Some(next) = &n.next {
                match self.nodes.get(next) {
                    Some(m) if m.prev.as_ref() == Some(&n.id) => {}
                    _ => return bad(format!("{}.next = {next} is not mirrored", n.id)),
                }
            }
            if let Some(prev) = &n.prev {
                match self.nodes.get(prev) {
                    Some(m) if m.next.as_ref() == Some(&n.id) => {}
                    _ => return bad(format!("{}.prev = {prev} is not mirrored", n.id)),
                }
            }
        }
        if self.order().len() != self.nodes.len() {
            return bad("not every node is reachable from the head".into());
        }
        Ok(())
    }

    fn node_mut(&mut self, id: &ActivityId) -> &mut ActivityNode {
        self.nodes.get_mut(id).expect("linked node exists")
    }

    fn require(&self, id: &ActivityId) -> Result<(), ChainError> {
        if self.nodes.contains_key(id) {
            Ok(())
        } else {
            Err(ChainError::UnknownActivity(id.clone()))
        }
    }

    fn fresh_id(&self, name: &ActivityId, taken: &BTreeSet<ActivityId>) -> ActivityId {
        if !self.nodes.contains_key(name) && !taken.contains(name) {
            return name.clone();
        }
        (2..)
            .map(|k| ActivityId::from(format!("{name}~{k}")))
            .find(|id| !self.nodes.contains_key(id) && !taken.contains(id))
            .unwrap()
    }

    /// Sets `a.next = b` and `b.prev = a`, updating head/tail for `None`.
    fn link(&mut self, a: Option<&ActivityId>, b: Option<&ActivityId>) {
        match a {
            Some(a) => self.node_mut(a).next = b.cloned(),
            None => self.head = b.cloned(),
        }
        match b {
            Some(b) => self.node_mut(b).prev = a.cloned(),
            None => self.tail = a.cloned(),
        }
    }

    /// Inserts fresh nodes between `before` and `after` and returns their ids.
    fn splice_in(
        &mut self,
        before: Option<ActivityId>,
        after: Option<ActivityId>,
        templates: &[ActivityTemplate],
    ) -> Vec<ActivityId> {
        let mut taken = BTreeSet::new();
        let ids: Vec<ActivityId> = templates
            .iter()
            .map(|t| {
                let id = self.fresh_id(&t.name, &taken);
                taken.insert(id.clone());
                id
            })
            .collect();
        for (id, t) in ids.iter().zip(templates) {
            self.nodes
                .insert(id.clone(), ActivityNode::from_template(id.clone(), t));
        }
        let mut prev = before;
        for id in &ids {
            self.link(prev.as_ref(), Some(id));
            prev = Some(id.clone());
        }
        self.link(prev.as_ref(), after.as_ref());
        ids
    }

    /// Adds a fragment before or after `target`.
    pub fn add_fragment(
        &mut self,
        target: &ActivityId,
        position: Position,
        templates: &[ActivityTemplate],
    ) -> Result<Vec<ActivityId>, ChainError> {
        self.require(target)?;
        if templates.is_empty() {
            return Err(ChainError::EmptyFragment);
        }
        let node = &self.nodes[target];
        let (before, after) = match position {
            Position::Before => (node.prev.clone(), Some(target.clone())),
            Position::After => (Some(target.clone()), node.next.clone()),
        };
        Ok(self.splice_in(before, after, templates))
    }

    /// Replaces `target` by a fragment; returns the inserted ids.
    pub fn replace_activity(
        &mut self,
        target: &ActivityId,
        templates: &[ActivityTemplate],
    ) -> Result<Vec<ActivityId>, ChainError> {
        self.require(target)?;
        if templates.is_empty() {
            return Err(ChainError::EmptyFragment);
        }
        let old = self.nodes.remove(target).unwrap();
        Ok(self.splice_in(old.prev, old.next, templates))
    }

    /// Changes the role or medium of `target`; links are untouched.
    pub fn replace_attribute(
        &mut self,
        target: &ActivityId,
        kind: AttributeKind,
        value: &str,
    ) -> Result<(), ChainError> {
        self.require(target)?;
        let n = self.node_mut(target);
        match kind {
            AttributeKind::Role => n.role = value.into(),
            AttributeKind::Medium => n.medium = value.into(),
        }
        Ok(())
    }

    /// Unlinks `target` and joins its neighbours.
    pub fn bypass(&mut self, target: &ActivityId) -> Result<ActivityNode, ChainError> {
        self.require(target)?;
        if self.nodes.len() == 1 {
            return Err(ChainError::EmptyChain(target.clone()));
        }
        let mut old = self.nodes.remove(target).unwrap();
        self.link(old.prev.as_ref(), old.next.as_ref());
        old.prev = None;
        old.next = None;
        Ok(old)
    }

    /// The window centred on `id` in the current order.
    pub fn window_around(&self, id: &ActivityId) -> Result<Window, ChainError> {
        self.require(id)?;
        let n = &self.nodes[id];
        Ok(Window {
            prev: n.prev.clone(),
            current: id.clone(),
            next: n.next.clone(),
        })
    }

    /// Reorders a contiguous window. Slots that are `None` (start- or
    /// end-attached `current`) are dropped from the permutation.
    pub fn reorder(&mut self, window: &Window, perm: Permutation) -> Result<(), ChainError> {
        if !perm.is_valid() {
            return Err(ChainError::InvalidWindow(format!(
                "{perm:?} is not a permutation"
            )));
        }
        self.require(&window.current)?;
        let cur = &self.nodes[&window.current];
        if cur.prev != window.prev || cur.next != window.next {
            return Err(ChainError::InvalidWindow(format!(
                "{:?} → {} → {:?} is not contiguous",
                window.prev, window.current, window.next
            )));
        }
        let members: Vec<ActivityId> = [Slot::Prev, Slot::Current, Slot::Next]
            .into_iter()
            .filter_map(|s| window.get(s).cloned())
            .collect();
        let before = self.nodes[&members[0]].prev.clone();
        let after = self.nodes[members.last().unwrap()].next.clone();
        let new_order: Vec<ActivityId> = perm
            .0
            .iter()
            .filter_map(|s| window.get(*s).cloned())
            .collect();
        let mut prev = before;
        for id in &new_order {
            self.link(prev.as_ref(), Some(id));
            prev = Some(id.clone());
        }
        self.link(prev.as_ref(), after.as_ref());
        Ok(())
    }

    /// Adds data items to `target`'s output; topology is untouched.
    pub fn data_level_change(
        &mut self,
        target: &ActivityId,
        delta: &BTreeSet<String>,
    ) -> Result<(), ChainError> {
        self.require(target)?;
        self.node_mut(target)
            .output_data
            .extend(delta.iter().cloned());
        Ok(())
    }
}
