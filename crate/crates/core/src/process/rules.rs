//! Adaptation rules `IF VAL == V_i AND Sel_Frag == m_j THEN Action = Act_i`.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use super::chain::{Permutation, Slot};
use crate::graph::{CompositeValue, ValueExpr};
use crate::ident::{ActivityId, FragmentId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("rule {0}: the value pattern is empty")]
    EmptyValue(usize),
    #[error("rule {0}: {1} needs a selected fragment but the rule expects none")]
    MissingFragment(usize, &'static str),
    #[error("rule {0}: {1} applies only when no fragment is selected")]
    UnexpectedFragment(usize, &'static str),
    #[error("rule {0}: reorder {1:?} is not a permutation")]
    BadPermutation(usize, Permutation),
}

/// Which fragment an insertion uses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FragmentRef {
    /// The fragment `throwActivity` returned.
    Selected,
    Named(FragmentId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepTarget {
    Current,
    Activity(ActivityId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub target: StepTarget,
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    AddBefore(FragmentRef),
    AddAfter(FragmentRef),
    ReplaceByFragment(FragmentRef),
    ReplaceRole(String),
    ReplaceMedium(String),
    Bypass,
    Reorder(Permutation),
    DataLevelChange(BTreeSet<String>),
    /// Several strategies applied in sequence.
    Nested(Vec<Step>),
}

impl Action {
    pub fn name(&self) -> &'static str {
        match self {
            Action::AddBefore(_) => "add-before",
            Action::AddAfter(_) => "add-after",
            Action::ReplaceByFragment(_) => "replace-by-fragment",
            Action::ReplaceRole(_) => "replace-role",
            Action::ReplaceMedium(_) => "replace-medium",
            Action::Bypass => "bypass",
            Action::Reorder(_) => "reorder",
            Action::DataLevelChange(_) => "data-level-change",
            Action::Nested(_) => "nested",
        }
    }

    pub fn fragment_ref(&self) -> Option<&FragmentRef> {
        match self {
            Action::AddBefore(f) | Action::AddAfter(f) | Action::ReplaceByFragment(f) => Some(f),
            _ => None,
        }
    }

    /// Calls `f` on this action and every nested step action.
    pub fn visit(&self, f: &mut dyn FnMut(&Action)) {
        f(self);
        if let Action::Nested(steps) = self {
            for s in steps {
                s.action.visit(f);
            }
        }
    }

    fn uses_selected(&self) -> bool {
        let mut hit = false;
        self.visit(&mut |a| hit |= a.fragment_ref() == Some(&FragmentRef::Selected));
        hit
    }

    /// Whether a timed value postpones this action by its delay. Reordering
    /// and data-level changes take effect at once.
    pub fn is_deferrable(&self) -> bool {
        !matches!(self, Action::Reorder(_) | Action::DataLevelChange(_))
    }
}

fn slot_name(s: Slot) -> &'static str {
    match s {
        Slot::Prev => "prev",
        Slot::Current => "current",
        Slot::Next => "next",
    }
}

impl fmt::Display for FragmentRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FragmentRef::Selected => f.write_str("selected"),
            FragmentRef::Named(id) => write!(f, "{id}"),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::AddBefore(r) | Action::AddAfter(r) | Action::ReplaceByFragment(r) => {
                write!(f, "{}({r})", self.name())
            }
            Action::ReplaceRole(v) | Action::ReplaceMedium(v) => write!(f, "{}({v})", self.name()),
            Action::Bypass => f.write_str("bypass"),
            Action::Reorder(p) => write!(
                f,
                "reorder({} {} {})",
                slot_name(p.0[0]),
                slot_name(p.0[1]),
                slot_name(p.0[2])
            ),
            Action::DataLevelChange(d) => {
                f.write_str("data-level-change(")?;
                for (i, x) in d.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    f.write_str(x)?;
                }
                f.write_str(")")
            }
            Action::Nested(steps) => {
                f.write_str("nested[")?;
                for (i, s) in steps.iter().enumerate() {
                    if i > 0 {
                        f.write_str("; ")?;
                    }
                    match &s.target {
                        StepTarget::Current => write!(f, "{}", s.action)?,
                        StepTarget::Activity(a) => write!(f, "{} @ {a}", s.action)?,
                    }
                }
                f.write_str("]")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdaptationRule {
    /// Restricts the rule to one activity's contextual event.
    pub activity: Option<ActivityId>,
    pub value_pattern: ValueExpr,
    /// `None` matches only when no fragment was selected.
    pub fragment_pattern: Option<FragmentId>,
    pub action: Action,
    pub declaration_order: usize,
}

impl AdaptationRule {
    pub fn validate(&self) -> Result<(), RuleError> {
        let n = self.declaration_order;
        if self.value_pattern.pairs().is_empty() {
            return Err(RuleError::EmptyValue(n));
        }
        let mut bad_perm = None;
        self.action.visit(&mut |a| {
            if let Action::Reorder(p) = a {
                if !p.is_valid() {
                    bad_perm = Some(*p);
                }
            }
        });
        if let Some(p) = bad_perm {
            return Err(RuleError::BadPermutation(n, p));
        }
        match &self.action {
            Action::Nested(_) => {
                if self.action.uses_selected() && self.fragment_pattern.is_none() {
                    return Err(RuleError::MissingFragment(n, "nested"));
                }
            }
            a if a.fragment_ref().is_some() => {
                if self.fragment_pattern.is_none() {
                    return Err(RuleError::MissingFragment(n, a.name()));
                }
            }
            a => {
                if self.fragment_pattern.is_some() {
                    return Err(RuleError::UnexpectedFragment(n, a.name()));
                }
            }
        }
        Ok(())
    }

    pub fn matches(
        &self,
        activity: &ActivityId,
        value: &CompositeValue,
        fragment: Option<&FragmentId>,
    ) -> bool {
        self.activity.as_ref().is_none_or(|a| a == activity)
            && self.fragment_pattern.as_ref() == fragment
            && value.matches(&self.value_pattern)
    }
}

/// First applicable rule in declaration order, or `None` (logged) when the
/// situation was not anticipated.
pub fn select_rule<'r>(
    rules: &'r [AdaptationRule],
    activity: &ActivityId,
    value: &CompositeValue,
    fragment: Option<&FragmentId>,
) -> Option<&'r AdaptationRule> {
    let hit = rules
        .iter()
        .filter(|r| r.matches(activity, value, fragment))
        .min_by_key(|r| r.declaration_order);
    if hit.is_none() {
        log::warn!(
            "no adaptation rule for {activity} under {value}; keeping the process unchanged"
        );
    }
    hit
}
