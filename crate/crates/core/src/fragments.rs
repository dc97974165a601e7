//! Process-fragment repository indexed by business sub-goal.
//!
//! Each sub-goal keeps an ordered list of `(composite-value pattern,
//! fragment)` entries. Within one sub-goal a value selects at most one
//! fragment, which is checked when the repository is built.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use thiserror::Error;

use crate::graph::{CompositeValue, ValueExpr};
use crate::ident::{FragmentId, SubGoalId};
use crate::process::ActivityTemplate;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RepoError {
    #[error("ambiguous-entry: sub-goal {subgoal} lists pattern [{pattern}] twice")]
    AmbiguousEntry {
        subgoal: SubGoalId,
        pattern: ValueExpr,
    },
    #[error("unknown-fragment: sub-goal {subgoal} refers to undefined fragment {fragment}")]
    UnknownFragment {
        subgoal: SubGoalId,
        fragment: FragmentId,
    },
    #[error("sub-goal {0} is declared twice")]
    DuplicateSubGoal(SubGoalId),
    #[error("fragment {0} is declared twice")]
    DuplicateFragment(FragmentId),
    #[error("fragment {0} has no activities")]
    EmptyFragment(FragmentId),
    #[error("unknown-subgoal: {0}")]
    UnknownSubGoal(SubGoalId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessFragment {
    pub id: FragmentId,
    pub activities: Vec<ActivityTemplate>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepoEntry {
    pub pattern: ValueExpr,
    pub fragment: FragmentId,
}

/// Result of `throwActivity`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection<'r> {
    pub value: CompositeValue,
    pub fragment: Option<&'r ProcessFragment>,
    /// Pattern comparisons performed; never more than the entry count.
    pub comparisons: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FragmentRepository {
    subgoals: Vec<SubGoalId>,
    index: BTreeMap<SubGoalId, usize>,
    entries: Vec<Vec<(ValueExpr, RepoEntry)>>,
    fragments: BTreeMap<FragmentId, ProcessFragment>,
}

impl FragmentRepository {
    /// Builds and checks a repository. Sub-goals keep the given order.
    pub fn new(
        subgoals: Vec<(SubGoalId, Vec<RepoEntry>)>,
        fragments: Vec<ProcessFragment>,
    ) -> Result<Self, RepoError> {
        let mut repo = FragmentRepository::default();
        for f in fragments {
            if f.activities.is_empty() {
                return Err(RepoError::EmptyFragment(f.id));
            }
            if repo.fragments.contains_key(&f.id) {
                return Err(RepoError::DuplicateFragment(f.id));
            }
            repo.fragments.insert(f.id.clone(), f);
        }
        for (sg, list) in subgoals {
            if repo.index.contains_key(&sg) {
                return Err(RepoError::DuplicateSubGoal(sg));
            }
            let mut rows: Vec<(ValueExpr, RepoEntry)> = Vec::with_capacity(list.len());
            for e in list {
                if !repo.fragments.contains_key(&e.fragment) {
                    return Err(RepoError::UnknownFragment {
                        subgoal: sg,
                        fragment: e.fragment,
                    });
                }
                let norm = e.pattern.normalized();
                if rows.iter().any(|(n, _)| *n == norm) {
                    return Err(RepoError::AmbiguousEntry {
                        subgoal: sg,
                        pattern: e.pattern,
                    });
                }
                rows.push((norm, e));
            }
            repo.index.insert(sg.clone(), repo.subgoals.len());
            repo.subgoals.push(sg);
            repo.entries.push(rows);
        }
        Ok(repo)
    }

    /// Sub-goals in index order.
    pub fn subgoals(&self) -> &[SubGoalId] {
        &self.subgoals
    }

    pub fn has_subgoal(&self, sg: &str) -> bool {
        self.index.contains_key(sg)
    }

    pub fn entries(&self, sg: &str) -> impl Iterator<Item = &RepoEntry> {
        self.index
            .get(sg)
            .into_iter()
            .flat_map(move |&i| self.entries[i].iter().map(|(_, e)| e))
    }

    pub fn fragment(&self, id: &str) -> Option<&ProcessFragment> {
        self.fragments.get(id)
    }

    pub fn fragments(&self) -> impl Iterator<Item = &ProcessFragment> {
        self.fragments.values()
    }

    /// Looks the sub-goal up by index, then scans its entries for the first
    /// pattern equal to `value`. No match selects no fragment.
    pub fn throw_activity(
        &self,
        subgoal: &SubGoalId,
        value: &CompositeValue,
    ) -> Result<Selection<'_>, RepoError> {
        let &i = self
            .index
            .get(subgoal)
            .ok_or_else(|| RepoError::UnknownSubGoal(subgoal.clone()))?;
        let norm = value.expr.normalized();
        let mut comparisons = 0;
        let mut fragment = None;
        for (pattern, entry) in &self.entries[i] {
            comparisons += 1;
            if *pattern == norm {
                fragment = self.fragments.get(&entry.fragment);
                break;
            }
        }
        Ok(Selection {
            value: value.clone(),
            fragment,
            comparisons,
        })
    }
}
