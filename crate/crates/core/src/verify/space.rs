//! Breadth-first state-space exploration and the behavioural checks run on
//! the resulting graph.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use super::net::{Binding, Marking, Net, PlaceId, TransitionId};
use super::VerifyError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceArc {
    pub source: usize,
    pub target: usize,
    pub binding: Binding,
}

/// Reachability graph. Node 0 is the initial marking; nodes are numbered in
/// breadth-first discovery order and arcs follow the enabled-binding order,
/// so the same net always yields the same graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    pub nodes: Vec<Marking>,
    pub arcs: Vec<SpaceArc>,
    /// Exploration stopped at the marking limit.
    pub partial: bool,
    /// Arc through which each node was first reached.
    parent: Vec<Option<usize>>,
}

pub fn explore(net: &Net, initial: &Marking, limit: usize) -> Result<StateSpace, VerifyError> {
    if limit == 0 {
        return Err(VerifyError::ZeroLimit);
    }
    let mut space = StateSpace {
        nodes: vec![initial.clone()],
        arcs: Vec::new(),
        partial: false,
        parent: vec![None],
    };
    let mut index: BTreeMap<Marking, usize> = BTreeMap::new();
    index.insert(initial.clone(), 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(src) = queue.pop_front() {
        let m = space.nodes[src].clone();
        for b in net.enabled(&m) {
            let next = net.fire(&m, &b)?;
            let target = match index.get(&next) {
                Some(&t) => t,
                None => {
                    if space.nodes.len() >= limit {
                        space.partial = true;
                        continue;
                    }
                    let t = space.nodes.len();
                    index.insert(next.clone(), t);
                    space.nodes.push(next);
                    space.parent.push(Some(space.arcs.len()));
                    queue.push_back(t);
                    t
                }
            };
            space.arcs.push(SpaceArc {
                source: src,
                target,
                binding: b,
            });
        }
    }
    Ok(space)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundsReport {
    /// Largest token count per place over all reachable markings.
    pub upper: Vec<u32>,
}

impl BoundsReport {
    pub fn is_k_bounded(&self, k: u32) -> bool {
        self.upper.iter().all(|&u| u <= k)
    }

    pub fn violations(&self, k: u32) -> impl Iterator<Item = (PlaceId, u32)> + '_ {
        self.upper
            .iter()
            .enumerate()
            .filter(move |(_, u)| **u > k)
            .map(|(p, u)| (p, *u))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LivenessReport {
    pub dead_transitions: Vec<TransitionId>,
    pub dead_markings: Vec<usize>,
}

impl StateSpace {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn check_bounded(&self, net: &Net) -> BoundsReport {
        let mut upper = vec![0; net.places.len()];
        for m in &self.nodes {
            for (p, u) in upper.iter_mut().enumerate() {
                *u = (*u).max(m.count(p));
            }
        }
        BoundsReport { upper }
    }

    fn require_exact(&self) -> Result<(), VerifyError> {
        if self.partial {
            Err(VerifyError::PartialSpace)
        } else {
            Ok(())
        }
    }

    /// Transitions that occur on no arc, and markings without successors.
    pub fn check_liveness(&self, net: &Net) -> Result<LivenessReport, VerifyError> {
        self.require_exact()?;
        let counts = self.occurrences(net);
        let mut has_out = vec![false; self.nodes.len()];
        for a in &self.arcs {
            has_out[a.source] = true;
        }
        Ok(LivenessReport {
            dead_transitions: (0..net.transitions.len())
                .filter(|t| counts[*t] == 0)
                .collect(),
            dead_markings: (0..self.nodes.len()).filter(|n| !has_out[*n]).collect(),
        })
    }

    /// First reachable marking satisfying `goal` in discovery order, with a
    /// shortest witness as arc indices from the initial marking.
    pub fn check_reachable(&self, goal: impl Fn(&Marking) -> bool) -> Option<(usize, Vec<usize>)> {
        let node = self.nodes.iter().position(goal)?;
        let mut path = Vec::new();
        let mut at = node;
        while let Some(arc) = self.parent[at] {
            path.push(arc);
            at = self.arcs[arc].source;
        }
        path.reverse();
        Some((node, path))
    }

    /// Whether `node` can be reached from every reachable marking.
    pub fn check_home(&self, node: usize) -> Result<bool, VerifyError> {
        self.require_exact()?;
        if node >= self.nodes.len() {
            return Ok(false);
        }
        let mut back: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        for a in &self.arcs {
            back[a.target].push(a.source);
        }
        let mut seen = vec![false; self.nodes.len()];
        seen[node] = true;
        let mut stack = vec![node];
        while let Some(n) = stack.pop() {
            for &s in &back[n] {
                if !seen[s] {
                    seen[s] = true;
                    stack.push(s);
                }
            }
        }
        Ok(seen.into_iter().all(|s| s))
    }

    /// How often each transition occurs on an arc.
    pub fn occurrences(&self, net: &Net) -> Vec<usize> {
        let mut counts = vec![0; net.transitions.len()];
        for a in &self.arcs {
            counts[a.binding.transition] += 1;
        }
        counts
    }
}
