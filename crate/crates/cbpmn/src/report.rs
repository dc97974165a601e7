//! Trace logs, run summaries, verification and metrics reports.
//!
//! All output is a pure function of the inputs: times are logical scenario
//! times and every collection is emitted in a fixed order.

use std::fmt::Write as _;

use cbpmn_core::metrics::{CostParams, Halstead, HalsteadCounts, StructuralMetrics};
use cbpmn_core::process::TraceEntry;
use cbpmn_core::verify::{is_goal, Net, StateSpace};
use cbpmn_core::AdaptationTrace;
use serde::Serialize;

/// Header line of the edge-list format.
pub const EDGE_LIST_HEADER: &str = "# cbpmn-state-space v1";

fn entry_line(e: &TraceEntry) -> String {
    let mut s = format!("[{}] {} {}", e.at, e.outcome.name(), e.activity);
    if let Some(v) = &e.value {
        let _ = write!(s, " value={v}");
    }
    if let Some(f) = &e.fragment {
        let _ = write!(s, " fragment={f}");
    }
    if let Some(a) = &e.action {
        let _ = write!(s, " action={a}");
    }
    if !e.inserted.is_empty() {
        let names: Vec<&str> = e.inserted.iter().map(|a| a.as_str()).collect();
        let _ = write!(s, " inserted=[{}]", names.join(", "));
    }
    s
}

/// One line per trace entry, then the execution order and warnings.
pub fn trace_log(trace: &AdaptationTrace) -> String {
    let mut out = String::new();
    for e in &trace.entries {
        out.push_str(&entry_line(e));
        out.push('\n');
    }
    for (i, a) in trace.execution_order.iter().enumerate() {
        let _ = writeln!(out, "executed {} {a}", i + 1);
    }
    for w in &trace.warnings {
        let _ = writeln!(out, "warning {w}");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SummaryEntry {
    pub at: String,
    pub activity: String,
    pub outcome: String,
    pub value: Option<String>,
    pub fragment: Option<String>,
    pub action: Option<String>,
    pub inserted: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub format: &'static str,
    pub version: u32,
    pub model: String,
    pub adaptations: usize,
    pub end: Option<String>,
    pub entries: Vec<SummaryEntry>,
    pub execution_order: Vec<String>,
    pub final_chain: Vec<String>,
    pub instantiated_nodes: usize,
    pub instantiated_edges: usize,
    pub warnings: Vec<String>,
}

impl Summary {
    pub fn new(model: &str, trace: &AdaptationTrace) -> Self {
        let strings = |ids: &[cbpmn_core::ActivityId]| ids.iter().map(|a| a.to_string()).collect();
        Summary {
            format: "cbpmn-summary",
            version: crate::format::VERSION,
            model: model.to_string(),
            adaptations: trace.adaptations().count(),
            end: trace.end_time().map(|t| t.to_string()),
            entries: trace
                .entries
                .iter()
                .map(|e| SummaryEntry {
                    at: e.at.to_string(),
                    activity: e.activity.to_string(),
                    outcome: e.outcome.name().to_string(),
                    value: e.value.as_ref().map(|v| v.to_string()),
                    fragment: e.fragment.as_ref().map(|f| f.to_string()),
                    action: e.action.as_ref().map(|a| a.to_string()),
                    inserted: strings(&e.inserted),
                })
                .collect(),
            execution_order: strings(&trace.execution_order),
            final_chain: strings(&trace.final_chain.order()),
            instantiated_nodes: trace.stats.nodes,
            instantiated_edges: trace.stats.edges,
            warnings: trace.warnings.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }

    /// Short human-readable form for the terminal.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}: {} adaptation(s)\n", self.model, self.adaptations);
        for e in self
            .entries
            .iter()
            .filter(|e| e.outcome == "applied" || e.outcome == "deferred-applied")
        {
            let _ = writeln!(
                out,
                "  {} {} {}",
                e.at,
                e.activity,
                e.action.as_deref().unwrap_or("-")
            );
        }
        let _ = writeln!(out, "order: {}", self.execution_order.join(" -> "));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlaceBound {
    pub place: String,
    pub max_tokens: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub format: &'static str,
    pub version: u32,
    pub places: usize,
    pub transitions: usize,
    pub net_arcs: usize,
    pub markings: usize,
    pub space_arcs: usize,
    pub complete: bool,
    pub bounds: Vec<PlaceBound>,
    pub bound: u32,
    pub dead_transitions: Vec<String>,
    pub dead_markings: Vec<usize>,
    pub goal: Option<usize>,
    pub witness: Vec<String>,
    pub goal_is_home: bool,
}

impl VerifyReport {
    pub fn new(net: &Net, space: &StateSpace) -> Self {
        let bounds = space.check_bounded(net);
        let (dead_transitions, dead_markings, goal_is_home, goal, witness);
        let reach = space.check_reachable(|m| is_goal(net, m));
        match space.check_liveness(net) {
            Ok(live) => {
                dead_transitions = live
                    .dead_transitions
                    .iter()
                    .map(|t| net.transitions[*t].name.clone())
                    .collect();
                dead_markings = live.dead_markings;
            }
            Err(_) => {
                dead_transitions = Vec::new();
                dead_markings = Vec::new();
            }
        }
        match reach {
            Some((node, path)) => {
                goal = Some(node);
                witness = path
                    .iter()
                    .map(|a| {
                        net.transitions[space.arcs[*a].binding.transition]
                            .name
                            .clone()
                    })
                    .collect();
                goal_is_home = space.check_home(node).unwrap_or(false);
            }
            None => {
                goal = None;
                witness = Vec::new();
                goal_is_home = false;
            }
        }
        VerifyReport {
            format: "cbpmn-verify",
            version: crate::format::VERSION,
            places: net.places.len(),
            transitions: net.transitions.len(),
            net_arcs: net.arc_count(),
            markings: space.node_count(),
            space_arcs: space.arc_count(),
            complete: !space.partial,
            bounds: net
                .places
                .iter()
                .zip(&bounds.upper)
                .map(|(p, u)| PlaceBound {
                    place: p.name.clone(),
                    max_tokens: *u,
                })
                .collect(),
            bound: bounds.upper.iter().copied().max().unwrap_or(0),
            dead_transitions,
            dead_markings,
            goal,
            witness,
            goal_is_home,
        }
    }

    pub fn is_safe(&self) -> bool {
        self.bound <= 1
    }

    /// The only dead marking is the goal.
    pub fn terminates_in_goal(&self) -> bool {
        self.goal.is_some_and(|g| self.dead_markings == [g])
    }

    /// Every property holds on a complete space.
    pub fn passed(&self) -> bool {
        self.complete
            && self.is_safe()
            && self.dead_transitions.is_empty()
            && self.terminates_in_goal()
    }

    pub fn verdict(&self) -> String {
        if !self.complete {
            return format!(
                "incomplete: exploration stopped at {} markings",
                self.markings
            );
        }
        let goal = if self.terminates_in_goal() {
            " (goal)"
        } else {
            ""
        };
        format!(
            "1-safe: {}; dead transitions: {}; dead markings: {}{goal}",
            if self.is_safe() { "yes" } else { "no" },
            self.dead_transitions.len(),
            self.dead_markings.len()
        )
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "net: {} places, {} transitions, {} arcs",
            self.places, self.transitions, self.net_arcs
        );
        let _ = writeln!(
            out,
            "state space: {} markings, {} arcs{}",
            self.markings,
            self.space_arcs,
            if self.complete { "" } else { " (partial)" }
        );
        let _ = writeln!(out, "{}", self.verdict());
        for t in &self.dead_transitions {
            let _ = writeln!(out, "dead transition: {t}");
        }
        match self.goal {
            Some(g) => {
                let _ = writeln!(
                    out,
                    "goal: marking {g}, reached in {} steps; home: {}",
                    self.witness.len(),
                    if self.goal_is_home { "yes" } else { "no" }
                );
                let _ = writeln!(out, "witness: {}", self.witness.join(" "));
            }
            None => out.push_str("goal: unreachable\n"),
        }
        for b in self.bounds.iter().filter(|b| b.max_tokens > 1) {
            let _ = writeln!(
                out,
                "unsafe place: {} holds up to {}",
                b.place, b.max_tokens
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// The state space as text:
///
/// ```text
/// # cbpmn-state-space v1
/// node <id> <place>=<value>[x<count>] ...
/// arc <source> <target> <transition>
/// ```
///
/// Nodes come in discovery order, arcs in exploration order.
pub fn edge_list(net: &Net, space: &StateSpace) -> String {
    let mut out = String::from(EDGE_LIST_HEADER);
    out.push('\n');
    for (i, m) in space.nodes.iter().enumerate() {
        let _ = write!(out, "node {i}");
        for (p, token, n) in m.marked() {
            let _ = write!(out, " {}={}", net.places[p].name, token.value);
            if n > 1 {
                let _ = write!(out, "x{n}");
            }
        }
        out.push('\n');
    }
    for a in &space.arcs {
        let _ = writeln!(
            out,
            "arc {} {} {}",
            a.source, a.target, net.transitions[a.binding.transition].name
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub format: &'static str,
    pub version: u32,
    pub costs: CostParams,
    pub execution_time: f64,
    pub structure: StructuralMetrics,
    pub halstead_counts: HalsteadCounts,
    pub halstead: Halstead,
}

impl MetricsReport {
    pub fn to_text(&self) -> String {
        let c = &self.costs;
        let h = &self.halstead_counts;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "execution_time={} = n * (t_activity + t_fragment + t_context_model + t_throw + t_catch) \
             = {} * ({} + {} + {} + {} + {})",
            self.execution_time,
            c.activities,
            c.activity,
            c.fragment,
            c.context_model,
            c.throw_activity,
            c.catch_context
        );
        let s = &self.structure;
        let _ = writeln!(
            out,
            "noa_extra={} (activities beyond the declared chain)",
            s.noa_extra
        );
        let _ = writeln!(
            out,
            "noac_extra={} (extra activities and gateways)",
            s.noac_extra
        );
        let _ = writeln!(
            out,
            "mcc_extra={} = edges - nodes + 2 over the contextual events",
            s.mcc_extra
        );
        let _ = writeln!(out, "cfc={} (split branches)", s.cfc);
        let _ = writeln!(
            out,
            "halstead counts: n1={} n2={} N1={} N2={}",
            h.unique_flow, h.unique_data, h.total_flow, h.total_data
        );
        let _ = writeln!(
            out,
            "length={:.6} = n1*log2(n1) + n2*log2(n2)",
            self.halstead.length
        );
        let _ = writeln!(
            out,
            "volume={:.6} = (N1 + N2) * log2(n1 + n2)",
            self.halstead.volume
        );
        let _ = writeln!(
            out,
            "difficulty={:.6} = (n1 / 2) * (N2 / n2)",
            self.halstead.difficulty
        );
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
