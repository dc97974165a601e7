//! Activity chains, adaptation rules and the instance engine.

mod chain;
mod engine;
mod model;
mod rules;

pub use chain::{
    ActivityChain, ActivityNode, ActivityTemplate, AttributeKind, ChainError, Permutation,
    Position, Slot, Window,
};
pub use engine::{
    run_instance, AdaptationTrace, EngineError, Outcome, Scenario, TraceEntry, MAX_INSERTION_DEPTH,
};
pub use model::{CbpmnModel, EventBinding};
pub use rules::{select_rule, Action, AdaptationRule, FragmentRef, RuleError, Step, StepTarget};
