//! Engine for context-aware business process models.
//!
//! A process is an ordered chain of activities, each preceded by a
//! *contextual event*. Observed contexts flow through the pipeline
//!
//! ```text
//! scenario ─► ContextualSituation ─► catch_context ─► ContextState
//!          ─► ContextGraph (instantiate / assign / dependencies / compose)
//!          ─► CompositeValue ─► FragmentRepository::throw_activity
//!          ─► select_rule ─► chain rewrite (add / replace / bypass / reorder / data)
//! ```
//!
//! and the resulting (possibly adapted) model can be translated into a
//! coloured-token net whose state space is explored exhaustively.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, reports and
//! the command-line front end live in the `cbpmn` crate.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

#[macro_use]
mod ident;

pub mod context;
pub mod fragments;
pub mod graph;
pub mod metrics;
pub mod process;
pub mod reasoning;
pub mod verify;

pub use context::{
    catch_context, diff, AtomicContext, Category, Connector, ContextError, ContextState,
    ContextVector, ContextualSituation, LogicalTime, Scalar, ScopeFilter, Temporality,
};

pub use fragments::{FragmentRepository, ProcessFragment, RepoError};
pub use graph::{CompositeValue, ContextGraph, GraphError, SubgraphInstance};
pub use ident::{ActivityId, AttrPath, FragmentId, StateNodeId, SubGoalId};

pub use process::{
    run_instance, Action, ActivityChain, AdaptationRule, AdaptationTrace, CbpmnModel, ChainError,
    EngineError, Scenario,
};
pub use verify::{Marking, Net, StateSpace};
