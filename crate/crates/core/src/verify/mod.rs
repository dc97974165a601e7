//! Coloured-token net of a model and exhaustive state-space analysis.

mod net;
mod space;
mod translate;

use alloc::string::String;

use thiserror::Error;

pub use net::{
    Binding, Color, InArc, Marking, Net, OutArc, OutExpr, Place, PlaceId, Substitution, Token,
    Transition, TransitionId,
};
pub use space::{explore, BoundsReport, LivenessReport, SpaceArc, StateSpace};
pub use translate::{translate, translate_with, CE_STATE, CE_VALUE, DEFAULT_TASKS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("not-enabled: {0}")]
    NotEnabled(String),
    #[error("no transition with id {0}")]
    UnknownTransition(usize),
    #[error("transition {0} needs an input and an output arc on existing places")]
    Unconnected(String),
    #[error("translation refused: {0}")]
    InvalidModel(String),
    #[error("exploration limit must be positive")]
    ZeroLimit,
    #[error("state space is partial; raise the limit")]
    PartialSpace,
}

/// The goal: one token on `End`, nothing elsewhere.
pub fn is_goal(net: &Net, m: &Marking) -> bool {
    net.place_named("End")
        .is_some_and(|end| m.total() == 1 && m.count(end) == 1)
}
