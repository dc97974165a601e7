use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::VerifyError;

/// Colour sets of both layers plus `task` for sub-net places.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Color {
    Start,
    Info,
    End,
    Cs,
    Ce,
    Return,
    State,
    Entity,
    Att,
    Atomic,
    Composite,
    Task,
}

impl Color {
    pub fn name(self) -> &'static str {
        match self {
            Color::Start => "start",
            Color::Info => "info",
            Color::End => "end",
            Color::Cs => "CS",
            Color::Ce => "CE",
            Color::Return => "return",
            Color::State => "state",
            Color::Entity => "entity",
            Color::Att => "att",
            Color::Atomic => "atomic",
            Color::Composite => "composite",
            Color::Task => "task",
        }
    }
}

/// A coloured token; `value` distinguishes tokens of one colour set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Token {
    pub color: Color,
    pub value: u32,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.color.name(), self.value)
    }
}

pub type PlaceId = usize;
pub type TransitionId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Place {
    pub name: String,
    pub color: Color,
    /// What the place stands for in the model, e.g. an entity name.
    pub label: String,
}

/// Input arc: consumes one token, optionally only one carrying `pattern`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InArc {
    pub place: PlaceId,
    pub pattern: Option<u32>,
}

/// Output arc expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutExpr {
    Const(u32),
    /// The value of the token bound on the given input arc.
    Input(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutArc {
    pub place: PlaceId,
    pub expr: OutExpr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub name: String,
    pub inputs: Vec<InArc>,
    pub outputs: Vec<OutArc>,
}

/// Substitution transition of the upper layer, refined by a task sub-net.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substitution {
    pub name: String,
    pub activity: String,
    pub tasks: Vec<TransitionId>,
}

/// Token multiset per place, kept sorted so equal markings compare and
/// order identically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Marking(BTreeMap<(PlaceId, Token), u32>);

impl Marking {
    pub fn new() -> Self {
        Marking::default()
    }

    pub fn add(&mut self, place: PlaceId, token: Token) {
        *self.0.entry((place, token)).or_insert(0) += 1;
    }

    fn take(&mut self, place: PlaceId, token: Token) -> bool {
        match self.0.get_mut(&(place, token)) {
            Some(1) => {
                self.0.remove(&(place, token));
                true
            }
            Some(n) => {
                *n -= 1;
                true
            }
            None => false,
        }
    }

    /// Tokens on `place` with multiplicity.
    pub fn tokens(&self, place: PlaceId) -> impl Iterator<Item = (Token, u32)> + '_ {
        self.0
            .range(
                (
                    place,
                    Token {
                        color: Color::Start,
                        value: 0,
                    },
                )..,
            )
            .take_while(move |((p, _), _)| *p == place)
            .map(|((_, t), n)| (*t, *n))
    }

    pub fn count(&self, place: PlaceId) -> u32 {
        self.tokens(place).map(|(_, n)| n).sum()
    }

    pub fn total(&self) -> u32 {
        self.0.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Marked places in id order.
    pub fn marked(&self) -> impl Iterator<Item = (PlaceId, Token, u32)> + '_ {
        self.0.iter().map(|((p, t), n)| (*p, *t, *n))
    }
}

/// One enabled occurrence: a transition and the tokens bound on its input
/// arcs, in arc order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Binding {
    pub transition: TransitionId,
    pub tokens: Vec<Token>,
}

/// Coloured-token net. Guards are part of the formalism but never needed by
/// generated nets, so none are stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Net {
    pub places: Vec<Place>,
    pub transitions: Vec<Transition>,
    pub substitutions: Vec<Substitution>,
    pub initial: Marking,
}

impl Net {
    pub fn new() -> Self {
        Net::default()
    }

    pub fn add_place(
        &mut self,
        name: impl Into<String>,
        color: Color,
        label: impl Into<String>,
    ) -> PlaceId {
        self.places.push(Place {
            name: name.into(),
            color,
            label: label.into(),
        });
        self.places.len() - 1
    }

    /// Adds a transition; it needs at least one input and one output arc.
    pub fn add_transition(
        &mut self,
        name: impl Into<String>,
        inputs: Vec<InArc>,
        outputs: Vec<OutArc>,
    ) -> Result<TransitionId, VerifyError> {
        let name = name.into();
        if inputs.is_empty() || outputs.is_empty() {
            return Err(VerifyError::Unconnected(name));
        }
        let n = self.places.len();
        let bad_out = outputs.iter().any(|o| match o.expr {
            OutExpr::Input(k) => k >= inputs.len(),
            OutExpr::Const(_) => false,
        });
        if bad_out || inputs.iter().any(|i| i.place >= n) || outputs.iter().any(|o| o.place >= n) {
            return Err(VerifyError::Unconnected(name));
        }
        self.transitions.push(Transition {
            name,
            inputs,
            outputs,
        });
        Ok(self.transitions.len() - 1)
    }

    /// Puts a token of the place's colour on `place` in the initial marking.
    pub fn mark(&mut self, place: PlaceId, value: u32) {
        let color = self.places[place].color;
        self.initial.add(place, Token { color, value });
    }

    pub fn place_named(&self, name: &str) -> Option<PlaceId> {
        self.places.iter().position(|p| p.name == name)
    }

    pub fn transition_named(&self, name: &str) -> Option<TransitionId> {
        self.transitions.iter().position(|t| t.name == name)
    }

    pub fn arc_count(&self) -> usize {
        self.transitions
            .iter()
            .map(|t| t.inputs.len() + t.outputs.len())
            .sum()
    }

    /// Every token lies on a place of its own colour.
    pub fn well_typed(&self, m: &Marking) -> bool {
        m.marked()
            .all(|(p, t, _)| self.places.get(p).is_some_and(|pl| pl.color == t.color))
    }

    /// Bindings of `t` in `m`, in a fixed order.
    fn bindings_of(&self, t: TransitionId, m: &Marking) -> Vec<Binding> {
        let mut partial: Vec<(Vec<Token>, Marking)> = alloc::vec![(Vec::new(), m.clone())];
        for arc in &self.transitions[t].inputs {
            let mut next = Vec::new();
            for (bound, rest) in partial {
                let mut seen: Option<Token> = None;
                for (tok, _) in rest.tokens(arc.place) {
                    if arc.pattern.is_some_and(|v| v != tok.value) || seen == Some(tok) {
                        continue;
                    }
                    seen = Some(tok);
                    let mut r = rest.clone();
                    r.take(arc.place, tok);
                    let mut b = bound.clone();
                    b.push(tok);
                    next.push((b, r));
                }
            }
            partial = next;
        }
        partial
            .into_iter()
            .map(|(tokens, _)| Binding {
                transition: t,
                tokens,
            })
            .collect()
    }

    /// All enabled bindings, ordered by transition id then tokens.
    pub fn enabled(&self, m: &Marking) -> Vec<Binding> {
        let mut out: Vec<Binding> = (0..self.transitions.len())
            .flat_map(|t| self.bindings_of(t, m))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Standard token game: consume the bound tokens, produce one token per
    /// output arc coloured by its target place.
    pub fn fire(&self, m: &Marking, b: &Binding) -> Result<Marking, VerifyError> {
        let tr = self
            .transitions
            .get(b.transition)
            .ok_or(VerifyError::UnknownTransition(b.transition))?;
        let not_enabled = || VerifyError::NotEnabled(tr.name.clone());
        if b.tokens.len() != tr.inputs.len() {
            return Err(not_enabled());
        }
        let mut next = m.clone();
        for (arc, tok) in tr.inputs.iter().zip(&b.tokens) {
            if arc.pattern.is_some_and(|v| v != tok.value) || !next.take(arc.place, *tok) {
                return Err(not_enabled());
            }
        }
        for o in &tr.outputs {
            let value = match o.expr {
                OutExpr::Const(v) => v,
                OutExpr::Input(k) => b.tokens[k].value,
            };
            next.add(
                o.place,
                Token {
                    color: self.places[o.place].color,
                    value,
                },
            );
        }
        debug_assert!(self.well_typed(&next));
        Ok(next)
    }
}
