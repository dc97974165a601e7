use alloc::string::String;
use core::borrow::Borrow;
use core::fmt;

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
        #[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
        #[cfg_attr(feature = "serde", serde(transparent))]
        pub struct $name(String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Self {
                Self(s.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.into())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }

        impl AsRef<str> for $name {
            fn as_ref(&self) -> &str {
                &self.0
            }
        }
    };
}

string_id!(
    /// Identifier of an activity in the upper-abstraction chain.
    ActivityId
);
string_id!(
    /// Identifier of a process fragment in the repository.
    FragmentId
);
string_id!(
    /// Identifier of a level-1 state node of the context graph.
    StateNodeId
);
string_id!(
    /// Business sub-goal an activity (or fragment activity) achieves.
    SubGoalId
);
string_id!(
    /// Qualified attribute `subject.attribute`, e.g. `Weather.Status`.
    AttrPath
);

impl AttrPath {
    pub fn from_parts(subject: &str, attribute: &str) -> Self {
        let mut s = String::with_capacity(subject.len() + attribute.len() + 1);
        s.push_str(subject);
        s.push('.');
        s.push_str(attribute);
        Self(s)
    }

    /// The part before the first dot.
    pub fn subject(&self) -> &str {
        self.0.split_once('.').map_or(self.0.as_str(), |(s, _)| s)
    }

    /// The part after the first dot (empty when the path has no dot).
    pub fn attribute(&self) -> &str {
        self.0.split_once('.').map_or("", |(_, a)| a)
    }
}
