//! Identifiers for the index sets of the program.
//!
//! Both kinds of identifier are canonical tuples of integers. One-dimensional
//! states (the common case for queues and walks) are stored inline.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;
use std::fmt;

macro_rules! integer_tuple_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(SmallVec<[i64; 2]>);

        impl $name {
            pub fn scalar(value: i64) -> Self {
                let mut coords = SmallVec::new();
                coords.push(value);
                Self(coords)
            }

            pub fn from_coords(coords: &[i64]) -> Self {
                Self(SmallVec::from_slice(coords))
            }

            pub fn coords(&self) -> &[i64] {
                &self.0
            }

            /// First coordinate; the state itself for one-dimensional chains.
            pub fn first(&self) -> i64 {
                self.0.first().copied().unwrap_or(0)
            }
        }

        impl From<i64> for $name {
            fn from(value: i64) -> Self {
                Self::scalar(value)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                if self.0.len() == 1 {
                    write!(f, "{}", self.0[0])
                } else {
                    write!(f, "(")?;
                    for (i, c) in self.0.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{c}")?;
                    }
                    write!(f, ")")
                }
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                fmt::Display::fmt(self, f)
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                if self.0.len() == 1 {
                    serializer.serialize_i64(self.0[0])
                } else {
                    self.0.as_slice().serialize(serializer)
                }
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                #[derive(Deserialize)]
                #[serde(untagged)]
                enum Repr {
                    Scalar(i64),
                    Tuple(Vec<i64>),
                }
                Ok(match Repr::deserialize(deserializer)? {
                    Repr::Scalar(v) => Self::scalar(v),
                    Repr::Tuple(v) => Self::from_coords(&v),
                })
            }
        }
    };
}

integer_tuple_id!(
    /// A state `x` of the decision-variable index set.
    StateId
);

integer_tuple_id!(
    /// An index `y` of the output set on which the image measure lives.
    OutputId
);

impl From<&StateId> for OutputId {
    fn from(x: &StateId) -> Self {
        OutputId::from_coords(x.coords())
    }
}

impl From<&OutputId> for StateId {
    fn from(y: &OutputId) -> Self {
        StateId::from_coords(y.coords())
    }
}
