//! Finite linear programs that bracket countably-infinite ones.
//!
//! A [`model::CilpModel`] describes an LP over non-negative measures on a
//! countable set, constrained by linear equations, a unit-mass image and a
//! moment bound `rho(w) <= c`. Truncating to the sublevel sets of `w`
//! gives finite LPs whose optima bound the infinite program's optimum
//! ([`scheme_a`]) and whose indicator bounds assemble into a lower
//! approximation of the minimal point with a computable error
//! ([`scheme_b`]). [`chains`] builds models for stationary and exit
//! problems of Markov chains; [`oracle`] supplies independent ground truth.

pub mod chains;
pub mod config;
pub mod error;
pub mod lp;
pub mod model;
pub mod objective;
pub mod oracle;
pub mod scheme_a;
pub mod scheme_b;
pub mod solve;
pub mod state;
pub mod truncation;

pub use error::{Error, Result};
pub use state::{OutputId, StateId};
