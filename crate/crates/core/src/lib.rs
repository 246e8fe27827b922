//! Asynchronous automata over tree-like architectures: distributing diamond
//! DFAs, recognizing tree-like dependence alphabets, and synthesizing
//! distributed controllers by eliminating leaves down to a parity game.

pub mod aa;
pub mod chordal;
pub mod control;
pub mod dfa;
pub mod distribute;
pub mod error;
pub mod examples;
pub mod io;
pub mod model;
pub mod parity;
pub mod random;
pub mod views;

pub use error::{Error, Result};
