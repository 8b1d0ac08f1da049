//! Blind counter automata over infinite words.
//!
//! The crate covers the run semantics of real-time counter machines with
//! Büchi or Muller acceptance, lasso-based emptiness checking, a family of
//! automaton constructions (the zero-block coding that lets blind counter
//! pairs simulate a zero-testable counter, the tree-order automaton with one
//! blind counter and its chain translations, the shuffle product) and the
//! determinisation of unambiguous blind counter automata into deterministic
//! Muller machines with zero tests and counter copying.
//!
//! Everything here is `no_std` with `alloc`; text formats and the command
//! line live in the companion crate.
#![cfg_attr(not(any(test, feature = "std")), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod club;
pub mod determinize;
pub mod emptiness;
pub mod error;
pub mod hsim;
mod lp;
pub mod model;
pub mod oracles;
pub mod safra;
pub mod semantics;
pub mod sigma11;

pub use error::{Error, Result};
pub use model::{
    Acceptance, Configuration, CounterKind, CounterMachine, Guard, MachineBuilder, MullerFamily, RabinPair, StateId,
    SymbolId, Transition, Violation,
};
