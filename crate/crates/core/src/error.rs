use alloc::string::String;
use alloc::vec::Vec;

use crate::model::Violation;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("counter arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("unknown letter `{0}`")]
    UnknownLetter(String),
    #[error("letter index {0} is outside the alphabet")]
    LetterOutOfRange(usize),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("counter overflow")]
    CounterOverflow,
    #[error("arithmetic overflow in {0}")]
    ArithmeticOverflow(&'static str),
    #[error("search node budget of {0} exceeded")]
    BudgetExceeded(usize),
    #[error("machine has {0} acceptance where Büchi acceptance is required")]
    NotBuchi(&'static str),
    #[error("counter {0} is zero-testable where only blind counters are supported")]
    NotBlind(usize),
    #[error("machine is not deterministic")]
    NotDeterministic,
    #[error("invalid machine: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("machine must have exactly one counter, found {0}")]
    NotOneCounter(usize),
    #[error("symbol `{0}` is reserved by the construction")]
    ReservedSymbol(String),
    #[error("alphabets differ")]
    AlphabetMismatch,
    #[error("invalid run: {0}")]
    InvalidRun(String),
    #[error("run leaves the expected shape: {0}")]
    OutOfShape(String),
    #[error("invalid chain: {0}")]
    InvalidChain(String),
    #[error("phase {phase} exceeds the set's depth {max_depth}")]
    DepthExceeded { phase: usize, max_depth: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("optimality could not be certified for {} club(s): {}", .0.len(), .0.join(", "))]
    Uncertified(Vec<String>),
}

fn join_violations(v: &[Violation]) -> String {
    use core::fmt::Write;
    let mut out = String::new();
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            out.push_str("; ");
        }
        let _ = write!(out, "{x}");
    }
    out
}
