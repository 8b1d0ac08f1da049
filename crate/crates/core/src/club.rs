//! Clubs: regions of configuration space fixing a state, some exact counter
//! values and a shared lower bound on the remaining counters.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::model::{Configuration, CounterMachine, StateId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Coord {
    Exact(u64),
    /// At least the club's threshold.
    AtLeast,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Club {
    pub state: StateId,
    pub gamma: Vec<Coord>,
    pub threshold: u64,
}

impl Club {
    pub fn new(state: StateId, gamma: Vec<Coord>, threshold: u64) -> Self {
        Club { state, gamma, threshold }
    }

    /// `[q, (≥0, …, ≥0)]`: every configuration in state `q`.
    pub fn full(state: StateId, k: usize) -> Self {
        Club { state, gamma: alloc::vec![Coord::AtLeast; k], threshold: 0 }
    }

    pub fn dimension(&self) -> usize {
        self.gamma.iter().filter(|c| **c == Coord::AtLeast).count()
    }

    /// The least configuration of the club in the simulation order.
    pub fn minimal_config(&self) -> Configuration {
        let counters = self
            .gamma
            .iter()
            .map(|c| match c {
                Coord::Exact(v) => *v,
                Coord::AtLeast => self.threshold,
            })
            .collect();
        Configuration::new(self.state, counters)
    }

    /// 1 on the unbounded coordinates, 0 elsewhere.
    pub fn pump_vector(&self) -> Vec<i8> {
        self.gamma.iter().map(|c| i8::from(*c == Coord::AtLeast)).collect()
    }

    /// The same club with threshold raised to `m`.
    pub fn restrict(&self, m: u64) -> Result<Club> {
        if m < self.threshold {
            return Err(Error::InvalidArgument(alloc::format!(
                "restriction threshold {m} is below the club threshold {}",
                self.threshold
            )));
        }
        Ok(Club { threshold: m, ..self.clone() })
    }

    pub fn contains(&self, config: &Configuration) -> bool {
        config.state == self.state
            && config.counters.len() == self.gamma.len()
            && self.gamma.iter().zip(&config.counters).all(|(g, &v)| match g {
                Coord::Exact(e) => *e == v,
                Coord::AtLeast => v >= self.threshold,
            })
    }

    pub fn display(&self, machine: &CounterMachine) -> String {
        alloc::format!("[{},{}]", machine.state_name(self.state), CoordsDisplay(self))
    }
}

struct CoordsDisplay<'a>(&'a Club);

impl fmt::Display for CoordsDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.gamma.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            match c {
                Coord::Exact(v) => write!(f, "{v}")?,
                Coord::AtLeast => write!(f, "≥{}", self.0.threshold)?,
            }
        }
        write!(f, ")")
    }
}

impl fmt::Display for Club {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.state, CoordsDisplay(self))
    }
}
