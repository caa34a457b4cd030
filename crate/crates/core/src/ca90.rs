//! Rule-90 cellular automaton on a hypervector ring, used as a
//! deterministic vector generator.

use crate::error::{Error, Result};
use crate::hv::Hypervector;

/// One rule-90 step: every cell becomes the XOR of its two ring neighbours.
pub fn rule90_step(state: &Hypervector) -> Hypervector {
    &state.permute(1) ^ &state.permute(-1)
}

/// Sequential rule-90 generator. The seed itself is never emitted.
#[derive(Clone, Debug)]
pub struct Ca90Stream {
    current: Hypervector,
    step_index: u64,
    seed_id: u64,
}

impl Ca90Stream {
    /// Rejects all-zeros (a fixed point) and all-ones (maps to all-zeros).
    pub fn new(seed: Hypervector, seed_id: u64) -> Result<Self> {
        if seed.is_zero() || seed.is_all_ones() {
            return Err(Error::DegenerateSeed);
        }
        Ok(Self {
            current: seed,
            step_index: 0,
            seed_id,
        })
    }

    pub fn current(&self) -> &Hypervector {
        &self.current
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    pub fn seed_id(&self) -> u64 {
        self.seed_id
    }

    pub fn dim(&self) -> usize {
        self.current.dim()
    }

    /// Steps once and borrows the new state.
    pub fn advance(&mut self) -> &Hypervector {
        self.current = rule90_step(&self.current);
        self.step_index += 1;
        &self.current
    }

    #[allow(clippy::should_implement_trait)]
    pub fn next(&mut self) -> Hypervector {
        self.advance().clone()
    }

    pub fn burst(&mut self, count: usize) -> Result<Vec<Hypervector>> {
        if count == 0 {
            return Err(Error::InvalidArgument("burst count must be at least 1".into()));
        }
        Ok((0..count).map(|_| self.next()).collect())
    }
}
