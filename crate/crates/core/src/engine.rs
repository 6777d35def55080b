//! Simulated quantum register: a tableau plus qubit bookkeeping.

use rand::Rng;

use crate::error::EngineError;
use crate::pauli::PauliString;
use crate::tableau::{Gate, Measurement, StabilizerTableau};

/// Stabilizer register with dense qubit ids. Consumed (detected) qubits keep
/// their column until the run ends.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Engine {
    tableau: StabilizerTableau,
    consumed: Vec<bool>,
    measurements: u64,
}

impl Engine {
    pub fn new(n: usize) -> Self {
        Engine { tableau: StabilizerTableau::new(n), consumed: vec![false; n], measurements: 0 }
    }

    pub fn tableau(&self) -> &StabilizerTableau {
        &self.tableau
    }

    pub fn num_qubits(&self) -> usize {
        self.tableau.num_qubits()
    }

    /// Allocates `k` fresh qubits in `|0>`; returns their ids.
    pub fn allocate(&mut self, k: usize) -> std::ops::Range<usize> {
        let first = self.tableau.add_qubits(k);
        self.consumed.resize(first + k, false);
        first..first + k
    }

    pub fn is_consumed(&self, q: usize) -> bool {
        self.consumed.get(q).copied().unwrap_or(false)
    }

    pub fn mark_consumed(&mut self, q: usize) {
        if q < self.consumed.len() {
            self.consumed[q] = true;
        }
    }

    pub fn apply(&mut self, gate: Gate) -> Result<(), EngineError> {
        self.tableau.apply(gate)
    }

    pub fn apply_all(&mut self, gates: &[Gate]) -> Result<(), EngineError> {
        gates.iter().try_for_each(|&g| self.apply(g))
    }

    /// Measures an unsigned Pauli product; returns the measurement id with the result.
    pub fn measure<R: Rng + ?Sized>(&mut self, p: &PauliString, rng: &mut R) -> Result<(u64, Measurement), EngineError> {
        let m = self.tableau.measure(p, rng)?;
        let id = self.measurements;
        self.measurements += 1;
        Ok((id, m))
    }

    pub fn reset<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<(), EngineError> {
        self.tableau.reset(q, rng)
    }

    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<(), EngineError> {
        self.tableau.apply_pauli(p)
    }

    pub fn measurement_count(&self) -> u64 {
        self.measurements
    }
}
