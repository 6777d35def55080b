//! Dense state-vector reference simulator used to cross-check the tableau.
//!
//! Qubit `q` is bit `q` of the basis index. Every gate here is written out
//! from its matrix definition rather than from the tableau update rules.

use num_complex::Complex64;

use crate::error::EngineError;
use crate::pauli::{Pauli, PauliString, Sign};
use crate::tableau::{Gate, StabilizerTableau};

/// Largest register the oracle accepts.
pub const ORACLE_LIMIT: usize = 12;

const NORM_TOL: f64 = 1e-12;
const COMPARE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

/// Outcome probabilities and normalised post-measurement states.
#[derive(Clone, Debug)]
pub struct OracleMeasurement {
    pub p_plus: f64,
    pub p_minus: f64,
    pub plus_state: Option<StateVector>,
    pub minus_state: Option<StateVector>,
}

impl OracleMeasurement {
    pub fn is_deterministic(&self) -> bool {
        self.p_plus < COMPARE_TOL || self.p_minus < COMPARE_TOL
    }

    pub fn post_state(&self, outcome: Sign) -> Option<&StateVector> {
        match outcome {
            Sign::Plus => self.plus_state.as_ref(),
            Sign::Minus => self.minus_state.as_ref(),
        }
    }
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero(n: usize) -> Result<Self, EngineError> {
        if n > ORACLE_LIMIT {
            return Err(EngineError::OracleLimit { n, limit: ORACLE_LIMIT });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self, EngineError> {
        let n = amps.len().trailing_zeros() as usize;
        if amps.len() != 1 << n {
            return Err(EngineError::SizeMismatch { expected: 1 << n, got: amps.len() });
        }
        if n > ORACLE_LIMIT {
            return Err(EngineError::OracleLimit { n, limit: ORACLE_LIMIT });
        }
        Ok(StateVector { n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() < NORM_TOL
    }

    fn check(&self, q: usize) -> Result<(), EngineError> {
        if q >= self.n {
            Err(EngineError::OutOfRange { qubit: q, n: self.n })
        } else {
            Ok(())
        }
    }

    /// Applies a 2x2 matrix `[[a, b], [c, d]]` to qubit `q`.
    fn apply_1q(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    pub fn apply(&mut self, gate: Gate) -> Result<(), EngineError> {
        let qs = gate.qubits();
        for &q in &qs {
            self.check(q)?;
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(EngineError::DuplicateTarget(qs[0]));
        }
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match gate {
            Gate::H(q) => self.apply_1q(q, [[c(h, 0.), c(h, 0.)], [c(h, 0.), c(-h, 0.)]]),
            Gate::S(q) => self.apply_1q(q, [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(0., 1.)]]),
            Gate::X(q) => self.apply_1q(q, [[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]]),
            Gate::Y(q) => self.apply_1q(q, [[c(0., 0.), c(0., -1.)], [c(0., 1.), c(0., 0.)]]),
            Gate::Z(q) => self.apply_1q(q, [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]]),
            Gate::Cnot { control, target } => {
                let (cb, tb) = (1usize << control, 1usize << target);
                for i in 0..self.amps.len() {
                    if i & cb != 0 && i & tb == 0 {
                        self.amps.swap(i, i | tb);
                    }
                }
            }
            Gate::Module { photon, atom } => {
                // M = |+><+|_p (x) I + |-><-|_p (x) X_a
                //   = (I + X_p)/2 + (X_a - X_p X_a)/2
                let xp = self.flipped(1 << photon);
                let xa = self.flipped(1 << atom);
                let xpxa = self.flipped((1 << photon) | (1 << atom));
                for i in 0..self.amps.len() {
                    self.amps[i] = (self.amps[i] + xp[i] + xa[i] - xpxa[i]) * 0.5;
                }
            }
        }
        Ok(())
    }

    fn flipped(&self, mask: usize) -> Vec<Complex64> {
        (0..self.amps.len()).map(|i| self.amps[i ^ mask]).collect()
    }

    /// `P |psi>` including the sign of `P`.
    pub fn apply_pauli(&self, p: &PauliString) -> Result<StateVector, EngineError> {
        if p.num_qubits() != self.n {
            return Err(EngineError::SizeMismatch { expected: self.n, got: p.num_qubits() });
        }
        let (mut xmask, mut zmask, mut ys) = (0usize, 0usize, 0u32);
        for q in 0..self.n {
            match p.get(q) {
                Pauli::I => {}
                Pauli::X => xmask |= 1 << q,
                Pauli::Z => zmask |= 1 << q,
                Pauli::Y => {
                    xmask |= 1 << q;
                    zmask |= 1 << q;
                    ys += 1;
                }
            }
        }
        let global = Complex64::i().powu(ys) * p.sign().value() as f64;
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (b, &a) in self.amps.iter().enumerate() {
            let parity = (b & zmask).count_ones() % 2;
            let s = if parity == 1 { -1.0 } else { 1.0 };
            out[b ^ xmask] = a * global * s;
        }
        Ok(StateVector { n: self.n, amps: out })
    }

    /// `<psi| P |psi>`, real for Hermitian `P`.
    pub fn expectation(&self, p: &PauliString) -> Result<f64, EngineError> {
        let pv = self.apply_pauli(p)?;
        let v: Complex64 = self.amps.iter().zip(&pv.amps).map(|(a, b)| a.conj() * b).sum();
        Ok(v.re)
    }

    fn project(&self, p: &PauliString, outcome: Sign) -> Result<(f64, Option<StateVector>), EngineError> {
        let pv = self.apply_pauli(p)?;
        let s = outcome.value() as f64;
        let amps: Vec<Complex64> = self.amps.iter().zip(&pv.amps).map(|(a, b)| (a + b * s) * 0.5).collect();
        let prob: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if prob < COMPARE_TOL {
            return Ok((prob.max(0.0), None));
        }
        let k = 1.0 / prob.sqrt();
        Ok((prob, Some(StateVector { n: self.n, amps: amps.into_iter().map(|a| a * k).collect() })))
    }

    /// Outcome distribution of measuring `p`, and both post-measurement states.
    pub fn oracle_measure(&self, p: &PauliString) -> Result<OracleMeasurement, EngineError> {
        if p.weight() == 0 {
            return Err(EngineError::ZeroWeight);
        }
        let (p_plus, plus_state) = self.project(p, Sign::Plus)?;
        let (p_minus, minus_state) = self.project(p, Sign::Minus)?;
        Ok(OracleMeasurement { p_plus, p_minus, plus_state, minus_state })
    }
}

/// True iff every stabilizer row of `tableau` fixes `psi` with its sign.
pub fn oracle_compare(tableau: &StabilizerTableau, psi: &StateVector) -> Result<bool, EngineError> {
    if tableau.num_qubits() > ORACLE_LIMIT {
        return Err(EngineError::OracleLimit { n: tableau.num_qubits(), limit: ORACLE_LIMIT });
    }
    if tableau.num_qubits() != psi.num_qubits() {
        return Err(EngineError::SizeMismatch { expected: tableau.num_qubits(), got: psi.num_qubits() });
    }
    for g in tableau.stabilizers() {
        if (psi.expectation(g)? - 1.0).abs() > COMPARE_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}
