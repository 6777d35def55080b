//! Stabilizer/destabilizer tableau with Clifford gates and Pauli-product
//! measurements.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::EngineError;
use crate::gf2::{self, BitRow};
use crate::pauli::{Pauli, PauliString, Sign};

/// Invariant checks after every operation run in debug builds up to this size.
const DEBUG_CHECK_LIMIT: usize = 24;

/// Clifford gates understood by the engine.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gate {
    H(usize),
    S(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Cnot {
        control: usize,
        target: usize,
    },
    /// Photonic-module interaction on an ordered `(photon, atom)` pair:
    /// `Xp -> Xp`, `Zp -> Zp Xa`, `Xa -> Xa`, `Za -> Xp Za`.
    Module {
        photon: usize,
        atom: usize,
    },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::S(q) | Gate::X(q) | Gate::Y(q) | Gate::Z(q) => vec![q],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::Module { photon, atom } => vec![photon, atom],
        }
    }
}

/// Result of a Pauli-product measurement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Measurement {
    pub outcome: Sign,
    pub deterministic: bool,
    /// For random outcomes: the stabilizer that anticommuted with the measured
    /// operator (it maps one outcome branch onto the other).
    pub flipper: Option<PauliString>,
}

/// Pure stabilizer state on `n` qubits in destabilizer form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilizerTableau {
    n: usize,
    destabilizers: Vec<PauliString>,
    stabilizers: Vec<PauliString>,
}

impl StabilizerTableau {
    /// `|0...0>` on `n` qubits.
    pub fn new(n: usize) -> Self {
        StabilizerTableau {
            n,
            destabilizers: (0..n).map(|q| PauliString::single(n, q, Pauli::X)).collect(),
            stabilizers: (0..n).map(|q| PauliString::single(n, q, Pauli::Z)).collect(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn stabilizers(&self) -> &[PauliString] {
        &self.stabilizers
    }

    pub fn destabilizers(&self) -> &[PauliString] {
        &self.destabilizers
    }

    /// Appends `extra` fresh qubits in `|0>`; returns the first new index.
    pub fn add_qubits(&mut self, extra: usize) -> usize {
        let first = self.n;
        let n = self.n + extra;
        for row in self.destabilizers.iter_mut().chain(self.stabilizers.iter_mut()) {
            row.resize(n);
        }
        for q in first..n {
            self.destabilizers.push(PauliString::single(n, q, Pauli::X));
            self.stabilizers.push(PauliString::single(n, q, Pauli::Z));
        }
        self.n = n;
        first
    }

    fn check_qubit(&self, q: usize) -> Result<(), EngineError> {
        if q >= self.n {
            Err(EngineError::OutOfRange { qubit: q, n: self.n })
        } else {
            Ok(())
        }
    }

    fn rows_mut(&mut self) -> impl Iterator<Item = &mut PauliString> {
        self.destabilizers.iter_mut().chain(self.stabilizers.iter_mut())
    }

    pub fn apply(&mut self, gate: Gate) -> Result<(), EngineError> {
        let qs = gate.qubits();
        for &q in &qs {
            self.check_qubit(q)?;
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(EngineError::DuplicateTarget(qs[0]));
        }
        for row in self.rows_mut() {
            conjugate_row(gate, row);
        }
        self.debug_check();
        Ok(())
    }

    pub fn apply_all(&mut self, gates: &[Gate]) -> Result<(), EngineError> {
        gates.iter().try_for_each(|&g| self.apply(g))
    }

    fn validate_observable(&self, p: &PauliString) -> Result<(), EngineError> {
        if p.num_qubits() != self.n {
            return Err(EngineError::SizeMismatch { expected: self.n, got: p.num_qubits() });
        }
        if p.weight() == 0 {
            return Err(EngineError::ZeroWeight);
        }
        Ok(())
    }

    /// Value of `p` if `+p` or `-p` belongs to the stabilizer group, without
    /// touching the state. The sign of `p` itself is honoured.
    pub fn peek(&self, p: &PauliString) -> Result<Option<Sign>, EngineError> {
        if p.num_qubits() != self.n {
            return Err(EngineError::SizeMismatch { expected: self.n, got: p.num_qubits() });
        }
        if p.weight() == 0 {
            return Ok(Some(p.sign()));
        }
        if self.stabilizers.iter().any(|s| s.anticommutes(p)) {
            return Ok(None);
        }
        let mut acc = PauliString::identity(self.n);
        let mut phase = 0u8;
        for (d, s) in self.destabilizers.iter().zip(&self.stabilizers) {
            if d.anticommutes(p) {
                phase = (phase + acc.mul_assign_phase(s)) % 4;
            }
        }
        debug_assert!(acc.same_letters(p));
        debug_assert!(phase.is_multiple_of(2));
        let group_sign = Sign::from_negative(phase == 2);
        Ok(Some(group_sign.times(p.sign())))
    }

    /// Projective measurement of an unsigned Pauli product.
    pub fn measure<R: Rng + ?Sized>(&mut self, p: &PauliString, rng: &mut R) -> Result<Measurement, EngineError> {
        self.validate_observable(p)?;
        if p.sign() != Sign::Plus {
            return Err(EngineError::SignedProduct);
        }
        let pivot = self.stabilizers.iter().position(|s| s.anticommutes(p));
        let Some(pivot) = pivot else {
            let outcome = self.peek(p)?.expect("commuting observable must be in the group");
            return Ok(Measurement { outcome, deterministic: true, flipper: None });
        };
        let pivot_row = self.stabilizers[pivot].clone();
        for k in 0..self.n {
            if self.destabilizers[k].anticommutes(p) {
                // destabilizer phases are irrelevant
                let _ = self.destabilizers[k].mul_assign_phase(&pivot_row);
            }
            if k != pivot && self.stabilizers[k].anticommutes(p) {
                let phase = self.stabilizers[k].mul_assign_phase(&pivot_row);
                debug_assert!(phase.is_multiple_of(2));
                self.stabilizers[k].set_sign(Sign::from_negative(phase == 2));
            }
        }
        let outcome = if rng.gen::<bool>() { Sign::Minus } else { Sign::Plus };
        self.destabilizers[pivot] = pivot_row.clone();
        self.stabilizers[pivot] = p.clone().with_sign(outcome);
        self.debug_check();
        Ok(Measurement { outcome, deterministic: false, flipper: Some(pivot_row) })
    }

    /// Single-qubit Z measurement.
    pub fn measure_z<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<Measurement, EngineError> {
        self.check_qubit(q)?;
        self.measure(&PauliString::single(self.n, q, Pauli::Z), rng)
    }

    /// Returns `q` to `|0>` after a Z measurement, applying `X` if needed.
    pub fn reset<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<(), EngineError> {
        let m = self.measure_z(q, rng)?;
        if m.outcome == Sign::Minus {
            self.apply(Gate::X(q))?;
        }
        Ok(())
    }

    /// Applies a Pauli operator physically (signs only).
    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<(), EngineError> {
        if p.num_qubits() != self.n {
            return Err(EngineError::SizeMismatch { expected: self.n, got: p.num_qubits() });
        }
        for row in self.rows_mut() {
            if row.anticommutes(p) {
                row.negate();
            }
        }
        Ok(())
    }

    /// Whether `q` is unentangled, i.e. some stabilizer is supported on `q` alone.
    pub fn is_single_qubit_factor(&self, q: usize) -> bool {
        let mut letters = Vec::new();
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            let probe = PauliString::single(self.n, q, p);
            if let Ok(Some(_)) = self.peek(&probe) {
                letters.push(p);
            }
        }
        !letters.is_empty()
    }

    /// Verifies commutation relations and full rank; `Err` describes the first violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                if self.stabilizers[i].anticommutes(&self.stabilizers[j]) {
                    return Err(format!("stabilizers {i} and {j} anticommute"));
                }
                let anti = self.stabilizers[i].anticommutes(&self.destabilizers[j]);
                if anti != (i == j) {
                    return Err(format!("stabilizer {i} vs destabilizer {j} has wrong commutation"));
                }
            }
        }
        let rows: Vec<BitRow> = self.destabilizers.iter().chain(&self.stabilizers).map(symplectic_row).collect();
        if gf2::rank(2 * n, &rows) != 2 * n {
            return Err("tableau rows are dependent".into());
        }
        Ok(())
    }

    fn debug_check(&self) {
        if cfg!(debug_assertions) && self.n <= DEBUG_CHECK_LIMIT {
            if let Err(e) = self.check_invariants() {
                panic!("tableau invariant violated: {e}");
            }
        }
    }
}

/// Conjugates a single Pauli row by `gate` in place (`P -> U P U^dagger`).
pub fn conjugate_row(gate: Gate, r: &mut PauliString) {
    match gate {
        Gate::H(a) => {
            let (x, z) = (r.x_bit(a), r.z_bit(a));
            if x && z {
                r.negate();
            }
            r.set_x_bit(a, z);
            r.set_z_bit(a, x);
        }
        Gate::S(a) => {
            let (x, z) = (r.x_bit(a), r.z_bit(a));
            if x && z {
                r.negate();
            }
            r.set_z_bit(a, z ^ x);
        }
        Gate::X(a) => {
            if r.z_bit(a) {
                r.negate();
            }
        }
        Gate::Z(a) => {
            if r.x_bit(a) {
                r.negate();
            }
        }
        Gate::Y(a) => {
            if r.x_bit(a) ^ r.z_bit(a) {
                r.negate();
            }
        }
        Gate::Cnot { control: a, target: b } => {
            let (xa, za, xb, zb) = (r.x_bit(a), r.z_bit(a), r.x_bit(b), r.z_bit(b));
            if xa && zb && (xb == za) {
                r.negate();
            }
            r.set_x_bit(b, xb ^ xa);
            r.set_z_bit(a, za ^ zb);
        }
        Gate::Module { photon, atom } => {
            conjugate_row(Gate::H(photon), r);
            conjugate_row(Gate::Cnot { control: photon, target: atom }, r);
            conjugate_row(Gate::H(photon), r);
        }
    }
}

/// Conjugated copy of `p`.
pub fn conjugate(gate: Gate, p: &PauliString) -> PauliString {
    let mut out = p.clone();
    conjugate_row(gate, &mut out);
    out
}

/// `[x_0..x_{n-1} | z_0..z_{n-1}]` as a GF(2) row.
pub fn symplectic_row(p: &PauliString) -> BitRow {
    let n = p.num_qubits();
    let mut r = BitRow::zeros(2 * n);
    for q in 0..n {
        r.set(q, p.x_bit(q));
        r.set(n + q, p.z_bit(q));
    }
    r
}
