//! Classical Pauli frame for deferred recovery operations.
//!
//! The physical state is `F |ideal>`, where `F` is the frame and `|ideal>` is
//! the state that would have resulted had every random outcome been `+1`.
//! A stabilizer `S` of the ideal state therefore shows up in the physical
//! state with sign `-1` exactly when `F` anticommutes with `S`.

use serde::{Deserialize, Serialize};

use crate::pauli::{Pauli, PauliString, Sign};

/// One logged frame update.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub measurement: u64,
    pub outcome: Sign,
    /// Recovery folded into the frame, as `(qubit, letter)` pairs.
    pub recovery: Vec<(usize, Pauli)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliFrame {
    letters: Vec<Pauli>,
    log: Vec<FrameRecord>,
}

impl PauliFrame {
    pub fn new(n: usize) -> Self {
        PauliFrame { letters: vec![Pauli::I; n], log: Vec::new() }
    }

    pub fn num_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn grow(&mut self, n: usize) {
        if n > self.letters.len() {
            self.letters.resize(n, Pauli::I);
        }
    }

    pub fn get(&self, q: usize) -> Pauli {
        self.letters.get(q).copied().unwrap_or(Pauli::I)
    }

    pub fn is_clear(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    pub fn log(&self) -> &[FrameRecord] {
        &self.log
    }

    /// Multiplies a single letter into the frame (phase is dropped).
    pub fn push_letter(&mut self, q: usize, p: Pauli) {
        self.grow(q + 1);
        self.letters[q] = self.letters[q].compose(p);
    }

    /// Multiplies a whole operator into the frame (phase is dropped).
    pub fn push(&mut self, p: &PauliString) {
        self.grow(p.num_qubits());
        for q in p.support() {
            self.push_letter(q, p.get(q));
        }
    }

    /// Records an outcome and, for `-1`, folds in `recovery`.
    pub fn record(&mut self, measurement: u64, outcome: Sign, recovery: &PauliString) {
        let mut applied = Vec::new();
        if outcome == Sign::Minus {
            for q in recovery.support() {
                let p = recovery.get(q);
                self.push_letter(q, p);
                applied.push((q, p));
            }
        }
        self.log.push(FrameRecord { measurement, outcome, recovery: applied });
    }

    /// Drops the frame entry of a consumed qubit.
    pub fn clear_qubit(&mut self, q: usize) {
        if q < self.letters.len() {
            self.letters[q] = Pauli::I;
        }
    }

    /// The frame as an operator on `n` qubits.
    pub fn as_pauli(&self, n: usize) -> PauliString {
        PauliString::from_sparse(n, self.letters.iter().enumerate().filter(|&(q, &p)| p != Pauli::I && q < n).map(|(q, &p)| (q, p)))
    }

    /// Sign with which an ideal stabilizer `s` appears in the physical state.
    pub fn predicted_sign(&self, s: &PauliString) -> Sign {
        let mut anti = false;
        for q in s.support() {
            anti ^= self.get(q).anticommutes(s.get(q));
        }
        Sign::from_negative(anti).times(s.sign())
    }

    /// Converts a raw single-qubit outcome of observable `obs` on `q` into the
    /// ideal-frame outcome.
    pub fn absorb(&self, q: usize, obs: Pauli, raw: Sign) -> Sign {
        if self.get(q).anticommutes(obs) {
            raw.flip()
        } else {
            raw
        }
    }
}

/// Recovery that maps the `-1` eigenspace of `observable` onto the `+1` one:
/// `Z` on the earliest qubit carrying an `X` component, otherwise `X` on the
/// earliest qubit of the support.
pub fn recovery_for(observable: &PauliString) -> PauliString {
    let n = observable.num_qubits();
    let support = observable.support();
    if let Some(&q) = support.iter().find(|&&q| observable.x_bit(q)) {
        PauliString::single(n, q, Pauli::Z)
    } else if let Some(&q) = support.first() {
        PauliString::single(n, q, Pauli::X)
    } else {
        PauliString::identity(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn letter() -> impl Strategy<Value = Pauli> {
        prop_oneof![Just(Pauli::I), Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
    }

    proptest! {
        #[test]
        fn composition_is_associative_and_self_inverse(a in letter(), b in letter(), c in letter()) {
            prop_assert_eq!(a.compose(b).compose(c), a.compose(b.compose(c)));
            prop_assert_eq!(a.compose(a), Pauli::I);
        }

        #[test]
        fn pushing_twice_clears(letters in proptest::collection::vec(letter(), 1..8)) {
            let p = PauliString::from_sparse(letters.len(), letters.iter().copied().enumerate());
            let mut f = PauliFrame::new(letters.len());
            f.push(&p);
            f.push(&p);
            prop_assert!(f.is_clear());
        }
    }

    #[test]
    fn recovery_targets_first_x_component() {
        let p = PauliString::parse("ZXZ").unwrap();
        assert_eq!(recovery_for(&p).to_string(), "+IZI");
        let xx = PauliString::parse("XXX").unwrap();
        assert_eq!(recovery_for(&xx).to_string(), "+ZII");
        let zz = PauliString::parse("IZZ").unwrap();
        assert_eq!(recovery_for(&zz).to_string(), "+IXI");
        for p in [p, xx, zz] {
            assert!(recovery_for(&p).anticommutes(&p));
        }
    }

    #[test]
    fn predicted_sign_follows_anticommutation() {
        let mut f = PauliFrame::new(3);
        f.push_letter(1, Pauli::Z);
        assert_eq!(f.predicted_sign(&PauliString::parse("ZXZ").unwrap()), Sign::Minus);
        assert_eq!(f.predicted_sign(&PauliString::parse("XZI").unwrap()), Sign::Plus);
        assert_eq!(f.absorb(1, Pauli::X, Sign::Plus), Sign::Minus);
        assert_eq!(f.absorb(1, Pauli::Z, Sign::Plus), Sign::Plus);
    }

    #[test]
    fn record_logs_every_outcome() {
        let mut f = PauliFrame::new(2);
        let r = PauliString::parse("ZI").unwrap();
        f.record(0, Sign::Plus, &r);
        f.record(1, Sign::Minus, &r);
        assert_eq!(f.log().len(), 2);
        assert!(f.log()[0].recovery.is_empty());
        assert_eq!(f.log()[1].recovery, vec![(0, Pauli::Z)]);
        assert_eq!(f.get(0), Pauli::Z);
    }
}
