//! Signed Pauli operators in binary-symplectic form.
//!
//! Qubit `q` carries `I` for `(x, z) = (0, 0)`, `X` for `(1, 0)`, `Z` for
//! `(0, 1)` and `Y` for `(1, 1)`. Only Hermitian operators are representable,
//! so the overall phase is a sign in `{+1, -1}`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::EngineError;

/// Single-qubit Pauli letter.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    /// Product up to phase.
    pub fn compose(self, other: Pauli) -> Pauli {
        let (ax, az) = self.bits();
        let (bx, bz) = other.bits();
        Pauli::from_bits(ax ^ bx, az ^ bz)
    }

    pub fn anticommutes(self, other: Pauli) -> bool {
        let (ax, az) = self.bits();
        let (bx, bz) = other.bits();
        (ax & bz) ^ (az & bx)
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' | '_' | '.' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Eigenvalue / operator sign.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_negative(neg: bool) -> Self {
        if neg {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn is_negative(self) -> bool {
        self == Sign::Minus
    }

    pub fn flip(self) -> Self {
        Sign::from_negative(!self.is_negative())
    }

    pub fn times(self, other: Sign) -> Self {
        Sign::from_negative(self.is_negative() ^ other.is_negative())
    }

    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    /// Classical bit convention: `+1 -> 0`, `-1 -> 1`.
    pub fn bit(self) -> u8 {
        self.is_negative() as u8
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(64)
}

/// An `n`-qubit Hermitian Pauli operator with sign.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    sign: Sign,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        PauliString { n, x: vec![0; w], z: vec![0; w], sign: Sign::Plus }
    }

    pub fn single(n: usize, qubit: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n);
        s.set(qubit, p);
        s
    }

    /// Builds a string from `(qubit, letter)` pairs; later entries overwrite earlier ones.
    pub fn from_sparse(n: usize, terms: impl IntoIterator<Item = (usize, Pauli)>) -> Self {
        let mut s = Self::identity(n);
        for (q, p) in terms {
            s.set(q, p);
        }
        s
    }

    /// Parses strings like `"+XZI"`, `"-ZZ"` or `"XX"`.
    pub fn parse(text: &str) -> Result<Self, EngineError> {
        let t = text.trim();
        let (sign, body) = match t.chars().next() {
            Some('+') => (Sign::Plus, &t[1..]),
            Some('-') => (Sign::Minus, &t[1..]),
            _ => (Sign::Plus, t),
        };
        if body.starts_with('i') || body.contains('i') {
            return Err(EngineError::ImaginaryPhase);
        }
        let letters: Vec<Pauli> =
            body.chars().map(|c| Pauli::from_char(c).ok_or_else(|| EngineError::Parse(text.to_string()))).collect::<Result<_, _>>()?;
        let mut s = Self::identity(letters.len());
        for (q, p) in letters.into_iter().enumerate() {
            s.set(q, p);
        }
        s.sign = sign;
        Ok(s)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn set_sign(&mut self, sign: Sign) {
        self.sign = sign;
    }

    pub fn with_sign(mut self, sign: Sign) -> Self {
        self.sign = sign;
        self
    }

    pub fn negate(&mut self) {
        self.sign = self.sign.flip();
    }

    pub fn x_bit(&self, q: usize) -> bool {
        (self.x[q / 64] >> (q % 64)) & 1 == 1
    }

    pub fn z_bit(&self, q: usize) -> bool {
        (self.z[q / 64] >> (q % 64)) & 1 == 1
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x_bit(q), self.z_bit(q))
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
        let (xb, zb) = p.bits();
        let mask = 1u64 << (q % 64);
        if xb {
            self.x[q / 64] |= mask;
        } else {
            self.x[q / 64] &= !mask;
        }
        if zb {
            self.z[q / 64] |= mask;
        } else {
            self.z[q / 64] &= !mask;
        }
    }

    pub(crate) fn set_x_bit(&mut self, q: usize, v: bool) {
        let mask = 1u64 << (q % 64);
        if v {
            self.x[q / 64] |= mask;
        } else {
            self.x[q / 64] &= !mask;
        }
    }

    pub(crate) fn set_z_bit(&mut self, q: usize, v: bool) {
        let mask = 1u64 << (q % 64);
        if v {
            self.z[q / 64] |= mask;
        } else {
            self.z[q / 64] &= !mask;
        }
    }

    /// Number of non-identity positions.
    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(a, b)| (a | b).count_ones() as usize).sum()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    /// Qubits with a non-identity letter, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.get(q) != Pauli::I).collect()
    }

    /// Symplectic inner product over GF(2); `true` means the operators anticommute.
    pub fn anticommutes(&self, other: &PauliString) -> bool {
        assert_eq!(self.n, other.n, "qubit count mismatch");
        let mut acc = 0u32;
        for k in 0..self.x.len() {
            acc ^= ((self.x[k] & other.z[k]) ^ (self.z[k] & other.x[k])).count_ones() & 1;
        }
        acc == 1
    }

    pub fn commutes(&self, other: &PauliString) -> bool {
        !self.anticommutes(other)
    }

    /// Same letters on every qubit, ignoring the sign.
    pub fn same_letters(&self, other: &PauliString) -> bool {
        self.n == other.n && self.x == other.x && self.z == other.z
    }

    /// Multiplies `self` by `other` on the right, returning the exponent of `i`
    /// (mod 4) that the product carries on top of the stored signs.
    pub(crate) fn mul_assign_phase(&mut self, other: &PauliString) -> u8 {
        assert_eq!(self.n, other.n, "qubit count mismatch");
        // Per qubit, count factors of i modulo 4 in two bit planes.
        let (mut c1, mut c2) = (0u64, 0u64);
        for k in 0..self.x.len() {
            let (x1, z1, x2, z2) = (self.x[k], self.z[k], other.x[k], other.z[k]);
            let x1z2 = x1 & z2;
            let anti = (x2 & z1) ^ x1z2;
            self.x[k] = x1 ^ x2;
            self.z[k] = z1 ^ z2;
            let carry = (c1 ^ self.x[k] ^ self.z[k] ^ x1z2) & anti;
            c1 ^= anti;
            c2 ^= carry;
        }
        let e = c1.count_ones() as i32 + 2 * c2.count_ones() as i32;
        let mut total = e + 2 * (self.sign.is_negative() as i32) + 2 * (other.sign.is_negative() as i32);
        total = total.rem_euclid(4);
        self.sign = Sign::Plus;
        total as u8
    }

    /// Hermitian product `self * other`. Errors if the product carries an
    /// imaginary phase (the operands anticommute).
    pub fn try_mul(&self, other: &PauliString) -> Result<PauliString, EngineError> {
        let mut out = self.clone();
        let phase = out.mul_assign_phase(other);
        match phase {
            0 => Ok(out),
            2 => Ok(out.with_sign(Sign::Minus)),
            _ => Err(EngineError::ImaginaryPhase),
        }
    }

    /// Returns a copy padded (or required to fit) on `n` qubits.
    pub fn resized(&self, n: usize) -> PauliString {
        let mut out = self.clone();
        out.resize(n);
        out
    }

    /// In-place [`resized`](Self::resized).
    pub fn resize(&mut self, n: usize) {
        let w = words_for(n);
        self.x.resize(w, 0);
        self.z.resize(w, 0);
        if !n.is_multiple_of(64) {
            let mask = (1u64 << (n % 64)) - 1;
            self.x[w - 1] &= mask;
            self.z[w - 1] &= mask;
        }
        self.n = n;
    }

    /// Restricts to the listed qubits (in that order), producing a `qubits.len()`-qubit string.
    pub fn restrict(&self, qubits: &[usize]) -> PauliString {
        let mut out = PauliString::identity(qubits.len());
        for (k, &q) in qubits.iter().enumerate() {
            out.set(k, self.get(q));
        }
        out.sign = self.sign;
        out
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.sign)?;
        for q in 0..self.n {
            write!(f, "{}", self.get(q).as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Exponent of `i` picked up when multiplying single-qubit Paulis `a * b`,
    /// with bits `(x1, z1)` and `(x2, z2)`. Returns a value in `{-1, 0, 1}`.
    fn phase_exponent(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
        match (x1, z1) {
            (false, false) => 0,
            (true, true) => z2 as i32 - x2 as i32,
            (true, false) => (z2 as i32) * (2 * x2 as i32 - 1),
            (false, true) => (x2 as i32) * (1 - 2 * z2 as i32),
        }
    }

    fn letters(n: usize) -> impl Strategy<Value = PauliString> {
        (proptest::collection::vec(0u8..4, n), any::<bool>()).prop_map(move |(v, neg)| {
            PauliString::from_sparse(n, v.iter().enumerate().map(|(q, &l)| (q, [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][l as usize])))
                .with_sign(Sign::from_negative(neg))
        })
    }

    #[test]
    fn shrinking_drops_high_letters() {
        let p = PauliString::from_sparse(130, [(3, Pauli::X), (70, Pauli::Y), (129, Pauli::Z)]).with_sign(Sign::Minus);
        let q = p.resized(71).resized(200);
        assert_eq!(q, PauliString::from_sparse(200, [(3, Pauli::X), (70, Pauli::Y)]).with_sign(Sign::Minus));
        assert_eq!(p.resized(65).resized(130).weight(), 1);
    }

    proptest! {
        #[test]
        fn product_phase_matches_per_qubit_rule((a, b) in (1usize..150).prop_flat_map(|n| (letters(n), letters(n)))) {
            let mut e = 0;
            for q in 0..a.num_qubits() {
                e += phase_exponent(a.x_bit(q), a.z_bit(q), b.x_bit(q), b.z_bit(q));
            }
            let want = (e + 2 * a.sign().is_negative() as i32 + 2 * b.sign().is_negative() as i32).rem_euclid(4) as u8;
            let mut c = a.clone();
            prop_assert_eq!(c.mul_assign_phase(&b), want);
            for q in 0..a.num_qubits() {
                prop_assert_eq!(c.get(q), a.get(q).compose(b.get(q)));
            }
        }
    }

    #[test]
    fn letters_round_trip_through_bits() {
        for p in [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z] {
            let (x, z) = p.bits();
            assert_eq!(Pauli::from_bits(x, z), p);
        }
    }

    #[test]
    fn weight_and_commutation() {
        let xx = PauliString::parse("XX").unwrap();
        let zz = PauliString::parse("ZZ").unwrap();
        let zi = PauliString::parse("ZI").unwrap();
        assert_eq!(xx.weight(), 2);
        assert!(xx.commutes(&zz));
        assert!(xx.anticommutes(&zi));
        assert_eq!(PauliString::identity(3).weight(), 0);
    }

    #[test]
    fn products_track_sign() {
        let xx = PauliString::parse("XX").unwrap();
        let zz = PauliString::parse("ZZ").unwrap();
        // XX * ZZ = (XZ)(XZ) = (-iY)(-iY) = -YY
        assert_eq!(xx.try_mul(&zz).unwrap().to_string(), "-YY");
        let x = PauliString::parse("X").unwrap();
        let z = PauliString::parse("Z").unwrap();
        assert!(matches!(x.try_mul(&z), Err(EngineError::ImaginaryPhase)));
    }

    #[test]
    fn imaginary_text_rejected() {
        assert!(matches!(PauliString::parse("iXZ"), Err(EngineError::ImaginaryPhase)));
        assert!(PauliString::parse("XQ").is_err());
    }

    #[test]
    fn wide_strings_cross_word_boundaries() {
        let mut p = PauliString::identity(130);
        p.set(63, Pauli::X);
        p.set(64, Pauli::Z);
        p.set(129, Pauli::Y);
        assert_eq!(p.weight(), 3);
        assert_eq!(p.support(), vec![63, 64, 129]);
        let q = PauliString::single(130, 64, Pauli::X);
        assert!(p.anticommutes(&q));
    }
}
