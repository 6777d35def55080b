//! Equality of stabilizer groups given by generator sets.

use serde::{Deserialize, Serialize};

use crate::error::EngineError;
use crate::gf2::EchelonBasis;
use crate::pauli::{PauliString, Sign};
use crate::tableau::symplectic_row;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupComparison {
    Equal,
    /// Same operators up to sign; lists the generators of the second set that
    /// need a `-1` flip to land in the first group.
    EqualUpToSigns(Vec<PauliString>),
    Different,
}

impl GroupComparison {
    pub fn is_same_up_to_signs(&self) -> bool {
        !matches!(self, GroupComparison::Different)
    }
}

/// Checks that `gens` are mutually commuting and independent over GF(2).
pub fn validate_generators(gens: &[PauliString]) -> Result<(), EngineError> {
    let Some(first) = gens.first() else {
        return Ok(());
    };
    let n = first.num_qubits();
    for (i, g) in gens.iter().enumerate() {
        if g.num_qubits() != n {
            return Err(EngineError::SizeMismatch { expected: n, got: g.num_qubits() });
        }
        for h in &gens[i + 1..] {
            if g.anticommutes(h) {
                return Err(EngineError::InvalidGenerators(format!("{g} anticommutes with {h}")));
            }
        }
    }
    let rows: Vec<_> = gens.iter().map(symplectic_row).collect();
    let (_, dependent) = EchelonBasis::build(2 * n, &rows);
    if let Some(&k) = dependent.first() {
        return Err(EngineError::InvalidGenerators(format!("{} is dependent", gens[k])));
    }
    Ok(())
}

/// Writes `target` as a signed product of `gens` if it lies in their group
/// up to sign. Returns the sign the group assigns to `target`'s letters.
pub fn group_sign_of(gens: &[PauliString], basis: &EchelonBasis, target: &PauliString) -> Option<Sign> {
    let combo = basis.decompose(&symplectic_row(target))?;
    let mut acc = PauliString::identity(target.num_qubits());
    let mut phase = 0u8;
    for k in combo.ones() {
        phase = (phase + acc.mul_assign_phase(&gens[k])) % 4;
    }
    debug_assert!(acc.same_letters(target));
    debug_assert_eq!(phase % 2, 0);
    Some(Sign::from_negative(phase == 2))
}

/// Compares the groups generated by `a` and `b`.
pub fn stabilizer_group_equal(a: &[PauliString], b: &[PauliString]) -> Result<GroupComparison, EngineError> {
    validate_generators(a)?;
    validate_generators(b)?;
    if a.len() != b.len() {
        return Ok(GroupComparison::Different);
    }
    let Some(first) = a.first().or(b.first()) else {
        return Ok(GroupComparison::Equal);
    };
    let n = first.num_qubits();
    if let Some(g) = a.iter().chain(b).find(|g| g.num_qubits() != n) {
        return Err(EngineError::SizeMismatch { expected: n, got: g.num_qubits() });
    }
    let rows: Vec<_> = a.iter().map(symplectic_row).collect();
    let (basis, _) = EchelonBasis::build(2 * n, &rows);
    let mut flips = Vec::new();
    for g in b {
        match group_sign_of(a, &basis, g) {
            None => return Ok(GroupComparison::Different),
            Some(s) if s != g.sign() => flips.push(g.clone()),
            Some(_) => {}
        }
    }
    Ok(if flips.is_empty() { GroupComparison::Equal } else { GroupComparison::EqualUpToSigns(flips) })
}

/// Generators of the subgroup of `⟨gens⟩` acting trivially outside `keep`,
/// restricted to the qubits of `keep` (in that order).
pub fn subgroup_on(gens: &[PauliString], keep: &[usize]) -> Vec<PauliString> {
    let Some(first) = gens.first() else {
        return Vec::new();
    };
    let n = first.num_qubits();
    let mut inside = vec![false; n];
    for &q in keep {
        inside[q] = true;
    }
    let mut rows: Vec<PauliString> = gens.to_vec();
    let mut live = vec![true; rows.len()];
    for q in (0..n).filter(|&q| !inside[q]) {
        for bit in 0..2 {
            let has = |p: &PauliString| if bit == 0 { p.x_bit(q) } else { p.z_bit(q) };
            let Some(pivot) = (0..rows.len()).find(|&r| live[r] && has(&rows[r])) else {
                continue;
            };
            live[pivot] = false;
            let pr = rows[pivot].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != pivot && has(row) {
                    let phase = row.mul_assign_phase(&pr);
                    debug_assert_eq!(phase % 2, 0);
                    row.set_sign(Sign::from_negative(phase == 2));
                }
            }
        }
    }
    rows.into_iter().zip(live).filter(|(_, l)| *l).map(|(r, _)| r.restrict(keep)).filter(|r| !r.is_identity()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[&str]) -> Vec<PauliString> {
        xs.iter().map(|s| PauliString::parse(s).unwrap()).collect()
    }

    #[test]
    fn sign_only_difference() {
        let r = stabilizer_group_equal(&set(&["XX", "ZZ"]), &set(&["XX", "-ZZ"])).unwrap();
        assert_eq!(r, GroupComparison::EqualUpToSigns(set(&["-ZZ"])));
    }

    #[test]
    fn different_single_qubit_groups() {
        assert_eq!(stabilizer_group_equal(&set(&["X"]), &set(&["Z"])).unwrap(), GroupComparison::Different);
    }

    #[test]
    fn products_of_generators_are_recognised() {
        // -YY = XX * ZZ
        let r = stabilizer_group_equal(&set(&["XX", "ZZ"]), &set(&["-YY", "ZZ"])).unwrap();
        assert_eq!(r, GroupComparison::Equal);
    }

    #[test]
    fn subgroup_of_bell_pair_and_product() {
        // <XX, ZZ> on qubits 0,1 and <-Z> on qubit 2
        let gens = set(&["XXI", "ZZI", "-IIZ"]);
        let sub = subgroup_on(&gens, &[2]);
        assert_eq!(sub, set(&["-Z"]));
        assert!(subgroup_on(&gens, &[0, 2]).iter().all(|g| g.to_string() == "-IZ"));
        let both = subgroup_on(&gens, &[0, 1]);
        assert_eq!(stabilizer_group_equal(&both, &set(&["XX", "ZZ"])).unwrap(), GroupComparison::Equal);
    }

    #[test]
    fn invalid_sets_rejected() {
        assert!(stabilizer_group_equal(&set(&["XI", "ZI"]), &set(&["XI", "IX"])).is_err());
        assert!(stabilizer_group_equal(&set(&["XX", "XX"]), &set(&["XX", "ZZ"])).is_err());
    }
}
