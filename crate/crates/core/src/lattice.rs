//! Target cluster states on square and rhombus lattices, and verification of
//! a simulated register against them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::frame::PauliFrame;
use crate::gf2::EchelonBasis;
use crate::group::{group_sign_of, stabilizer_group_equal, subgroup_on, GroupComparison};
use crate::module::PhotonRole;
use crate::pauli::{Pauli, PauliString, Sign};
use crate::tableau::{symplectic_row, StabilizerTableau};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeKind {
    Square,
    Rhombus,
}

/// Lattice site; `i` is the column, `j` the row.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site {
    pub i: usize,
    pub j: usize,
}

impl Site {
    pub fn new(i: usize, j: usize) -> Self {
        Site { i, j }
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub width: usize,
    pub height: usize,
    pub kind: LatticeKind,
}

impl LatticeSpec {
    pub fn new(width: usize, height: usize, kind: LatticeKind) -> Result<Self, SimError> {
        if width == 0 || height == 0 {
            return Err(SimError::Config(format!("lattice must be at least 1x1, got {width}x{height}")));
        }
        Ok(LatticeSpec { width, height, kind })
    }

    pub fn square(width: usize, height: usize) -> Result<Self, SimError> {
        Self::new(width, height, LatticeKind::Square)
    }

    pub fn rhombus(width: usize, height: usize) -> Result<Self, SimError> {
        Self::new(width, height, LatticeKind::Rhombus)
    }

    pub fn num_sites(&self) -> usize {
        self.width * self.height
    }

    /// Row-major index of a site.
    pub fn index(&self, s: Site) -> usize {
        s.j * self.width + s.i
    }

    pub fn site(&self, index: usize) -> Site {
        Site::new(index % self.width, index / self.width)
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.num_sites()).map(|k| self.site(k))
    }

    pub fn contains(&self, i: i64, j: i64) -> bool {
        i >= 0 && j >= 0 && (i as usize) < self.width && (j as usize) < self.height
    }

    /// Neighbours of `s` by role: `Right` is the previous column, `Left` the
    /// next one, `Top` the row above and `Bottom` the row below.
    ///
    /// In a rhombus lattice, rows `j` and `j + 1` are bonded straight down
    /// when `j` is odd and diagonally, to `(i + 1, j + 1)`, when `j` is even.
    pub fn neighbor_roles(&self, s: Site) -> Vec<(PhotonRole, Site)> {
        let (i, j) = (s.i as i64, s.j as i64);
        let (top, bottom) = match self.kind {
            LatticeKind::Square => ((i, j - 1), (i, j + 1)),
            LatticeKind::Rhombus => {
                let up = if (j - 1).rem_euclid(2) == 0 { (i - 1, j - 1) } else { (i, j - 1) };
                let down = if j % 2 == 0 { (i + 1, j + 1) } else { (i, j + 1) };
                (up, down)
            }
        };
        let candidates =
            [(PhotonRole::Right, (i - 1, j)), (PhotonRole::Top, top), (PhotonRole::Bottom, bottom), (PhotonRole::Left, (i + 1, j))];
        candidates
            .into_iter()
            .filter(|&(_, (a, b))| self.contains(a, b))
            .map(|(r, (a, b))| (r, Site::new(a as usize, b as usize)))
            .collect()
    }

    pub fn neighbors(&self, s: Site) -> Vec<Site> {
        let mut v: Vec<Site> = self.neighbor_roles(s).into_iter().map(|(_, n)| n).collect();
        v.sort();
        v
    }

    /// Undirected edges, each listed once with the smaller index first.
    pub fn edges(&self) -> Vec<(Site, Site)> {
        let mut out = BTreeSet::new();
        for s in self.sites() {
            for n in self.neighbors(s) {
                let (a, b) = if self.index(s) < self.index(n) { (s, n) } else { (n, s) };
                out.insert((self.index(a), self.index(b)));
            }
        }
        out.into_iter().map(|(a, b)| (self.site(a), self.site(b))).collect()
    }

    /// Sites within graph distance `radius` of `s`, including `s`.
    pub fn ball(&self, s: Site, radius: usize) -> Vec<Site> {
        let mut seen = BTreeSet::from([s]);
        let mut frontier = vec![s];
        for _ in 0..radius {
            let mut next = Vec::new();
            for f in frontier {
                for n in self.neighbors(f) {
                    if seen.insert(n) {
                        next.push(n);
                    }
                }
            }
            frontier = next;
        }
        seen.into_iter().collect()
    }
}

/// Generators of a cluster state, mapped onto register qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterTarget {
    pub spec: LatticeSpec,
    /// Register qubit of each site, by row-major site index.
    pub qubits: Vec<usize>,
    pub num_qubits: usize,
    pub generators: Vec<PauliString>,
}

/// One generator per site: `X` on the site, `Z` on each lattice neighbour.
pub fn cluster_stabilizers(spec: &LatticeSpec) -> ClusterTarget {
    let n = spec.num_sites();
    ClusterTarget::on_register(spec, (0..n).collect(), n).expect("identity map is valid")
}

impl ClusterTarget {
    /// Builds the target with site `k` living on register qubit `qubits[k]`.
    pub fn on_register(spec: &LatticeSpec, qubits: Vec<usize>, num_qubits: usize) -> Result<Self, SimError> {
        if qubits.len() != spec.num_sites() {
            return Err(SimError::Config(format!("{} qubits for {} sites", qubits.len(), spec.num_sites())));
        }
        let distinct: BTreeSet<_> = qubits.iter().collect();
        if distinct.len() != qubits.len() || qubits.iter().any(|&q| q >= num_qubits) {
            return Err(SimError::Config("site to qubit map must be injective and in range".into()));
        }
        let generators = spec
            .sites()
            .map(|s| {
                let mut p = PauliString::identity(num_qubits);
                p.set(qubits[spec.index(s)], Pauli::X);
                for nb in spec.neighbors(s) {
                    p.set(qubits[spec.index(nb)], Pauli::Z);
                }
                p
            })
            .collect();
        Ok(ClusterTarget { spec: *spec, qubits, num_qubits, generators })
    }

    pub fn qubit(&self, s: Site) -> usize {
        self.qubits[self.spec.index(s)]
    }

    pub fn generator(&self, s: Site) -> &PauliString {
        &self.generators[self.spec.index(s)]
    }

    /// Generators written on the site qubits only, in site order.
    pub fn compact_generators(&self) -> Vec<PauliString> {
        self.generators.iter().map(|g| g.restrict(&self.qubits)).collect()
    }
}

/// Outcome of checking a register against a target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub pass: bool,
    /// Whether the whole target group was compared (all sites exited).
    pub full_group: bool,
    pub sites_checked: usize,
    pub generators_checked: usize,
    /// Generators whose sign in the register differs from `+1`; every one of
    /// them must be explained by the Pauli frame for a pass.
    pub sign_fixes: Vec<SignFix>,
    pub mismatched_generators: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignFix {
    pub site: Site,
    pub frame_explains: bool,
}

/// Checks the state held by `tableau` against `target`, after accounting for
/// the Pauli frame. Only sites whose qubit is in `exited` are considered.
pub fn verify_output(
    tableau: &StabilizerTableau,
    frame: &PauliFrame,
    target: &ClusterTarget,
    exited: &BTreeSet<usize>,
    consumed: &[bool],
) -> Result<VerificationReport, SimError> {
    if let Some(&q) = target.qubits.iter().find(|&&q| consumed.get(q).copied().unwrap_or(false)) {
        return Err(SimError::ConsumedTarget(q));
    }
    if tableau.num_qubits() != target.num_qubits {
        return Err(crate::error::EngineError::SizeMismatch { expected: target.num_qubits, got: tableau.num_qubits() }.into());
    }
    let spec = &target.spec;
    let inside: Vec<Site> = spec.sites().filter(|&s| exited.contains(&target.qubit(s))).collect();
    let inside_set: BTreeSet<Site> = inside.iter().copied().collect();
    let full = inside.len() == spec.num_sites();
    let keep: Vec<usize> = inside.iter().map(|&s| target.qubit(s)).collect();
    let complete: Vec<Site> = inside.iter().copied().filter(|&s| spec.neighbors(s).iter().all(|n| inside_set.contains(n))).collect();

    let sub = subgroup_on(tableau.stabilizers(), &keep);
    let rows: Vec<_> = sub.iter().map(symplectic_row).collect();
    let (basis, _) = EchelonBasis::build(2 * keep.len(), &rows);

    let mut mismatched = Vec::new();
    let mut sign_fixes = Vec::new();
    for &s in &complete {
        let g = target.generator(s);
        let local = g.restrict(&keep);
        match group_sign_of(&sub, &basis, &local) {
            None => mismatched.push(format!("{s} {g}: not a stabilizer")),
            Some(sign) => {
                let expected = frame.predicted_sign(g);
                if sign == Sign::Minus {
                    sign_fixes.push(SignFix { site: s, frame_explains: expected == Sign::Minus });
                }
                if sign != expected {
                    mismatched.push(format!("{s} {g}: sign {sign} but frame predicts {expected}"));
                }
            }
        }
    }
    if full && mismatched.is_empty() {
        let target_local: Vec<PauliString> = complete.iter().map(|&s| target.generator(s).restrict(&keep)).collect();
        let unsigned: Vec<PauliString> = target_local.iter().map(|g| g.clone().with_sign(Sign::Plus)).collect();
        if sub.len() != unsigned.len() || stabilizer_group_equal(&unsigned, &sub)? == GroupComparison::Different {
            mismatched.push(format!("register group of rank {} differs from the target of rank {}", sub.len(), unsigned.len()));
        }
    }
    Ok(VerificationReport {
        pass: mismatched.is_empty() && !complete.is_empty(),
        full_group: full,
        sites_checked: inside.len(),
        generators_checked: complete.len(),
        sign_fixes,
        mismatched_generators: mismatched,
    })
}

/// Graph implied by a log of measured operators: every measured operator
/// with an `X` on one site bonds that site to the sites carrying `Z`.
pub fn realized_graph(measured: &[(Site, Vec<(PhotonRole, Site)>)]) -> BTreeMap<Site, BTreeSet<Site>> {
    let mut adj: BTreeMap<Site, BTreeSet<Site>> = BTreeMap::new();
    for (center, parts) in measured {
        adj.entry(*center).or_default();
        for &(role, s) in parts {
            if role != PhotonRole::Center {
                adj.entry(*center).or_default().insert(s);
                adj.entry(s).or_default().insert(*center);
            }
        }
    }
    adj
}

/// Edge list of an adjacency map, each edge once.
pub fn export_graph(adj: &BTreeMap<Site, BTreeSet<Site>>) -> Vec<(Site, Site)> {
    let mut out = Vec::new();
    for (&a, ns) in adj {
        for &b in ns {
            if a < b {
                out.push((a, b));
            }
        }
    }
    out
}

/// Adjacency map of a lattice.
pub fn lattice_graph(spec: &LatticeSpec) -> BTreeMap<Site, BTreeSet<Site>> {
    spec.sites().map(|s| (s, spec.neighbors(s).into_iter().collect())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tableau::Gate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn all(n: usize) -> BTreeSet<usize> {
        (0..n).collect()
    }

    /// Independent construction: directly measure every generator on |+>^n
    /// and fold a Z on the site for each -1 outcome.
    fn measured_cluster(spec: &LatticeSpec, seed: u64) -> (StabilizerTableau, PauliFrame, ClusterTarget) {
        let target = cluster_stabilizers(spec);
        let n = spec.num_sites();
        let mut t = StabilizerTableau::new(n);
        for q in 0..n {
            t.apply(Gate::H(q)).unwrap();
        }
        let mut frame = PauliFrame::new(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (k, g) in target.generators.iter().enumerate() {
            let m = t.measure(g, &mut rng).unwrap();
            if m.outcome == Sign::Minus {
                frame.push_letter(k, Pauli::Z);
            }
        }
        (t, frame, target)
    }

    #[test]
    fn small_targets() {
        let one = cluster_stabilizers(&LatticeSpec::square(1, 1).unwrap());
        assert_eq!(one.generators[0].to_string(), "+X");
        let two = cluster_stabilizers(&LatticeSpec::square(2, 1).unwrap());
        let s: Vec<String> = two.generators.iter().map(|g| g.to_string()).collect();
        assert_eq!(s, ["+XZ", "+ZX"]);
    }

    #[test]
    fn center_of_three_by_three() {
        let spec = LatticeSpec::square(3, 3).unwrap();
        let t = cluster_stabilizers(&spec);
        let g = t.generator(Site::new(1, 1));
        let expected = PauliString::from_sparse(
            9,
            [
                (spec.index(Site::new(1, 0)), Pauli::Z),
                (spec.index(Site::new(0, 1)), Pauli::Z),
                (4, Pauli::X),
                (spec.index(Site::new(2, 1)), Pauli::Z),
                (spec.index(Site::new(1, 2)), Pauli::Z),
            ],
        );
        assert_eq!(g, &expected);
    }

    #[test]
    fn rejects_empty_lattice() {
        assert!(LatticeSpec::square(0, 3).is_err());
    }

    #[test]
    fn edge_counts() {
        assert_eq!(LatticeSpec::square(2, 1).unwrap().edges(), vec![(Site::new(0, 0), Site::new(1, 0))]);
        assert!(LatticeSpec::square(1, 1).unwrap().edges().is_empty());
        assert_eq!(LatticeSpec::square(2, 2).unwrap().edges().len(), 4);
        assert_eq!(LatticeSpec::rhombus(2, 2).unwrap().edges().len(), 3);
    }

    #[test]
    fn rhombus_bonds_are_symmetric() {
        let spec = LatticeSpec::rhombus(6, 5).unwrap();
        for s in spec.sites() {
            for (role, n) in spec.neighbor_roles(s) {
                let back = spec.neighbor_roles(n);
                let opposite = match role {
                    PhotonRole::Top => PhotonRole::Bottom,
                    PhotonRole::Bottom => PhotonRole::Top,
                    PhotonRole::Left => PhotonRole::Right,
                    PhotonRole::Right => PhotonRole::Left,
                    PhotonRole::Center => unreachable!(),
                };
                assert!(back.contains(&(opposite, s)), "{s} -> {n}");
            }
        }
    }

    #[test]
    fn measured_square_cluster_passes() {
        let spec = LatticeSpec::square(3, 3).unwrap();
        for seed in 0..5 {
            let (t, frame, target) = measured_cluster(&spec, seed);
            let r = verify_output(&t, &frame, &target, &all(9), &[]).unwrap();
            assert!(r.pass, "{r:?}");
            assert!(r.full_group);
            assert!(r.sign_fixes.iter().all(|f| f.frame_explains));
        }
    }

    #[test]
    fn two_by_two_matches_state_vector() {
        use crate::oracle::{oracle_compare, StateVector};
        let spec = LatticeSpec::square(2, 2).unwrap();
        let (mut t, frame, target) = measured_cluster(&spec, 3);
        t.apply_pauli(&frame.as_pauli(4)).unwrap();
        // graph state from CZs on |+>^4, written out by amplitudes
        let edges = spec.edges();
        let amps = (0..16usize)
            .map(|b| {
                let mut sign = 1.0;
                for (a, c) in &edges {
                    if (b >> spec.index(*a)) & 1 == 1 && (b >> spec.index(*c)) & 1 == 1 {
                        sign = -sign;
                    }
                }
                num_complex::Complex64::new(sign / 4.0, 0.0)
            })
            .collect();
        let psi = StateVector::from_amplitudes(amps).unwrap();
        assert!(oracle_compare(&t, &psi).unwrap());
        let _ = target;
    }

    #[test]
    fn product_state_fails() {
        let spec = LatticeSpec::square(2, 1).unwrap();
        let target = cluster_stabilizers(&spec);
        let mut t = StabilizerTableau::new(2);
        t.apply(Gate::H(0)).unwrap();
        t.apply(Gate::H(1)).unwrap();
        let r = verify_output(&t, &PauliFrame::new(2), &target, &all(2), &[]).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn square_is_not_rhombus() {
        let (t, frame, _) = measured_cluster(&LatticeSpec::square(2, 2).unwrap(), 0);
        let rh = cluster_stabilizers(&LatticeSpec::rhombus(2, 2).unwrap());
        let r = verify_output(&t, &frame, &rh, &all(4), &[]).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn frame_invariance() {
        let spec = LatticeSpec::square(3, 2).unwrap();
        for seed in 0..5 {
            let (t, frame, target) = measured_cluster(&spec, seed);
            let virt = verify_output(&t, &frame, &target, &all(6), &[]).unwrap();
            let mut phys = t.clone();
            phys.apply_pauli(&frame.as_pauli(6)).unwrap();
            let applied = verify_output(&phys, &PauliFrame::new(6), &target, &all(6), &[]).unwrap();
            assert_eq!(virt.pass, applied.pass);
        }
    }

    #[test]
    fn consumed_target_rejected() {
        let spec = LatticeSpec::square(2, 1).unwrap();
        let (t, frame, target) = measured_cluster(&spec, 0);
        assert_eq!(verify_output(&t, &frame, &target, &all(2), &[false, true]), Err(SimError::ConsumedTarget(1)));
    }

    #[test]
    fn partial_exit_checks_interior_generators_only() {
        let spec = LatticeSpec::square(4, 1).unwrap();
        let (t, frame, target) = measured_cluster(&spec, 2);
        let exited: BTreeSet<usize> = [0, 1, 2].into_iter().collect();
        let r = verify_output(&t, &frame, &target, &exited, &[]).unwrap();
        assert!(r.pass);
        assert!(!r.full_group);
        assert_eq!(r.generators_checked, 2);
    }

    #[test]
    fn realized_graph_from_log() {
        let spec = LatticeSpec::square(2, 2).unwrap();
        let log: Vec<_> = spec
            .sites()
            .map(|s| {
                let mut parts = spec.neighbor_roles(s);
                parts.push((PhotonRole::Center, s));
                (s, parts)
            })
            .collect();
        assert_eq!(realized_graph(&log), lattice_graph(&spec));
        assert_eq!(export_graph(&realized_graph(&log)).len(), 4);
    }

    mod props {
        use super::*;
        use crate::group::validate_generators;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn generators_commute_and_are_independent(w in 1usize..7, h in 1usize..7, rh in any::<bool>()) {
                let kind = if rh { LatticeKind::Rhombus } else { LatticeKind::Square };
                let t = cluster_stabilizers(&LatticeSpec::new(w, h, kind).unwrap());
                prop_assert!(validate_generators(&t.generators).is_ok());
                prop_assert_eq!(t.generators.len(), w * h);
            }

            #[test]
            fn square_weights(w in 1usize..8, h in 1usize..8) {
                let spec = LatticeSpec::square(w, h).unwrap();
                let t = cluster_stabilizers(&spec);
                for s in spec.sites() {
                    let wgt = t.generator(s).weight();
                    prop_assert!(wgt <= 5);
                    let interior = s.i > 0 && s.j > 0 && s.i + 1 < w && s.j + 1 < h;
                    prop_assert_eq!(wgt == 5, interior);
                }
            }
        }
    }
}
