//! Discrete-event core: integer-tick clock, event queue, photon sources,
//! detectors and the feedforward timing budget.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::Engine;
use crate::error::SimError;
use crate::frame::PauliFrame;
use crate::lattice::VerificationReport;
use crate::pauli::{Pauli, PauliString, Sign};
use crate::tableau::{conjugate, Gate};

/// Event kinds in tie-break order: at equal times, earlier variants run first.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EventKind {
    Detect,
    AtomReadout,
    FrameUpdate,
    AtomInit,
    Emit,
    CavityOut,
    ArriveAtChip,
    CavityIn,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::Detect => "Detect",
            EventKind::AtomReadout => "AtomReadout",
            EventKind::FrameUpdate => "FrameUpdate",
            EventKind::AtomInit => "AtomInit",
            EventKind::Emit => "Emit",
            EventKind::CavityOut => "CavityOut",
            EventKind::ArriveAtChip => "ArriveAtChip",
            EventKind::CavityIn => "CavityIn",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            EventKind::Detect,
            EventKind::AtomReadout,
            EventKind::FrameUpdate,
            EventKind::AtomInit,
            EventKind::Emit,
            EventKind::CavityOut,
            EventKind::ArriveAtChip,
            EventKind::CavityIn,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A timestamped event. `photon` is a lattice-site index and `chip` a
/// network-specific chip index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimEvent {
    pub time: u64,
    pub kind: EventKind,
    pub photon: Option<usize>,
    pub chip: Option<usize>,
    pub detail: String,
}

impl SimEvent {
    pub fn new(time: u64, kind: EventKind) -> Self {
        SimEvent { time, kind, photon: None, chip: None, detail: String::new() }
    }

    pub fn photon(mut self, p: usize) -> Self {
        self.photon = Some(p);
        self
    }

    pub fn chip(mut self, c: usize) -> Self {
        self.chip = Some(c);
        self
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = d.into();
        self
    }

    fn id(&self) -> usize {
        self.photon.or(self.chip).unwrap_or(usize::MAX)
    }

    /// One trace line, `time,kind,photon,chip,detail`.
    pub fn csv_line(&self) -> String {
        let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        format!("{},{},{},{},{}", self.time, self.kind, opt(self.photon), opt(self.chip), self.detail.replace(',', ";"))
    }
}

type Key = (u64, EventKind, usize, u64);

/// Priority queue ordered by `(time, kind, id)`, then insertion order.
#[derive(Clone, Debug, Default)]
pub struct EventQueue {
    events: BTreeMap<Key, SimEvent>,
    seq: u64,
    now: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Time of the last batch handed out.
    pub fn now(&self) -> u64 {
        self.now
    }

    /// Schedules an event. Events in the past are clamped to the current time.
    pub fn push(&mut self, mut ev: SimEvent) {
        ev.time = ev.time.max(self.now);
        let key = (ev.time, ev.kind, ev.id(), self.seq);
        self.seq += 1;
        self.events.insert(key, ev);
    }

    pub fn extend(&mut self, evs: impl IntoIterator<Item = SimEvent>) {
        for e in evs {
            self.push(e);
        }
    }

    /// Removes the single next event. Events pushed while handling it still
    /// sort ahead of later-kind events at the same tick.
    pub fn pop(&mut self) -> Option<SimEvent> {
        let (key, ev) = self.events.pop_first()?;
        self.now = key.0;
        Some(ev)
    }

    /// Removes and returns every queued event at the earliest pending time.
    pub fn advance(&mut self) -> Option<Vec<SimEvent>> {
        let (&(t, ..), _) = self.events.iter().next()?;
        self.now = t;
        let rest = self.events.split_off(&(t + 1, EventKind::Detect, 0, 0));
        let batch = std::mem::replace(&mut self.events, rest);
        Some(batch.into_values().collect())
    }
}

/// Photon source timing, in ticks.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceConfig {
    /// Ticks between photons on one row.
    pub interval: u64,
    /// Offset between adjacent rows.
    pub stagger: u64,
    /// Offset of row 0.
    pub phase: u64,
    /// Uniform rate-slowdown multiplier.
    pub slowdown: u64,
}

impl Default for SourceConfig {
    fn default() -> Self {
        SourceConfig { interval: 2, stagger: 1, phase: 0, slowdown: 1 }
    }
}

impl SourceConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.slowdown == 0 {
            return Err(SimError::Config("slowdown must be at least 1".into()));
        }
        if self.interval == 0 {
            return Err(SimError::Config("emission interval must be positive".into()));
        }
        Ok(())
    }

    /// Emission tick of photon `m` on `row`.
    pub fn emission_time(&self, row: usize, m: usize) -> u64 {
        let offset = (self.phase + row as u64 * self.stagger) % self.interval;
        (offset + m as u64 * self.interval) * self.slowdown
    }
}

/// Emit events for every photon with emission time below `duration`.
/// The photon field carries the per-row photon number; the chip field the row.
pub fn emit_schedule(source: &SourceConfig, rows: usize, duration: u64) -> Vec<SimEvent> {
    let mut out = Vec::new();
    for row in 0..rows {
        let mut m = 0;
        loop {
            let t = source.emission_time(row, m);
            if t >= duration {
                break;
            }
            out.push(SimEvent::new(t, EventKind::Emit).photon(m).chip(row).detail(format!("row {row}")));
            m += 1;
        }
    }
    out.sort_by_key(|e| (e.time, e.chip, e.photon));
    out
}

/// Atom-cavity systems with their expected interaction times.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum System {
    Cs,
    Rb,
    Nv,
}

impl System {
    pub fn interaction_ns(self) -> f64 {
        match self {
            System::Cs => 300.0,
            System::Rb => 30.0,
            System::Nv => 1.0,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cs" => Some(System::Cs),
            "rb" => Some(System::Rb),
            "nv" => Some(System::Nv),
            _ => None,
        }
    }
}

pub const DEFAULT_FEEDFORWARD_NS: f64 = 150.0;

/// Detector and feedforward budget against the per-photon measurement interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetReport {
    pub delta_t_ns: f64,
    pub feedforward_ns: f64,
    pub slowdown: u64,
    pub interval_ns: f64,
    pub ok: bool,
    /// Smallest slowdown for which the budget holds.
    pub min_slowdown: u64,
}

pub fn check_budget_dt(delta_t_ns: f64, feedforward_ns: f64, slowdown: u64) -> BudgetReport {
    let interval_ns = 2.0 * delta_t_ns * slowdown as f64;
    let min_slowdown = if feedforward_ns <= 0.0 { 1 } else { ((feedforward_ns / (2.0 * delta_t_ns)).ceil() as u64).max(1) };
    BudgetReport { delta_t_ns, feedforward_ns, slowdown, interval_ns, ok: feedforward_ns <= interval_ns, min_slowdown }
}

pub fn check_budget(system: System, feedforward_ns: f64, slowdown: u64) -> BudgetReport {
    check_budget_dt(system.interaction_ns(), feedforward_ns, slowdown)
}

/// Measurement basis of a detector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DetectBasis {
    /// Polarisation H/V.
    Z,
    X,
    /// Single-qubit Cliffords applied by waveplates before an H/V measurement.
    Clifford(Vec<Gate>),
}

impl DetectBasis {
    /// Letter of the observable actually measured.
    pub fn observable(&self) -> Pauli {
        match self {
            DetectBasis::Z => Pauli::Z,
            DetectBasis::X => Pauli::X,
            DetectBasis::Clifford(gates) => {
                // U^dagger Z U; S and S^dagger act identically on letters
                let mut p = PauliString::single(1, 0, Pauli::Z);
                for g in gates.iter().rev() {
                    p = conjugate(relabel(*g), &p);
                }
                p.get(0)
            }
        }
    }
}

fn relabel(g: Gate) -> Gate {
    match g {
        Gate::H(_) => Gate::H(0),
        Gate::S(_) => Gate::S(0),
        Gate::X(_) => Gate::X(0),
        Gate::Y(_) => Gate::Y(0),
        Gate::Z(_) => Gate::Z(0),
        other => other,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub qubit: usize,
    pub time: u64,
    pub raw: Sign,
    /// Outcome after removing the frame.
    pub ideal: Sign,
    pub deterministic: bool,
    pub byproduct: Option<String>,
}

impl DetectionRecord {
    /// Classical bit: `0` for `+1`.
    pub fn bit(&self) -> u8 {
        self.ideal.bit()
    }
}

/// Measures an exited photon. On an ideal `-1` outcome the optional
/// `byproduct` (an operator anticommuting with the observable on `qubit`,
/// supported elsewhere) is folded into the frame.
#[allow(clippy::too_many_arguments)]
pub fn detect<R: Rng + ?Sized>(
    engine: &mut Engine,
    frame: &mut PauliFrame,
    qubit: usize,
    basis: &DetectBasis,
    exited: bool,
    byproduct: Option<&PauliString>,
    time: u64,
    rng: &mut R,
) -> Result<DetectionRecord, SimError> {
    if !exited {
        return Err(SimError::InFlightDetection(qubit));
    }
    if engine.is_consumed(qubit) {
        return Err(crate::error::ModuleError::PhotonConsumed(qubit).into());
    }
    let n = engine.num_qubits();
    let (observable, frame_letter) = match basis {
        DetectBasis::Z => (Pauli::Z, frame.get(qubit)),
        DetectBasis::X => (Pauli::X, frame.get(qubit)),
        DetectBasis::Clifford(gates) => {
            let mut f = PauliString::single(n, qubit, frame.get(qubit));
            for &g in gates {
                if g.qubits() != [qubit] {
                    return Err(SimError::Config(format!("detector waveplate {g:?} must act on qubit {qubit} only")));
                }
                engine.apply(g)?;
                f = conjugate(g, &f);
            }
            (Pauli::Z, f.get(qubit))
        }
    };
    let (id, m) = engine.measure(&PauliString::single(n, qubit, observable), rng)?;
    let ideal = if frame_letter.anticommutes(observable) { m.outcome.flip() } else { m.outcome };
    let recovery = byproduct.cloned().unwrap_or_else(|| PauliString::identity(n));
    frame.record(id, ideal, &recovery);
    frame.clear_qubit(qubit);
    engine.mark_consumed(qubit);
    Ok(DetectionRecord {
        qubit,
        time,
        raw: m.outcome,
        ideal,
        deterministic: m.deterministic,
        byproduct: (ideal == Sign::Minus).then(|| byproduct.map(|b| b.to_string())).flatten(),
    })
}

/// Aggregate result of one network run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub network: String,
    pub seed: u64,
    pub config: crate::config::RunConfig,
    pub pass: bool,
    pub verification: VerificationReport,
    pub rows: usize,
    pub columns_emitted: usize,
    pub columns_verified: usize,
    pub photons_emitted: usize,
    pub photons_exited: usize,
    pub photons_verified: usize,
    pub photons_detected: usize,
    /// Detections whose `-1` outcome had no correcting operator on live photons.
    pub byproducts_missing: usize,
    pub photons_in_flight: Vec<usize>,
    pub module_cycles: usize,
    /// Ticks between consecutive column completions in steady state.
    pub column_period_ticks: Option<u64>,
    pub warm_up_steps: Option<u64>,
    pub steps: Option<u64>,
    pub wall_time_ticks: u64,
    pub latency_histogram: BTreeMap<u64, usize>,
    pub atom_window_histogram: BTreeMap<u64, usize>,
    pub role_coverage_ok: bool,
    pub budget: BudgetReport,
    pub event_count: usize,
}

/// Histogram helper.
pub fn histogram(values: impl IntoIterator<Item = u64>) -> BTreeMap<u64, usize> {
    let mut h = BTreeMap::new();
    for v in values {
        *h.entry(v).or_insert(0) += 1;
    }
    h
}

/// Common difference of a sequence of completion times, ignoring the first
/// `skip` gaps; `None` if the gaps are not all equal.
pub fn steady_period(times: &[u64], skip: usize) -> Option<u64> {
    let gaps: BTreeSet<u64> = times.windows(2).skip(skip).map(|w| w[1] - w[0]).collect();
    if gaps.len() == 1 {
        gaps.into_iter().next()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn staggered_sources() {
        let s = SourceConfig::default();
        let evs = emit_schedule(&s, 2, 6);
        let times = |row| -> Vec<u64> { evs.iter().filter(|e| e.chip == Some(row)).map(|e| e.time).collect() };
        assert_eq!(times(0), vec![0, 2, 4]);
        assert_eq!(times(1), vec![1, 3, 5]);
        assert!(emit_schedule(&s, 0, 6).is_empty());
        assert!(emit_schedule(&s, 3, 0).is_empty());
    }

    #[test]
    fn slowdown_scales_schedule() {
        let s = SourceConfig { slowdown: 3, ..SourceConfig::default() };
        let evs = emit_schedule(&s, 2, 18);
        let times: Vec<u64> = evs.iter().map(|e| e.time).collect();
        assert_eq!(times, vec![0, 3, 6, 9, 12, 15]);
    }

    #[test]
    fn ties_break_by_kind() {
        let mut q = EventQueue::new();
        q.push(SimEvent::new(4, EventKind::Emit).photon(0));
        q.push(SimEvent::new(4, EventKind::Detect).photon(9));
        q.push(SimEvent::new(2, EventKind::CavityIn).photon(1));
        assert_eq!(q.advance().unwrap()[0].kind, EventKind::CavityIn);
        let batch = q.advance().unwrap();
        assert_eq!(batch.iter().map(|e| e.kind).collect::<Vec<_>>(), vec![EventKind::Detect, EventKind::Emit]);
        assert!(q.advance().is_none());
        assert_eq!(q.now(), 4);
    }

    #[test]
    fn past_events_clamped() {
        let mut q = EventQueue::new();
        q.push(SimEvent::new(5, EventKind::Emit));
        q.advance();
        q.push(SimEvent::new(1, EventKind::Detect));
        assert_eq!(q.advance().unwrap()[0].time, 5);
    }

    #[test]
    fn budget_examples() {
        let cs = check_budget(System::Cs, 150.0, 1);
        assert_eq!(cs.interval_ns, 600.0);
        assert!(cs.ok);
        let nv = check_budget(System::Nv, 150.0, 1);
        assert!(!nv.ok);
        assert_eq!(nv.min_slowdown, 75);
        assert!(check_budget(System::Nv, 150.0, 75).ok);
        assert!(check_budget(System::Nv, 0.0, 1).ok);
        assert_eq!(check_budget(System::Rb, 150.0, 1).min_slowdown, 3);
    }

    #[test]
    fn h_photon_reads_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut e = Engine::new(1);
        let mut f = PauliFrame::new(1);
        let r = detect(&mut e, &mut f, 0, &DetectBasis::Z, true, None, 3, &mut rng).unwrap();
        assert_eq!(r.bit(), 0);
        assert!(r.deterministic);
        assert!(e.is_consumed(0));
    }

    #[test]
    fn in_flight_detection_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut e = Engine::new(1);
        let mut f = PauliFrame::new(1);
        assert_eq!(detect(&mut e, &mut f, 0, &DetectBasis::X, false, None, 0, &mut rng), Err(SimError::InFlightDetection(0)));
    }

    #[test]
    fn clifford_basis_observable() {
        assert_eq!(DetectBasis::Clifford(vec![Gate::H(0)]).observable(), Pauli::X);
        assert_eq!(DetectBasis::Clifford(vec![Gate::S(0), Gate::H(0)]).observable(), Pauli::Y);
        assert_eq!(DetectBasis::Clifford(vec![]).observable(), Pauli::Z);
    }

    /// Two-photon cluster (XZ, ZX). Measuring photon 0 in X leaves photon 1
    /// in a Z eigenstate whose sign follows the outcome; the by-product X on
    /// photon 1 restores the `+1` branch. Cross-checked with the state vector.
    #[test]
    fn edge_photon_x_detection_byproduct() {
        use crate::oracle::StateVector;
        let mut seen = BTreeSet::new();
        for seed in 0..32 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut e = Engine::new(2);
            let prep = [Gate::H(0), Gate::Cnot { control: 0, target: 1 }, Gate::H(1)];
            e.apply_all(&prep).unwrap();
            let mut f = PauliFrame::new(2);
            let bp = PauliString::parse("IX").unwrap();
            let r = detect(&mut e, &mut f, 0, &DetectBasis::X, true, Some(&bp), 0, &mut rng).unwrap();
            assert!(!r.deterministic);
            seen.insert(r.bit());
            assert_eq!(f.get(1), if r.ideal == Sign::Minus { Pauli::X } else { Pauli::I });
            let mut t = e.tableau().clone();
            t.apply_pauli(&f.as_pauli(2)).unwrap();
            assert_eq!(t.peek(&PauliString::parse("IZ").unwrap()).unwrap(), Some(Sign::Plus));
            // oracle: the same circuit by amplitudes, then the +1 branch
            let mut psi = StateVector::zero(2).unwrap();
            for g in prep {
                psi.apply(g).unwrap();
            }
            let m = psi.oracle_measure(&PauliString::parse("XI").unwrap()).unwrap();
            let plus = m.post_state(Sign::Plus).unwrap();
            assert!((plus.expectation(&PauliString::parse("IZ").unwrap()).unwrap() - 1.0).abs() < 1e-9);
        }
        assert_eq!(seen.len(), 2);
    }

    #[test]
    fn steady_period_detection() {
        assert_eq!(steady_period(&[3, 9, 15, 21], 0), Some(6));
        assert_eq!(steady_period(&[0, 5, 11, 17], 1), Some(6));
        assert_eq!(steady_period(&[0, 5, 11, 18], 0), None);
    }
}
