//! Shared runtime for the three network layouts: register, frame, event
//! queue, trace, photon bookkeeping, detectors and final verification.

pub mod asynchronous;
pub mod constant;
pub mod sync;

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{ConsumeMode, NetworkKind, RunConfig};
use crate::engine::Engine;
use crate::error::SimError;
use crate::event::{
    check_budget_dt, detect, histogram, BudgetReport, DetectBasis, DetectionRecord, EventKind, EventQueue, SimEvent, SimResult,
};
use crate::frame::PauliFrame;
use crate::gf2::{BitRow, EchelonBasis};
use crate::lattice::{realized_graph, verify_output, ClusterTarget, LatticeSpec, SignFix, Site, VerificationReport};
use crate::module::{ModuleState, PhotonRole};
use crate::pauli::{Pauli, PauliString, Sign};
use crate::tableau::Gate;

/// Lines of trace attached to routing errors.
pub const TRACE_TAIL: usize = 20;

/// Registers up to this size get a full tableau consistency check at the end.
pub const DEBUG_CHECK_QUBITS: usize = 24;

/// Lattice radii searched in turn for by-product generators; the whole
/// lattice is tried last.
pub const BYPRODUCT_RADII: [usize; 2] = [4, 8];

/// One completed module cycle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub chip: usize,
    pub center: Site,
    pub participants: Vec<(PhotonRole, Site)>,
    pub init: u64,
    pub readout: u64,
    pub outcome: Sign,
    pub deterministic: bool,
}

/// Network-specific event handling.
pub trait Handler {
    fn handle(&mut self, rt: &mut Runtime, ev: SimEvent) -> Result<(), SimError>;
}

pub struct Runtime {
    pub spec: LatticeSpec,
    pub engine: Engine,
    pub frame: PauliFrame,
    pub rng: ChaCha8Rng,
    pub queue: EventQueue,
    pub trace: Vec<SimEvent>,
    pub cycles: Vec<CycleRecord>,
    pub detections: Vec<DetectionRecord>,
    consume: ConsumeMode,
    qubit: Vec<Option<usize>>,
    site_of_qubit: Vec<Option<usize>>,
    emitted: Vec<Option<u64>>,
    exited: Vec<Option<u64>>,
    detect_queued: Vec<bool>,
    /// Observable each consumed photon was measured in.
    detected: Vec<Option<Pauli>>,
    roles: Vec<Vec<PhotonRole>>,
    pending: Vec<usize>,
    measured: Vec<bool>,
    open: BTreeMap<usize, Vec<(usize, Pauli)>>,
    checked: Vec<bool>,
    sign_fixes: Vec<SignFix>,
    failures: Vec<(Site, String)>,
    byproducts_missing: usize,
}

impl Runtime {
    pub fn new(spec: LatticeSpec, seed: u64, consume: ConsumeMode) -> Self {
        let n = spec.num_sites();
        let pending = spec.sites().map(|s| spec.ball(s, 2).len()).collect();
        Runtime {
            spec,
            engine: Engine::new(0),
            frame: PauliFrame::new(0),
            rng: ChaCha8Rng::seed_from_u64(seed),
            queue: EventQueue::new(),
            trace: Vec::new(),
            cycles: Vec::new(),
            detections: Vec::new(),
            consume,
            qubit: vec![None; n],
            site_of_qubit: Vec::new(),
            emitted: vec![None; n],
            exited: vec![None; n],
            detect_queued: vec![false; n],
            detected: vec![None; n],
            roles: vec![Vec::new(); n],
            pending,
            measured: vec![false; n],
            open: BTreeMap::new(),
            checked: vec![false; n],
            sign_fixes: Vec::new(),
            failures: Vec::new(),
            byproducts_missing: 0,
        }
    }

    pub fn log(&mut self, ev: SimEvent) {
        self.trace.push(ev);
    }

    pub fn trace_tail(&self) -> Vec<String> {
        let start = self.trace.len().saturating_sub(TRACE_TAIL);
        self.trace[start..].iter().map(SimEvent::csv_line).collect()
    }

    pub fn new_module(&mut self) -> ModuleState {
        let m = ModuleState::allocate(&mut self.engine);
        self.frame.grow(self.engine.num_qubits());
        m
    }

    pub fn index(&self, s: Site) -> usize {
        self.spec.index(s)
    }

    pub fn qubit_of(&self, s: Site) -> Result<usize, SimError> {
        self.qubit[self.index(s)].ok_or_else(|| SimError::Config(format!("photon {s} used before emission")))
    }

    pub fn emitted_at(&self, s: Site) -> Option<u64> {
        self.emitted[self.index(s)]
    }

    pub fn exited_at(&self, s: Site) -> Option<u64> {
        self.exited[self.index(s)]
    }

    /// Creates the photon for `s` in `|+>`.
    pub fn emit(&mut self, s: Site, time: u64, detail: impl Into<String>) -> Result<usize, SimError> {
        let k = self.index(s);
        if self.qubit[k].is_some() {
            return Err(SimError::Config(format!("photon {s} emitted twice")));
        }
        let q = self.engine.allocate(1).start;
        self.engine.apply(Gate::H(q))?;
        self.frame.grow(self.engine.num_qubits());
        self.qubit[k] = Some(q);
        self.site_of_qubit.resize(q + 1, None);
        self.site_of_qubit[q] = Some(k);
        self.emitted[k] = Some(time);
        self.log(SimEvent::new(time, EventKind::Emit).photon(k).detail(detail));
        Ok(q)
    }

    /// One cavity pass with an interaction.
    pub fn interact(&mut self, module: &mut ModuleState, chip: usize, s: Site, role: PhotonRole, time: u64) -> Result<(), SimError> {
        let q = self.qubit_of(s)?;
        module.interact(&mut self.engine, q, role, time)?;
        let k = self.index(s);
        self.roles[k].push(role);
        self.open.entry(chip).or_default().push((q, role.letter()));
        self.log(SimEvent::new(time, EventKind::CavityIn).photon(k).chip(chip).detail(format!("role {}", role.code())));
        Ok(())
    }

    pub fn init_module(&mut self, module: &mut ModuleState, chip: usize, time: u64, detail: impl Into<String>) -> Result<(), SimError> {
        module.initialize(time)?;
        self.log(SimEvent::new(time, EventKind::AtomInit).chip(chip).detail(detail));
        Ok(())
    }

    /// Reads the atom out, records the cycle and releases detectors whose
    /// neighbourhood is now complete.
    pub fn readout(&mut self, module: &mut ModuleState, chip: usize, time: u64) -> Result<CycleRecord, SimError> {
        module.begin_readout()?;
        let out = module.readout(&mut self.engine, &mut self.frame, &mut self.rng, time)?;
        self.open.remove(&chip);
        let mut participants = Vec::new();
        for it in &out.log.interactions {
            let k = self.site_of_qubit[it.photon].expect("interacting photon has a site");
            participants.push((it.role, self.spec.site(k)));
        }
        let centers: Vec<Site> = participants.iter().filter(|(r, _)| *r == PhotonRole::Center).map(|&(_, s)| s).collect();
        let [center] = centers[..] else {
            return Err(SimError::Config(format!("chip {chip} cycle at t={time} has {} center photons", centers.len())));
        };
        let record = CycleRecord {
            chip,
            center,
            participants,
            init: out.log.init_time,
            readout: time,
            outcome: out.ideal_outcome,
            deterministic: out.deterministic,
        };
        let ci = self.index(center);
        self.log(
            SimEvent::new(time, EventKind::AtomReadout)
                .photon(ci)
                .chip(chip)
                .detail(format!("S{center} raw {} ideal {}", out.outcome, out.ideal_outcome)),
        );
        if out.ideal_outcome == Sign::Minus {
            self.log(SimEvent::new(time, EventKind::FrameUpdate).photon(ci).chip(chip).detail(format!("Z on {center}")));
        }
        self.cycles.push(record.clone());
        self.measured[ci] = true;
        for s in self.spec.ball(center, 2) {
            let k = self.index(s);
            self.pending[k] -= 1;
            self.try_detect(s, time);
        }
        Ok(record)
    }

    /// Photon leaves the last chip.
    pub fn exit(&mut self, s: Site, time: u64) {
        let k = self.index(s);
        self.exited[k] = Some(time);
        self.try_detect(s, time);
    }

    fn try_detect(&mut self, s: Site, time: u64) {
        let k = self.index(s);
        if self.consume == ConsumeMode::None || self.exited[k].is_none() || self.pending[k] > 0 || self.detect_queued[k] {
            return;
        }
        self.detect_queued[k] = true;
        self.queue.push(SimEvent::new(time, EventKind::Detect).photon(k));
    }

    /// Generator of `s` written on the current register.
    fn generator(&self, s: Site) -> Result<PauliString, SimError> {
        let mut g = PauliString::identity(self.engine.num_qubits());
        g.set(self.qubit_of(s)?, Pauli::X);
        for nb in self.spec.neighbors(s) {
            g.set(self.qubit_of(nb)?, Pauli::Z);
        }
        Ok(g)
    }

    fn check_generator(&mut self, s: Site) -> Result<(), SimError> {
        let k = self.index(s);
        if self.checked[k] {
            return Ok(());
        }
        self.checked[k] = true;
        let g = self.generator(s)?;
        if let Some(q) = g.support().into_iter().find(|&q| self.engine.is_consumed(q)) {
            self.failures.push((s, format!("S{s}: qubit {q} consumed before the check")));
            return Ok(());
        }
        let expected = self.frame.predicted_sign(&g);
        match self.engine.tableau().peek(&g)? {
            None => self.failures.push((s, format!("S{s} {g}: not a stabilizer"))),
            Some(sign) => {
                if sign == Sign::Minus {
                    self.sign_fixes.push(SignFix { site: s, frame_explains: expected == Sign::Minus });
                }
                if sign != expected {
                    self.failures.push((s, format!("S{s} {g}: sign {sign} but frame predicts {expected}")));
                }
            }
        }
        Ok(())
    }

    /// Operator that maps the `-1` outcome of `obs` on `p` to the `+1` one.
    ///
    /// Searches products of measured generators and untouched `|+>` photons
    /// near `p` that anticommute
    /// with `obs` at `p`, commute with every consumed photon's observable and
    /// with every letter already applied by a module still waiting for its
    /// readout. The product, restricted to the other live photons, is then a
    /// stabilizer that is safe to fold into the frame.
    fn byproduct(&self, p: Site, obs: Pauli) -> Result<Option<PauliString>, SimError> {
        let whole = self.spec.width + self.spec.height;
        for radius in BYPRODUCT_RADII.into_iter().chain([whole]) {
            if let Some(r) = self.byproduct_within(p, obs, radius)? {
                return Ok(Some(r));
            }
        }
        Ok(None)
    }

    fn byproduct_within(&self, p: Site, obs: Pauli, radius: usize) -> Result<Option<PauliString>, SimError> {
        let region = self.spec.ball(p, radius);
        let cands: Vec<Site> = region.iter().copied().filter(|&s| self.measured[self.index(s)]).collect();
        let mut gens: Vec<PauliString> = cands.iter().map(|&s| self.generator(s)).collect::<Result<_, _>>()?;
        for &s in &region {
            let k = self.index(s);
            if let (Some(q), true) = (self.qubit[k], self.roles[k].is_empty()) {
                let mut x = PauliString::identity(self.engine.num_qubits());
                x.set(q, Pauli::X);
                gens.push(x);
            }
        }
        let qp = self.qubit_of(p)?;
        let mut checks: Vec<(usize, Pauli)> = vec![(qp, obs)];
        let touched: BTreeSet<usize> = gens.iter().flat_map(|g| g.support()).collect();
        for &q in &touched {
            if let Some(k) = self.site_of_qubit[q] {
                if let Some(letter) = self.detected[k] {
                    checks.push((q, letter));
                }
            }
        }
        for &(q, letter) in self.open.values().flatten() {
            if touched.contains(&q) {
                checks.push((q, letter));
            }
        }
        let rows: Vec<BitRow> = gens
            .iter()
            .map(|g| {
                let mut r = BitRow::zeros(checks.len());
                for (c, &(q, letter)) in checks.iter().enumerate() {
                    r.set(c, g.get(q).anticommutes(letter));
                }
                r
            })
            .collect();
        let mut target = BitRow::zeros(checks.len());
        target.set(0, true);
        let (basis, _) = EchelonBasis::build(checks.len(), &rows);
        let Some(combo) = basis.decompose(&target) else { return Ok(None) };
        let mut g = PauliString::identity(self.engine.num_qubits());
        for k in combo.ones() {
            for q in gens[k].support() {
                g.set(q, g.get(q).compose(gens[k].get(q)));
            }
        }
        for q in g.support() {
            if q == qp || self.engine.is_consumed(q) {
                g.set(q, Pauli::I);
            }
        }
        Ok(Some(g))
    }

    fn handle_detect(&mut self, ev: SimEvent) -> Result<(), SimError> {
        let k = ev.photon.expect("detect events carry a photon");
        let p = self.spec.site(k);
        let nbhd = self.spec.ball(p, 1);
        for &s in &nbhd {
            self.check_generator(s)?;
        }
        let q = self.qubit_of(p)?;
        let basis = match self.consume {
            ConsumeMode::Z => DetectBasis::Z,
            _ => DetectBasis::X,
        };
        let byproduct = self.byproduct(p, basis.observable())?;
        let rec = detect(&mut self.engine, &mut self.frame, q, &basis, true, byproduct.as_ref(), ev.time, &mut self.rng)?;
        self.detected[k] = Some(basis.observable());
        if byproduct.is_none() && !rec.deterministic {
            self.byproducts_missing += 1;
        }
        self.log(SimEvent::new(ev.time, EventKind::Detect).photon(k).detail(format!("{} bit {}", basis.observable(), rec.bit())));
        self.detections.push(rec);
        Ok(())
    }

    /// Drains the queue through `handler`.
    pub fn run<H: Handler>(&mut self, handler: &mut H) -> Result<(), SimError> {
        while let Some(ev) = self.queue.pop() {
            if ev.kind == EventKind::Detect {
                self.handle_detect(ev)?;
            } else {
                handler.handle(self, ev)?;
            }
        }
        Ok(())
    }

    /// Roles each photon should have played, sorted.
    fn expected_roles(&self, s: Site) -> Vec<PhotonRole> {
        let mut v = vec![PhotonRole::Center];
        for nb in self.spec.neighbors(s) {
            for (role, t) in self.spec.neighbor_roles(nb) {
                if t == s {
                    v.push(role);
                }
            }
        }
        v.sort();
        v
    }

    pub fn role_coverage_ok(&self) -> bool {
        self.spec.sites().all(|s| {
            let mut got = self.roles[self.index(s)].clone();
            got.sort();
            got == self.expected_roles(s)
        })
    }

    pub fn roles_of(&self, s: Site) -> &[PhotonRole] {
        &self.roles[self.index(s)]
    }

    pub fn byproducts_missing(&self) -> usize {
        self.byproducts_missing
    }

    /// Graph implied by the measured operators.
    pub fn realized_graph(&self) -> BTreeMap<Site, BTreeSet<Site>> {
        let log: Vec<_> = self.cycles.iter().map(|c| (c.center, c.participants.clone())).collect();
        realized_graph(&log)
    }

    /// Final check of every generator, plus the full group comparison when
    /// nothing was consumed.
    pub fn finish(&mut self) -> Result<VerificationReport, SimError> {
        if self.engine.num_qubits() <= DEBUG_CHECK_QUBITS {
            self.engine.tableau().check_invariants().map_err(SimError::Config)?;
        }
        if let Some(s) = self.spec.sites().find(|&s| self.qubit[self.index(s)].is_none()) {
            return Err(SimError::Config(format!("photon {s} was never emitted")));
        }
        for s in self.spec.sites().collect::<Vec<_>>() {
            self.check_generator(s)?;
        }
        let mut report = VerificationReport {
            pass: false,
            full_group: false,
            sites_checked: self.spec.num_sites(),
            generators_checked: self.spec.num_sites(),
            sign_fixes: self.sign_fixes.clone(),
            mismatched_generators: self.failures.iter().map(|(_, m)| m.clone()).collect(),
        };
        if self.consume == ConsumeMode::None {
            let qubits: Vec<usize> = self.qubit.iter().map(|q| q.expect("checked above")).collect();
            let target = ClusterTarget::on_register(&self.spec, qubits.clone(), self.engine.num_qubits())?;
            let exited: BTreeSet<usize> =
                self.spec.sites().filter(|&s| self.exited_at(s).is_some()).map(|s| qubits[self.index(s)]).collect();
            let consumed: Vec<bool> = (0..self.engine.num_qubits()).map(|q| self.engine.is_consumed(q)).collect();
            let full = verify_output(self.engine.tableau(), &self.frame, &target, &exited, &consumed)?;
            report.full_group = full.full_group;
            for m in full.mismatched_generators {
                if !report.mismatched_generators.contains(&m) {
                    report.mismatched_generators.push(m);
                }
            }
            report.pass = full.pass && report.mismatched_generators.is_empty();
        } else {
            let undetected: Vec<Site> = self.spec.sites().filter(|&s| self.detected[self.index(s)].is_none()).collect();
            for s in undetected {
                report.mismatched_generators.push(format!("photon {s} never reached a detector"));
            }
            report.pass = report.mismatched_generators.is_empty();
        }
        Ok(report)
    }

    /// Sites with a failed generator check.
    pub fn failed_sites(&self) -> BTreeSet<Site> {
        self.failures.iter().map(|(s, _)| *s).collect()
    }
}

/// Network-specific numbers that go into a [`SimResult`].
#[derive(Clone, Debug, Default)]
pub struct RunStats {
    pub columns_emitted: usize,
    pub column_period_ticks: Option<u64>,
    pub warm_up_steps: Option<u64>,
    pub steps: Option<u64>,
    pub wall_time_ticks: u64,
    /// Per-photon (or per-chip transit) latencies.
    pub latencies: Vec<u64>,
}

/// Budget check shared by all networks.
pub fn budget_for(config: &RunConfig) -> Result<BudgetReport, SimError> {
    let b = check_budget_dt(config.delta_t_ns()?, config.feedforward_ns, config.slowdown);
    if !b.ok && !config.allow_budget_violation {
        return Err(SimError::Budget(format!(
            "feedforward of {} ns exceeds the {} ns measurement interval; use slowdown >= {} or allow the violation",
            b.feedforward_ns, b.interval_ns, b.min_slowdown
        )));
    }
    Ok(b)
}

pub fn assemble(rt: &Runtime, config: &RunConfig, verification: VerificationReport, budget: BudgetReport, stats: RunStats) -> SimResult {
    let failed: BTreeSet<usize> = rt.failed_sites().into_iter().map(|s| s.i).collect();
    let role_coverage_ok = rt.role_coverage_ok();
    let photons_exited = rt.spec.sites().filter(|&s| rt.exited_at(s).is_some()).count();
    let in_flight: Vec<usize> =
        rt.spec.sites().filter(|&s| rt.emitted_at(s).is_some() && rt.exited_at(s).is_none()).map(|s| rt.index(s)).collect();
    let columns_verified = if verification.pass { rt.spec.width } else { (0..rt.spec.width).filter(|i| !failed.contains(i)).count() };
    let windows = rt.cycles.iter().map(|c| c.readout - c.init);
    SimResult {
        network: config.network.name().to_string(),
        seed: config.seed,
        config: config.clone(),
        pass: verification.pass && role_coverage_ok,
        rows: rt.spec.height,
        columns_emitted: stats.columns_emitted,
        columns_verified,
        photons_emitted: rt.spec.sites().filter(|&s| rt.emitted_at(s).is_some()).count(),
        photons_exited,
        photons_verified: if verification.pass { rt.spec.num_sites() } else { 0 },
        photons_detected: rt.detections.len(),
        byproducts_missing: rt.byproducts_missing(),
        photons_in_flight: in_flight,
        module_cycles: rt.cycles.len(),
        column_period_ticks: stats.column_period_ticks,
        warm_up_steps: stats.warm_up_steps,
        steps: stats.steps,
        wall_time_ticks: stats.wall_time_ticks,
        latency_histogram: histogram(stats.latencies),
        atom_window_histogram: histogram(windows),
        role_coverage_ok,
        budget,
        event_count: rt.trace.len(),
        verification,
    }
}

/// Full output of a run: summary plus the logs the exporters need.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub result: SimResult,
    pub trace: Vec<SimEvent>,
    pub cycles: Vec<CycleRecord>,
    pub graph: BTreeMap<Site, BTreeSet<Site>>,
    pub spec: LatticeSpec,
    /// Final register and frame.
    pub engine: Engine,
    pub frame: PauliFrame,
    /// Register qubit of each site, row-major.
    pub qubits: Vec<usize>,
    pub exited: BTreeSet<usize>,
}

impl RunOutput {
    pub fn new(rt: Runtime, result: SimResult) -> Self {
        let graph = rt.realized_graph();
        let qubits: Vec<usize> = rt.qubit.iter().map(|q| q.unwrap_or(usize::MAX)).collect();
        let exited = rt.spec.sites().filter(|&s| rt.exited_at(s).is_some()).map(|s| qubits[rt.index(s)]).collect();
        RunOutput { result, trace: rt.trace, cycles: rt.cycles, graph, spec: rt.spec, engine: rt.engine, frame: rt.frame, qubits, exited }
    }

    /// Checks `engine` against the cluster target, reading signs through `frame`.
    pub fn verify_register(&self, engine: &Engine, frame: &PauliFrame) -> Result<VerificationReport, SimError> {
        let n = engine.num_qubits();
        let target = ClusterTarget::on_register(&self.spec, self.qubits.clone(), n)?;
        let consumed: Vec<bool> = (0..n).map(|q| engine.is_consumed(q)).collect();
        verify_output(engine.tableau(), frame, &target, &self.exited, &consumed)
    }
}

/// Runs whichever network `config` names.
pub fn simulate(config: &RunConfig) -> Result<RunOutput, SimError> {
    config.validate()?;
    match config.network {
        NetworkKind::Constant => constant::run_constant(config),
        NetworkKind::Sync => sync::run_sync(config),
        NetworkKind::Async => asynchronous::run_async(config),
    }
}
