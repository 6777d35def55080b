//! Device model of a single photonic module: an atom in a cavity that
//! projects a train of photons onto an eigenstate of a Pauli product.
//!
//! The atom starts in `|0>`. Each photon passes through the cavity once,
//! applying the module interaction `M` on `(photon, atom)`; photons in a
//! neighbour role are wrapped in Hadamard waveplates so that they contribute
//! `Z` instead of `X`. A final `Z` readout of the atom yields the parity of the
//! product, after which the atom is re-prepared in `|0>`.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::Engine;
use crate::error::ModuleError;
use crate::frame::{recovery_for, PauliFrame};
use crate::pauli::{Pauli, PauliString, Sign};
use crate::tableau::Gate;

/// Largest operator a module measures in any of the networks.
pub const MAX_PHOTONS_PER_CYCLE: usize = 5;

/// Position of a photon within a cluster stabilizer.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PhotonRole {
    Center,
    Top,
    Bottom,
    Left,
    Right,
}

impl PhotonRole {
    pub const ALL: [PhotonRole; 5] = [PhotonRole::Right, PhotonRole::Top, PhotonRole::Center, PhotonRole::Bottom, PhotonRole::Left];

    /// Whether the pass is wrapped in Hadamard waveplates.
    pub fn basis_rotation(self) -> bool {
        self != PhotonRole::Center
    }

    /// Letter this role contributes to the measured operator.
    pub fn letter(self) -> Pauli {
        if self.basis_rotation() {
            Pauli::Z
        } else {
            Pauli::X
        }
    }

    pub fn code(self) -> char {
        match self {
            PhotonRole::Center => 'C',
            PhotonRole::Top => 'T',
            PhotonRole::Bottom => 'B',
            PhotonRole::Left => 'L',
            PhotonRole::Right => 'R',
        }
    }

    pub fn from_code(c: char) -> Option<Self> {
        Some(match c {
            'C' => PhotonRole::Center,
            'T' => PhotonRole::Top,
            'B' => PhotonRole::Bottom,
            'L' => PhotonRole::Left,
            'R' => PhotonRole::Right,
            _ => return None,
        })
    }
}

impl fmt::Display for PhotonRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

/// Time (in the units of `1/g`) for the atom to pick up a `pi` phase from one photon.
pub fn interaction_time(g: f64, delta: f64) -> Result<f64, ModuleError> {
    if g.is_nan() || g <= 0.0 || !g.is_finite() {
        return Err(ModuleError::Parameter(format!("coupling g must be positive, got {g}")));
    }
    if delta == 0.0 || !delta.is_finite() {
        return Err(ModuleError::Parameter(format!("detuning must be non-zero, got {delta}")));
    }
    Ok(PI * delta.abs() / (g * g))
}

/// Atom-cavity coupling parameters and the derived timing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionParams {
    pub g: f64,
    pub delta: f64,
    /// Off-resonant light shift `-g^2 / delta`.
    pub beta: f64,
    pub t_int: f64,
    /// Unit interaction interval in seconds.
    pub delta_t: f64,
    /// Atomic readout interval in seconds.
    pub delta_t_prime: f64,
}

impl InteractionParams {
    pub fn new(g: f64, delta: f64, delta_t: f64, delta_t_prime: f64) -> Result<Self, ModuleError> {
        let t_int = interaction_time(g, delta)?;
        if delta_t.is_nan() || delta_t <= 0.0 {
            return Err(ModuleError::Parameter(format!("delta_t must be positive, got {delta_t}")));
        }
        if delta_t_prime.is_nan() || delta_t_prime < 0.0 {
            return Err(ModuleError::Parameter(format!("delta_t' must be non-negative, got {delta_t_prime}")));
        }
        Ok(InteractionParams { g, delta, beta: -g * g / delta, t_int, delta_t, delta_t_prime })
    }

    /// Parameters whose unit interval is the interaction time itself.
    pub fn from_coupling(g: f64, delta: f64, delta_t_prime: f64) -> Result<Self, ModuleError> {
        let t = interaction_time(g, delta)?;
        Self::new(g, delta, t, delta_t_prime)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModulePhase {
    Idle,
    Initialized,
    Interacting { count: usize },
    ReadingOut,
}

impl fmt::Display for ModulePhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModulePhase::Idle => f.write_str("Idle"),
            ModulePhase::Initialized => f.write_str("Initialized"),
            ModulePhase::Interacting { count } => write!(f, "Interacting({count})"),
            ModulePhase::ReadingOut => f.write_str("ReadingOut"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interaction {
    pub photon: usize,
    pub role: PhotonRole,
    pub time: u64,
}

/// One init-to-readout cycle of the atom.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleLog {
    pub init_time: u64,
    pub readout_time: Option<u64>,
    pub interactions: Vec<Interaction>,
}

/// Ticks between atom initialisation and readout of a completed cycle.
pub fn atom_window(log: &CycleLog) -> Result<u64, ModuleError> {
    match log.readout_time {
        Some(r) => Ok(r - log.init_time),
        None => Err(ModuleError::IncompleteCycle),
    }
}

/// Result of one module cycle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParityOutcome {
    /// Unsigned operator the photons were projected onto.
    pub operator: PauliString,
    /// Raw atom result; `-1` means the photons sit in the `-1` eigenspace.
    pub outcome: Sign,
    /// Outcome with the frame accounted for; drives the recovery.
    pub ideal_outcome: Sign,
    pub deterministic: bool,
    pub measurement_id: u64,
    pub log: CycleLog,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModuleState {
    atom: usize,
    phase: ModulePhase,
    current: Option<CycleLog>,
    history: Vec<CycleLog>,
}

impl ModuleState {
    /// A module whose atom is qubit `atom` (which must be in `|0>`).
    pub fn new(atom: usize) -> Self {
        ModuleState { atom, phase: ModulePhase::Idle, current: None, history: Vec::new() }
    }

    /// Allocates a fresh atom qubit on `engine`.
    pub fn allocate(engine: &mut Engine) -> Self {
        let atom = engine.allocate(1).start;
        Self::new(atom)
    }

    pub fn atom(&self) -> usize {
        self.atom
    }

    pub fn phase(&self) -> ModulePhase {
        self.phase
    }

    pub fn history(&self) -> &[CycleLog] {
        &self.history
    }

    pub fn current(&self) -> Option<&CycleLog> {
        self.current.as_ref()
    }

    fn transition(&mut self, to: ModulePhase) -> Result<(), ModuleError> {
        let ok = matches!(
            (self.phase, to),
            (ModulePhase::Idle, ModulePhase::Initialized)
                | (ModulePhase::Initialized, ModulePhase::Interacting { .. })
                | (ModulePhase::Interacting { .. }, ModulePhase::Interacting { .. })
                | (ModulePhase::Interacting { .. }, ModulePhase::ReadingOut)
                | (ModulePhase::ReadingOut, ModulePhase::Idle)
        );
        if !ok {
            return Err(ModuleError::Phase { from: self.phase.to_string(), to: to.to_string() });
        }
        self.phase = to;
        Ok(())
    }

    /// Prepares the atom. The atom is already in `|0>` between cycles.
    pub fn initialize(&mut self, time: u64) -> Result<(), ModuleError> {
        if self.phase != ModulePhase::Idle {
            return Err(ModuleError::AtomBusy(self.phase.to_string()));
        }
        self.transition(ModulePhase::Initialized)?;
        self.current = Some(CycleLog { init_time: time, readout_time: None, interactions: Vec::new() });
        Ok(())
    }

    /// One photon pass through the cavity.
    pub fn interact(&mut self, engine: &mut Engine, photon: usize, role: PhotonRole, time: u64) -> Result<(), ModuleError> {
        if engine.is_consumed(photon) {
            return Err(ModuleError::PhotonConsumed(photon));
        }
        let count = match self.phase {
            ModulePhase::Initialized => 0,
            ModulePhase::Interacting { count } => count,
            other => return Err(ModuleError::Phase { from: other.to_string(), to: "Interacting".into() }),
        };
        if count >= MAX_PHOTONS_PER_CYCLE {
            return Err(ModuleError::PhotonCount(count + 1));
        }
        if role.basis_rotation() {
            engine.apply(Gate::H(photon))?;
        }
        engine.apply(Gate::Module { photon, atom: self.atom })?;
        if role.basis_rotation() {
            engine.apply(Gate::H(photon))?;
        }
        self.transition(ModulePhase::Interacting { count: count + 1 })?;
        if let Some(log) = self.current.as_mut() {
            log.interactions.push(Interaction { photon, role, time });
        }
        Ok(())
    }

    pub fn begin_readout(&mut self) -> Result<(), ModuleError> {
        self.transition(ModulePhase::ReadingOut)
    }

    /// Operator accumulated so far, rebuilt from the interaction log.
    pub fn accumulated_operator(&self, n: usize) -> PauliString {
        let mut p = PauliString::identity(n);
        if let Some(log) = &self.current {
            for i in &log.interactions {
                p.set(i.photon, p.get(i.photon).compose(i.role.letter()));
            }
        }
        p
    }

    /// Measures the atom, updates the frame and returns the atom to `Idle`.
    pub fn readout<R: Rng + ?Sized>(
        &mut self,
        engine: &mut Engine,
        frame: &mut PauliFrame,
        rng: &mut R,
        time: u64,
    ) -> Result<ParityOutcome, ModuleError> {
        if self.phase != ModulePhase::ReadingOut {
            return Err(ModuleError::Phase { from: self.phase.to_string(), to: "Idle".into() });
        }
        let operator = self.accumulated_operator(engine.num_qubits());
        let atom_z = PauliString::single(engine.num_qubits(), self.atom, Pauli::Z);
        let (id, m) = engine.measure(&atom_z, rng)?;
        // The atom is now a Z eigenstate; re-prepare |0>.
        if m.outcome == Sign::Minus {
            engine.apply(Gate::X(self.atom))?;
        }
        frame.grow(engine.num_qubits());
        let ideal = m.outcome.times(frame.predicted_sign(&operator));
        frame.record(id, ideal, &recovery_for(&operator));
        let mut log = self.current.take().ok_or(ModuleError::IncompleteCycle)?;
        log.readout_time = Some(time);
        self.history.push(log.clone());
        self.transition(ModulePhase::Idle)?;
        Ok(ParityOutcome { operator, outcome: m.outcome, ideal_outcome: ideal, deterministic: m.deterministic, measurement_id: id, log })
    }
}

/// Runs a complete cycle: initialise at `start`, one photon per tick, readout
/// `readout_ticks` after the last interaction.
#[allow(clippy::too_many_arguments)]
pub fn module_cycle<R: Rng + ?Sized>(
    engine: &mut Engine,
    module: &mut ModuleState,
    photons: &[usize],
    roles: &[PhotonRole],
    frame: &mut PauliFrame,
    rng: &mut R,
    start: u64,
    readout_ticks: u64,
) -> Result<ParityOutcome, ModuleError> {
    if photons.is_empty() || photons.len() > MAX_PHOTONS_PER_CYCLE {
        return Err(ModuleError::PhotonCount(photons.len()));
    }
    if photons.len() != roles.len() {
        return Err(ModuleError::RoleMismatch { photons: photons.len(), roles: roles.len() });
    }
    if let Some(&p) = photons.iter().find(|&&p| engine.is_consumed(p)) {
        return Err(ModuleError::PhotonConsumed(p));
    }
    module.initialize(start)?;
    let mut t = start;
    for (&p, &r) in photons.iter().zip(roles) {
        module.interact(engine, p, r, t)?;
        t += 1;
    }
    module.begin_readout()?;
    module.readout(engine, frame, rng, t + readout_ticks)
}
