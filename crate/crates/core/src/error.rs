use thiserror::Error;

/// Failures of the stabilizer engine and its oracle.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("qubit {qubit} out of range for {n} qubits")]
    OutOfRange { qubit: usize, n: usize },
    #[error("duplicate target qubit {0} on a two-qubit gate")]
    DuplicateTarget(usize),
    #[error("cannot measure a zero-weight Pauli product")]
    ZeroWeight,
    #[error("signed Pauli products are not accepted by the engine; track signs in the Pauli frame")]
    SignedProduct,
    #[error("operator carries an imaginary phase")]
    ImaginaryPhase,
    #[error("qubit count mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("generator set is not a set of independent commuting operators: {0}")]
    InvalidGenerators(String),
    #[error("state-vector oracle supports at most {limit} qubits, got {n}")]
    OracleLimit { n: usize, limit: usize },
    #[error("cannot parse Pauli string {0:?}")]
    Parse(String),
}

/// Failures of a photonic module cycle.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModuleError {
    #[error("invalid interaction parameters: {0}")]
    Parameter(String),
    #[error("module atom is busy (phase {0}); double booking")]
    AtomBusy(String),
    #[error("photon {0} was already consumed by a detector")]
    PhotonConsumed(usize),
    #[error("a module cycle takes 1 to 5 photons, got {0}")]
    PhotonCount(usize),
    #[error("{photons} photons but {roles} roles")]
    RoleMismatch { photons: usize, roles: usize },
    #[error("illegal module phase transition from {from} to {to}")]
    Phase { from: String, to: String },
    #[error("module cycle incomplete")]
    IncompleteCycle,
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Failures while running a network simulation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("routing collision at t={time}: {detail}")]
    RoutingCollision { time: u64, detail: String, trace_tail: Vec<String> },
    #[error("cavity double occupancy at t={time} on chip {chip}: {detail}")]
    CavityDoubleOccupancy { time: u64, chip: String, detail: String, trace_tail: Vec<String> },
    #[error("arrival phase mismatch at t={time} on chip {chip}: {detail}")]
    PhaseMismatch { time: u64, chip: String, detail: String, trace_tail: Vec<String> },
    #[error("photon {0} detected before leaving the network")]
    InFlightDetection(usize),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("timing budget violated: {0}")]
    Budget(String),
    #[error("cannot write {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("target references consumed qubit {0}")]
    ConsumedTarget(usize),
    #[error(transparent)]
    Module(#[from] ModuleError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}
