//! Stabilizer-level simulation of photonic-module networks that prepare
//! two-dimensional cluster states.

pub mod config;
pub mod engine;
pub mod error;
pub mod event;
pub mod export;
pub mod frame;
pub mod gf2;
pub mod group;
pub mod lattice;
pub mod module;
pub mod network;
pub mod oracle;
pub mod pauli;
pub mod tableau;

pub use engine::Engine;
pub use error::{EngineError, ModuleError, SimError};
pub use frame::PauliFrame;
pub use pauli::{Pauli, PauliString, Sign};
pub use tableau::{Gate, Measurement, StabilizerTableau};
