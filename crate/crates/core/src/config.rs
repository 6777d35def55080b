//! Run configuration, loadable from a TOML document.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::event::{System, DEFAULT_FEEDFORWARD_NS};
use crate::module::interaction_time;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkKind {
    Constant,
    Sync,
    Async,
}

impl NetworkKind {
    pub fn name(self) -> &'static str {
        match self {
            NetworkKind::Constant => "constant",
            NetworkKind::Sync => "sync",
            NetworkKind::Async => "async",
        }
    }
}

/// What the detectors do with photons leaving the network.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConsumeMode {
    /// Keep every photon and verify the whole register at the end.
    None,
    #[default]
    X,
    Z,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub report: Option<String>,
    pub trace: Option<String>,
    pub graph: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub network: NetworkKind,
    pub rows: usize,
    /// Lattice columns (constant and sync networks).
    pub columns: Option<usize>,
    /// Emission window in ticks (async network).
    pub duration: Option<u64>,
    pub system: Option<System>,
    /// Coupling and detuning, used instead of `system` when both are set.
    pub g: Option<f64>,
    pub delta: Option<f64>,
    /// Atomic readout time in ticks.
    #[serde(default = "default_dt_prime")]
    pub dt_prime: u64,
    #[serde(default = "default_slowdown")]
    pub slowdown: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub consume: ConsumeMode,
    #[serde(default = "default_feedforward")]
    pub feedforward_ns: f64,
    #[serde(default)]
    pub allow_budget_violation: bool,
    /// Routing-table override file for the async network.
    pub routing_table: Option<String>,
    #[serde(default)]
    pub output: OutputPaths,
}

fn default_dt_prime() -> u64 {
    1
}

fn default_slowdown() -> u64 {
    1
}

fn default_feedforward() -> f64 {
    DEFAULT_FEEDFORWARD_NS
}

/// Largest register the constant network accepts.
pub const CONSTANT_SITE_LIMIT: usize = 400;

impl RunConfig {
    pub fn new(network: NetworkKind, rows: usize) -> Self {
        RunConfig {
            network,
            rows,
            columns: None,
            duration: None,
            system: None,
            g: None,
            delta: None,
            dt_prime: default_dt_prime(),
            slowdown: default_slowdown(),
            seed: 0,
            consume: ConsumeMode::default(),
            feedforward_ns: default_feedforward(),
            allow_budget_violation: false,
            routing_table: None,
            output: OutputPaths::default(),
        }
    }

    pub fn constant(rows: usize, columns: usize) -> Self {
        RunConfig { columns: Some(columns), ..Self::new(NetworkKind::Constant, rows) }
    }

    pub fn sync(rows: usize, columns: usize) -> Self {
        RunConfig { columns: Some(columns), ..Self::new(NetworkKind::Sync, rows) }
    }

    pub fn asynchronous(rows: usize, duration: u64) -> Self {
        RunConfig { duration: Some(duration), ..Self::new(NetworkKind::Async, rows) }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_consume(mut self, consume: ConsumeMode) -> Self {
        self.consume = consume;
        self
    }

    pub fn from_toml_str(text: &str) -> Result<Self, SimError> {
        toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// Unit interaction time in nanoseconds.
    pub fn delta_t_ns(&self) -> Result<f64, SimError> {
        match (self.g, self.delta) {
            (Some(g), Some(d)) => interaction_time(g, d).map_err(|e| SimError::Config(e.to_string())),
            (None, None) => Ok(self.system.unwrap_or(System::Cs).interaction_ns()),
            _ => Err(SimError::Config("g and delta must be given together".into())),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Config(m));
        if self.rows == 0 {
            return bad("rows must be at least 1".into());
        }
        if self.slowdown == 0 {
            return bad("slowdown must be at least 1".into());
        }
        if self.feedforward_ns.is_nan() || self.feedforward_ns < 0.0 {
            return bad(format!("feedforward_ns must be non-negative, got {}", self.feedforward_ns));
        }
        if self.system.is_some() && (self.g.is_some() || self.delta.is_some()) {
            return bad("give either system or (g, delta), not both".into());
        }
        self.delta_t_ns()?;
        match self.network {
            NetworkKind::Constant => {
                let Some(c) = self.columns else { return bad("constant network needs columns".into()) };
                if c == 0 {
                    return bad("columns must be at least 1".into());
                }
                if self.rows * c > CONSTANT_SITE_LIMIT {
                    return bad(format!("constant network is limited to {CONSTANT_SITE_LIMIT} sites"));
                }
                if self.duration.is_some() {
                    return bad("duration applies to the async network only".into());
                }
            }
            NetworkKind::Sync => {
                let Some(c) = self.columns else { return bad("sync network needs columns".into()) };
                if c < 5 {
                    return bad(format!("sync network needs at least 5 columns, got {c}"));
                }
                if self.duration.is_some() {
                    return bad("duration applies to the async network only".into());
                }
            }
            NetworkKind::Async => {
                if self.rows < 2 {
                    return bad("async network needs at least 2 rows".into());
                }
                let Some(d) = self.duration else { return bad("async network needs duration".into()) };
                if d < 20 {
                    return bad(format!("async duration must be at least 20 ticks, got {d}"));
                }
                if self.columns.is_some() {
                    return bad("columns do not apply to the async network; use duration".into());
                }
            }
        }
        if self.routing_table.is_some() && self.network != NetworkKind::Async {
            return bad("routing_table applies to the async network only".into());
        }
        Ok(())
    }
}
