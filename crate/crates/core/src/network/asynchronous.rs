//! Asynchronous network: five columns of chips, staggered sources, no
//! buffers. Every photon spends one tick at each column.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use crate::config::RunConfig;
use crate::error::SimError;
use crate::event::{emit_schedule, steady_period, EventKind, SimEvent, SourceConfig};
use crate::lattice::{LatticeSpec, Site};
use crate::module::{ModulePhase, ModuleState, PhotonRole};

use super::{assemble, budget_for, Handler, RunOutput, RunStats, Runtime};

pub const COLUMNS: usize = 5;
/// Routing period in ticks.
pub const PERIOD: u64 = 10;
/// Ticks from atom initialisation to readout.
pub const ATOM_WINDOW: u64 = 10;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum AsyncSetting {
    R,
    T,
    C,
    B,
    L,
    /// `=`: everything bypasses.
    Equals,
    /// `-`: everything bypasses.
    Dash,
}

impl AsyncSetting {
    pub fn parse(c: char) -> Option<Self> {
        Some(match c {
            'R' => AsyncSetting::R,
            'T' => AsyncSetting::T,
            'C' => AsyncSetting::C,
            'B' => AsyncSetting::B,
            'L' => AsyncSetting::L,
            '=' => AsyncSetting::Equals,
            '-' | '\u{2212}' => AsyncSetting::Dash,
            _ => return None,
        })
    }

    pub fn role(self) -> Option<PhotonRole> {
        match self {
            AsyncSetting::R => Some(PhotonRole::Right),
            AsyncSetting::T => Some(PhotonRole::Top),
            AsyncSetting::C => Some(PhotonRole::Center),
            AsyncSetting::B => Some(PhotonRole::Bottom),
            AsyncSetting::L => Some(PhotonRole::Left),
            AsyncSetting::Equals | AsyncSetting::Dash => None,
        }
    }

    pub fn is_cavity_bound(self) -> bool {
        self.role().is_some()
    }

    pub fn code(self) -> char {
        match self {
            AsyncSetting::Equals => '=',
            AsyncSetting::Dash => '-',
            other => other.role().expect("cavity-bound").code(),
        }
    }
}

impl fmt::Display for AsyncSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum ChipKind {
    A,
    B,
}

/// Rows A1, B1, A2, ... B5, one setting per tick.
pub const DEFAULT_ROUTING: [&str; 10] = [
    "R T C B L = - = - =",
    "= - = - = R T C B L",
    "= - R T C B L = - =",
    "B L = - = - = R T C",
    "- = - = R T C B L =",
    "T C B L = - = - = R",
    "L = - = - = R T C B",
    "= R T C B L = - = -",
    "C B L = - = - = R T",
    "= - = R T C B L = -",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoutingTable {
    rows: [[AsyncSetting; 10]; 10],
}

impl Default for RoutingTable {
    fn default() -> Self {
        Self::parse(&DEFAULT_ROUTING.join("\n")).expect("built-in table is valid")
    }
}

impl RoutingTable {
    /// Ten lines of ten whitespace-separated settings; a leading `A1`-style
    /// label, blank lines and `#` comments are allowed.
    pub fn parse(text: &str) -> Result<Self, SimError> {
        let bad = |m: String| SimError::Config(format!("routing table: {m}"));
        let mut rows = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() == 11 {
                tokens.remove(0);
            }
            if tokens.len() != 10 {
                return Err(bad(format!("line {}: expected 10 settings, got {}", n + 1, tokens.len())));
            }
            let mut row = [AsyncSetting::Dash; 10];
            for (s, tok) in tokens.iter().enumerate() {
                let mut chars = tok.chars();
                row[s] = match (chars.next(), chars.next()) {
                    (Some(c), None) => AsyncSetting::parse(c),
                    _ => None,
                }
                .ok_or_else(|| bad(format!("line {}: bad setting {tok:?}", n + 1)))?;
            }
            rows.push(row);
        }
        let rows: [[AsyncSetting; 10]; 10] = rows.try_into().map_err(|v: Vec<_>| bad(format!("expected 10 chip rows, got {}", v.len())))?;
        let table = RoutingTable { rows };
        table.validate()?;
        Ok(table)
    }

    pub fn from_file(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        for (r, row) in self.rows.iter().enumerate() {
            for want in ["R", "T", "C", "B", "L"] {
                let n = row.iter().filter(|s| s.code().to_string() == want).count();
                if n != 1 {
                    return Err(SimError::Config(format!("routing table row {}: {want} appears {n} times", label(r))));
                }
            }
        }
        for col in 1..=COLUMNS {
            for step in 1..=PERIOD {
                let a = self.setting(col, ChipKind::A, step);
                let b = self.setting(col, ChipKind::B, step);
                if a.is_cavity_bound() && b.is_cavity_bound() {
                    return Err(SimError::Config(format!("routing table: A{col} and B{col} both cavity-bound at step {step}")));
                }
            }
        }
        Ok(())
    }

    /// Setting of the chip of `kind` in `column` (1-based) at `step` (1-based, any period).
    pub fn setting(&self, column: usize, kind: ChipKind, step: u64) -> AsyncSetting {
        let r = 2 * (column - 1) + usize::from(kind == ChipKind::B);
        self.rows[r][((step - 1) % PERIOD) as usize]
    }

    pub fn row(&self, column: usize, kind: ChipKind) -> &[AsyncSetting; 10] {
        &self.rows[2 * (column - 1) + usize::from(kind == ChipKind::B)]
    }

    /// Step (1-based) at which `role` enters on the given chip row.
    pub fn step_of(&self, column: usize, kind: ChipKind, role: PhotonRole) -> u64 {
        self.row(column, kind).iter().position(|s| s.role() == Some(role)).expect("validated") as u64 + 1
    }

    /// First step of the cyclic run of cavity-bound steps.
    fn window_start(&self, column: usize, kind: ChipKind) -> Result<u64, SimError> {
        let row = self.row(column, kind);
        let starts: Vec<usize> = (0..10).filter(|&s| row[s].is_cavity_bound() && !row[(s + 9) % 10].is_cavity_bound()).collect();
        match starts[..] {
            [s] => Ok(s as u64 + 1),
            _ => Err(SimError::Config(format!(
                "routing table row {}: cavity-bound steps must be consecutive",
                label(2 * (column - 1) + usize::from(kind == ChipKind::B))
            ))),
        }
    }
}

fn label(r: usize) -> String {
    format!("{}{}", if r.is_multiple_of(2) { 'A' } else { 'B' }, r / 2 + 1)
}

/// Setting of a chip at `step`, with `column` in 1..=5.
pub fn async_setting(table: &RoutingTable, column: usize, kind: ChipKind, step: u64) -> AsyncSetting {
    table.setting(column, kind, step)
}

/// Photons present at a chip's three inputs.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct ChipInputs {
    pub top: Option<usize>,
    pub middle: Option<usize>,
    pub bottom: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Routed {
    /// Photon sent to the cavity and the role it plays there.
    pub cavity: Option<(usize, PhotonRole)>,
    pub bypass: Vec<usize>,
}

/// Routes the photons at one chip. Legal occupancy is a lone middle photon
/// or photons at top and bottom only.
pub fn chip_switch(setting: AsyncSetting, inputs: ChipInputs) -> Result<Routed, String> {
    let ChipInputs { top, middle, bottom } = inputs;
    if top.is_some() && middle.is_some() && bottom.is_some() {
        return Err("three simultaneous inputs".into());
    }
    if middle.is_some() && (top.is_some() || bottom.is_some()) {
        return Err("middle photon together with a top or bottom photon".into());
    }
    let take = match setting {
        AsyncSetting::Equals | AsyncSetting::Dash => None,
        AsyncSetting::R | AsyncSetting::C | AsyncSetting::L => {
            if top.is_some() || bottom.is_some() {
                return Err(format!("setting {setting} expects a middle photon, found top/bottom input"));
            }
            middle
        }
        AsyncSetting::T => {
            if middle.is_some() {
                return Err("setting T with a middle photon".into());
            }
            top
        }
        AsyncSetting::B => {
            if middle.is_some() {
                return Err("setting B with a middle photon".into());
            }
            bottom
        }
    };
    let bypass = [top, middle, bottom].into_iter().flatten().filter(|&p| Some(p) != take).collect();
    Ok(Routed { cavity: take.map(|p| (p, setting.role().expect("cavity-bound"))), bypass })
}

/// Source timing used by the network: row 0 starts one tick late.
pub fn async_source(slowdown: u64) -> SourceConfig {
    SourceConfig { interval: 2, stagger: 1, phase: 1, slowdown }
}

struct AsyncNet {
    table: RoutingTable,
    rows: usize,
    sd: u64,
    kinds: Vec<ChipKind>,
    modules: Vec<ModuleState>,
    occupancy: BTreeMap<(u64, usize, usize), usize>,
    cavity_busy: Vec<Option<u64>>,
    latencies: Vec<u64>,
}

impl AsyncNet {
    fn chip(&self, column: usize, row: usize) -> usize {
        column * self.rows + row
    }

    fn setting(&self, column: usize, row: usize, t: u64) -> AsyncSetting {
        self.table.setting(column + 1, self.kinds[self.chip(column, row)], t % PERIOD + 1)
    }

    fn inputs(&self, t: u64, column: usize, row: usize) -> ChipInputs {
        let occ = |r: usize| self.occupancy.get(&(t, column, r)).copied();
        ChipInputs {
            top: if row > 0 { occ(row - 1) } else { None },
            middle: occ(row),
            bottom: if row + 1 < self.rows { occ(row + 1) } else { None },
        }
    }

    fn cavity_in(&mut self, rt: &mut Runtime, k: usize, t: u64) -> Result<(), SimError> {
        let s = rt.spec.site(k);
        let column = (0..COLUMNS).find(|&c| self.occupancy.get(&(t, c, s.j)) == Some(&k)).expect("photon is on a column");
        let mut claims = Vec::new();
        for row in s.j.saturating_sub(1)..(s.j + 2).min(self.rows) {
            let setting = self.setting(column, row, t);
            let routed = chip_switch(setting, self.inputs(t, column, row)).map_err(|detail| SimError::PhaseMismatch {
                time: t * self.sd,
                chip: format!("column {} row {row}", column + 1),
                detail,
                trace_tail: rt.trace_tail(),
            })?;
            if let Some((p, role)) = routed.cavity {
                if p == k {
                    claims.push((row, role));
                }
            }
        }
        let time = t * self.sd;
        let own = self.chip(column, s.j);
        let detail = match claims[..] {
            [] => "bypass".to_string(),
            [(row, role)] => {
                let chip = self.chip(column, row);
                if matches!(self.modules[chip].phase(), ModulePhase::Initialized | ModulePhase::Interacting { .. }) {
                    if let Some(until) = self.cavity_busy[chip] {
                        if until > t {
                            return Err(SimError::CavityDoubleOccupancy {
                                time,
                                chip: chip.to_string(),
                                detail: format!("photon {s} while the cavity is busy"),
                                trace_tail: rt.trace_tail(),
                            });
                        }
                    }
                    self.cavity_busy[chip] = Some(t + 1);
                    rt.interact(&mut self.modules[chip], chip, s, role, time)?;
                    format!("from cavity of chip {chip}")
                } else {
                    "bypass, module idle".to_string()
                }
            }
            _ => {
                return Err(SimError::RoutingCollision {
                    time,
                    detail: format!("photon {s} claimed by {} chips", claims.len()),
                    trace_tail: rt.trace_tail(),
                })
            }
        };
        rt.queue.push(SimEvent::new((t + 1) * self.sd, EventKind::CavityOut).photon(k).chip(own).detail(detail));
        Ok(())
    }
}

impl Handler for AsyncNet {
    fn handle(&mut self, rt: &mut Runtime, ev: SimEvent) -> Result<(), SimError> {
        let t = ev.time / self.sd;
        match (ev.kind, ev.photon, ev.chip) {
            (EventKind::Emit, Some(k), _) => {
                let s = rt.spec.site(k);
                rt.emit(s, ev.time, format!("row {}", s.j))?;
                let chip = self.chip(0, s.j);
                rt.queue.push(SimEvent::new(ev.time, EventKind::ArriveAtChip).photon(k).chip(chip));
            }
            (EventKind::ArriveAtChip, Some(k), Some(chip)) => {
                let (column, row) = (chip / self.rows, chip % self.rows);
                if let Some(other) = self.occupancy.insert((t, column, row), k) {
                    return Err(SimError::RoutingCollision {
                        time: ev.time,
                        detail: format!("photons {other} and {k} on one input of chip {chip}"),
                        trace_tail: rt.trace_tail(),
                    });
                }
                rt.log(ev.clone().detail(format!("column {}", column + 1)));
                rt.queue.push(SimEvent::new(ev.time, EventKind::CavityIn).photon(k));
            }
            (EventKind::CavityIn, Some(k), _) => self.cavity_in(rt, k, t)?,
            (EventKind::CavityOut, Some(k), Some(chip)) => {
                let (column, row) = (chip / self.rows, chip % self.rows);
                self.occupancy.remove(&(t - 1, column, row));
                rt.log(ev.clone());
                let s = rt.spec.site(k);
                if column + 1 < COLUMNS {
                    rt.queue.push(SimEvent::new(ev.time, EventKind::ArriveAtChip).photon(k).chip(self.chip(column + 1, row)));
                } else {
                    rt.exit(s, ev.time);
                    self.latencies.push(ev.time - rt.emitted_at(s).expect("emitted"));
                }
            }
            (EventKind::AtomInit, Some(k), Some(chip)) => {
                let center = rt.spec.site(k);
                rt.init_module(&mut self.modules[chip], chip, ev.time, format!("S{center}"))?;
            }
            (EventKind::AtomReadout, _, Some(chip)) => {
                rt.readout(&mut self.modules[chip], chip, ev.time)?;
            }
            (kind, _, _) => return Err(SimError::Config(format!("unexpected {kind} event in the async network"))),
        }
        Ok(())
    }
}

/// Kind of every chip, `column * rows + row`, found by requiring a middle
/// photon at the chip's C step.
pub fn chip_kinds(table: &RoutingTable, rows: usize) -> Result<Vec<ChipKind>, SimError> {
    let source = async_source(1);
    let mut kinds = Vec::with_capacity(COLUMNS * rows);
    for column in 0..COLUMNS {
        for row in 0..rows {
            let offset = source.emission_time(row, 0);
            let fits = |kind| {
                let tc = table.step_of(column + 1, kind, PhotonRole::Center) - 1;
                (tc + PERIOD - column as u64 % PERIOD - offset % 2).is_multiple_of(2)
            };
            kinds.push(match (fits(ChipKind::A), fits(ChipKind::B)) {
                (true, false) => ChipKind::A,
                (false, true) => ChipKind::B,
                _ => {
                    return Err(SimError::Config(format!(
                        "routing table does not separate A and B chips in column {} row {row}",
                        column + 1
                    )))
                }
            });
        }
    }
    Ok(kinds)
}

/// Runs a `width`-column lattice, ignoring `config.duration`.
pub fn run_async_width(config: &RunConfig, width: usize) -> Result<RunOutput, SimError> {
    let budget = budget_for(config)?;
    let table = match &config.routing_table {
        Some(path) => RoutingTable::from_file(Path::new(path))?,
        None => RoutingTable::default(),
    };
    let rows = config.rows;
    let sd = config.slowdown;
    let spec = LatticeSpec::rhombus(width, rows)?;
    let source = async_source(sd);
    source.validate()?;
    let kinds = chip_kinds(&table, rows)?;
    let mut rt = Runtime::new(spec, config.seed, config.consume);
    let modules = (0..COLUMNS * rows).map(|_| rt.new_module()).collect();
    let mut net = AsyncNet {
        table,
        rows,
        sd,
        kinds,
        modules,
        occupancy: BTreeMap::new(),
        cavity_busy: vec![None; COLUMNS * rows],
        latencies: Vec::new(),
    };

    for s in spec.sites() {
        rt.queue.push(SimEvent::new(source.emission_time(s.j, s.i), EventKind::Emit).photon(spec.index(s)));
    }
    let last_emit = (0..rows).map(|j| source.emission_time(j, width - 1) / sd).max().unwrap_or(0);
    for column in 0..COLUMNS {
        for row in 0..rows {
            let chip = net.chip(column, row);
            let kind = net.kinds[chip];
            let start = net.table.window_start(column + 1, kind)? - 1;
            let to_center = (net.table.step_of(column + 1, kind, PhotonRole::Center) - 1 + PERIOD - start) % PERIOD;
            let mut t0 = start;
            while t0 <= last_emit + COLUMNS as u64 {
                let tc = t0 + to_center;
                let offset = source.emission_time(row, 0) / sd;
                if let Some(e) = tc.checked_sub(column as u64).filter(|&e| e >= offset && (e - offset).is_multiple_of(2)) {
                    let m = ((e - offset) / 2) as usize;
                    if m < width {
                        let k = spec.index(Site::new(m, row));
                        rt.queue.push(SimEvent::new(t0 * sd, EventKind::AtomInit).photon(k).chip(chip));
                        rt.queue.push(SimEvent::new((t0 + ATOM_WINDOW) * sd, EventKind::AtomReadout).chip(chip));
                    }
                }
                t0 += PERIOD;
            }
        }
    }

    rt.run(&mut net)?;
    let verification = rt.finish()?;
    let complete: Vec<u64> = (0..width).map(|i| (0..rows).filter_map(|j| rt.exited_at(Site::new(i, j))).max().unwrap_or(0)).collect();
    let stats = RunStats {
        columns_emitted: width,
        column_period_ticks: steady_period(&complete, 0),
        warm_up_steps: None,
        steps: None,
        wall_time_ticks: rt.trace.last().map(|e| e.time).unwrap_or(0),
        latencies: net.latencies.clone(),
    };
    let result = assemble(&rt, config, verification, budget, stats);
    Ok(RunOutput::new(rt, result))
}

/// Number of complete lattice columns emitted within `duration` ticks.
pub fn async_width(rows: usize, duration: u64) -> usize {
    let source = async_source(1);
    let per_row = |j| emit_schedule(&source, rows, duration).iter().filter(|e| e.chip == Some(j)).count();
    (0..rows).map(per_row).min().unwrap_or(0)
}

pub fn run_async(config: &RunConfig) -> Result<RunOutput, SimError> {
    config.validate()?;
    let width = async_width(config.rows, config.duration.expect("validated"));
    run_async_width(config, width)
}
