//! Synchronous network: one chip per lattice row, photons fed column by
//! column, every chip switching through the same six-step pattern each cycle.

use std::collections::VecDeque;
use std::fmt;

use crate::config::RunConfig;
use crate::error::SimError;
use crate::event::{steady_period, EventKind, SimEvent};
use crate::lattice::{LatticeSpec, Site};
use crate::module::{ModulePhase, ModuleState, PhotonRole};

use super::{assemble, budget_for, Handler, RunOutput, RunStats, Runtime};

/// Delay lines around a chip. `A` carries photons up to the previous row's
/// chip, `C` down to the next one, `B` along the row and `D` is the local
/// buffer that holds a photon between its three passes.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Line {
    A,
    B,
    C,
    D,
}

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Line::A => 'a',
            Line::B => 'b',
            Line::C => 'c',
            Line::D => 'd',
        };
        write!(f, "{c}")
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct SyncSwitchRow {
    pub step: u8,
    /// Line switched into the cavity.
    pub input: Option<Line>,
    /// Line the cavity photon is switched out to (before the input).
    pub output: Option<Line>,
    /// Role of the photon that enters in this step.
    pub role: Option<PhotonRole>,
}

const fn row(step: u8, input: Option<Line>, output: Option<Line>, role: Option<PhotonRole>) -> SyncSwitchRow {
    SyncSwitchRow { step, input, output, role }
}

/// Switch settings for the six steps of a cycle. The photon leaving at step 6
/// is followed by the atomic readout.
pub const SYNC_SWITCH: [SyncSwitchRow; 6] = [
    row(1, Some(Line::A), None, Some(PhotonRole::Top)),
    row(2, Some(Line::B), Some(Line::A), Some(PhotonRole::Left)),
    row(3, Some(Line::D), Some(Line::D), Some(PhotonRole::Center)),
    row(4, Some(Line::D), Some(Line::D), Some(PhotonRole::Right)),
    row(5, Some(Line::C), Some(Line::B), Some(PhotonRole::Bottom)),
    row(6, None, Some(Line::C), None),
];

pub fn sync_switch_schedule() -> &'static [SyncSwitchRow; 6] {
    &SYNC_SWITCH
}

/// Cycle offset of row `j`: the centre of site `(i, j)` is measured in cycle
/// `i + row_offset(j)`.
pub fn row_offset(j: usize) -> i64 {
    (2 * j % 5) as i64
}

/// One stay of a photon at a chip, in cycles.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Pass {
    pub chip: usize,
    pub line: Line,
    pub entry: i64,
    pub egress: i64,
}

/// Every chip visit of the photon at `s`, in time order.
pub fn sync_passes(rows: usize, s: Site) -> Vec<Pass> {
    let (i, j) = (s.i as i64, s.j);
    let x = row_offset(j);
    let mut v = vec![Pass { chip: j, line: Line::B, entry: i + x - 1, egress: i + x + 2 }];
    if j + 1 < rows {
        let c = i + row_offset(j + 1);
        v.push(Pass { chip: j + 1, line: Line::A, entry: c, egress: c + 1 });
    }
    if j >= 1 {
        let c = i + row_offset(j - 1);
        v.push(Pass { chip: j - 1, line: Line::C, entry: c, egress: c + 1 });
    }
    v.sort_by_key(|p| p.entry);
    v
}

#[derive(Default)]
struct Chip {
    a: Option<Site>,
    b: Option<Site>,
    c: Option<Site>,
    /// Buffered photons with the tick at which they re-enter, one cycle on.
    d: VecDeque<(Site, u64)>,
    cavity: Option<Site>,
}

struct SyncNet {
    period: u64,
    sd: u64,
    rows: usize,
    chips: Vec<Chip>,
    modules: Vec<ModuleState>,
    transits: Vec<u64>,
}

impl SyncNet {
    fn base(&self, cycle: i64) -> u64 {
        (cycle + 1) as u64 * self.period * self.sd
    }

    fn collision(rt: &Runtime, time: u64, detail: String) -> SimError {
        SimError::RoutingCollision { time, detail, trace_tail: rt.trace_tail() }
    }

    fn switch_out(&mut self, rt: &mut Runtime, j: usize, cycle: i64, sw: SyncSwitchRow, time: u64) -> Result<(), SimError> {
        let Some(line) = sw.output else { return Ok(()) };
        let Some(p) = self.chips[j].cavity.take() else { return Ok(()) };
        let k = rt.index(p);
        rt.log(SimEvent::new(time, EventKind::CavityOut).photon(k).chip(j).detail(format!("to line {line}")));
        if line == Line::D {
            let release = time + self.period * self.sd;
            self.chips[j].d.push_back((p, release));
            return Ok(());
        }
        let passes = sync_passes(self.rows, p);
        let pos = passes
            .iter()
            .position(|q| q.chip == j && q.line == line)
            .ok_or_else(|| Self::collision(rt, time, format!("photon {p} left chip {j} on line {line}, which is not on its route")))?;
        let this = passes[pos];
        let expected_exit = match line {
            Line::B => this.entry + 2,
            _ => this.entry,
        };
        if cycle != expected_exit {
            return Err(Self::collision(rt, time, format!("photon {p} left chip {j} in cycle {cycle}, expected {expected_exit}")));
        }
        self.transits.push(self.base(this.egress) - self.base(this.entry));
        match passes.get(pos + 1) {
            Some(next) => rt.queue.push(
                SimEvent::new(self.base(next.entry), EventKind::ArriveAtChip)
                    .photon(k)
                    .chip(next.chip)
                    .detail(format!("line {}", next.line)),
            ),
            None => rt.queue.push(SimEvent::new(self.base(this.egress), EventKind::CavityOut).photon(k).detail("exit")),
        }
        Ok(())
    }

    fn switch_in(&mut self, rt: &mut Runtime, j: usize, sw: SyncSwitchRow, time: u64) -> Result<(), SimError> {
        let Some(line) = sw.input else { return Ok(()) };
        let chip = &mut self.chips[j];
        if let Some(&(p, release)) = chip.d.front() {
            if release < time {
                return Err(Self::collision(rt, time, format!("photon {p} missed its slot on line d of chip {j}")));
            }
        }
        let p = match line {
            Line::A => chip.a.take(),
            Line::B => chip.b.take(),
            Line::C => chip.c.take(),
            Line::D => match chip.d.front() {
                Some(&(p, release)) if release == time => {
                    chip.d.pop_front();
                    Some(p)
                }
                _ => None,
            },
        };
        let Some(p) = p else { return Ok(()) };
        if let Some(q) = chip.cavity {
            return Err(SimError::CavityDoubleOccupancy {
                time,
                chip: j.to_string(),
                detail: format!("{p} from line {line} while {q} is inside"),
                trace_tail: rt.trace_tail(),
            });
        }
        chip.cavity = Some(p);
        let role = sw.role.expect("input steps carry a role");
        if matches!(self.modules[j].phase(), ModulePhase::Initialized | ModulePhase::Interacting { .. }) {
            rt.interact(&mut self.modules[j], j, p, role, time)?;
        } else {
            let k = rt.index(p);
            rt.log(SimEvent::new(time, EventKind::CavityIn).photon(k).chip(j).detail("idle pass"));
        }
        Ok(())
    }
}

impl Handler for SyncNet {
    fn handle(&mut self, rt: &mut Runtime, ev: SimEvent) -> Result<(), SimError> {
        let local = ev.time / self.sd;
        let cycle = (local / self.period) as i64 - 1;
        let step = (local % self.period) as usize;
        match (ev.kind, ev.photon, ev.chip) {
            (EventKind::Emit, Some(k), _) => {
                let s = rt.spec.site(k);
                rt.emit(s, ev.time, format!("row {}", s.j))?;
                let first = sync_passes(self.rows, s)[0];
                rt.queue.push(
                    SimEvent::new(ev.time, EventKind::ArriveAtChip).photon(k).chip(first.chip).detail(format!("line {}", first.line)),
                );
            }
            (EventKind::ArriveAtChip, Some(k), Some(j)) => {
                let s = rt.spec.site(k);
                let line = sync_passes(self.rows, s).into_iter().find(|p| p.chip == j && p.entry == cycle).map(|p| p.line);
                let slot = match line {
                    Some(Line::A) => &mut self.chips[j].a,
                    Some(Line::B) => &mut self.chips[j].b,
                    Some(Line::C) => &mut self.chips[j].c,
                    _ => return Err(Self::collision(rt, ev.time, format!("photon {s} reached chip {j} off schedule"))),
                };
                if let Some(other) = slot.replace(s) {
                    return Err(Self::collision(rt, ev.time, format!("{s} and {other} on one line of chip {j}")));
                }
                rt.log(ev);
            }
            (EventKind::CavityOut, Some(k), None) => {
                let s = rt.spec.site(k);
                rt.log(ev.clone());
                rt.exit(s, ev.time);
            }
            (EventKind::CavityOut, None, Some(j)) => {
                if step < SYNC_SWITCH.len() {
                    self.switch_out(rt, j, cycle, SYNC_SWITCH[step], ev.time)?;
                }
            }
            (EventKind::CavityIn, None, Some(j)) => {
                if step < SYNC_SWITCH.len() {
                    self.switch_in(rt, j, SYNC_SWITCH[step], ev.time)?;
                }
            }
            (EventKind::AtomInit, _, Some(j)) => {
                let center = Site::new((cycle - row_offset(j)) as usize, j);
                rt.init_module(&mut self.modules[j], j, ev.time, format!("S{center}"))?;
            }
            (EventKind::AtomReadout, _, Some(j)) => {
                rt.readout(&mut self.modules[j], j, ev.time)?;
            }
            (kind, _, _) => return Err(SimError::Config(format!("unexpected {kind} event in the sync network"))),
        }
        Ok(())
    }
}

pub fn run_sync(config: &RunConfig) -> Result<RunOutput, SimError> {
    config.validate()?;
    if config.dt_prime == 0 {
        return Err(SimError::Config("sync network needs dt_prime >= 1".into()));
    }
    let budget = budget_for(config)?;
    let columns = config.columns.expect("validated");
    let rows = config.rows;
    let spec = LatticeSpec::square(columns, rows)?;
    let mut rt = Runtime::new(spec, config.seed, config.consume);
    let modules = (0..rows).map(|_| rt.new_module()).collect();
    let mut net = SyncNet {
        period: 5 + config.dt_prime,
        sd: config.slowdown,
        rows,
        chips: (0..rows).map(|_| Chip::default()).collect(),
        modules,
        transits: Vec::new(),
    };

    let mut busy = vec![(i64::MAX, i64::MIN); rows];
    for s in spec.sites() {
        let passes = sync_passes(rows, s);
        rt.queue.push(SimEvent::new(net.base(passes[0].entry), EventKind::Emit).photon(spec.index(s)));
        for p in passes {
            let b = &mut busy[p.chip];
            *b = (b.0.min(p.entry), b.1.max(p.egress));
        }
    }
    for (j, &(first, last)) in busy.iter().enumerate() {
        for c in first..last {
            let base = net.base(c);
            for step in 0..SYNC_SWITCH.len() as u64 {
                let t = base + step * config.slowdown;
                rt.queue.push(SimEvent::new(t, EventKind::CavityOut).chip(j));
                rt.queue.push(SimEvent::new(t, EventKind::CavityIn).chip(j));
            }
        }
        for i in 0..columns {
            let c = i as i64 + row_offset(j);
            rt.queue.push(SimEvent::new(net.base(c), EventKind::AtomInit).chip(j));
            rt.queue.push(SimEvent::new(net.base(c + 1), EventKind::AtomReadout).chip(j));
        }
    }

    rt.run(&mut net)?;
    let verification = rt.finish()?;

    let mut complete = vec![0; columns];
    for c in &rt.cycles {
        complete[c.center.i] = complete[c.center.i].max(c.readout);
    }
    let cycle_ticks = net.period * config.slowdown;
    let first_init = rt.cycles.iter().map(|c| c.init).min().unwrap_or(0);
    let stats = RunStats {
        columns_emitted: columns,
        column_period_ticks: steady_period(&complete, 0),
        warm_up_steps: complete.first().map(|&t| (t - first_init) / cycle_ticks - 1),
        steps: None,
        wall_time_ticks: rt.trace.last().map(|e| e.time).unwrap_or(0),
        latencies: net.transits.clone(),
    };
    let result = assemble(&rt, config, verification, budget, stats);
    Ok(RunOutput::new(rt, result))
}
