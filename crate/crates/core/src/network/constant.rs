//! Constant-depth network: every photon is available at once and each
//! stabilizer gets its own module, five colour classes of modules at a time.

use std::collections::BTreeSet;

use crate::config::RunConfig;
use crate::error::SimError;
use crate::event::{EventKind, SimEvent};
use crate::lattice::{LatticeSpec, Site};
use crate::module::{ModuleState, PhotonRole};

use super::{assemble, budget_for, Handler, RunOutput, RunStats, Runtime};

/// Time step (1 to 5) in which the stabilizer of `s` is measured.
pub fn constant_step(s: Site) -> u8 {
    ((s.i + 2 * s.j) % 5 + 1) as u8
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepSchedule {
    /// Step of each site, by row-major index.
    pub step_of: Vec<u8>,
    /// Sites measured in step `k + 1`.
    pub steps: Vec<Vec<Site>>,
}

pub fn constant_schedule(spec: &LatticeSpec) -> StepSchedule {
    let mut steps = vec![Vec::new(); 5];
    let step_of = spec
        .sites()
        .map(|s| {
            let k = constant_step(s);
            steps[k as usize - 1].push(s);
            k
        })
        .collect();
    StepSchedule { step_of, steps }
}

impl StepSchedule {
    /// Steps that measure at least one stabilizer.
    pub fn num_steps(&self) -> usize {
        self.steps.iter().filter(|s| !s.is_empty()).count()
    }

    /// Modules needed in the busiest step.
    pub fn max_modules(&self) -> usize {
        self.steps.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Two stabilizers measured in the same step must not share a photon.
    pub fn check_conflicts(&self, spec: &LatticeSpec) -> Result<(), String> {
        for (k, sites) in self.steps.iter().enumerate() {
            let mut used = BTreeSet::new();
            for &s in sites {
                for p in spec.ball(s, 1) {
                    if !used.insert(p) {
                        return Err(format!("step {}: photon {p} needed twice (stabilizer {s})", k + 1));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Interaction slot of each role within a step.
fn slot(role: PhotonRole) -> u64 {
    PhotonRole::ALL.iter().position(|&r| r == role).expect("all roles listed") as u64
}

struct ConstantNet {
    modules: Vec<ModuleState>,
}

impl Handler for ConstantNet {
    fn handle(&mut self, rt: &mut Runtime, ev: SimEvent) -> Result<(), SimError> {
        let site = |k: Option<usize>| rt.spec.site(k.expect("event carries a photon"));
        match ev.kind {
            EventKind::Emit => {
                rt.emit(site(ev.photon), ev.time, "all photons at t=0")?;
            }
            EventKind::AtomInit => {
                let m = ev.chip.expect("init carries a module");
                let center = site(ev.photon);
                rt.init_module(&mut self.modules[m], m, ev.time, format!("S{center}"))?;
            }
            EventKind::CavityIn => {
                let m = ev.chip.expect("pass carries a module");
                let role = ev.detail.chars().last().and_then(PhotonRole::from_code).expect("pass carries a role");
                rt.interact(&mut self.modules[m], m, site(ev.photon), role, ev.time)?;
            }
            EventKind::AtomReadout => {
                let m = ev.chip.expect("readout carries a module");
                rt.readout(&mut self.modules[m], m, ev.time)?;
            }
            EventKind::CavityOut => {
                let s = site(ev.photon);
                rt.log(SimEvent::new(ev.time, EventKind::CavityOut).photon(ev.photon.unwrap()).detail("exit"));
                rt.exit(s, ev.time);
            }
            other => return Err(SimError::Config(format!("constant network has no {other} events"))),
        }
        Ok(())
    }
}

pub fn run_constant(config: &RunConfig) -> Result<RunOutput, SimError> {
    config.validate()?;
    let budget = budget_for(config)?;
    let columns = config.columns.expect("validated");
    let spec = LatticeSpec::square(columns, config.rows)?;
    let schedule = constant_schedule(&spec);
    schedule.check_conflicts(&spec).map_err(SimError::Config)?;

    let sd = config.slowdown;
    let period = 5 + config.dt_prime;
    let mut rt = Runtime::new(spec, config.seed, config.consume);
    let modules = (0..schedule.max_modules()).map(|_| rt.new_module()).collect();
    for s in spec.sites() {
        rt.queue.push(SimEvent::new(0, EventKind::Emit).photon(spec.index(s)));
    }
    let mut base = 0;
    for sites in schedule.steps.iter().filter(|s| !s.is_empty()) {
        for (m, &c) in sites.iter().enumerate() {
            let ci = spec.index(c);
            rt.queue.push(SimEvent::new(base * sd, EventKind::AtomInit).photon(ci).chip(m));
            let mut passes = spec.neighbor_roles(c);
            passes.push((PhotonRole::Center, c));
            for (role, p) in passes {
                let t = (base + slot(role)) * sd;
                rt.queue.push(SimEvent::new(t, EventKind::CavityIn).photon(spec.index(p)).chip(m).detail(format!("role {}", role.code())));
            }
            rt.queue.push(SimEvent::new((base + period) * sd, EventKind::AtomReadout).chip(m));
        }
        base += period;
    }
    let wall = base * sd;
    for s in spec.sites() {
        rt.queue.push(SimEvent::new(wall, EventKind::CavityOut).photon(spec.index(s)));
    }

    let mut net = ConstantNet { modules };
    rt.run(&mut net)?;
    let verification = rt.finish()?;
    let stats = RunStats {
        columns_emitted: columns,
        steps: Some(schedule.num_steps() as u64),
        wall_time_ticks: wall,
        latencies: spec.sites().filter_map(|s| Some(rt.exited_at(s)? - rt.emitted_at(s)?)).collect(),
        ..RunStats::default()
    };
    let result = assemble(&rt, config, verification, budget, stats);
    Ok(RunOutput::new(rt, result))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ConsumeMode;

    #[test]
    fn step_formula() {
        assert_eq!(constant_step(Site::new(0, 0)), 1);
        assert_eq!(constant_step(Site::new(1, 0)), 2);
        assert_eq!(constant_step(Site::new(0, 1)), 3);
        assert_eq!(constant_step(Site::new(3, 1)), 1);
    }

    #[test]
    fn schedules_up_to_12x12() {
        for w in 1..=12 {
            for h in 1..=12 {
                let spec = LatticeSpec::square(w, h).unwrap();
                let s = constant_schedule(&spec);
                s.check_conflicts(&spec).unwrap();
                let n = w * h;
                assert_eq!(s.num_steps(), n.min(5), "{w}x{h}");
                assert!(s.max_modules() <= n.div_ceil(5), "{w}x{h}");
            }
        }
    }

    #[test]
    fn conflict_detected() {
        let spec = LatticeSpec::square(3, 1).unwrap();
        let bad = StepSchedule { step_of: vec![1, 1, 1], steps: vec![spec.sites().collect()] };
        assert!(bad.check_conflicts(&spec).is_err());
    }

    #[test]
    fn small_runs_verify() {
        for (r, c) in [(1, 1), (2, 3), (4, 4), (3, 5)] {
            for consume in [ConsumeMode::None, ConsumeMode::X, ConsumeMode::Z] {
                let cfg = RunConfig::constant(r, c).with_seed(3).with_consume(consume);
                let out = run_constant(&cfg).unwrap();
                assert!(out.result.pass, "{r}x{c} {consume:?}: {:?}", out.result.verification);
                assert_eq!(out.result.module_cycles, r * c);
                assert_eq!(out.result.byproducts_missing, 0);
                assert_eq!(out.result.wall_time_ticks, out.result.steps.unwrap() * 6);
            }
        }
    }
}
