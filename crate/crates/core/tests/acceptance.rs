//! One line per acceptance criterion; exits non-zero if any fails.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use photonic_cluster::config::{ConsumeMode, RunConfig};
use photonic_cluster::event::{check_budget, System};
use photonic_cluster::export::{report_json, trace_csv};
use photonic_cluster::lattice::{lattice_graph, LatticeSpec};
use photonic_cluster::network::asynchronous::{ChipKind, RoutingTable, PERIOD};
use photonic_cluster::network::constant::constant_schedule;
use photonic_cluster::network::simulate;

const SEEDS: u64 = 20;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, u64);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn oracle_equivalence() -> Outcome {
    for seed in 0..1000 {
        common::cosim(seed)?;
    }
    Ok("1000 circuits agree with the state vector".into())
}

fn module_correctness() -> Outcome {
    for seed in 0..500 {
        common::module_equivalence(seed)?;
    }
    Ok("500 cycles equal the direct parity projection".into())
}

fn constant_network() -> Outcome {
    for w in 1..=12 {
        for h in 1..=12 {
            let spec = LatticeSpec::square(w, h).map_err(|e| e.to_string())?;
            let s = constant_schedule(&spec);
            s.check_conflicts(&spec)?;
            let want = (w * h).min(5);
            ensure(s.steps.len() == 5 && s.num_steps() == want, || format!("{w}x{h}: {} steps", s.num_steps()))?;
        }
    }
    for n in 1..=12 {
        for seed in 0..SEEDS {
            let r = simulate(&RunConfig::constant(n, n).with_seed(seed)).map_err(|e| e.to_string())?.result;
            ensure(r.pass, || format!("{n}x{n} seed {seed}: {:?}", r.verification.mismatched_generators))?;
            ensure(r.module_cycles == n * n, || format!("{n}x{n}: {} cycles", r.module_cycles))?;
        }
    }
    Ok("144 lattices conflict-free in 5 steps; 12 squares x 20 seeds verify".into())
}

fn sync_network() -> Outcome {
    for seed in 0..SEEDS {
        let cfg = RunConfig::sync(5, 10).with_seed(seed);
        let t = 5 + cfg.dt_prime;
        let r = simulate(&cfg).map_err(|e| e.to_string())?.result;
        ensure(r.pass, || format!("seed {seed}: {:?}", r.verification.mismatched_generators))?;
        ensure(r.columns_verified == 10, || format!("seed {seed}: {} columns verified", r.columns_verified))?;
        ensure(r.column_period_ticks == Some(t), || format!("seed {seed}: period {:?}", r.column_period_ticks))?;
        let delays: BTreeSet<u64> = r.latency_histogram.keys().copied().collect();
        ensure(delays == BTreeSet::from([t, 3 * t]), || format!("seed {seed}: delays {delays:?}"))?;
        ensure(r.warm_up_steps == Some(4), || format!("seed {seed}: warm-up {:?}", r.warm_up_steps))?;
    }
    Ok("5x10 verifies for 20 seeds; 1 column per 6 ticks; delays {6, 18}; warm-up 4".into())
}

fn async_network() -> Outcome {
    let table = RoutingTable::default();
    table.validate().map_err(|e| e.to_string())?;
    for col in 1..=5 {
        for step in 1..=PERIOD {
            let (a, b) = (table.setting(col, ChipKind::A, step), table.setting(col, ChipKind::B, step));
            ensure(!(a.is_cavity_bound() && b.is_cavity_bound()), || format!("A{col}/B{col} both cavity-bound at step {step}"))?;
            for kind in [ChipKind::A, ChipKind::B] {
                let shifted = table.setting(col, kind, step + 2 * (col as u64 - 1));
                ensure(shifted.role() == table.setting(1, kind, step).role(), || format!("column {col} is not offset by 2 ticks"))?;
                ensure(table.setting(col, kind, step + PERIOD) == table.setting(col, kind, step), || "period is not 10".into())?;
            }
        }
    }
    for seed in 0..SEEDS {
        let cfg = RunConfig::asynchronous(5, 40).with_seed(seed).with_consume(ConsumeMode::None);
        let out = simulate(&cfg).map_err(|e| e.to_string())?;
        let r = &out.result;
        ensure(r.pass && r.verification.full_group, || format!("seed {seed}: {:?}", r.verification.mismatched_generators))?;
        let rhombus = LatticeSpec::rhombus(out.spec.width, 5).map_err(|e| e.to_string())?;
        ensure(out.spec == rhombus && out.graph == lattice_graph(&rhombus), || format!("seed {seed}: graph is not the rhombus"))?;
        ensure(r.latency_histogram.keys().eq([5u64].iter()), || format!("seed {seed}: latencies {:?}", r.latency_histogram))?;
        ensure(r.photons_exited == r.photons_emitted, || format!("seed {seed}: photons left in flight"))?;
        ensure(r.column_period_ticks == Some(2), || format!("seed {seed}: period {:?}", r.column_period_ticks))?;
    }
    Ok("5 rows x 40 ticks verify as the rhombus for 20 seeds; latency 5, period 2, routing period 10, offset 2, A/B exclusive".into())
}

fn role_coverage() -> Outcome {
    let cfgs = [
        RunConfig::constant(5, 5),
        RunConfig::constant(1, 4),
        RunConfig::sync(5, 10),
        RunConfig::sync(1, 6),
        RunConfig::asynchronous(5, 40),
        RunConfig::asynchronous(2, 20),
    ];
    for cfg in cfgs {
        let r = simulate(&cfg).map_err(|e| e.to_string())?.result;
        ensure(r.role_coverage_ok && r.pass, || format!("{} {} rows: role coverage broken", r.network, r.rows))?;
    }
    Ok("gate logs hold each required role once on all networks".into())
}

fn budget() -> Outcome {
    let b = check_budget(System::Cs, 150.0, 1);
    ensure(b.interval_ns == 600.0 && b.ok, || format!("{b:?}"))?;
    Ok("Cs interval 600 ns, 150 ns feedforward ok".into())
}

fn determinism() -> Outcome {
    for cfg in [RunConfig::constant(6, 6).with_seed(4), RunConfig::sync(5, 10).with_seed(4), RunConfig::asynchronous(5, 40).with_seed(4)] {
        let a = simulate(&cfg).map_err(|e| e.to_string())?;
        let b = simulate(&cfg).map_err(|e| e.to_string())?;
        ensure(report_json(&a) == report_json(&b) && trace_csv(&a) == trace_csv(&b), || format!("{:?} differs between runs", cfg.network))?;
    }
    Ok("report and trace byte-identical across repeated runs".into())
}

fn frame_invariance() -> Outcome {
    for seed in 0..SEEDS {
        let (virtual_verdict, physical_verdict) = common::frame_invariance(seed)?;
        ensure(virtual_verdict == physical_verdict, || format!("seed {seed}: virtual {virtual_verdict}, physical {physical_verdict}"))?;
        ensure(virtual_verdict, || format!("seed {seed}: verification failed"))?;
    }
    Ok("physical and virtual frames agree for 20 seeds".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("engine-oracle equivalence", oracle_equivalence, 10),
        ("module correctness", module_correctness, 60),
        ("constant-time network", constant_network, 60),
        ("synchronous network", sync_network, 60),
        ("asynchronous network", async_network, 60),
        ("role coverage", role_coverage, 60),
        ("budget arithmetic", budget, 60),
        ("determinism", determinism, 60),
        ("frame invariance", frame_invariance, 60),
    ];
    let mut failed = 0;
    for (k, (name, check, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if took > Duration::from_secs(limit) => Err(format!("{msg}, but took longer than {limit} s")),
            other => other,
        };
        match outcome {
            Ok(msg) => println!("criterion {}: PASS {name}: {msg} ({:.2} s)", k + 1, took.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {msg} ({:.2} s)", k + 1, took.as_secs_f64());
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
