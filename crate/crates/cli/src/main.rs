//! `pcsim`: run the photonic-module network simulations from the command line.

use std::ops::Range;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use photonic_cluster::config::{ConsumeMode, NetworkKind, OutputPaths, RunConfig};
use photonic_cluster::event::{SimResult, System};
use photonic_cluster::export::write_exports;
use photonic_cluster::network::{simulate, RunOutput};
use photonic_cluster::SimError;
use rayon::prelude::*;

/// `println!` that stays quiet when stdout is closed early.
macro_rules! say {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($t)*);
    }};
}

#[derive(Parser)]
#[command(name = "pcsim", version, about = "Cluster-state preparation with photonic modules, simulated at the stabilizer level")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one network and verify the cluster state it prepares.
    Simulate(SimulateArgs),
}

#[derive(Copy, Clone, ValueEnum)]
enum Network {
    Constant,
    Sync,
    Async,
}

#[derive(Copy, Clone, ValueEnum)]
enum Consume {
    None,
    X,
    Z,
}

#[derive(Copy, Clone, ValueEnum)]
enum Atom {
    Cs,
    Rb,
    Nv,
}

#[derive(Args)]
struct SimulateArgs {
    /// Network architecture.
    #[arg(long, value_enum)]
    network: Option<Network>,
    /// Lattice rows (photon sources).
    #[arg(long)]
    rows: Option<usize>,
    /// Lattice columns (constant and sync networks).
    #[arg(long)]
    columns: Option<usize>,
    /// Emission window in ticks (async network).
    #[arg(long)]
    duration: Option<u64>,
    /// Atomic system fixing the unit interaction time.
    #[arg(long, value_enum, conflicts_with_all = ["g", "delta"])]
    system: Option<Atom>,
    /// Atom-cavity coupling in rad/ns (with --delta, instead of --system).
    #[arg(long, requires = "delta", allow_negative_numbers = true)]
    g: Option<f64>,
    /// Cavity detuning in rad/ns.
    #[arg(long, requires = "g", allow_negative_numbers = true)]
    delta: Option<f64>,
    /// Atomic readout time in ticks.
    #[arg(long = "dt-prime")]
    dt_prime: Option<u64>,
    /// Stretch every delay by this integer factor.
    #[arg(long)]
    slowdown: Option<u64>,
    /// RNG seed for measurement outcomes.
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Seed sweep `A..B` (exclusive) or `A..=B`, run in parallel.
    #[arg(long, value_parser = parse_seeds)]
    seeds: Option<Range<u64>>,
    /// What detectors do with exiting photons.
    #[arg(long, value_enum)]
    consume: Option<Consume>,
    /// TOML config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the JSON report here.
    #[arg(long)]
    report: Option<String>,
    /// Write the event trace (CSV) here.
    #[arg(long)]
    trace: Option<String>,
    /// Write the realized cluster graph (DOT) here.
    #[arg(long)]
    graph: Option<String>,
    /// Routing-table override for the async network.
    #[arg(long = "routing-table")]
    routing_table: Option<String>,
    /// Detector plus feedforward latency in ns.
    #[arg(long = "feedforward-ns")]
    feedforward_ns: Option<f64>,
    /// Report a budget violation instead of refusing to run.
    #[arg(long = "allow-budget-violation")]
    allow_budget_violation: bool,
}

fn parse_seeds(s: &str) -> Result<Range<u64>, String> {
    let bad = || format!("expected A..B or A..=B, got {s:?}");
    let (a, b, inclusive) = match s.split_once("..=") {
        Some((a, b)) => (a, b, true),
        None => {
            let (a, b) = s.split_once("..").ok_or_else(bad)?;
            (a, b, false)
        }
    };
    let a: u64 = a.trim().parse().map_err(|_| bad())?;
    let b: u64 = b.trim().parse().map_err(|_| bad())?;
    let end = if inclusive { b + 1 } else { b };
    if end <= a {
        return Err(format!("empty seed range {s:?}"));
    }
    Ok(a..end)
}

impl SimulateArgs {
    fn to_config(&self) -> Result<RunConfig, SimError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => {
                let network = self.network.ok_or_else(|| SimError::Config("--network is required without --config".into()))?;
                let rows = self.rows.ok_or_else(|| SimError::Config("--rows is required without --config".into()))?;
                RunConfig::new(network_kind(network), rows)
            }
        };
        if let Some(n) = self.network {
            cfg.network = network_kind(n);
        }
        if let Some(r) = self.rows {
            cfg.rows = r;
        }
        if self.columns.is_some() {
            cfg.columns = self.columns;
        }
        if self.duration.is_some() {
            cfg.duration = self.duration;
        }
        if let Some(s) = self.system {
            cfg.system = Some(match s {
                Atom::Cs => System::Cs,
                Atom::Rb => System::Rb,
                Atom::Nv => System::Nv,
            });
            cfg.g = None;
            cfg.delta = None;
        }
        if self.g.is_some() {
            cfg.g = self.g;
            cfg.delta = self.delta;
            cfg.system = None;
        }
        if let Some(v) = self.dt_prime {
            cfg.dt_prime = v;
        }
        if let Some(v) = self.slowdown {
            cfg.slowdown = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(c) = self.consume {
            cfg.consume = match c {
                Consume::None => ConsumeMode::None,
                Consume::X => ConsumeMode::X,
                Consume::Z => ConsumeMode::Z,
            };
        }
        if let Some(v) = self.feedforward_ns {
            cfg.feedforward_ns = v;
        }
        cfg.allow_budget_violation |= self.allow_budget_violation;
        if self.routing_table.is_some() {
            cfg.routing_table = self.routing_table.clone();
        }
        for (slot, flag) in
            [(&mut cfg.output.report, &self.report), (&mut cfg.output.trace, &self.trace), (&mut cfg.output.graph, &self.graph)]
        {
            if flag.is_some() {
                *slot = flag.clone();
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn network_kind(n: Network) -> NetworkKind {
    match n {
        Network::Constant => NetworkKind::Constant,
        Network::Sync => NetworkKind::Sync,
        Network::Async => NetworkKind::Async,
    }
}

/// `out/report.json` becomes `out/report-seed3.json`.
fn seeded_path(path: &str, seed: u64) -> String {
    let p = PathBuf::from(path);
    let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match p.extension() {
        Some(ext) => format!("{stem}-seed{seed}.{}", ext.to_string_lossy()),
        None => format!("{stem}-seed{seed}"),
    };
    p.with_file_name(name).display().to_string()
}

fn exit_code(err: &SimError) -> u8 {
    match err {
        SimError::Config(_) | SimError::Io { .. } => 2,
        _ => 1,
    }
}

fn fmt_hist(h: &std::collections::BTreeMap<u64, usize>) -> String {
    let parts: Vec<String> = h.iter().map(|(k, v)| format!("{k}:{v}")).collect();
    format!("{{{}}}", parts.join(", "))
}

fn summary(r: &SimResult) -> String {
    let mut lines = vec![
        format!("network        {}  rows {}  seed {}", r.network, r.rows, r.seed),
        format!("verification   {}", if r.pass { "PASS" } else { "FAIL" }),
        format!(
            "photons        emitted {}  exited {}  verified {}  detected {}  in flight {}",
            r.photons_emitted,
            r.photons_exited,
            r.photons_verified,
            r.photons_detected,
            r.photons_in_flight.len()
        ),
        format!("columns        emitted {}  verified {}", r.columns_emitted, r.columns_verified),
        format!("module cycles  {}", r.module_cycles),
    ];
    if let Some(s) = r.steps {
        lines.push(format!("steps          {s}"));
    }
    if let Some(p) = r.column_period_ticks {
        lines.push(format!("column period  {p} ticks"));
    }
    if let Some(w) = r.warm_up_steps {
        lines.push(format!("warm-up        {w} steps"));
    }
    lines.push(format!("wall time      {} ticks", r.wall_time_ticks));
    lines.push(format!("latency        {}", fmt_hist(&r.latency_histogram)));
    lines.push(format!("atom window    {}", fmt_hist(&r.atom_window_histogram)));
    lines.push(format!("role coverage  {}", if r.role_coverage_ok { "ok" } else { "BROKEN" }));
    let b = &r.budget;
    lines.push(format!(
        "budget         dt {} ns  interval {} ns  feedforward {} ns  {}",
        b.delta_t_ns,
        b.interval_ns,
        b.feedforward_ns,
        if b.ok { "ok".to_string() } else { format!("VIOLATED (min slowdown {})", b.min_slowdown) }
    ));
    lines.push(format!("events         {}", r.event_count));
    lines.join("\n")
}

/// Exit status of a finished run.
fn status(r: &SimResult) -> u8 {
    if r.pass && r.budget.ok {
        0
    } else {
        1
    }
}

fn report_failure(r: &SimResult) {
    if !r.pass {
        eprintln!("verification failed; mismatched generators:");
        for g in &r.verification.mismatched_generators {
            eprintln!("  {g}");
        }
        for f in r.verification.sign_fixes.iter().filter(|f| !f.frame_explains) {
            eprintln!("  unexplained sign at {}", f.site);
        }
    }
    if !r.budget.ok {
        eprintln!("timing budget violated; minimal slowdown {}", r.budget.min_slowdown);
    }
}

fn run_one(cfg: &RunConfig) -> Result<RunOutput, SimError> {
    let out = simulate(cfg)?;
    write_exports(&out, &cfg.output)?;
    Ok(out)
}

fn simulate_cmd(args: &SimulateArgs) -> u8 {
    let cfg = match args.to_config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let Some(seeds) = args.seeds.clone() else {
        return match run_one(&cfg) {
            Ok(out) => {
                say!("{}", summary(&out.result));
                report_failure(&out.result);
                status(&out.result)
            }
            Err(e) => {
                eprintln!("error: {e}");
                if let Some(tail) = trace_tail(&e) {
                    eprintln!("last events:\n{}", tail.join("\n"));
                }
                exit_code(&e)
            }
        };
    };
    let results: Vec<(u64, Result<SimResult, SimError>)> = seeds
        .into_par_iter()
        .map(|seed| {
            let mut c = cfg.clone();
            c.seed = seed;
            c.output = OutputPaths {
                report: c.output.report.as_deref().map(|p| seeded_path(p, seed)),
                trace: c.output.trace.as_deref().map(|p| seeded_path(p, seed)),
                graph: c.output.graph.as_deref().map(|p| seeded_path(p, seed)),
            };
            (seed, run_one(&c).map(|o| o.result))
        })
        .collect();
    let mut code = 0;
    let mut passed = 0;
    for (seed, res) in &results {
        match res {
            Ok(r) => {
                say!(
                    "seed {seed}: {}  columns {}  period {}  latency {}",
                    if r.pass { "PASS" } else { "FAIL" },
                    r.columns_verified,
                    r.column_period_ticks.map_or("-".to_string(), |p| p.to_string()),
                    fmt_hist(&r.latency_histogram)
                );
                report_failure(r);
                passed += usize::from(status(r) == 0);
                code = code.max(status(r));
            }
            Err(e) => {
                say!("seed {seed}: ERROR {e}");
                code = code.max(exit_code(e));
            }
        }
    }
    say!("{passed}/{} seeds passed", results.len());
    code
}

fn trace_tail(e: &SimError) -> Option<&Vec<String>> {
    match e {
        SimError::RoutingCollision { trace_tail, .. }
        | SimError::CavityDoubleOccupancy { trace_tail, .. }
        | SimError::PhaseMismatch { trace_tail, .. } => Some(trace_tail),
        _ => None,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Simulate(args) => simulate_cmd(args),
    };
    ExitCode::from(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_ranges() {
        assert_eq!(parse_seeds("0..20"), Ok(0..20));
        assert_eq!(parse_seeds("3..=5"), Ok(3..6));
        assert!(parse_seeds("5..5").is_err());
        assert!(parse_seeds("a..b").is_err());
        assert!(parse_seeds("7").is_err());
    }

    #[test]
    fn seeded_paths() {
        assert_eq!(seeded_path("out/report.json", 3), "out/report-seed3.json");
        assert_eq!(seeded_path("trace", 0), "trace-seed0");
    }

    #[test]
    fn flags_override_defaults() {
        let cli = Cli::try_parse_from([
            "pcsim",
            "simulate",
            "--network",
            "sync",
            "--rows",
            "2",
            "--columns",
            "7",
            "--dt-prime",
            "3",
            "--consume",
            "none",
        ])
        .unwrap();
        let Command::Simulate(args) = cli.command;
        let cfg = args.to_config().unwrap();
        assert_eq!((cfg.network, cfg.rows, cfg.columns, cfg.dt_prime), (NetworkKind::Sync, 2, Some(7), 3));
        assert_eq!(cfg.consume, ConsumeMode::None);
    }

    #[test]
    fn g_needs_delta() {
        assert!(Cli::try_parse_from(["pcsim", "simulate", "--network", "sync", "--rows", "2", "--g", "1.0"]).is_err());
        assert!(Cli::try_parse_from([
            "pcsim",
            "simulate",
            "--network",
            "sync",
            "--rows",
            "2",
            "--system",
            "cs",
            "--g",
            "1",
            "--delta",
            "2"
        ])
        .is_err());
    }
}
