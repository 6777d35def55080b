//! Deterministic text exports of a finished run.

use std::fmt::Write as _;
use std::path::Path;

use crate::config::OutputPaths;
use crate::error::SimError;
use crate::network::RunOutput;

pub const TRACE_HEADER: &str = "time,kind,photon,chip,detail";

/// Pretty-printed JSON of the result, config echo included.
pub fn report_json(out: &RunOutput) -> String {
    let mut s = serde_json::to_string_pretty(&out.result).expect("results serialize");
    s.push('\n');
    s
}

pub fn trace_csv(out: &RunOutput) -> String {
    let mut s = String::from(TRACE_HEADER);
    s.push('\n');
    for ev in &out.trace {
        s.push_str(&ev.csv_line());
        s.push('\n');
    }
    s
}

/// Undirected cluster graph; nodes are photon ids labelled with their site.
pub fn graph_dot(out: &RunOutput) -> String {
    let mut s = String::from("graph cluster {\n");
    for &site in out.graph.keys() {
        let _ = writeln!(s, "  {} [label=\"{site}\"];", out.spec.index(site));
    }
    for (&a, nbrs) in &out.graph {
        for &b in nbrs.iter().filter(|&&b| a < b) {
            let _ = writeln!(s, "  {} -- {};", out.spec.index(a), out.spec.index(b));
        }
    }
    s.push_str("}\n");
    s
}

fn write(path: &str, text: &str) -> Result<(), SimError> {
    let p = Path::new(path);
    if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| SimError::Io { path: path.into(), reason: e.to_string() })?;
    }
    std::fs::write(p, text).map_err(|e| SimError::Io { path: path.into(), reason: e.to_string() })
}

/// Writes whichever exports have a path.
pub fn write_exports(out: &RunOutput, paths: &OutputPaths) -> Result<(), SimError> {
    if let Some(p) = &paths.report {
        write(p, &report_json(out))?;
    }
    if let Some(p) = &paths.trace {
        write(p, &trace_csv(out))?;
    }
    if let Some(p) = &paths.graph {
        write(p, &graph_dot(out))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ConsumeMode, RunConfig};
    use crate::event::SimResult;
    use crate::network::simulate;

    #[test]
    fn dot_of_2x2_square() {
        let out = simulate(&RunConfig::constant(2, 2).with_consume(ConsumeMode::None)).unwrap();
        let dot = graph_dot(&out);
        assert_eq!(dot.matches("label=").count(), 4);
        assert_eq!(dot.matches(" -- ").count(), 4);
    }

    #[test]
    fn trace_rows_match_event_count() {
        let out = simulate(&RunConfig::sync(3, 6).with_seed(5)).unwrap();
        let csv = trace_csv(&out);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(TRACE_HEADER));
        assert_eq!(lines.count(), out.result.event_count);
    }

    #[test]
    fn report_round_trips_and_replays() {
        let out = simulate(&RunConfig::asynchronous(3, 20).with_seed(9)).unwrap();
        let json = report_json(&out);
        let back: SimResult = serde_json::from_str(&json).unwrap();
        assert_eq!(back, out.result);
        assert_eq!(back.seed, 9);
        let again = simulate(&back.config).unwrap();
        assert_eq!(report_json(&again), json);
        assert_eq!(trace_csv(&again), trace_csv(&out));
    }

    #[test]
    fn writes_files() {
        let dir = std::env::temp_dir().join(format!("pc-export-{}", std::process::id()));
        let out = simulate(&RunConfig::constant(2, 3)).unwrap();
        let paths = OutputPaths {
            report: Some(dir.join("r.json").display().to_string()),
            trace: Some(dir.join("t.csv").display().to_string()),
            graph: Some(dir.join("g.dot").display().to_string()),
        };
        write_exports(&out, &paths).unwrap();
        assert_eq!(std::fs::read_to_string(dir.join("t.csv")).unwrap(), trace_csv(&out));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
