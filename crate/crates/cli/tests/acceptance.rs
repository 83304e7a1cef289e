//! Acceptance criteria, one line each. Criteria 1 to 8 run in-process;
//! determinism runs the binary twice and compares the hash-covered
//! sections of the two reports.

use std::process::{Command, ExitCode};
use std::time::Instant;

use caloron_cli::report::RunReport;
use caloron_cli::selftest::{run_criterion, CriterionResult};

const SEED: u64 = 7;

fn determinism() -> CriterionResult {
    let start = Instant::now();
    let dir = tempfile::tempdir().expect("temp dir");
    let mut bodies = Vec::new();
    let mut notes = Vec::new();
    for name in ["first.json", "second.json"] {
        let path = dir.path().join(name);
        let out = Command::new(env!("CARGO_BIN_EXE_caloron"))
            .args(["selftest", "--seed", &SEED.to_string(), "--report"])
            .arg(&path)
            .output()
            .expect("binary runs");
        notes.push(format!("{name}: exit {:?}", out.status.code()));
        let report: Option<RunReport> =
            std::fs::read_to_string(&path).ok().and_then(|t| serde_json::from_str(&t).ok());
        bodies.push(report.map(|r| (serde_json::to_string(&r.report).unwrap(), r.verify_hash(), r.content_hash)));
    }
    let ok = match (&bodies[0], &bodies[1]) {
        (Some((a, va, ha)), Some((b, vb, hb))) => a == b && ha == hb && *va && *vb,
        _ => false,
    };
    CriterionResult {
        id: 9,
        title: "determinism".into(),
        checks: vec![caloron_cli::report::CheckRecord::holds("binary_reports_identical", ok)],
        notes,
        limit_s: None,
        elapsed_s: start.elapsed().as_secs_f64(),
    }
}

fn main() -> ExitCode {
    let mut all = true;
    for id in 1..=8 {
        let line = match run_criterion(id, SEED) {
            Ok(r) => {
                all &= r.pass();
                let notes = r.notes.iter().filter(|n| n.contains("errors") || n.contains("residuals"));
                let extra: Vec<&String> = notes.collect();
                if extra.is_empty() {
                    r.line()
                } else {
                    format!("{} [{}]", r.line(), extra.iter().map(|s| s.as_str()).collect::<Vec<_>>().join("; "))
                }
            }
            Err(e) => {
                all = false;
                format!("criterion {id}: FAIL (error: {e})")
            }
        };
        println!("{line}");
    }
    let d = determinism();
    all &= d.pass();
    println!("{}", d.line());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
