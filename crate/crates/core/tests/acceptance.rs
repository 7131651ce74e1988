//! The eleven acceptance criteria, one pass/fail line each.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use fraclab::verify::{run_criterion, Budget, NAMES};
use serde_json::Value;

const SEED: u64 = 0x5eed;

/// Runtime limits for the criteria that state one.
fn limit(id: u8) -> Option<Duration> {
    match id {
        1 => Some(Duration::from_secs(5)),
        2 => Some(Duration::from_secs(120)),
        5 => Some(Duration::from_secs(300)),
        _ => None,
    }
}

/// Runs `verify-all` through the binary and returns its results section.
fn verify_all_results() -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_fraclab"))
        .args(["verify-all", "--seed", "11", "--budget", "reduced"])
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    let report: Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    serde_json::to_string(&report["results"]).map_err(|e| e.to_string())
}

fn binary_determinism() -> (bool, String) {
    match (verify_all_results(), verify_all_results()) {
        (Ok(a), Ok(b)) => {
            let passed: Vec<Value> = serde_json::from_str::<Vec<Value>>(&a).unwrap_or_default();
            let green = passed.iter().filter(|c| c["passed"] == Value::Bool(true)).count();
            (a == b, format!("two verify-all runs byte-identical: {} ({} bytes, {green}/11 green)", a == b, a.len()))
        }
        (Err(e), _) | (_, Err(e)) => (false, format!("verify-all failed: {e}")),
    }
}

fn main() -> ExitCode {
    let mut failures = 0;
    for id in 1..=11u8 {
        let start = Instant::now();
        let (mut passed, mut summary) = if id == 11 {
            let inner = run_criterion(11, Budget::Full, SEED);
            let (ok, text) = binary_determinism();
            (ok && inner.passed, format!("{text}; {}", inner.summary))
        } else {
            let r = run_criterion(id, Budget::Full, SEED);
            (r.passed, r.summary)
        };
        let elapsed = start.elapsed();
        if let Some(max) = limit(id) {
            if elapsed > max {
                passed = false;
                summary = format!("{summary}; took {elapsed:.1?}, limit {max:?}");
            }
        }
        failures += usize::from(!passed);
        println!(
            "[{}] {:2}. {} ({:.1?}): {}",
            if passed { "PASS" } else { "FAIL" },
            id,
            NAMES[id as usize - 1],
            elapsed,
            summary
        );
    }
    if failures == 0 {
        println!("acceptance: 11/11 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} criteria failed");
        ExitCode::FAILURE
    }
}
