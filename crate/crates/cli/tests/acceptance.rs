//! Acceptance suite: one PASS/FAIL line per criterion. Criteria 1 to 10 run
//! in process on the full profile; criterion 11 drives the binary.

use std::io::Write;
use std::process::{Command, ExitCode};
use std::time::Instant;

use hecke_spectra::acceptance::{run_all, Profile, Status, CRITERIA};
use hecke_spectra::cache::{Cache, CACHE_ENV};
use hecke_spectra::record::ExperimentRecord;

/// Runs `verify` on the quick profile and returns (exit code, records with
/// wall-clock fields cleared, as JSON lines).
fn verify_run(config: &std::path::Path, cache_dir: &std::path::Path, threads: usize) -> (i32, Vec<String>) {
    let out = Command::new(env!("CARGO_BIN_EXE_hecke-spectra"))
        .args(["verify", "--config"])
        .arg(config)
        .args(["--threads", &threads.to_string()])
        .env(CACHE_ENV, cache_dir)
        .output()
        .expect("spawn hecke-spectra");
    let lines = String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| ExperimentRecord::from_json_line(l).expect("record").without_clock().to_json_line().unwrap())
        .collect();
    (out.status.code().unwrap_or(-1), lines)
}

fn determinism() -> (bool, String) {
    let work = tempfile::tempdir().unwrap();
    let config = work.path().join("verify.cfg");
    std::fs::write(&config, "profile = quick\ncriteria = 1..10\n").unwrap();
    let mut reference: Option<(i32, Vec<String>)> = None;
    let mut mismatches = 0usize;
    let mut bad_exit = Vec::new();
    let mut warm_entries = usize::MAX;
    for threads in [1usize, 4, 8] {
        let dir = work.path().join(format!("cache-{threads}"));
        for pass in ["cold", "warm"] {
            let run = verify_run(&config, &dir, threads);
            if !(run.0 == 0 || run.0 == 1) || run.1.len() != 10 {
                bad_exit.push(format!("{pass}@{threads}: exit {} with {} records", run.0, run.1.len()));
            }
            match &reference {
                None => reference = Some(run),
                Some(r) => {
                    mismatches += usize::from(r.0 != run.0);
                    mismatches += r.1.iter().zip(&run.1).filter(|(a, b)| a != b).count();
                    mismatches += r.1.len().abs_diff(run.1.len());
                }
            }
        }
        warm_entries = warm_entries.min(Cache::open(&dir).unwrap().len());
    }
    let ok = mismatches == 0 && bad_exit.is_empty() && warm_entries > 0;
    let summary = format!(
        "quick verify cold and warm at 1, 4, 8 threads: {mismatches} differing records, cache entries after warm runs >= {warm_entries}{}",
        if bad_exit.is_empty() { String::new() } else { format!(", bad runs: {}", bad_exit.join("; ")) }
    );
    (ok, summary)
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let start = Instant::now();
    let cache = Cache::in_memory();
    let ids: Vec<u32> = (1..=10).collect();
    let mut failures = 0;
    let outcomes = run_all(Profile::Full, &cache, &ids, |o| {
        println!("{}  ({:.1} s)", o.line(), o.elapsed_seconds);
        let _ = std::io::stdout().flush();
    });
    match outcomes {
        Ok(list) => failures += list.iter().filter(|o| o.status == Status::Fail).count(),
        Err(e) => {
            println!("FAIL acceptance suite aborted: {e}");
            return ExitCode::FAILURE;
        }
    }
    let t = Instant::now();
    let (ok, summary) = determinism();
    let status = if ok { Status::Pass } else { Status::Fail };
    println!("{} [11] {}: {summary}  ({:.1} s)", status.as_str(), CRITERIA[10].1, t.elapsed().as_secs_f64());
    failures += usize::from(!ok);
    println!("acceptance: {} of 11 criteria passed in {:.0} s", 11 - failures, start.elapsed().as_secs_f64());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
