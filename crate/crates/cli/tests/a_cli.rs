use std::path::Path;
use std::process::{Command, Output};

use hecke_spectra::cache::{read_log, Cache, CacheKey, CacheValue, CACHE_ENV};
use hecke_spectra::record::ExperimentRecord;

fn run(experiment: &str, config: &str, dir: &Path, extra: &[&str]) -> Output {
    let cfg = dir.join(format!("{experiment}.cfg"));
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_hecke-spectra"))
        .arg(experiment)
        .arg("--config")
        .arg(&cfg)
        .args(extra)
        .env(CACHE_ENV, dir.join("cache"))
        .output()
        .unwrap()
}

fn records(out: &Output) -> Vec<ExperimentRecord> {
    String::from_utf8_lossy(&out.stdout).lines().map(|l| ExperimentRecord::from_json_line(l).unwrap()).collect()
}

#[test]
fn trace_record_matches_tau() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("trace", "n = 2\nk = 12\nN = 1\n", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let recs = records(&out);
    assert_eq!(recs.len(), 1);
    assert!((recs[0].outputs["total"] + 0.5303300859).abs() < 1e-9);
    assert_eq!(recs[0].parameters["kind"], "new");
    assert_eq!(recs[0].provenance.version, env!("CARGO_PKG_VERSION"));
}

#[test]
fn noweight_record_fields() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("noweight", "n = 9120\nN = 1\ndelta = 0.25\n", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = &records(&out)[0];
    for key in ["lhs", "main_term", "ratio"] {
        assert!(r.outputs.contains_key(key), "{key}");
    }
    assert!((r.outputs["ratio"] - r.outputs["lhs"] / r.outputs["main_term"]).abs() < 1e-12);
    assert!(r.provenance.truncation.contains_key("window_radius"));
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run("bogus", "n = 2\n", dir.path(), &[]).status.code(), Some(2));
    assert_eq!(run("trace", "n = 2\nk = 12\nwat = 1\n", dir.path(), &[]).status.code(), Some(2));
    assert_eq!(run("trace", "n 2\n", dir.path(), &[]).status.code(), Some(2));
    assert_eq!(run("trace", "n = 2\nk = 12\nN = 4\n", dir.path(), &[]).status.code(), Some(2));
    assert_eq!(run("trace", "experiment = petersson\nn = 2\nk = 12\n", dir.path(), &[]).status.code(), Some(2));
    assert_eq!(run("trace", "n = 2\nk = 12\n", dir.path(), &["--threads", "0"]).status.code(), Some(2));
    let missing = Command::new(env!("CARGO_BIN_EXE_hecke-spectra"))
        .args(["trace", "--config", "/nonexistent/file.cfg"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn verification_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // The order-sum check below the transition range is known to miss its
    // tolerance at K = 2000; a healthy subset exits 0.
    let out = run("verify", "profile = quick\ncriteria = 4\n", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
    let out = run("verify", "profile = quick\ncriteria = 8\n", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(records(&out)[0].outputs["passed"], 1.0);
}

#[test]
fn csv_output_and_cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "n = 101, 1001\nN = 2, 3\n";
    let csv_path = dir.path().join("out.csv");
    let cold = run("arith-sum", cfg, dir.path(), &["--out", csv_path.to_str().unwrap()]);
    assert_eq!(cold.status.code(), Some(0), "{}", String::from_utf8_lossy(&cold.stderr));
    let text = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().next().unwrap().contains("out.d_square_sum"));
    let warm = run("arith-sum", cfg, dir.path(), &[]);
    let strip = |o: &Output| records(o).iter().map(|r| r.without_clock().to_json_line().unwrap()).collect::<Vec<_>>();
    assert_eq!(strip(&cold), strip(&warm));
    let cache = Cache::open(&dir.path().join("cache")).unwrap();
    assert!(cache.get(&CacheKey::new("hurwitz_H", "404".into())).is_some());
    assert!(cache.get(&CacheKey::new("D", "2,1,101".into())).is_some());
    assert!(cache.get(&CacheKey::new("class_number", "-403".into())).is_some());
}

#[test]
fn corrupt_cache_is_rebuilt_with_identical_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "K = 500\na = -1, 0, 1\n";
    let first = run("bessel-sum", cfg, dir.path(), &[]);
    assert_eq!(first.status.code(), Some(0));
    let log = dir.path().join("cache").join("cache.log");
    let text = std::fs::read_to_string(&log).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let victim = lines.iter().position(|l| l.contains("bessel_j")).unwrap();
    // Flip one digit of the stored value without touching the checksum.
    let l = &lines[victim];
    let pos = l.find("\"value\":").unwrap() + 9;
    let digit = l.as_bytes()[pos..].iter().position(|b| b.is_ascii_digit() && *b != b'0').unwrap() + pos;
    let mut bytes = l.clone().into_bytes();
    bytes[digit] = if bytes[digit] == b'9' { b'1' } else { bytes[digit] + 1 };
    lines[victim] = String::from_utf8(bytes).unwrap();
    std::fs::write(&log, lines.join("\n") + "\n").unwrap();
    let (_, report) = read_log(&log).unwrap();
    assert!(report.rebuild && report.rejected == 1);
    let second = run("bessel-sum", cfg, dir.path(), &[]);
    assert_eq!(second.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&second.stderr).contains("rebuilding"));
    let strip = |o: &Output| records(o).iter().map(|r| r.without_clock().to_json_line().unwrap()).collect::<Vec<_>>();
    assert_eq!(strip(&first), strip(&second));
    let (_, report) = read_log(&log).unwrap();
    assert_eq!(report.rejected, 0);
}

#[test]
fn concurrent_readers_see_verified_prefixes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().to_path_buf();
    let writer = {
        let path = path.clone();
        std::thread::spawn(move || {
            let cache = Cache::open(&path).unwrap();
            for batch in 0..40u64 {
                for i in 0..25u64 {
                    let n = batch * 25 + i;
                    cache.put(CacheKey::new("probe", n.to_string()), CacheValue::Exact { value: (n * n).to_string() });
                }
                cache.flush().unwrap();
            }
        })
    };
    let readers: Vec<_> = (0..4)
        .map(|_| {
            let path = path.clone();
            std::thread::spawn(move || {
                let mut last = 0;
                for _ in 0..200 {
                    let (entries, report) = read_log(&path.join("cache.log")).unwrap();
                    assert!(entries.len() >= last);
                    last = entries.len();
                    assert_eq!(report.rejected, 0, "reader saw a damaged line");
                    for e in entries {
                        let n: u64 = e.key.args.parse().unwrap();
                        assert_eq!(e.value, CacheValue::Exact { value: (n * n).to_string() });
                    }
                }
            })
        })
        .collect();
    writer.join().unwrap();
    for r in readers {
        r.join().unwrap();
    }
    assert_eq!(Cache::open(&path).unwrap().len(), 1000);
}
