//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Failing criteria are reported but do not fail `cargo test` unless
//! `SLZ_ACCEPTANCE_STRICT=1` is set.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use slz_core::validate::{run_criterion, Check};

fn run_slz(args: &[&str], out: &Path) -> bool {
    Command::new(env!("CARGO_BIN_EXE_slz"))
        .args(args)
        .arg("--out")
        .arg(out)
        .status()
        .map(|s| s.success())
        .unwrap_or(false)
}

fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .map(|d| d.flatten().map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())).collect())
        .unwrap_or_default();
    v.sort();
    v
}

/// Each configuration run twice by the binary into fresh directories.
fn cli_determinism() -> bool {
    let configs: [&[&str]; 3] = [
        &["eig", "--problem", "harmonic_full", "--truncate", "-6", "6", "--n", "8"],
        &["convrate", "--problem", "laguerre", "--gamma", "1", "--j", "2,4,8", "--x", "20:100:log10"],
        &["zeta-partial", "--problem", "harmonic_full", "--truncate", "1", "--x", "10,20,40", "--n", "2"],
    ];
    configs.iter().all(|args| {
        let runs: Vec<_> = (0..2)
            .map(|_| {
                let dir = tempfile::tempdir().unwrap();
                let ok = run_slz(args, dir.path());
                (ok, artifacts(dir.path()))
            })
            .collect();
        runs.iter().all(|r| r.0) && !runs[0].1.is_empty() && runs[0].1 == runs[1].1
    })
}

fn main() {
    let mut passed = 0;
    let total = Instant::now();
    for id in 1..=11 {
        let mut r = run_criterion(id);
        if id == 11 {
            let t = Instant::now();
            let ok = cli_determinism();
            r.checks.push(Check { name: "CLI artifacts byte-identical on rerun".into(), value: ok as u8 as f64, limit: "true".into(), ok });
            r.seconds += t.elapsed().as_secs_f64();
            r.passed = r.error.is_none() && r.checks.iter().all(|c| c.ok) && r.seconds <= r.budget;
        }
        println!("{}", r.line());
        for c in r.checks.iter().filter(|c| !c.ok) {
            println!("    {} = {:e} (want {})", c.name, c.value, c.limit);
        }
        passed += r.passed as usize;
    }
    println!("acceptance: {passed}/11 criteria passed in {:.1} s", total.elapsed().as_secs_f64());
    if passed < 11 && std::env::var("SLZ_ACCEPTANCE_STRICT").as_deref() == Ok("1") {
        std::process::exit(1);
    }
}
