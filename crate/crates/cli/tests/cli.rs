use std::path::Path;
use std::process::{Command, Output};

fn slz(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slz")).args(args).arg("--out").arg(out).output().unwrap()
}

fn eigs_csv(text: &str) -> Vec<f64> {
    text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect()
}

#[test]
fn eig_harmonic_truncation() {
    let dir = tempfile::tempdir().unwrap();
    let o = slz(&["eig", "--problem", "harmonic_full", "--truncate", "-6", "6", "--n", "8"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("eig.csv")).unwrap();
    let e = eigs_csv(&text);
    assert_eq!(e.len(), 8);
    for (n, l) in e.iter().enumerate() {
        assert!((l - (2 * n + 1) as f64).abs() < 1e-4, "{l}");
    }
    // 17 significant digits
    let field = text.lines().nth(1).unwrap().split(',').nth(1).unwrap();
    assert_eq!(field.split('e').next().unwrap().replace(['.', '-'], "").len(), 17);
}

#[test]
fn unknown_catalog_name() {
    let dir = tempfile::tempdir().unwrap();
    let o = slz(&["eig", "--problem", "nosuch"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown catalog name"));
}

#[test]
fn bad_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["zeta-partial", "--problem", "free", "--x", "1:2:cubic3"][..],
        &["eig", "--problem", "power", "--truncate", "0", "5"][..],
        &["eig", "--problem", "free", "--tol", "-1"][..],
        &["spectral-zeta", "--problem", "free", "--x", "4,8", "--s", "2,0"][..],
    ] {
        let o = slz(args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = Command::new(env!("CARGO_BIN_EXE_slz")).args(["eig", "--bogus"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn nonconvergence_exit_3_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let o = slz(&["charfn", "--problem", "airy", "--x", "40,80", "--z", "-2,2", "--tol", "1e-12"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let d: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("diagnostics.json")).unwrap()).unwrap();
    assert_eq!(d["command"], "charfn");
    assert!(dir.path().join("charfn.csv").exists());
}

#[test]
fn config_file_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let cfg = dir.path().join("c.json");
    let doc = serde_json::json!({
        "command": "zeta-partial",
        "problem": "harmonic_full",
        "truncate": [1],
        "x": "10:40:log3",
        "n": 2,
        "out": b,
    });
    std::fs::write(&cfg, doc.to_string()).unwrap();
    let o = slz(&["zeta-partial", "--problem", "harmonic_full", "--truncate", "1", "--x", "10:40:log3", "--n", "2"], &a);
    assert_eq!(o.status.code(), Some(0));
    let o = Command::new(env!("CARGO_BIN_EXE_slz")).arg("run").arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let ta = std::fs::read(a.join("zeta_partial.csv")).unwrap();
    assert_eq!(ta, std::fs::read(b.join("zeta_partial.csv")).unwrap());
    assert_eq!(String::from_utf8_lossy(&ta).lines().count(), 7);
}

#[test]
fn custom_expressions() {
    let dir = tempfile::tempdir().unwrap();
    let o = slz(
        &["eig", "--expr-q", "k*x^2", "--param", "k=1", "--interval", "-inf", "inf", "--truncate", "-7", "7", "--n", "3"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let e = eigs_csv(&std::fs::read_to_string(dir.path().join("eig.csv")).unwrap());
    for (n, l) in e.iter().enumerate() {
        assert!((l - (2 * n + 1) as f64).abs() < 1e-6);
    }
}

#[test]
fn convrate_writes_data_and_script() {
    let dir = tempfile::tempdir().unwrap();
    let o = slz(&["convrate", "--problem", "laguerre", "--gamma", "1", "--j", "2,4", "--x", "20:30:lin3"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("convrate.csv")).unwrap();
    assert!(csv.starts_with("x,j,lambda,f_j,g_j,residual\n"));
    assert_eq!(csv.lines().count(), 1 + 3 * 2);
    let gp = std::fs::read_to_string(dir.path().join("convrate.gp")).unwrap();
    assert!(gp.contains("'convrate.csv'"));
}
