use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMOOTH: &str = r#"
kind = "smooth_scaling"
name = "small"
q = 1.0
alpha = [4, 8, 16, 32]
[fixture]
family = "gaussian_bump"
[grid]
half_width = 2.0
n = 64
"#;

fn psdo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psdo")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn passing_run_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMOOTH);
    let out = dir.path().join("out");
    let o = psdo(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("small.json").is_file());
    assert!(out.join("small.csv").is_file());
    let shown = psdo(&["show-report", out.join("small.json").to_str().unwrap()]);
    assert_eq!(shown.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&shown.stdout).contains("PASS"));
}

#[test]
fn failing_verdict_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &format!("tolerance = 1e-6\n{SMOOTH}"));
    let o = psdo(&["run", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn zero_symbol_is_a_degenerate_pass() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &SMOOTH.replace("family = \"gaussian_bump\"", "family = \"gaussian_bump\"\nparams = { amplitude = 0.0 }"));
    let o = psdo(&["run", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let json = fs::read_to_string(dir.path().join("small.json")).unwrap();
    assert!(json.contains("\"degenerate\": true"));
}

#[test]
fn unknown_fixture_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &SMOOTH.replace("gaussian_bump", "no_such_family"));
    let o = psdo(&["run", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no_such_family"));
}

#[test]
fn validate_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.toml", SMOOTH);
    assert_eq!(psdo(&["validate-config", &good]).status.code(), Some(0));
    let bad = write(dir.path(), "bad.toml", &SMOOTH.replace("n = 64", "n = 16"));
    let o = psdo(&["validate-config", &bad]);
    assert_eq!(o.status.code(), Some(1));
    let text = format!("{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr));
    assert!(text.contains("grid.n"), "{text}");
}

#[test]
fn repeated_runs_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &SMOOTH.replace("q = 1.0", "q = 0.5\nt = 0.5"));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let first = psdo(&["run", &cfg, "--out", a.to_str().unwrap(), "--workers", "1"]).status.code();
    let second = psdo(&["run", &cfg, "--out", b.to_str().unwrap(), "--workers", "2"]).status.code();
    assert!(matches!(first, Some(0) | Some(2)));
    assert_eq!(first, second);
    for f in ["small.json", "small.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn list_fixtures_names_the_families() {
    let o = psdo(&["list-fixtures"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    for f in ["gaussian_bump", "poly_decay", "plane_cut_product"] {
        assert!(text.contains(f), "{text}");
    }
}
