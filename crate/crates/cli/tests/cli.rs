use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cornerpmt::config::{reference_toml, ConfigFile};
use cornerpmt::format::PathDocument;
use cornerpmt_core::scenario::shipped_by_name;

fn cornerpmt(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cornerpmt"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("CORNERPMT_THREADS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, c: &ConfigFile) -> std::path::PathBuf {
    let file = dir.join("config.toml");
    fs::write(&file, c.to_toml().unwrap()).unwrap();
    file
}

#[test]
fn sweep_passes_and_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = cornerpmt(&["sweep", "--scenario", "flat_flat"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("PASS flat_flat"));
    for f in ["checks.csv", "lemmas.csv", "concentration.csv", "masses.csv", "oracle.csv", "summary.json"] {
        assert!(dir.path().join("flat_flat").join(f).is_file(), "{f}");
    }
    let header = fs::read_to_string(dir.path().join("flat_flat/concentration.csv")).unwrap();
    assert!(header.starts_with(
        "delta,sup_outer,sup_inner_residual,sup_total,min_line_integral,max_line_integral,min_h_jump,max_h_jump"
    ));
    let checks = fs::read_to_string(dir.path().join("checks.csv")).unwrap();
    assert!(!checks.contains(",false,"));
}

#[test]
fn identical_config_gives_identical_csv() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["pipeline", "--scenario", "flat_in_schwarzschild"];
    assert_eq!(cornerpmt(&args, a.path()).status.code(), Some(0));
    let o = Command::new(env!("CARGO_BIN_EXE_cornerpmt"))
        .args(args)
        .arg("--out")
        .arg(b.path())
        .env("CORNERPMT_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let sub = "flat_in_schwarzschild_R4_m0.5";
    let mut names: Vec<_> = fs::read_dir(a.path().join(sub)).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 8);
    for n in names {
        let x = fs::read(a.path().join(sub).join(&n)).unwrap();
        let y = fs::read(b.path().join(sub).join(&n)).unwrap();
        assert!(x == y, "{n:?} differs");
    }
}

#[test]
fn pipeline_json_reports_the_mass() {
    let dir = tempfile::tempdir().unwrap();
    let o = cornerpmt(&["pipeline", "--scenario", "flat_in_schwarzschild", "--format", "json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("flat_in_schwarzschild_R4_m0.5/masses.json")).unwrap();
    let rows: Vec<serde_json::Value> = serde_json::from_str(&text).unwrap();
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert!((r["m_tilde"].as_f64().unwrap() - 0.5).abs() < 1e-6);
        assert!((r["m_base"].as_f64().unwrap() - 0.5).abs() < 1e-8);
    }
    let solve = fs::read_to_string(dir.path().join("flat_in_schwarzschild_R4_m0.5/first_solve_delta0.1.json")).unwrap();
    assert!(solve.contains("\"potential\""));
}

#[test]
fn mollify_writes_readable_path_documents() {
    let dir = tempfile::tempdir().unwrap();
    let o = cornerpmt(&["mollify", "--scenario", "flat_in_schwarzschild"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let sub = dir.path().join("flat_in_schwarzschild_R4_m0.5");
    let collar = PathDocument::read(&sub.join("collar.json")).unwrap();
    assert_eq!(collar.format_version, 1);
    assert_eq!(collar.to_metric_path().unwrap().n_t, 4000);
    let m = PathDocument::read(&sub.join("mollified_delta0.025.json")).unwrap();
    assert_eq!(m.delta, Some(0.025));
    assert_eq!(m.family, "spherical");
}

#[test]
fn failing_check_sets_exit_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = shipped_by_name("flat_in_schwarzschild").unwrap();
    s.name = "too_strict".into();
    s.tolerances.oracle_relative = 1e-30;
    let cfg = write_config(dir.path(), &ConfigFile { shipped: vec![], scenario: vec![s] });
    let o = cornerpmt(&["oracle-check", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL too_strict"));
    assert!(stdout(&o).contains("failed oracle_scalar_curvature"));
}

#[test]
fn invalid_config_sets_exit_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = shipped_by_name("flat_flat").unwrap();
    s.delta_sweep = vec![0.025, 0.05];
    let cfg = write_config(dir.path(), &ConfigFile { shipped: vec![], scenario: vec![s] });
    let o = cornerpmt(&["sweep", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("strictly decreasing"));

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "shipped = [\"flat_flat\"]\nunknown_key = 1\n").unwrap();
    let o = cornerpmt(&["sweep", "--config", bad.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn thread_variable_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_cornerpmt"))
        .args(["oracle-check", "--scenario", "flat_flat", "--out"])
        .arg(dir.path())
        .env("CORNERPMT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("CORNERPMT_THREADS"));
}

#[test]
fn shipped_names_in_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"shipped": ["equal_H", "negative_mass"]}"#).unwrap();
    let o = cornerpmt(&["curvature", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let s = stdout(&o);
    assert!(s.contains("PASS equal_H") && s.contains("PASS negative_mass"));
    assert!(s.contains("hypothesis (H) fails"));
    assert!(dir.path().join("equal_H/collar_curvature.csv").is_file());
}

#[test]
fn reference_config_is_current() {
    let on_disk = fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/config-reference.toml")).unwrap();
    assert!(on_disk == reference_toml().unwrap(), "regenerate with `cargo run -p cornerpmt --example reference`");
}
