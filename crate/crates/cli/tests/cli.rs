use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mssolve_cli::scenario::{parse_scenario, BackendSpec};
use mssolve_cli::CliError;
use mssolve_core::{BoundaryConfig, MuOuter, VelocityOuter};

fn golden() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/default.toml")
}

fn mssolve(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mssolve"))
        .args(args)
        .env("MSSOLVE_THREADS", "1")
        .output()
        .unwrap()
}

fn run_in(dir: &Path, sub: &str, scenario: &Path, extra: &[&str]) -> Output {
    let mut args = vec![sub, "--scenario", scenario.to_str().unwrap(), "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    mssolve(&args)
}

fn write_scenario(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("scenario.toml");
    std::fs::write(&p, text).unwrap();
    p
}

fn golden_text() -> String {
    std::fs::read_to_string(golden()).unwrap()
}

#[test]
fn golden_file_parses() {
    let s = parse_scenario(&golden()).unwrap();
    assert_eq!(s.boundary_config(), BoundaryConfig::new(MuOuter::Neumann, VelocityOuter::Dirichlet));
    assert_eq!(s.backend, BackendSpec::Spectral);
    assert_eq!(s.k, 16);
    let h = s.h0();
    assert_eq!(h.mode(1).re, 0.5);
    assert_eq!(h.mode(-1).re, 0.5);
    assert!(s.geometry().unwrap().circle_radius(0.0) == Some(1.0));
}

#[test]
fn negative_surface_tension_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_scenario(dir.path(), &golden_text().replace("sigma = 1.0", "sigma = -1.0"));
    match parse_scenario(&p) {
        Err(CliError::Validation(m)) => assert_eq!(m, "surface tension must be positive"),
        other => panic!("{other:?}"),
    }
    let out = run_in(dir.path(), "evolve", &p, &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("surface tension must be positive"));
}

#[test]
fn missing_dt_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_scenario(dir.path(), &golden_text().replace("dt = 0.01\n", ""));
    assert!(matches!(parse_scenario(&p), Err(CliError::Validation(m)) if m.contains("dt")));
    assert_eq!(run_in(dir.path(), "spectrum", &p, &[]).status.code(), Some(3));
    // the flag supplies it
    assert_eq!(run_in(dir.path(), "spectrum", &p, &["--dt", "0.01"]).status.code(), Some(0));
}

#[test]
fn syntax_error_has_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_scenario(dir.path(), &golden_text().replace("k = 16", "k = = 16"));
    match parse_scenario(&p) {
        Err(e @ CliError::Parse { line: Some(_), .. }) => assert_eq!(e.exit_code(), 3),
        other => panic!("{other:?}"),
    }
}

#[test]
fn incompatible_outer_velocity_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // g = e_r on a no-slip wall carries net flux
    let text = golden_text().replace(
        "[run]",
        "[data]\nvelocity_outer = { x = [[1, 1.0, 0.0]], y = [[1, 0.0, 1.0]] }\n\n[run]",
    );
    let p = write_scenario(dir.path(), &text);
    let out = run_in(dir.path(), "evolve", &p, &[]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    // an outflow boundary admits it
    let robin = write_scenario(dir.path(), &text.replace("velocity_outer = \"dirichlet\"", "velocity_outer = \"robin\"\nalpha = 1.0"));
    assert_eq!(run_in(dir.path(), "evolve", &robin, &[]).status.code(), Some(0));
}

#[test]
fn spectrum_on_circles() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "spectrum", &golden(), &[]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("# mssolve") && lines[0].contains("K=16") && lines[0].contains("backend=spectral"));
    assert_eq!(lines[1], "k,a0,b0,b1,ms_symbol");
    let zero: Vec<f64> = lines[2].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(zero[0], 0.0);
    assert_eq!(zero[1], 0.0);
    assert_eq!(lines.len(), 2 + 17);
    let one: Vec<f64> = lines[3].split(',').map(|x| x.parse().unwrap()).collect();
    assert!((one[1] - 1.6).abs() < 1e-12);
}

#[test]
fn spectrum_needs_circles() {
    let dir = tempfile::tempdir().unwrap();
    let text = golden_text().replace("outer_radius = 2.0", "outer_radius = 2.0\nperturbation = [[3, 0.05, 0.0]]");
    let p = write_scenario(dir.path(), &text);
    assert_eq!(run_in(dir.path(), "spectrum", &p, &[]).status.code(), Some(2));
}

fn csv_files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    v.sort();
    v
}

#[test]
fn outputs_deterministic_with_headers() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [a.path(), b.path()] {
        for sub in ["solve-elliptic", "solve-stokes", "spectrum", "evolve"] {
            let out = run_in(dir, sub, &golden(), &[]);
            assert!(out.status.success(), "{sub}: {}", String::from_utf8_lossy(&out.stderr));
        }
    }
    let files = csv_files(a.path());
    assert_eq!(files.len(), 5);
    for f in &files {
        let x = std::fs::read(f).unwrap();
        let y = std::fs::read(b.path().join(f.file_name().unwrap())).unwrap();
        assert_eq!(x, y, "{f:?}");
        let text = String::from_utf8(x).unwrap();
        let mut lines = text.lines();
        let comment = lines.next().unwrap();
        for key in ["K=", "dt=", "backend=", "mssolve 0.1.0"] {
            assert!(comment.starts_with('#') && comment.contains(key), "{comment}");
        }
        let header = lines.next().unwrap();
        assert!(header.chars().next().unwrap().is_alphabetic());
        let width = header.split(',').count();
        for row in lines {
            let cells: Vec<&str> = row.split(',').collect();
            assert_eq!(cells.len(), width);
            // 17 significant digits
            assert!(cells.iter().all(|c| c.split('e').next().unwrap().trim_start_matches('-').len() == 18), "{row}");
        }
    }
    let diag: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.path().join("diagnostics.json")).unwrap()).unwrap();
    assert_eq!(diag["steps"], 10);
    let stokes: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.path().join("stokes.json")).unwrap()).unwrap();
    assert!(stokes["energy_identity_residual"].as_f64().unwrap() < 1e-6);
}

#[test]
fn backend_and_cutoff_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "solve-stokes", &golden(), &["--backend", "bie", "--k", "8"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("stokes.csv")).unwrap();
    assert!(csv.lines().next().unwrap().contains("K=8 ") && csv.contains("backend=bie"));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("stokes.json")).unwrap()).unwrap();
    // layer potentials carry no interior gradients
    assert!(summary["energy_identity_residual"].is_null());
}

#[test]
fn missing_scenario_is_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = mssolve(&["evolve", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_quick_reports_all_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "verify", &golden(), &["--quick"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("verify.json")).unwrap()).unwrap();
    assert_eq!(report["all_passed"], true);
    assert_eq!(report["criteria"].as_array().unwrap().len(), 10);
}

#[test]
fn verify_full_on_default_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "verify", &golden(), &[]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("[PASS]")).count(), 10);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("verify.json")).unwrap()).unwrap();
    assert_eq!(report["level"], "full");
    assert!(report["criteria"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}
