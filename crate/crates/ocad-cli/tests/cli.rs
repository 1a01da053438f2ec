//! End-to-end checks of the `ocad` binary: output formats and exit codes.

use std::process::{Command, Output};

fn ocad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ocad")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("ocad-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn build_then_verify_round_trips() {
    let path = scratch("p4.json");
    let out = ocad(&["build", "P", "4", "-0.3", "optimal", "-o", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = ocad(&["verify", path.to_str().unwrap()]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("verification: PASS"));
    assert!(text.contains("criterion#4: PASS"));
}

#[test]
fn tampered_weights_fail_verification() {
    let path = scratch("tampered.json");
    let out = ocad(&["build", "P", "3", "0.2", "optimal", "-o", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut cad = ocad_core::SymmetricCAD::from_json(&text).unwrap();
    cad.boundary_weight *= 1.01;
    std::fs::write(&path, cad.to_json()).unwrap();
    let out = ocad(&["verify", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("verification: FAIL"));
}

#[test]
fn unsupported_requests_are_usage_errors() {
    let out = ocad(&["build", "P", "12", "0", "optimal"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("classic"));
    assert_eq!(ocad(&["build", "X", "2", "0", "classic"]).status.code(), Some(2));
    assert_eq!(ocad(&["verify", "/nonexistent/ocad.json"]).status.code(), Some(2));
}

#[test]
fn table1_lists_nine_degrees() {
    let out = ocad(&["table1"]);
    let text = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,linear_cfl,classic_weight,optimal_weight");
    assert_eq!(lines.len(), 10);
    let p2: Vec<f64> = lines[2].split(',').map(|v| v.parse().unwrap()).collect();
    // 12 significant digits.
    for (got, want) in p2.iter().zip([2.0, 0.2, 1.0 / 6.0, 0.25]) {
        assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
    }
}

#[test]
fn ratio_sweep_and_straddle_emit_csv() {
    let out = ocad(&["ratio-sweep", "3", "--thetas", "-1,-0.5,0"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(text.lines().count(), 5);
    let out = ocad(&["straddle", "2", "-0.5", "--trials", "500", "--seed", "7"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.starts_with("# seed=7"));
}

#[test]
fn library_theta_grid_is_symmetric() {
    let g = ocad_cli::theta_grid(20);
    assert_eq!(g.len(), 21);
    assert_eq!(g[10], 0.0);
    assert!(g.iter().zip(g.iter().rev()).all(|(a, b)| a == &-b));
}
