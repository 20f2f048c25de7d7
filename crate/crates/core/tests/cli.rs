//! End-to-end checks of the command-line interface: formats, exit
//! codes, error payloads and byte determinism.

use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_anharmonic"))
}

#[test]
fn pt_series_emits_exact_rationals() {
    let out = bin()
        .args(["pt-series", "--order", "8"])
        .output()
        .expect("binary runs");
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.trim().lines().collect();
    assert_eq!(lines.len(), 10, "header plus 9 rows");
    assert!(lines[0].starts_with("n,eps_rational"));
    assert!(text.contains("3/4"));
    assert!(text.contains("-30885/1024"));
}

#[test]
fn pt_series_json_carries_polynomials() {
    let out = bin()
        .args(["pt-series", "--order", "2", "--format", "json"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    // Y_2 = 3/4 v + 1/2 v^3
    assert_eq!(rows[2]["y_poly"]["1"], "3/4");
    assert_eq!(rows[2]["y_poly"]["3"], "1/2");
}

#[test]
fn flucton_path_decays_monotonically() {
    let out = bin()
        .args(["flucton", "path", "--u0", "1", "--tmax", "4", "--samples", "41"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let us: Vec<f64> = text
        .trim()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(us.len(), 41);
    assert_eq!(us[0], 1.0);
    for w in us.windows(2) {
        assert!(w[1] < w[0], "path must decay monotonically");
    }
}

#[test]
fn invalid_grid_exits_two() {
    let out = bin()
        .args(["variational", "--g-grid", "5:1:10"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_error_exits_one_with_json() {
    // a box far too small for relaxation
    let out = bin()
        .args(["flucton", "det", "--u0", "1", "--tbox", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "box_too_small");
}

#[test]
fn config_error_for_bad_potential_file() {
    let dir = std::env::temp_dir().join("anharmonic-cli-test");
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad_pot.json");
    fs::write(&path, "{not json").unwrap();
    let out = bin()
        .args(["pt-series", "--pot", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "config_parse");
}

#[test]
fn potential_file_round_trip() {
    let dir = std::env::temp_dir().join("anharmonic-cli-test");
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join("pot.json");
    fs::write(
        &path,
        r#"{"kind":"polynomial","coeffs":{"2":1.0,"4":"1/2"},"g":0.5,"hbar":1.0,"mass":"half"}"#,
    )
    .unwrap();
    let out = bin()
        .args(["gb-series", "--pot", path.to_str().unwrap(), "--order", "2", "--grid", "0.5:1:2"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    // Z_0(1) = sqrt(1 + 1/2)
    let z0: f64 = text
        .trim()
        .lines()
        .last()
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((z0 - 1.5_f64.sqrt()).abs() < 1e-13);
}

#[test]
fn identical_runs_produce_identical_bytes() {
    let dir = std::env::temp_dir().join("anharmonic-cli-test");
    fs::create_dir_all(&dir).unwrap();
    let (a, b) = (dir.join("det_a.csv"), dir.join("det_b.csv"));
    for path in [&a, &b] {
        let out = bin()
            .args([
                "flucton",
                "det",
                "--u0",
                "1",
                "--tbox",
                "14",
                "--out",
                path.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn reference_subcommand_both_methods_agree() {
    let out = bin()
        .args(["reference", "--g", "1", "--levels", "0", "--method", "both"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let energies: Vec<f64> = text
        .trim()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(energies.len(), 2);
    assert!(((energies[0] - energies[1]) / energies[0]).abs() < 1e-11);
}

#[test]
fn compare_passes_on_small_grid() {
    let out = bin()
        .args(["compare", "--g-grid", "0:1:2"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.trim().lines().skip(1) {
        assert!(line.ends_with(",pass"), "row failed: {line}");
    }
    // the g = 0 row agrees across methods at the harmonic value
    let first = text.trim().lines().nth(1).unwrap();
    let cells: Vec<&str> = first.split(',').collect();
    let e_var: f64 = cells[4].parse().unwrap();
    let e_ref: f64 = cells[5].parse().unwrap();
    assert!((e_var - 1.0).abs() < 1e-12 && (e_ref - 1.0).abs() < 1e-12);
}
