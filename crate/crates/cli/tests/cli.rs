use std::f64::consts::LN_2;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use meancount::io::{parse_complex, parse_points, parse_rect, parse_series, series_json};
use meancount_core::oracles::phi_nu_series;
use meancount_core::{Complex64 as C64, DirichletPolynomial};
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_meancount"));
    c.env_remove("MEANCOUNT_SEED");
    c
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let Output {
        status,
        stdout,
        stderr,
    } = cmd.output().unwrap();
    (
        status.code().unwrap(),
        String::from_utf8(stdout).unwrap(),
        String::from_utf8(stderr).unwrap(),
    )
}

/// Header and data lines of a CSV with `#` metadata.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn series_file_examples() {
    let f = parse_series(r#"{"coeffs": [[1,1,0],[2,-2,0]]}"#).unwrap();
    assert_eq!(f, DirichletPolynomial::from_real(&[(1, 1.0), (2, -2.0)]));
    assert!(parse_series(r#"{"coeffs": []}"#).unwrap().is_zero());
    for bad in [
        r#"{"coeffs": [[2,1,0],[2,3,0]]}"#,
        r#"{"coeffs": [[1.5,1,0]]}"#,
        r#"{"coeffs": [[0,1,0]]}"#,
        r#"{"coeffs": [[1,1,0]], "x": 1}"#,
        "not json",
    ] {
        assert!(parse_series(bad).is_err(), "{bad}");
    }
    // Writer round trip, with zero coefficients trimmed.
    let g = DirichletPolynomial::from_terms([
        (3, C64::new(0.25, -1.0)),
        (1, C64::new(2.0, 0.0)),
        (5, C64::new(0.0, 0.0)),
    ]);
    assert_eq!(parse_series(&series_json(&g)).unwrap(), g);
}

#[test]
fn value_syntax() {
    let cases = [
        ("2", (2.0, 0.0)),
        ("2+0i", (2.0, 0.0)),
        ("-1.5-2e-3i", (-1.5, -2e-3)),
        ("i", (0.0, 1.0)),
        ("-i", (0.0, -1.0)),
        ("0.5i", (0.0, 0.5)),
        ("1+i", (1.0, 1.0)),
        ("1e-2+3E+1i", (0.01, 30.0)),
    ];
    for (text, (re, im)) in cases {
        assert_eq!(parse_complex(text).unwrap(), C64::new(re, im), "{text}");
    }
    for bad in ["", "1+", "abc", "1+2j", "nan"] {
        assert!(parse_complex(bad).is_err(), "{bad}");
    }
    let g = parse_points("0:1:3,-1:1:2").unwrap();
    assert_eq!(g.len(), 6);
    assert_eq!(
        (g[0], g[2], g[5]),
        (C64::new(0.0, -1.0), C64::new(1.0, -1.0), C64::new(1.0, 1.0))
    );
    assert!(parse_points("0:1:0,0:0:1").is_err());
    let r = parse_rect("-1:2,-3:4").unwrap();
    assert_eq!(
        (r.sigma_min, r.sigma_max, r.t_min, r.t_max),
        (-1.0, 2.0, -3.0, 4.0)
    );
    assert!(parse_rect("2:1,0:1").is_err());
}

#[test]
fn mean_counting_of_extremal_symbol() {
    let dir = tempfile::tempdir().unwrap();
    let phi1 = write(
        dir.path(),
        "phi1.json",
        &series_json(&phi_nu_series(C64::new(1.0, 0.0), 1 << 63)),
    );
    let (code, out, err) = run(bin()
        .args(["mean-counting", "--w", "2+0i", "--symbol"])
        .arg(&phi1));
    assert_eq!(code, 0, "{err}");
    let rows = csv_rows(&out);
    assert_eq!(
        rows[0],
        [
            "w_re",
            "w_im",
            "value",
            "error_estimate",
            "bound",
            "converged",
            "status"
        ]
    );
    let value: f64 = rows[1][2].parse().unwrap();
    let bound: f64 = rows[1][4].parse().unwrap();
    // The damped degree-63 symbol sits a few thousandths below the exact value.
    assert!(
        (value - LN_2).abs() < 1e-2 && value <= bound + 1e-3,
        "{value}"
    );
    assert!((bound - LN_2).abs() < 1e-14);
    assert!(out.contains("# ladder:") && out.contains("\"seed\":"));
}

#[test]
fn profile_of_contained_disc_is_compact() {
    let dir = tempfile::tempdir().unwrap();
    let sym = write(
        dir.path(),
        "compact.json",
        r#"{"coeffs": [[1,1.5,0],[2,0.5,0]]}"#,
    );
    let out = dir.path().join("profile.json");
    let (code, _, err) = run(bin()
        .args([
            "profile", "--path", "default", "--format", "json", "--symbol",
        ])
        .arg(&sym)
        .arg("--out")
        .arg(&out));
    assert_eq!(code, 0, "{err}");
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["result"]["verdict"], "COMPACT_CONSISTENT");
    assert_eq!(doc["result"]["samples"].as_array().unwrap().len(), 7);
    // Only the output itself remains in the directory: no stray temporary files.
    let names: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(names.len(), 2);
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "f.json",
        r#"{"coeffs": [[1,1,0],[2,0.4,0.1],[3,-0.3,0]]}"#,
    );
    let go = |threads: &str| {
        run(bin()
            .args([
                "jessen",
                "--sigma",
                "0,0.25,0.5,1",
                "--threads",
                threads,
                "--series",
            ])
            .arg(&f))
        .1
    };
    let a = go("1");
    assert_eq!(a, go("4"));
    assert_eq!(csv_rows(&a).len(), 5);
}

#[test]
fn zeros_command_lists_lattice_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "lat.json", r#"{"coeffs": [[1,1,0],[2,-2,0]]}"#);
    let (code, out, _) = run(bin()
        .args([
            "zeros",
            "--rect",
            "0:2,-1:10",
            "--format",
            "json",
            "--series",
        ])
        .arg(&f));
    assert_eq!(code, 0);
    let doc: Value = serde_json::from_str(&out).unwrap();
    let zs = doc["result"]["zeros"].as_array().unwrap();
    assert_eq!(doc["result"]["total_winding"], 2);
    let im = zs[1]["im"].as_f64().unwrap();
    assert!((im - 2.0 * std::f64::consts::PI / LN_2).abs() < 1e-9);
}

#[test]
fn invalid_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let dup = write(dir.path(), "dup.json", r#"{"coeffs": [[2,1,0],[2,3,0]]}"#);
    let good = write(
        dir.path(),
        "good.json",
        r#"{"coeffs": [[1,1.5,0],[2,0.5,0]]}"#,
    );
    let outside = write(
        dir.path(),
        "outside.json",
        r#"{"coeffs": [[1,0.6,0],[2,0.5,0]]}"#,
    );
    let unknown = write(
        dir.path(),
        "cfg.json",
        r#"{"ladder": {"t0": 100, "colour": 1}}"#,
    );
    let bad_ladder = write(dir.path(), "cfg2.json", r#"{"ladder": {"growth": 0.5}}"#);
    assert_eq!(
        run(bin().args(["eval", "--w", "1", "--series"]).arg(&dup)).0,
        2
    );
    assert_eq!(
        run(bin()
            .args(["mean-counting", "--w", "1", "--symbol"])
            .arg(&outside))
        .0,
        2
    );
    assert_eq!(
        run(bin()
            .args(["mean-counting", "--w", "1+x", "--symbol"])
            .arg(&good))
        .0,
        2
    );
    assert_eq!(
        run(bin()
            .args(["mean-counting", "--w", "1", "--symbol"])
            .arg(&good)
            .arg("--config")
            .arg(&unknown))
        .0,
        2
    );
    assert_eq!(
        run(bin()
            .args(["mean-counting", "--w", "1", "--symbol"])
            .arg(&good)
            .arg("--config")
            .arg(&bad_ladder))
        .0,
        2
    );
    assert_eq!(
        run(bin().args(["mean-counting", "--symbol"]).arg(&good)).0,
        2
    );
    assert_eq!(
        run(bin()
            .args(["eval", "--w", "1", "--series"])
            .arg(&good)
            .env("MEANCOUNT_SEED", "abc"))
        .0,
        2
    );
    // w = nu is reported in the row and maps to invalid input.
    let (code, out, _) = run(bin()
        .args(["mean-counting", "--w", "1.5", "--symbol"])
        .arg(&good));
    assert_eq!(code, 2);
    assert!(out.contains("coincides"));
}

#[test]
fn seed_and_overrides_are_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.json", r#"{"coeffs": [[1,1.5,0],[2,0.5,0]]}"#);
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"ladder": {"rel_target": 0.0001}, "quadrature": {"cubature_rel_tol": 0.001}}"#,
    );
    // Twenty vertical periods of the symbol, so every rung sees whole periods.
    let t0 = 20.0 * 2.0 * std::f64::consts::PI / LN_2;
    let (code, out, _) = run(bin()
        .args([
            "mean-counting",
            "--w",
            "1.6",
            "--T0",
            &t0.to_string(),
            "--symbol",
        ])
        .arg(&f)
        .arg("--config")
        .arg(&cfg)
        .env("MEANCOUNT_SEED", "42"));
    assert_eq!(code, 0, "{out}");
    assert!(
        out.contains("\"seed\":42")
            && out.contains(&format!("\"t0\":{t0}"))
            && out.contains("\"rel_target\":0.0001")
            && out.contains("\"cubature_rel_tol\":0.001"),
        "{out}"
    );
}

#[test]
fn nonconvergence_exits_3_with_rows_written() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "f.json",
        r#"{"coeffs": [[1,1.5,0],[2,0.3,0],[3,0.2,0]]}"#,
    );
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"ladder": {"rel_target": 1e-14, "steps": 2}}"#,
    );
    let out = dir.path().join("rows.csv");
    let (code, _, err) = run(bin()
        .args(["mean-counting", "--w", "1.6+0.1i", "--symbol"])
        .arg(&f)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out));
    assert_eq!(code, 3, "{err}");
    let rows = csv_rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][5], "false");
}

#[test]
fn selftest_passes() {
    let (code, out, err) = run(bin().arg("selftest"));
    assert_eq!(code, 0, "{out}{err}");
    assert!(out.contains("# failed: 0"));
}
