//! End-to-end runs of the `xxxdm` binary on small inputs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn xxxdm(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xxxdm")).current_dir(dir).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("xxxdm-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn zero_temperature_pipeline_reproduces_known_values() {
    let dir = scratch("zero");
    let o = xxxdm(&dir, &["solve-x", "--n", "3", "--out-dir", "tables"]);
    assert!(o.status.success(), "{}", stdout(&o));
    for k in 2..=3 {
        assert!(dir.join(format!("tables/d_{k}.txt")).exists());
        assert!(dir.join(format!("tables/solve-x_{k}.manifest.json")).exists());
    }
    assert!(xxxdm(&dir, &["omega", "--mode", "zero", "--out", "w.txt"]).status.success());

    // ⟨σᶻσᶻ⟩ on neighbours is 1/3 − (4/3) ln 2
    std::fs::write(dir.join("zz.txt"), "2\nzz 1\n").unwrap();
    let o = xxxdm(&dir, &["expect", "--n", "2", "--omega", "w.txt", "--operator", "zz.txt"]);
    assert!(o.status.success());
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - (1.0 / 3.0 - 4.0 / 3.0 * 2f64.ln())).abs() < 1e-14, "{v}");

    let o = xxxdm(&dir, &["entropy", "--n", "3", "--omega", "w.txt"]);
    let s: f64 = stdout(&o).trim().parse().unwrap();
    let expected: f64 = xxxdm::pipeline::reference::ENTROPY.iter().find(|(n, _)| *n == 3).unwrap().1.parse().unwrap();
    assert!((s - expected).abs() < 1e-12, "{s} vs {expected}");

    let o = xxxdm(&dir, &["density", "--n", "3", "--omega", "w.txt"]);
    let rows: Vec<String> = stdout(&o).lines().skip(1).map(String::from).collect();
    let trace: f64 = rows
        .iter()
        .map(|r| {
            let f: Vec<&str> = r.split(',').collect();
            f[1].parse::<f64>().unwrap() * f[3].parse::<f64>().unwrap()
        })
        .sum();
    assert!((trace - 1.0).abs() < 1e-14, "{rows:?}");
}

#[test]
fn outputs_carry_manifests_and_are_deterministic() {
    let dir = scratch("manifest");
    for out in ["a.txt", "b.txt"] {
        assert!(xxxdm(&dir, &["--prec", "40", "omega", "--mode", "zero", "--order", "6", "--out", out]).status.success());
    }
    let a = std::fs::read(dir.join("a.txt")).unwrap();
    assert_eq!(a, std::fs::read(dir.join("b.txt")).unwrap());

    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("a.txt.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "omega");
    assert_eq!(m["precision_digits"], 40);
    assert_eq!(m["outputs"][0]["sha256"].as_str().unwrap().len(), 64);

    let g1 = xxxdm(&dir, &["gen-md", "--L", "6", "--m", "2", "--seed", "9"]);
    let g2 = xxxdm(&dir, &["gen-md", "--L", "6", "--m", "2", "--seed", "9"]);
    assert_eq!(g1.stdout, g2.stdout);
}

#[test]
fn matsubara_data_round_trips_through_omega() {
    let dir = scratch("md");
    assert!(xxxdm(&dir, &["gen-md", "--L", "4", "--m", "1", "--seed", "3", "--out", "md.txt"]).status.success());
    let o = xxxdm(&dir, &["omega", "--mode", "md", "--md", "md.txt", "--order", "4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("4 md"), "{text}");
    // exact rational entries, symmetric
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split_whitespace().collect()).collect();
    assert_eq!(rows.len(), 4);
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(rows[i][j], rows[j][i]);
        }
    }
}

#[test]
fn errors_are_reported_as_json_with_exit_code_two() {
    let dir = scratch("errors");
    let o = xxxdm(&dir, &["omega", "--mode", "thermal", "--T", "1/2"]);
    assert_eq!(o.status.code(), Some(2));
    let e: serde_json::Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(e["error"], "refused");

    let o = xxxdm(&dir, &["entropy", "--n", "3", "--omega", "missing.txt"]);
    assert_eq!(o.status.code(), Some(2));

    assert_eq!(xxxdm(&dir, &["no-such-command"]).status.code(), Some(2));
}

#[test]
fn property_suite_passes() {
    let dir = scratch("verify");
    let o = xxxdm(&dir, &["verify", "--suite", "properties", "--n-max", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("0 failed"));
}
