use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const PATH3: &str = r#"{
  "vertices": [{"id": "V1", "coupling": [0.5, 0.0]}, {"id": "V2", "coupling": [-0.25, 0.0]}, {"id": "V3", "coupling": [1.0, 0.0]}],
  "edges": [{"from": "V1", "to": "V2", "length": 1.0}, {"from": "V2", "to": "V3", "length": 1.4142135623730951}],
  "leads": ["V1"]
}"#;

const TOPOLOGY: &str = r#"{
  "vertices": [{"id": "V1"}, {"id": "V2"}, {"id": "V3"}],
  "edges": [{"from": "V1", "to": "V2", "length": 1.0}, {"from": "V2", "to": "V3", "length": 1.4142135623730951}],
  "leads": ["V1"]
}"#;

const TRIANGLE: &str = r#"{
  "vertices": [{"id": "A", "coupling": [1.0, 0.0]}, {"id": "B", "coupling": [-1.5, 0.0]}, {"id": "C", "coupling": [0.3, 0.0]}],
  "edges": [{"from": "A", "to": "B", "length": 1.0}, {"from": "B", "to": "C", "length": 1.2360679774997898},
            {"from": "C", "to": "A", "length": 0.8660254037844386}],
  "leads": ["A", "C"]
}"#;

fn qgs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qgs"))
        .args(args)
        .output()
        .expect("failed to run qgs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_csv(p: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(p).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn spectrum_both_modes_agree() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "g.json", TRIANGLE);
    let out = dir.path().join("spec.csv");
    let o = qgs(&[
        "spectrum",
        "--graph",
        s(&g),
        "--zmax",
        "100",
        "--mode",
        "both",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["index", "weyl", "matching", "abs_diff"]);
    assert!(rows.len() >= 8);
    for r in &rows {
        let w: f64 = r[1].parse().unwrap();
        let m: f64 = r[2].parse().unwrap();
        assert!((w - m).abs() <= 1e-8, "{r:?}");
    }
    let meta: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("spec.meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["meta"]["tolerances"]["merge_tol"], 1e-8);
}

#[test]
fn smatrix_sweep_is_unitary() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "g.json", TRIANGLE);
    let out = dir.path().join("s.csv");
    let o = qgs(&[
        "smatrix",
        "--graph",
        s(&g),
        "--s",
        "0.1:100:0.5",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out);
    assert_eq!(header.len(), 1 + 2 * 4 + 1);
    assert_eq!(rows.len(), 200);
    for r in &rows {
        let d: f64 = r.last().unwrap().parse().unwrap();
        assert!(d <= 1e-8);
    }
}

#[test]
fn smatrix_single_point_json() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "g.json", PATH3);
    let o = qgs(&["smatrix", "--graph", s(&g), "--s", "2.7"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let e = &v["entries"][0][0];
    let modulus = e[0].as_f64().unwrap().hypot(e[1].as_f64().unwrap());
    assert!((modulus - 1.0).abs() < 1e-12);
}

#[test]
fn invert_forward_round_trip() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "topo.json", TOPOLOGY);
    let out = dir.path().join("rec.json");
    let diag = dir.path().join("diag.csv");
    let o = qgs(&[
        "invert",
        "--graph-topology",
        s(&g),
        "--oracle",
        "forward",
        "--true-couplings",
        "0.5,-0.25,1.0",
        "--out",
        s(&out),
        "--diagnostics",
        s(&diag),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(v["max_abs_error"].as_f64().unwrap() <= 1e-4);
    let want = [0.5, -0.25, 1.0];
    for (c, w) in v["couplings"].as_array().unwrap().iter().zip(want) {
        assert!((c["recovered"][0].as_f64().unwrap() - w).abs() <= 1e-4);
    }
    let (header, rows) = read_csv(&diag);
    assert_eq!(header[0], "target");
    assert_eq!(rows.len(), 3);
}

#[test]
fn invert_from_samples() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "topo.json", TOPOLOGY);
    let samples = dir.path().join("samples.csv");
    let o = qgs(&[
        "invert",
        "--graph-topology",
        s(&g),
        "--true-couplings",
        "0.5,-0.25,1.0",
        "--write-samples",
        s(&samples),
    ]);
    assert!(o.status.success());
    let o = qgs(&[
        "invert",
        "--graph-topology",
        s(&g),
        "--oracle",
        "samples",
        "--rtd-samples",
        s(&samples),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let got: Vec<f64> = v["couplings"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["recovered"][0].as_f64().unwrap())
        .collect();
    for (g, w) in got.iter().zip([0.5, -0.25, 1.0]) {
        assert!((g - w).abs() <= 1e-4);
    }
}

#[test]
fn homog_writes_dispersion_and_convergence() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("d.csv");
    let conv = dir.path().join("c.csv");
    let o = qgs(&[
        "homog",
        "--l1",
        "0.25",
        "--l2",
        "0.5",
        "--a",
        "1",
        "--eps-list",
        "0.1,0.05,0.025",
        "--tau-grid",
        "4",
        "--bands",
        "2",
        "--out",
        s(&out),
        "--convergence",
        s(&conv),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["model", "tau", "band", "eigenvalue"]);
    assert_eq!(rows.len(), 3 * 4 * 2);
    let (_, rows) = read_csv(&conv);
    for r in rows.iter().filter(|r| !r[4].is_empty()) {
        let p: f64 = r[4].parse().unwrap();
        assert!((1.8..=2.3).contains(&p), "{r:?}");
    }
}

#[test]
fn check_passes() {
    let o = qgs(&["check"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains(" passed, 0 failed"));
}

#[test]
fn output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "g.json", TRIANGLE);
    let run = |name: &str, jobs: &str| {
        let out = dir.path().join(name);
        let o = qgs(&[
            "--jobs",
            jobs,
            "spectrum",
            "--graph",
            s(&g),
            "--zmax",
            "60",
            "--out",
            s(&out),
        ]);
        assert!(o.status.success());
        let o = qgs(&[
            "--jobs",
            jobs,
            "smatrix",
            "--graph",
            s(&g),
            "--s",
            "0.5:20:0.25",
            "--out",
            s(&out.with_extension("s.csv")),
        ]);
        assert!(o.status.success());
        (
            fs::read(&out).unwrap(),
            fs::read(out.with_extension("meta.json")).unwrap(),
            fs::read(out.with_extension("s.csv")).unwrap(),
        )
    };
    let a = run("a.csv", "1");
    let b = run("b.csv", "1");
    let c = run("c.csv", "4");
    assert_eq!(a, b);
    assert_eq!(a.0, c.0);
    assert_eq!(a.2, c.2);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"vertices":[{"id":"V1"}],"edges":[{"from":"V1","to":"V2","length":1.0}],"leads":[]}"#,
    );
    assert_eq!(
        qgs(&["spectrum", "--graph", s(&bad), "--zmax", "10"])
            .status
            .code(),
        Some(2)
    );
    let neg = write(
        dir.path(),
        "neg.json",
        &TRIANGLE.replace("\"length\": 1.0", "\"length\": -1.0"),
    );
    assert_eq!(
        qgs(&["spectrum", "--graph", s(&neg), "--zmax", "10"])
            .status
            .code(),
        Some(2)
    );
    let g = write(dir.path(), "topo.json", TOPOLOGY);
    let o = qgs(&[
        "invert",
        "--graph-topology",
        s(&g),
        "--true-couplings",
        "0.5,-0.25,1.0",
        "--tau0",
        "0.05",
        "--levels",
        "6",
        "--terms",
        "1",
    ]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(String::from_utf8_lossy(&o.stderr).contains("diverged"));
    assert_eq!(
        qgs(&[
            "homog",
            "--l1",
            "0.7",
            "--l2",
            "0.5",
            "--a",
            "1",
            "--eps-list",
            "0.1"
        ])
        .status
        .code(),
        Some(2)
    );
    assert!(!qgs(&["spectrum"]).status.success());
}
