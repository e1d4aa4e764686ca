use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const CRYSTAL: &str = r#"{"C1111":3,"C1122":0.8,"C1112":0.4,"C2222":2,"C2212":-0.3,"C1212":1.1}"#;
const ISOTROPIC: &str = r#"{"C1111":3,"C1122":1,"C1112":0,"C2222":3,"C2212":0,"C1212":1}"#;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polybounds"))
        .current_dir(dir)
        .env_remove("POLYBOUNDS_TOL")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn isotropic_bounds_are_degenerate_and_deterministic() {
    let dir = TempDir::new().unwrap();
    write(&dir, "iso.json", ISOTROPIC);
    let a = run(
        dir.path(),
        &["bounds", "--input", "iso.json", "--output", "a.json"],
    );
    assert!(a.status.success(), "{}", stderr(&a));
    let b = run(dir.path(), &["bounds", "--input", "iso.json"]);
    assert!(b.status.success());
    let first = fs::read(dir.path().join("a.json")).unwrap();
    assert_eq!(first, b.stdout, "file and stdout reports differ");

    let v = json(&dir.path().join("a.json"));
    assert_eq!(v["degenerate"], true);
    for key in ["kappa_minus", "kappa_plus"] {
        assert!((v["bounds"][key].as_f64().unwrap() - 2.0).abs() < 1e-9);
    }
    for key in ["mu_minus", "mu_plus"] {
        assert!((v["bounds"][key].as_f64().unwrap() - 1.0).abs() < 1e-9);
    }
    let text = String::from_utf8(first).unwrap();
    assert!(
        text.contains("\"kappa_minus\": 2.0000000000000000e0"),
        "floats not at 17 digits"
    );
}

#[test]
fn anisotropic_bounds_are_ordered() {
    let dir = TempDir::new().unwrap();
    write(&dir, "x.json", CRYSTAL);
    let o = run(dir.path(), &["bounds", "--input", "x.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let b = &v["bounds"];
    let f = |k: &str| b[k].as_f64().unwrap();
    assert!(f("kappa_minus") < f("kappa_plus") && f("mu_minus") < f("mu_plus"));
    assert_eq!(v["degenerate"], false);
}

#[test]
fn attain_then_verify_and_detect_tampering() {
    let dir = TempDir::new().unwrap();
    write(&dir, "x.json", CRYSTAL);
    let o = run(
        dir.path(),
        &[
            "attain", "--input", "x.json", "--corner", "A,C", "--output", "c.json",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let file = json(&dir.path().join("c.json"));
    let corners = file["corners"].as_array().unwrap();
    assert_eq!(corners.len(), 2);
    for c in corners {
        assert_eq!(c["status"], "attained", "{c}");
    }

    let ok = run(
        dir.path(),
        &["verify", "--input", "c.json", "--output", "v.json"],
    );
    assert!(ok.status.success(), "{}", stderr(&ok));
    assert_eq!(json(&dir.path().join("v.json"))["passed"], true);

    // A 0.1% change in one entry of the stored corner-A tensor.
    let mut bad = file.clone();
    let entry =
        &mut bad["corners"][0]["construction"]["outcome"]["fixed_point"]["c_prime"][0][0][0];
    *entry = Value::from(entry.as_f64().unwrap() * 1.001);
    write(&dir, "bad.json", &bad.to_string());
    let o = run(
        dir.path(),
        &["verify", "--input", "bad.json", "--output", "vb.json"],
    );
    assert_eq!(o.status.code(), Some(4));
    let err = stderr(&o);
    assert!(err.contains("error[VerificationFailed]"), "{err}");
    assert!(
        err.lines()
            .any(|l| l.starts_with("corner A") && l.ends_with("FAIL")),
        "{err}"
    );
    assert!(
        !err.lines()
            .any(|l| l.starts_with("corner C") && l.ends_with("FAIL")),
        "{err}"
    );
    let report = json(&dir.path().join("vb.json"));
    assert_eq!(report["passed"], false);
    assert!(report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .any(|c| c["passed"] == false));
}

#[test]
fn tampered_crystal_breaks_the_tree() {
    let dir = TempDir::new().unwrap();
    write(&dir, "x.json", CRYSTAL);
    assert!(run(
        dir.path(),
        &["attain", "--input", "x.json", "--corner", "B", "--output", "c.json"]
    )
    .status
    .success());
    let mut file = json(&dir.path().join("c.json"));
    file["crystal"]["C1112"] = Value::from(0.45);
    write(&dir, "bad.json", &file.to_string());
    let o = run(dir.path(), &["verify", "--input", "bad.json"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o)
        .lines()
        .any(|l| l.contains("laminate tree = C'") && l.ends_with("FAIL")));
}

#[test]
fn trajectories_write_csv_svg_and_report() {
    let dir = TempDir::new().unwrap();
    let args = [
        "trajectories",
        "--alpha1",
        "0.49",
        "--zi-count",
        "200",
        "--points-per-tail",
        "100",
        "--grid",
        "40",
        "--epsilon",
        "0.06",
        "--plot-members",
        "20",
        "--output",
        "run.json",
    ];
    let o = run(dir.path(), &args);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("run.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("zI,zR,t,re,im,on_loop"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.len() == 6 && r[3].hypot(r[4]) < 1.0));
    assert!(rows.iter().any(|r| r[5] == 1.0) && rows.iter().any(|r| r[5] == 0.0));

    let svg = fs::read_to_string(dir.path().join("run.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<circle"));
    assert!(svg.contains("#c0392b") && svg.contains("#2471a3"));

    let report = json(&dir.path().join("run.json"));
    let sweep = &report["sweeps"][0];
    assert_eq!(sweep["alpha1"], 0.49);
    assert!(sweep["coverage"]["coverage"].as_f64().unwrap() > 0.5);

    // Same configuration, same bytes.
    let again = run(
        dir.path(),
        &[&args[..args.len() - 1], &["again.json"]].concat(),
    );
    assert!(again.status.success());
    assert_eq!(
        csv,
        fs::read_to_string(dir.path().join("again.csv")).unwrap()
    );
    assert_eq!(
        fs::read_to_string(dir.path().join("run.svg")).unwrap(),
        fs::read_to_string(dir.path().join("again.svg")).unwrap()
    );
}

#[test]
fn trajectories_from_crystal_mark_its_point() {
    let dir = TempDir::new().unwrap();
    write(&dir, "x.json", CRYSTAL);
    let o = run(
        dir.path(),
        &[
            "trajectories",
            "--input",
            "x.json",
            "--alpha1",
            "0.75,2",
            "--zi-count",
            "100",
            "--points-per-tail",
            "32",
            "--grid",
            "20",
            "--csv",
            "t.csv",
            "--svg",
            "t.svg",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    let p = report["crystal_point"].as_array().unwrap();
    assert!(p[0].as_f64().unwrap().hypot(p[1].as_f64().unwrap()) < 1.0);
    for tag in ["a0.75", "a2"] {
        assert!(dir.path().join(format!("t_{tag}.csv")).exists());
        let svg = fs::read_to_string(dir.path().join(format!("t_{tag}.svg"))).unwrap();
        assert!(svg.contains(">c1</text>"));
    }
}

#[test]
fn failures_report_their_category() {
    let dir = TempDir::new().unwrap();
    write(&dir, "iso.json", ISOTROPIC);
    write(&dir, "x.json", CRYSTAL);
    write(
        &dir,
        "neg.json",
        r#"{"C1111":1,"C1122":2,"C1112":0,"C2222":1,"C2212":0,"C1212":1}"#,
    );
    write(&dir, "junk.json", "{\"C1111\": 1");

    let cases: [(&[&str], &str, i32); 7] = [
        (
            &["attain", "--input", "iso.json", "--corner", "B"],
            "NormalizationFailure",
            1,
        ),
        (&["bounds", "--input", "neg.json"], "NotPositiveDefinite", 1),
        (&["bounds", "--input", "missing.json"], "IOError", 3),
        (&["bounds", "--input", "junk.json"], "ParseError", 2),
        (&["trajectories", "--alpha1", "0.5"], "InvalidInput", 1),
        (
            &["trajectories", "--alpha1", "0.49", "--grid", "8"],
            "ConfigError",
            2,
        ),
        (
            &["bounds", "--input", "x.json", "--tol", "-1"],
            "ConfigError",
            2,
        ),
    ];
    for (args, category, code) in cases {
        let o = run(dir.path(), args);
        assert_eq!(o.status.code(), Some(code), "{args:?}: {}", stderr(&o));
        assert!(
            stderr(&o).contains(&format!("error[{category}]")),
            "{args:?}: {}",
            stderr(&o)
        );
    }
}

#[test]
fn tolerance_from_environment() {
    let dir = TempDir::new().unwrap();
    write(&dir, "iso.json", ISOTROPIC);
    let bad = Command::new(env!("CARGO_BIN_EXE_polybounds"))
        .current_dir(dir.path())
        .env("POLYBOUNDS_TOL", "not-a-number")
        .args(["bounds", "--input", "iso.json"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("POLYBOUNDS_TOL"));
    let flag_wins = Command::new(env!("CARGO_BIN_EXE_polybounds"))
        .current_dir(dir.path())
        .env("POLYBOUNDS_TOL", "not-a-number")
        .args(["bounds", "--input", "iso.json", "--tol", "1e-9"])
        .output()
        .unwrap();
    assert!(flag_wins.status.success(), "{}", stderr(&flag_wins));
}
