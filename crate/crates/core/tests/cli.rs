use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rou_falsify::mlcomp::PlantedBox;
use rou_falsify::scenario::{ClassifierSpec, Scenario};
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_rou-falsify"));
    c.env_remove("ROU_FALSIFY_JOBS");
    c
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_scenario(dir: &Path, s: &Scenario) -> std::path::PathBuf {
    let p = dir.join("scenario.json");
    fs::write(&p, s.to_json()).unwrap();
    p
}

fn small() -> Scenario {
    let mut s = Scenario::aebs_default();
    s.resolution = vec![20, 30];
    s.budget = 2000;
    s
}

fn monitor(trace: &str, formula: &str) -> Output {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("trace.csv");
    fs::write(&p, trace).unwrap();
    bin().args(["monitor", "--trace"]).arg(&p).args(["--formula", formula]).output().unwrap()
}

#[test]
fn monitor_reports_satisfied_property() {
    let o = monitor("time,dist\n0,10\n1,10\n2,10\n", "G(dist > 0)");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "rho = 10\nsat\n");
}

#[test]
fn monitor_reports_violation_with_exit_one() {
    let o = monitor("time,dist\n0,10\n1,3\n2,-1\n", "G(dist >= 0)");
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "rho = -1\nunsat\n");
}

#[test]
fn monitor_syntax_error_has_location() {
    let o = monitor("time,dist\n0,10\n", "G(dist >");
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("line 1, column"), "{err}");
}

#[test]
fn monitor_rejects_bad_trace() {
    let o = monitor("t,dist\n0,1\n", "G(dist > 0)");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("time"));
}

#[test]
fn analyze_ml_constant_classifier_finds_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = small();
    s.classifier = ClassifierSpec::Synthetic { base_label: 1, boxes: vec![] };
    let sc = write_scenario(dir.path(), &s);
    let out = dir.path().join("ml");
    let o = bin().args(["analyze-ml", "--scenario"]).arg(&sc).arg("--out").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("ml_report.json")).unwrap()).unwrap();
    assert_eq!(report["misclassified"], 0);
    assert_eq!(report["regions"].as_array().unwrap().len(), 0);
    let csv = fs::read_to_string(out.join("samples.csv")).unwrap();
    assert!(csv.starts_with("x,distance,brightness,label,truth\n"));
}

#[test]
fn analyze_ml_locates_planted_box() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = small();
    s.classifier = ClassifierSpec::Synthetic {
        base_label: 1,
        boxes: vec![PlantedBox::new(vec![0.2, 0.0, 0.2], vec![0.5, 1.0, 0.5])],
    };
    let sc = write_scenario(dir.path(), &s);
    let o = bin().args(["analyze-ml", "--scenario"]).arg(&sc).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("ml_report.json")).unwrap()).unwrap();
    let regions = report["regions"].as_array().unwrap();
    assert!(!regions.is_empty());
    for r in regions {
        let c: Vec<f64> = (0..3).map(|j| (r["lo"][j].as_f64().unwrap() + r["hi"][j].as_f64().unwrap()) / 2.0).collect();
        assert!((0.1..0.6).contains(&c[0]) && (0.1..0.6).contains(&c[2]), "{c:?}");
    }
}

#[test]
fn analyze_ml_unreachable_server_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let endpoint = listener.local_addr().unwrap().to_string();
    drop(listener);
    let mut s = small();
    s.classifier = ClassifierSpec::Remote { endpoint, timeout_ms: 200 };
    let sc = write_scenario(dir.path(), &s);
    let o = bin().args(["analyze-ml", "--scenario"]).arg(&sc).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error:"));
}

#[test]
fn missing_scenario_exits_two() {
    let o = bin().args(["falsify", "--scenario", "/nonexistent/s.json", "--out", "/tmp"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/nonexistent/s.json"));
}

fn falsify(sc: &Path, out: &Path, extra: &[&str]) -> Output {
    bin().args(["falsify", "--scenario"]).arg(sc).arg("--out").arg(out).args(extra).output().unwrap()
}

fn without_timestamp(path: &Path) -> Value {
    let mut v: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    v.as_object_mut().unwrap().remove("timestamp").expect("timestamp field");
    v
}

#[test]
fn falsify_writes_artifacts_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write_scenario(dir.path(), &small());
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));

    let o = falsify(&sc, &a, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("ML-driven counterexamples"));
    for f in ["report.json", "grid_plus.csv", "grid_minus.csv", "rou.csv", "ml_samples.csv", "cex_000.csv"] {
        assert!(a.join(f).is_file(), "missing {f}");
    }
    let report = without_timestamp(&a.join("report.json"));
    assert_eq!(report["schema"], "rou-falsify/1");
    assert!(!report["ml_counterexamples"].as_array().unwrap().is_empty());

    assert_eq!(falsify(&sc, &b, &[]).status.code(), Some(0));
    assert_eq!(falsify(&sc, &c, &["--jobs", "1"]).status.code(), Some(0));
    assert_eq!(without_timestamp(&b.join("report.json")), report);
    assert_eq!(without_timestamp(&c.join("report.json")), report);
    for f in ["grid_plus.csv", "rou.csv", "ml_samples.csv", "cex_000.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(c.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn falsify_seed_flag_overrides_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write_scenario(dir.path(), &small());
    let out = dir.path().join("o");
    assert_eq!(falsify(&sc, &out, &["--seed", "7"]).status.code(), Some(0));
    assert_eq!(without_timestamp(&out.join("report.json"))["seed"], 7);
}

#[test]
fn falsify_unwritable_out_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write_scenario(dir.path(), &small());
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = falsify(&sc, &blocker.join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("creating"));
}
