use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn lkhol(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_lkhol")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn report(args: &[&str], want_code: i32) -> Value {
    let (code, stdout, stderr) = lkhol(args);
    assert_eq!(code, want_code, "{args:?}\n{stderr}\n{stdout}");
    serde_json::from_str(&stdout).unwrap()
}

#[test]
fn catalog_lists_gk_families_with_dimensions() {
    let r = report(&["catalog", "--n", "1"], 0);
    let fams = r["result"]["families"].as_array().unwrap();
    let gk = fams.iter().find(|f| f["family"] == "GK").unwrap();
    let dims: Vec<u64> = gk["examples"].as_array().unwrap().iter().map(|e| e[1].as_u64().unwrap()).collect();
    // k = 0, u(1), C + u(1) on top of C x iR
    assert_eq!(dims, vec![3, 4, 6]);
    assert!(fams.iter().any(|f| f["family"] == "GK0PSI" || f["family"] == "GKL"));
}

#[test]
fn holonomy_of_f1_matches_gk() {
    let r = report(&["holonomy", "--potential", &fixture("f1.json"), "--expect", &fixture("gk.json")], 0);
    assert_eq!(r["verdict"], "verified");
    assert_eq!(r["result"]["match"]["family"], "GK");
    assert_eq!(r["result"]["same_span_as_expected"], true);
    assert_eq!(r["result"]["dim"], 6);
}

#[test]
fn holonomy_mismatch_exits_2() {
    let r = report(&["holonomy", "--potential", &fixture("f1.json"), "--expect", &fixture("gkjl.json")], 2);
    assert_eq!(r["verdict"], "mismatch");
}

#[test]
fn holonomy_from_descriptor() {
    let r = report(&["holonomy", "--algebra", &fixture("gkjl.json")], 0);
    assert_eq!(r["result"]["match"]["family"], "GKJL");
}

#[test]
fn ppwave_flags_agree() {
    let r = report(&["ppwave", "--metric", &fixture("f1.json")], 0);
    let rep = &r["result"]["report"];
    for k in ["cond1", "cond2", "cond3", "cond4"] {
        assert_eq!(rep[k], false, "{k}");
    }
    let r = report(&["ppwave", "--metric", &fixture("ppwave.json")], 0);
    let rep = &r["result"]["report"];
    for k in ["cond1", "cond2", "cond3", "cond4", "cond5_hint"] {
        assert_eq!(rep[k], true, "{k}");
    }
    assert!(rep["holonomy_dim"].as_u64().unwrap() > 0);
}

#[test]
fn berger_expectations() {
    let dir = tempfile::tempdir().unwrap();
    let yes = dir.path().join("yes.json");
    let no = dir.path().join("no.json");
    std::fs::write(&yes, "true").unwrap();
    std::fs::write(&no, "false").unwrap();
    let r = report(&["berger", "--algebra", &fixture("no_corner.json"), "--expect", no.to_str().unwrap()], 0);
    assert_eq!(r["result"]["is_berger"], false);
    report(&["berger", "--algebra", &fixture("no_corner.json"), "--expect", yes.to_str().unwrap()], 2);
    let r = report(&["berger", "--algebra", &fixture("gk.json")], 0);
    assert_eq!(r["result"]["is_berger"], true);
}

#[test]
fn symspace_writes_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let (code, stdout, _) = lkhol(&["symspace", "--family", "f", "--n", "2", "--m", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["result"]["report"]["jacobi"], true);
    assert_eq!(r["result"]["report"]["calabi_yau"], false);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn oriented_lines_variants() {
    let r = report(&["validate", "--metric", &fixture("oriented_lines.json")], 0);
    assert_eq!(r["result"]["passed"], true);
    let r = report(&["validate", "--metric", &fixture("oriented_lines.json"), "--variant", "literal"], 2);
    assert!(r["result"]["hermitian_defect"].as_f64().unwrap() > 1.0);
}

#[test]
fn input_errors_exit_1() {
    assert_eq!(lkhol(&["holonomy", "--potential", "/nonexistent.json"]).0, 1);
    assert_eq!(lkhol(&["classify", "--algebra", &fixture("gk.json"), "--trials", "3"]).0, 1);
    assert_eq!(lkhol(&["catalog", "--n", "1", "--tol", "-1"]).0, 1);
    assert_eq!(lkhol(&["symspace", "--family", "d", "--n", "2"]).0, 1);
    assert_eq!(lkhol(&["ppwave", "--metric", &fixture("gk.json")]).0, 1);
    assert_eq!(lkhol(&["frobnicate"]).0, 1);
}

#[test]
fn reports_are_deterministic_and_stamped() {
    let args = ["classify", "--algebra", &fixture("gk.json"), "--trials", "4", "--seed", "11"];
    let (_, a, _) = lkhol(&args);
    let (_, b, _) = lkhol(&args);
    assert_eq!(a, b);
    let hol = ["holonomy", "--potential", &fixture("f1.json")];
    assert_eq!(lkhol(&hol).1, lkhol(&hol).1);
    let r: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(r["conventions_digest"], lkhol::conventions::digest());
    assert_eq!(r["config"]["seed"], 11);
    assert_eq!(r["tolerances"]["user"], 1e-9);
}
